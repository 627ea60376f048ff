mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tutorweb::engine::{AllocationPolicy, EventKind, StudentId};
use tutorweb::log::{replay_log, AnswerLog, LogEntry, LogError};
use tutorweb::service::{AnswerRequest, ServiceState};

const STUDENTS: [&str; 3] = ["ann", "bo", "cy"];

fn live_run(seed: u64) -> (ServiceState, Vec<(usize, &'static str, tutorweb::engine::GradeReport)>) {
    let (mut state, lecture) = common::service(12, &STUDENTS, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::new();
    for _ in 0..20 {
        let who = STUDENTS[rng.random_range(0..STUDENTS.len())];
        for (len, report) in common::random_session(&mut state, who, &lecture, rng.random_range(1..4), rng.random()) {
            trace.push((len, who, report));
        }
    }
    (state, trace)
}

fn fresh_bank() -> tutorweb::item_bank::ItemBank {
    common::quiz_content(12).1
}

#[test]
fn empty_log_gives_empty_state() {
    let engine = replay_log(&[], fresh_bank(), AllocationPolicy::default()).unwrap();
    assert_eq!(engine.last_seq(), 0);
    assert!(engine.snapshot().students.is_empty());
    assert!(engine.bank().all_stats().values().all(|s| *s == Default::default()));
}

#[test]
fn replay_matches_live_at_every_prefix() {
    let (state, trace) = live_run(3);
    let lecture = common::quiz_content(12).2;
    let entries = state.log().entries();
    let full = replay_log(entries, fresh_bank(), AllocationPolicy::default()).unwrap();
    assert_eq!(full.snapshot(), state.engine().snapshot());
    for (len, who, report) in trace {
        let engine = replay_log(&entries[..len], fresh_bank(), AllocationPolicy::default()).unwrap();
        assert_eq!(engine.report(&StudentId::from(who), &lecture), report);
    }
}

#[test]
fn file_log_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("answers.log");
    let (state, _) = live_run(8);
    {
        let mut log = AnswerLog::open(&path).unwrap();
        for e in state.log().entries() {
            log.append(e.clone()).unwrap();
        }
    }
    let reopened = AnswerLog::open(&path).unwrap();
    assert_eq!(reopened.entries(), state.log().entries());
    let engine = replay_log(reopened.entries(), fresh_bank(), AllocationPolicy::default()).unwrap();
    assert_eq!(engine.snapshot(), state.engine().snapshot());
}

#[test]
fn truncated_log_replays_to_a_consistent_prefix() {
    let (state, _) = live_run(21);
    let text: String = state.log().entries().iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("answers.log");
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let boundaries: Vec<usize> = text.match_indices('\n').map(|(i, _)| i + 1).collect();
    for _ in 0..25 {
        let k = rng.random_range(0..boundaries.len());
        let cut = boundaries[k];
        // a torn write: the start of the next line without its newline
        let torn = boundaries.get(k + 1).map_or("", |&end| &text[cut..(cut + 17).min(end - 1)]);
        std::fs::write(&path, format!("{}{}", &text[..cut], torn)).unwrap();
        let log = AnswerLog::open(&path).unwrap();
        assert_eq!(log.len(), k + 1);
        assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, cut);
        let engine = replay_log(log.entries(), fresh_bank(), AllocationPolicy::default()).unwrap();
        assert!(engine.bank().all_stats().values().all(|s| s.is_valid()));
        let prefix = replay_log(&state.log().entries()[..=k], fresh_bank(), AllocationPolicy::default()).unwrap();
        assert_eq!(engine.snapshot(), prefix.snapshot());
        drop(log);
        std::fs::remove_file(&path).unwrap();
    }
}

#[test]
fn flipped_answer_changes_counters() {
    let (state, _) = live_run(5);
    let mut entries: Vec<LogEntry> = state.log().entries().to_vec();
    let i = entries.iter().position(|e| matches!(e.kind, EventKind::Answered { .. })).unwrap();
    let EventKind::Answered { correct, grade_after, .. } = entries[i].kind else { unreachable!() };
    entries[i].kind =
        EventKind::Answered { correct: !correct, points: tutorweb::engine::points_for(!correct), grade_after };
    let engine = replay_log(&entries, fresh_bank(), AllocationPolicy::default()).unwrap();
    assert_ne!(engine.bank().all_stats(), state.engine().bank().all_stats());

    // flipping only the flag leaves the points inconsistent
    entries[i].kind = EventKind::Answered { correct, points: tutorweb::engine::points_for(!correct), grade_after };
    match replay_log(&entries, fresh_bank(), AllocationPolicy::default()) {
        Err(LogError::CorruptLog { seq, .. }) => assert_eq!(seq, entries[i].seq),
        other => panic!("expected a corrupt log, got {other:?}"),
    }
}

#[test]
fn restarted_service_answers_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (c, b, lecture, _) = common::quiz_content(12);
    tutorweb::document::ContentDocument::export(&c, &b)
        .save(&dir.path().join(tutorweb::service::CONTENT_FILE))
        .unwrap();
    std::fs::write(
        dir.path().join(tutorweb::service::ROSTER_FILE),
        serde_json::to_vec(&common::roster(&STUDENTS)).unwrap(),
    )
    .unwrap();
    let policy = AllocationPolicy::default();
    // the twin never crashes
    let mut twin = ServiceState::in_memory(c, b, common::roster(&STUDENTS), policy, 4);
    let mut disk = ServiceState::open(dir.path(), policy, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for step in 0..90 {
        let who = STUDENTS[rng.random_range(0..3)];
        let tok = common::token(who);
        let pending = twin.engine().state(&StudentId::from(who), &lecture).and_then(|s| s.outstanding.clone());
        match pending {
            Some(o) if rng.random_bool(0.7) => {
                let req = AnswerRequest { question: o.question, answer_index: rng.random_range(0..4) };
                let a = twin.submit_answer(Some(&tok), &lecture.0, &req).unwrap();
                assert_eq!(disk.submit_answer(Some(&tok), &lecture.0, &req).unwrap(), a);
            }
            _ => {
                let v = twin.next_question(Some(&tok), &lecture.0).unwrap();
                assert_eq!(disk.next_question(Some(&tok), &lecture.0).unwrap(), v);
            }
        }
        if step % 7 == 3 {
            drop(disk);
            disk = ServiceState::open(dir.path(), policy, 4).unwrap();
            assert_eq!(disk.engine().snapshot(), twin.engine().snapshot());
            for s in STUDENTS {
                let t = common::token(s);
                assert_eq!(disk.grade(Some(&t), &lecture.0).unwrap(), twin.grade(Some(&t), &lecture.0).unwrap());
            }
        }
    }
}
