#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tutorweb::content::{ContentTree, NodeId, NodeKind};
use tutorweb::engine::{AllocationPolicy, GradeReport, StudentId};
use tutorweb::item_bank::{Answer, ItemBank};
use tutorweb::service::{AnswerRequest, Roster, RosterEntry, ServiceState};

pub fn token(student: &str) -> String {
    format!("tok-{student}")
}

pub fn roster(students: &[&str]) -> Roster {
    Roster {
        admin_key: Some("admin-secret".into()),
        students: students
            .iter()
            .map(|s| RosterEntry { id: StudentId::from(*s), token: token(s), consent: true })
            .collect(),
    }
}

/// A department/course/tutorial/lecture chain with `n` four-answer
/// questions, plus an empty second lecture.
pub fn quiz_content(n: usize) -> (ContentTree, ItemBank, NodeId, NodeId) {
    let mut c = ContentTree::new();
    let d = c.add_node(None, NodeKind::Department, "Mathematics", "").unwrap();
    let co = c.add_node(Some(&d), NodeKind::Course, "Statistics", "").unwrap();
    let t = c.add_node(Some(&co), NodeKind::Tutorial, "Probability", "").unwrap();
    let l = c.add_node(Some(&t), NodeKind::Lecture, "Discrete distributions", "").unwrap();
    let empty = c.add_node(Some(&t), NodeKind::Lecture, "Continuous distributions", "").unwrap();
    let mut b = ItemBank::new();
    for i in 0..n {
        b.add_question(
            &c,
            &l,
            &format!("Question {i}"),
            vec![
                Answer::new(format!("right {i}"), true),
                Answer::new(format!("wrong a {i}"), false),
                Answer::new(format!("wrong b {i}"), false),
                Answer::new(format!("wrong c {i}"), false),
            ],
            true,
        )
        .unwrap();
    }
    (c, b, l, empty)
}

pub fn service(n_items: usize, students: &[&str], seed: u64) -> (ServiceState, NodeId) {
    let (c, b, l, _) = quiz_content(n_items);
    (ServiceState::in_memory(c, b, roster(students), AllocationPolicy::default(), seed), l)
}

/// Runs `n` next/answer rounds with random picks. Returns the grade report
/// after each answer together with the log length at that point.
pub fn random_session(
    state: &mut ServiceState,
    student: &str,
    lecture: &NodeId,
    n: usize,
    seed: u64,
) -> Vec<(usize, GradeReport)> {
    let tok = token(student);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let view = state.next_question(Some(&tok), &lecture.0).unwrap();
        let answer_index = rng.random_range(0..view.answers.len());
        state.submit_answer(Some(&tok), &lecture.0, &AnswerRequest { question: view.question, answer_index }).unwrap();
        let report = state.grade(Some(&tok), &lecture.0).unwrap();
        out.push((state.log().len(), report));
    }
    out
}
