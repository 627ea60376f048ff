//! Adaptive allocation engine.
//!
//! Each item's difficulty is its empirical wrong-answer rate. Items in a
//! lecture are ranked from easiest to hardest and the next item is drawn
//! from a probability mass function over ranks whose mass slides toward the
//! hard end as the student's recent record improves. The student's grade is
//! the sum of +1 / -0.5 points over the last eight answers.
//!
//! Every state change goes through [`Engine::apply`] with an [`Event`], so
//! the live path and log replay share one code path.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::NodeId;
use crate::item_bank::{ItemBank, ItemError, QuestionId, QuestionStats, StatsEvent};

/// Number of most recent answers that count toward the grade.
pub const GRADE_WINDOW: usize = 8;
pub const CORRECT_POINTS: f64 = 1.0;
pub const WRONG_POINTS: f64 = -0.5;
/// Grade buckets run 0..=MAX_BUCKET.
pub const MAX_BUCKET: u8 = GRADE_WINDOW as u8;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StudentId(pub String);

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StudentId {
    fn from(s: &str) -> Self {
        StudentId(s.to_owned())
    }
}

/// Empirical difficulty in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Difficulty(f64);

impl Difficulty {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Difficulty(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationPolicy {
    /// Concentration of the rank kernel; larger means sharper curves.
    pub k: f64,
    /// Never serve the same item twice in a row when the lecture has more
    /// than one item.
    pub exclude_last_served: bool,
    /// Difficulty of an item nobody has answered yet.
    pub cold_start_difficulty: f64,
}

impl Default for AllocationPolicy {
    fn default() -> Self {
        AllocationPolicy { k: 8.0, exclude_last_served: true, cold_start_difficulty: 0.5 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("lecture {0} has no questions")]
    EmptyLecture(NodeId),
    #[error("grade bucket {0} outside 0..=8")]
    InvalidBucket(u8),
    #[error("item count must be at least 1")]
    InvalidItemCount,
    #[error("concentration k must be positive and finite")]
    InvalidPolicy,
    #[error("unknown question {0}")]
    UnknownQuestion(QuestionId),
    #[error("question {question} does not belong to lecture {lecture}")]
    QuestionNotInLecture { question: QuestionId, lecture: NodeId },
    #[error("no outstanding allocation of {0} for this student")]
    NoPriorAllocation(QuestionId),
    #[error("answer index {index} out of range for {len} answers")]
    AnswerIndexOutOfRange { index: usize, len: usize },
    #[error("event seq {got} does not follow {last}")]
    OrderingViolation { last: u64, got: u64 },
    #[error("points {points} inconsistent with correct = {correct}")]
    InconsistentPoints { correct: bool, points: f64 },
    #[error(transparent)]
    Item(#[from] ItemError),
}

/// `1 - correct/answered`, or the policy's cold-start value before any answer.
pub fn difficulty(stats: &QuestionStats, policy: &AllocationPolicy) -> Difficulty {
    if stats.times_answered == 0 {
        return Difficulty(policy.cold_start_difficulty.clamp(0.0, 1.0));
    }
    Difficulty(1.0 - stats.times_correct as f64 / stats.times_answered as f64)
}

/// Allocation probabilities over ranks `1..=m` (index 0 is the easiest item)
/// for a student in grade bucket `bucket`.
///
/// Rank `r` sits at `x = (r - 0.5) / m` and gets weight
/// `x^(a-1) (1-x)^(b-1)` with `a = 1 + k g/8`, `b = 1 + k (1 - g/8)`.
pub fn allocation_pmf(m: usize, bucket: u8, policy: &AllocationPolicy) -> Result<Vec<f64>, EngineError> {
    if bucket > MAX_BUCKET {
        return Err(EngineError::InvalidBucket(bucket));
    }
    if m < 1 {
        return Err(EngineError::InvalidItemCount);
    }
    if !(policy.k > 0.0 && policy.k.is_finite()) {
        return Err(EngineError::InvalidPolicy);
    }
    let g = f64::from(bucket) / f64::from(MAX_BUCKET);
    let a1 = policy.k * g;
    let b1 = policy.k * (1.0 - g);
    let mf = m as f64;
    // log-weights, shifted by their max before exponentiating
    let logw: Vec<f64> = (0..m)
        .map(|i| {
            let x = (i as f64 + 0.5) / mf;
            a1 * x.ln() + b1 * (1.0 - x).ln()
        })
        .collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question: QuestionId,
    pub correct: bool,
    pub points: f64,
    /// Sequence number of the answer event.
    pub seq: u64,
}

pub fn points_for(correct: bool) -> f64 {
    if correct {
        CORRECT_POINTS
    } else {
        WRONG_POINTS
    }
}

/// Grade over the last `GRADE_WINDOW` of `records`.
pub fn grade(records: &[AnswerRecord]) -> f64 {
    let start = records.len().saturating_sub(GRADE_WINDOW);
    records[start..].iter().map(|r| r.points).sum()
}

/// Correct answers among the last `GRADE_WINDOW` of `records`.
pub fn grade_bucket(records: &[AnswerRecord]) -> u8 {
    let start = records.len().saturating_sub(GRADE_WINDOW);
    records[start..].iter().filter(|r| r.correct).count() as u8
}

/// An allocation waiting for its answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outstanding {
    pub question: QuestionId,
    /// Seq of the allocation event; also seeds template rendering and
    /// answer-order shuffling for this allocation.
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentLectureState {
    pub student: StudentId,
    pub lecture: NodeId,
    pub history: Vec<AnswerRecord>,
    /// The last `GRADE_WINDOW` records, maintained incrementally.
    window: VecDeque<AnswerRecord>,
    pub last_served: Option<QuestionId>,
    pub outstanding: Option<Outstanding>,
}

impl StudentLectureState {
    pub fn new(student: StudentId, lecture: NodeId) -> Self {
        StudentLectureState {
            student,
            lecture,
            history: Vec::new(),
            window: VecDeque::with_capacity(GRADE_WINDOW),
            last_served: None,
            outstanding: None,
        }
    }

    pub fn push(&mut self, record: AnswerRecord) {
        if self.window.len() == GRADE_WINDOW {
            self.window.pop_front();
        }
        self.window.push_back(record.clone());
        self.history.push(record);
    }

    pub fn grade(&self) -> f64 {
        self.window.iter().map(|r| r.points).sum()
    }

    pub fn grade_bucket(&self) -> u8 {
        self.window.iter().filter(|r| r.correct).count() as u8
    }

    pub fn n_answered(&self) -> usize {
        self.history.len()
    }

    pub fn window(&self) -> impl Iterator<Item = &AnswerRecord> {
        self.window.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum EventKind {
    Allocated,
    Answered { correct: bool, points: f64, grade_after: f64 },
}

/// One engine state transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub student: StudentId,
    pub lecture: NodeId,
    pub question: QuestionId,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub event: Event,
    /// 1-based rank of the served item (1 = easiest).
    pub rank: usize,
    pub m: usize,
}

impl Allocation {
    pub fn question(&self) -> &QuestionId {
        &self.event.question
    }

    /// Seed for rendering and shuffling this allocation's question.
    pub fn presentation_seed(&self) -> u64 {
        self.event.seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnswerOutcome {
    pub correct: bool,
    pub points: f64,
    pub grade: f64,
    pub bucket: u8,
    pub n_answered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradeReport {
    pub grade: f64,
    pub bucket: u8,
    pub n_answered: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedItem {
    pub id: QuestionId,
    pub difficulty: Difficulty,
    pub stats: QuestionStats,
}

/// Everything that changes as students work: counters and per-student state.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSnapshot {
    pub stats: BTreeMap<QuestionId, QuestionStats>,
    pub students: BTreeMap<(StudentId, NodeId), StudentLectureState>,
    pub last_seq: u64,
}

#[derive(Debug, Error, PartialEq)]
#[error("corrupt log at seq {seq}: {source}")]
pub struct ReplayError {
    pub seq: u64,
    #[source]
    pub source: EngineError,
}

#[derive(Debug, Clone)]
pub struct Engine {
    bank: ItemBank,
    policy: AllocationPolicy,
    states: BTreeMap<(StudentId, NodeId), StudentLectureState>,
    last_seq: u64,
}

impl Engine {
    pub fn new(bank: ItemBank, policy: AllocationPolicy) -> Self {
        Engine { bank, policy, states: BTreeMap::new(), last_seq: 0 }
    }

    /// Rebuilds an engine by applying `events` on top of `bank`.
    pub fn replay<'a>(
        bank: ItemBank,
        policy: AllocationPolicy,
        events: impl IntoIterator<Item = &'a Event>,
    ) -> Result<Self, ReplayError> {
        let mut engine = Engine::new(bank, policy);
        for e in events {
            engine.apply(e).map_err(|source| ReplayError { seq: e.seq, source })?;
        }
        Ok(engine)
    }

    pub fn bank(&self) -> &ItemBank {
        &self.bank
    }

    pub fn bank_mut(&mut self) -> &mut ItemBank {
        &mut self.bank
    }

    pub fn policy(&self) -> &AllocationPolicy {
        &self.policy
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn state(&self, student: &StudentId, lecture: &NodeId) -> Option<&StudentLectureState> {
        self.states.get(&(student.clone(), lecture.clone()))
    }

    pub fn report(&self, student: &StudentId, lecture: &NodeId) -> GradeReport {
        match self.state(student, lecture) {
            Some(s) => GradeReport { grade: s.grade(), bucket: s.grade_bucket(), n_answered: s.n_answered() },
            None => GradeReport { grade: 0.0, bucket: 0, n_answered: 0 },
        }
    }

    pub fn snapshot(&self) -> EngineSnapshot {
        EngineSnapshot { stats: self.bank.all_stats().clone(), students: self.states.clone(), last_seq: self.last_seq }
    }

    pub fn difficulty_of(&self, id: &QuestionId) -> Option<Difficulty> {
        self.bank.stats(id).map(|s| difficulty(&s, &self.policy))
    }

    /// Lecture items from easiest to hardest; ties broken by ascending id.
    pub fn ranked(&self, lecture: &NodeId) -> Result<Vec<RankedItem>, EngineError> {
        let mut items: Vec<RankedItem> = self
            .bank
            .lecture_items(lecture)
            .into_iter()
            .map(|id| {
                let stats = self.bank.stats(&id).unwrap_or_default();
                RankedItem { difficulty: difficulty(&stats, &self.policy), id, stats }
            })
            .collect();
        if items.is_empty() {
            return Err(EngineError::EmptyLecture(lecture.clone()));
        }
        items.sort_by(|a, b| a.difficulty.0.total_cmp(&b.difficulty.0).then_with(|| a.id.cmp(&b.id)));
        Ok(items)
    }

    pub fn rank_items(&self, lecture: &NodeId) -> Result<Vec<QuestionId>, EngineError> {
        Ok(self.ranked(lecture)?.into_iter().map(|r| r.id).collect())
    }

    /// Chooses the next item without changing any state.
    pub fn plan_next(&self, student: &StudentId, lecture: &NodeId, seed: u64) -> Result<Allocation, EngineError> {
        let ranking = self.rank_items(lecture)?;
        let m = ranking.len();
        let state = self.state(student, lecture);
        let bucket = state.map_or(0, |s| s.grade_bucket());
        let mut pmf = allocation_pmf(m, bucket, &self.policy)?;
        if self.policy.exclude_last_served && m >= 2 {
            if let Some(last) = state.and_then(|s| s.last_served.as_ref()) {
                if let Some(pos) = ranking.iter().position(|q| q == last) {
                    pmf[pos] = 0.0;
                }
            }
        }
        // WeightedIndex normalizes, so zeroing one entry renormalizes the rest.
        let dist = WeightedIndex::new(&pmf).map_err(|_| EngineError::InvalidPolicy)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = dist.sample(&mut rng);
        Ok(Allocation {
            event: Event {
                seq: self.last_seq + 1,
                student: student.clone(),
                lecture: lecture.clone(),
                question: ranking[idx].clone(),
                kind: EventKind::Allocated,
            },
            rank: idx + 1,
            m,
        })
    }

    /// Draws and records the next allocation for a student.
    pub fn next_question(
        &mut self,
        student: &StudentId,
        lecture: &NodeId,
        seed: u64,
    ) -> Result<Allocation, EngineError> {
        let alloc = self.plan_next(student, lecture, seed)?;
        self.apply(&alloc.event)?;
        Ok(alloc)
    }

    /// Judges an answer given as a canonical answer index, without changing
    /// any state.
    pub fn plan_answer(
        &self,
        student: &StudentId,
        lecture: &NodeId,
        question: &QuestionId,
        canonical_index: usize,
    ) -> Result<Event, EngineError> {
        let item = self.bank.get(question).ok_or_else(|| EngineError::UnknownQuestion(question.clone()))?;
        if item.lecture() != lecture {
            return Err(EngineError::QuestionNotInLecture { question: question.clone(), lecture: lecture.clone() });
        }
        let state = self.state(student, lecture);
        let outstanding = state
            .and_then(|s| s.outstanding.as_ref())
            .filter(|o| &o.question == question)
            .ok_or_else(|| EngineError::NoPriorAllocation(question.clone()))?;
        let rendered = self.bank.render(question, outstanding.seq)?;
        if canonical_index >= rendered.answers.len() {
            return Err(EngineError::AnswerIndexOutOfRange { index: canonical_index, len: rendered.answers.len() });
        }
        let correct = rendered.is_correct(canonical_index);
        let points = points_for(correct);
        let seq = self.last_seq + 1;
        let mut window: Vec<AnswerRecord> = state.map(|s| s.window().cloned().collect()).unwrap_or_default();
        window.push(AnswerRecord { question: question.clone(), correct, points, seq });
        Ok(Event {
            seq,
            student: student.clone(),
            lecture: lecture.clone(),
            question: question.clone(),
            kind: EventKind::Answered { correct, points, grade_after: grade(&window) },
        })
    }

    pub fn record_answer(
        &mut self,
        student: &StudentId,
        lecture: &NodeId,
        question: &QuestionId,
        canonical_index: usize,
    ) -> Result<AnswerOutcome, EngineError> {
        let event = self.plan_answer(student, lecture, question, canonical_index)?;
        self.apply(&event)?;
        let report = self.report(student, lecture);
        let EventKind::Answered { correct, points, .. } = event.kind else {
            unreachable!("plan_answer yields answer events")
        };
        Ok(AnswerOutcome { correct, points, grade: report.grade, bucket: report.bucket, n_answered: report.n_answered })
    }

    /// Applies one event. Validates it fully before mutating anything.
    pub fn apply(&mut self, event: &Event) -> Result<(), EngineError> {
        if event.seq <= self.last_seq {
            return Err(EngineError::OrderingViolation { last: self.last_seq, got: event.seq });
        }
        let item =
            self.bank.get(&event.question).ok_or_else(|| EngineError::UnknownQuestion(event.question.clone()))?;
        if item.lecture() != &event.lecture {
            return Err(EngineError::QuestionNotInLecture {
                question: event.question.clone(),
                lecture: event.lecture.clone(),
            });
        }
        let key = (event.student.clone(), event.lecture.clone());
        match &event.kind {
            EventKind::Allocated => {
                self.bank.bump_stats(&event.question, StatsEvent::Allocated)?;
                let state = self
                    .states
                    .entry(key)
                    .or_insert_with(|| StudentLectureState::new(event.student.clone(), event.lecture.clone()));
                state.last_served = Some(event.question.clone());
                state.outstanding = Some(Outstanding { question: event.question.clone(), seq: event.seq });
            }
            EventKind::Answered { correct, points, .. } => {
                if *points != points_for(*correct) {
                    return Err(EngineError::InconsistentPoints { correct: *correct, points: *points });
                }
                let pending = self
                    .states
                    .get(&key)
                    .and_then(|s| s.outstanding.as_ref())
                    .is_some_and(|o| o.question == event.question);
                if !pending {
                    return Err(EngineError::NoPriorAllocation(event.question.clone()));
                }
                let stats_event = if *correct { StatsEvent::AnsweredCorrect } else { StatsEvent::AnsweredWrong };
                self.bank.bump_stats(&event.question, stats_event)?;
                let state = self.states.get_mut(&key).expect("checked above");
                state.outstanding = None;
                state.push(AnswerRecord {
                    question: event.question.clone(),
                    correct: *correct,
                    points: *points,
                    seq: event.seq,
                });
            }
        }
        self.last_seq = event.seq;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::{ContentTree, NodeKind};
    use crate::item_bank::Answer;

    fn rec(correct: bool, seq: u64) -> AnswerRecord {
        AnswerRecord { question: "q".into(), correct, points: points_for(correct), seq }
    }

    fn records(pattern: &str) -> Vec<AnswerRecord> {
        pattern.chars().enumerate().map(|(i, c)| rec(c == 'C', i as u64 + 1)).collect()
    }

    fn lecture_with(n: usize) -> (Engine, NodeId) {
        let mut c = ContentTree::new();
        let d = c.add_node(None, NodeKind::Department, "D", "").unwrap();
        let co = c.add_node(Some(&d), NodeKind::Course, "C", "").unwrap();
        let t = c.add_node(Some(&co), NodeKind::Tutorial, "T", "").unwrap();
        let l = c.add_node(Some(&t), NodeKind::Lecture, "L", "").unwrap();
        let mut bank = ItemBank::new();
        for i in 0..n {
            bank.add_question(
                &c,
                &l,
                &format!("question {i}"),
                vec![Answer::new("right", true), Answer::new("wrong", false)],
                false,
            )
            .unwrap();
        }
        (Engine::new(bank, AllocationPolicy::default()), l)
    }

    #[test]
    fn difficulty_examples() {
        let p = AllocationPolicy::default();
        let d = |a, c| difficulty(&QuestionStats::new(a, a, c).unwrap(), &p).value();
        assert!((d(10, 7) - 0.3).abs() < 1e-15);
        assert_eq!(d(10, 10), 0.0);
        assert_eq!(d(0, 0), 0.5);
        assert_eq!(Difficulty::new(1.5), None);
    }

    #[test]
    fn pmf_degenerate_and_symmetric() {
        let p = AllocationPolicy::default();
        for g in 0..=8 {
            assert_eq!(allocation_pmf(1, g, &p).unwrap(), vec![1.0]);
        }
        let half = allocation_pmf(2, 4, &p).unwrap();
        assert!((half[0] - 0.5).abs() < 1e-15 && (half[1] - 0.5).abs() < 1e-15);
        assert_eq!(allocation_pmf(3, 9, &p), Err(EngineError::InvalidBucket(9)));
        assert_eq!(allocation_pmf(0, 2, &p), Err(EngineError::InvalidItemCount));
        let bad = AllocationPolicy { k: 0.0, ..p };
        assert_eq!(allocation_pmf(3, 2, &bad), Err(EngineError::InvalidPolicy));
    }

    #[test]
    fn pmf_top_bucket_two_items() {
        // 0.25^8 / (0.25^8 + 0.75^8) = 1 / (1 + 3^8) = 1/6562
        let p = allocation_pmf(2, 8, &AllocationPolicy::default()).unwrap();
        assert!((p[0] - 1.0 / 6562.0).abs() < 1e-15);
        assert!((p[1] - 6561.0 / 6562.0).abs() < 1e-15);
    }

    #[test]
    fn grade_examples() {
        assert_eq!(grade(&records("CCCCCCCC")), 8.0);
        assert_eq!(grade(&records("CCWCCCWC")), 5.0);
        assert_eq!(grade_bucket(&records("")), 0);
        assert_eq!(grade_bucket(&records("CCCCCCCC")), 8);
        assert_eq!(grade_bucket(&records("CWC")), 2);
        let long = records("WWWWCWCWCCWWCCCWCWWC");
        assert_eq!(grade(&long), grade(&long[12..]));
        assert_eq!(grade_bucket(&long), grade_bucket(&long[12..]));
    }

    #[test]
    fn incremental_window_matches_suffix() {
        let all = records("WCCCCCCCC");
        let mut s = StudentLectureState::new("s".into(), "l".into());
        for r in &all {
            s.push(r.clone());
        }
        assert_eq!(s.grade(), 8.0);
        assert_eq!(s.grade(), grade(&all));
    }

    #[test]
    fn ranking_sorts_with_id_tiebreak() {
        let (mut e, l) = lecture_with(3);
        let ids = e.bank().lecture_items(&l);
        let set = |e: &mut Engine, i: usize, a, c| {
            e.bank_mut().set_stats(&ids[i], QuestionStats::new(a, a, c).unwrap()).unwrap();
        };
        set(&mut e, 0, 10, 8);
        set(&mut e, 1, 10, 5);
        set(&mut e, 2, 10, 9);
        assert_eq!(e.rank_items(&l).unwrap(), vec![ids[2].clone(), ids[0].clone(), ids[1].clone()]);
        set(&mut e, 1, 10, 8);
        set(&mut e, 2, 10, 8);
        assert_eq!(e.rank_items(&l).unwrap(), ids);
    }

    #[test]
    fn empty_lecture() {
        let (mut e, l) = lecture_with(0);
        assert_eq!(e.next_question(&"s".into(), &l, 1), Err(EngineError::EmptyLecture(l.clone())));
    }

    #[test]
    fn single_item_always_served() {
        let (mut e, l) = lecture_with(1);
        let s: StudentId = "s".into();
        let only = e.bank().lecture_items(&l)[0].clone();
        for seed in 0..20 {
            let a = e.next_question(&s, &l, seed).unwrap();
            assert_eq!(a.question(), &only);
        }
    }

    #[test]
    fn excludes_last_served() {
        let (mut e, l) = lecture_with(2);
        let s: StudentId = "s".into();
        let mut prev = e.next_question(&s, &l, 0).unwrap().question().clone();
        for seed in 1..50 {
            let q = e.next_question(&s, &l, seed).unwrap().question().clone();
            assert_ne!(q, prev);
            prev = q;
        }
    }

    #[test]
    fn answer_flow_and_errors() {
        let (mut e, l) = lecture_with(3);
        let s: StudentId = "s".into();
        let q = e.bank().lecture_items(&l)[0].clone();
        assert_eq!(e.record_answer(&s, &l, &q, 0), Err(EngineError::NoPriorAllocation(q.clone())));
        let a = e.next_question(&s, &l, 3).unwrap();
        let q = a.question().clone();
        assert!(matches!(e.record_answer(&s, &l, &q, 5), Err(EngineError::AnswerIndexOutOfRange { index: 5, len: 2 })));
        assert!(matches!(e.record_answer(&s, &"other".into(), &q, 0), Err(EngineError::QuestionNotInLecture { .. })));
        let out = e.record_answer(&s, &l, &q, 1).unwrap();
        assert_eq!((out.correct, out.points, out.grade, out.bucket), (false, -0.5, -0.5, 0));
        assert_eq!(e.record_answer(&s, &l, &q, 0), Err(EngineError::NoPriorAllocation(q.clone())));
        assert_eq!(e.bank().stats(&q).unwrap(), QuestionStats::new(1, 1, 0).unwrap());
    }

    #[test]
    fn correct_answer_after_four_points() {
        let (mut e, l) = lecture_with(5);
        let s: StudentId = "s".into();
        for seed in 0..4 {
            let q = e.next_question(&s, &l, seed).unwrap().question().clone();
            e.record_answer(&s, &l, &q, 0).unwrap();
        }
        assert_eq!(e.report(&s, &l).grade, 4.0);
        let q = e.next_question(&s, &l, 9).unwrap().question().clone();
        let out = e.record_answer(&s, &l, &q, 0).unwrap();
        assert_eq!((out.points, out.grade), (1.0, 5.0));
    }

    #[test]
    fn window_slides_on_ninth_answer() {
        let (mut e, l) = lecture_with(4);
        let s: StudentId = "s".into();
        for (i, correct) in [false, true, true, true, true, true, true, true, true].iter().enumerate() {
            let q = e.next_question(&s, &l, i as u64).unwrap().question().clone();
            e.record_answer(&s, &l, &q, if *correct { 0 } else { 1 }).unwrap();
        }
        let r = e.report(&s, &l);
        assert_eq!((r.grade, r.bucket, r.n_answered), (8.0, 8, 9));
    }

    #[test]
    fn same_seed_same_question() {
        let (e, l) = lecture_with(30);
        let s: StudentId = "s".into();
        assert_eq!(e.plan_next(&s, &l, 77).unwrap(), e.plan_next(&s, &l, 77).unwrap());
    }

    #[test]
    fn apply_rejects_bad_events() {
        let (mut e, l) = lecture_with(2);
        let q = e.bank().lecture_items(&l)[0].clone();
        let ev = |seq, kind| Event { seq, student: "s".into(), lecture: l.clone(), question: q.clone(), kind };
        e.apply(&ev(1, EventKind::Allocated)).unwrap();
        assert_eq!(e.apply(&ev(1, EventKind::Allocated)), Err(EngineError::OrderingViolation { last: 1, got: 1 }));
        let bad = EventKind::Answered { correct: true, points: -0.5, grade_after: 0.0 };
        assert!(matches!(e.apply(&ev(2, bad)), Err(EngineError::InconsistentPoints { .. })));
        // rejected events leave no trace
        assert_eq!(e.last_seq(), 1);
        assert_eq!(e.bank().stats(&q).unwrap(), QuestionStats::new(1, 0, 0).unwrap());
    }
}
