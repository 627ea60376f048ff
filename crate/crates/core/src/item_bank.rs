//! Question bank: fixed questions, parameterized templates, answer-order
//! shuffling and the per-item allocation/answer counters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{ContentTree, NodeId, NodeKind, TextFormat};
use crate::expr::{format_rational, rational_from_f64, Expr, ExprError};

/// Redraws allowed when a template expression divides by zero.
pub const MAX_REDRAWS: usize = 100;

/// Digits kept when rendering non-integer template values.
pub const DECIMAL_PLACES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionId(pub String);

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QuestionId {
    fn from(s: &str) -> Self {
        QuestionId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub correct: bool,
}

impl Answer {
    pub fn new(text: impl Into<String>, correct: bool) -> Self {
        Answer { text: text.into(), correct }
    }
}

/// A concrete multiple-choice question with exactly one correct answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    pub lecture: NodeId,
    pub stem: String,
    #[serde(default)]
    pub format: TextFormat,
    #[serde(default)]
    pub shuffle: bool,
    pub answers: Vec<Answer>,
}

impl Question {
    /// Canonical index of the correct answer.
    pub fn correct_index(&self) -> usize {
        self.answers.iter().position(|a| a.correct).unwrap_or(0)
    }

    pub fn is_correct(&self, canonical_index: usize) -> bool {
        self.answers.get(canonical_index).is_some_and(|a| a.correct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerExpression {
    pub expression: String,
    pub correct: bool,
}

fn default_true() -> bool {
    true
}

/// A question whose numbers are drawn from per-placeholder grids.
///
/// Placeholders appear in the stem as `{name}` and in the answer
/// expressions as bare identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub id: QuestionId,
    pub lecture: NodeId,
    pub stem_template: String,
    #[serde(default)]
    pub format: TextFormat,
    #[serde(default = "default_true")]
    pub shuffle: bool,
    pub parameter_specs: BTreeMap<String, ParamSpec>,
    pub answer_expressions: Vec<AnswerExpression>,
}

/// Allocation and answer counters for one item.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionStats {
    pub times_allocated: u64,
    pub times_answered: u64,
    pub times_correct: u64,
}

impl QuestionStats {
    pub fn new(allocated: u64, answered: u64, correct: u64) -> Option<Self> {
        (correct <= answered && answered <= allocated).then_some(QuestionStats {
            times_allocated: allocated,
            times_answered: answered,
            times_correct: correct,
        })
    }

    pub fn is_valid(&self) -> bool {
        self.times_correct <= self.times_answered && self.times_answered <= self.times_allocated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsEvent {
    Allocated,
    AnsweredCorrect,
    AnsweredWrong,
}

#[derive(Debug, Error, PartialEq)]
pub enum ItemError {
    #[error("unknown lecture {0}")]
    UnknownLecture(NodeId),
    #[error("unknown question {0}")]
    UnknownQuestion(QuestionId),
    #[error("unknown template {0}")]
    UnknownTemplate(QuestionId),
    #[error("duplicate item id {0}")]
    DuplicateId(QuestionId),
    #[error("question needs at least two answers")]
    TooFewAnswers,
    #[error("no answer is marked correct")]
    NoCorrectAnswer,
    #[error("more than one answer is marked correct")]
    MultipleCorrectAnswers,
    #[error("answer recorded without a matching allocation")]
    AnswerWithoutAllocation,
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("expression error: {0}")]
    ExpressionError(ExprError),
}

fn check_answers(flags: impl Iterator<Item = bool>) -> Result<(), ItemError> {
    let (mut n, mut correct) = (0usize, 0usize);
    for f in flags {
        n += 1;
        correct += f as usize;
    }
    if n < 2 {
        return Err(ItemError::TooFewAnswers);
    }
    match correct {
        0 => Err(ItemError::NoCorrectAnswer),
        1 => Ok(()),
        _ => Err(ItemError::MultipleCorrectAnswers),
    }
}

/// Compiled template: parsed expressions and exact parameter grids.
struct CompiledTemplate {
    grids: Vec<(String, BigRational, BigRational, usize)>,
    exprs: Vec<(Expr, bool)>,
}

fn stem_placeholders(stem: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut rest = stem;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = after[..close].trim();
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.insert(name.to_owned());
                }
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}

impl QuestionTemplate {
    fn compile(&self) -> Result<CompiledTemplate, ItemError> {
        check_answers(self.answer_expressions.iter().map(|a| a.correct))?;
        let mut exprs = Vec::with_capacity(self.answer_expressions.len());
        let mut used = stem_placeholders(&self.stem_template);
        for a in &self.answer_expressions {
            let e = Expr::parse(&a.expression).map_err(ItemError::ExpressionError)?;
            used.extend(e.variables());
            exprs.push((e, a.correct));
        }
        if let Some(missing) = used.iter().find(|p| !self.parameter_specs.contains_key(*p)) {
            return Err(ItemError::InvalidTemplate(format!("placeholder `{missing}` has no parameter spec")));
        }
        let mut grids = Vec::with_capacity(self.parameter_specs.len());
        for (name, spec) in &self.parameter_specs {
            let bad = || ItemError::InvalidTemplate(format!("parameter `{name}` has a non-finite bound"));
            let min = rational_from_f64(spec.min).ok_or_else(bad)?;
            let max = rational_from_f64(spec.max).ok_or_else(bad)?;
            let step = rational_from_f64(spec.step).ok_or_else(bad)?;
            if min > max {
                return Err(ItemError::InvalidTemplate(format!("parameter `{name}` has min > max")));
            }
            if !step.is_positive() {
                return Err(ItemError::InvalidTemplate(format!("parameter `{name}` has step <= 0")));
            }
            let span: BigInt = ((&max - &min) / &step).floor().to_integer();
            let points = span
                .to_usize()
                .and_then(|s| s.checked_add(1))
                .ok_or_else(|| ItemError::InvalidTemplate(format!("parameter `{name}` grid too large")))?;
            grids.push((name.clone(), min, step, points));
        }
        Ok(CompiledTemplate { grids, exprs })
    }

    pub fn validate(&self) -> Result<(), ItemError> {
        self.compile().map(|_| ())
    }

    /// Draws concrete values and evaluates the answers. The same seed
    /// always yields an identical question.
    pub fn instantiate(&self, seed: u64) -> Result<Question, ItemError> {
        let compiled = self.compile()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last_err = ExprError::DivisionByZero;
        for _ in 0..MAX_REDRAWS {
            let env: BTreeMap<String, BigRational> = compiled
                .grids
                .iter()
                .map(|(name, min, step, points)| {
                    let i = rng.random_range(0..*points);
                    (name.clone(), min + step * BigRational::from_integer(BigInt::from(i)))
                })
                .collect();
            let values: Result<Vec<_>, _> =
                compiled.exprs.iter().map(|(e, correct)| e.eval(&env).map(|v| (v, *correct))).collect();
            match values {
                Ok(values) => {
                    let mut stem = self.stem_template.clone();
                    for (name, v) in &env {
                        stem = stem.replace(&format!("{{{name}}}"), &format_rational(v, DECIMAL_PLACES));
                    }
                    return Ok(Question {
                        id: self.id.clone(),
                        lecture: self.lecture.clone(),
                        stem,
                        format: self.format,
                        shuffle: self.shuffle,
                        answers: values
                            .into_iter()
                            .map(|(v, correct)| Answer::new(format_rational(&v, DECIMAL_PLACES), correct))
                            .collect(),
                    });
                }
                Err(ExprError::DivisionByZero) => continue,
                Err(e) => {
                    last_err = e;
                    break;
                }
            }
        }
        Err(ItemError::ExpressionError(last_err))
    }

    /// Draws only the placeholder values, in name order, as f64.
    pub fn draw_values(&self, seed: u64) -> Result<BTreeMap<String, f64>, ItemError> {
        let compiled = self.compile()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(compiled
            .grids
            .iter()
            .map(|(name, min, step, points)| {
                let i = rng.random_range(0..*points);
                let v = min + step * BigRational::from_integer(BigInt::from(i));
                (name.clone(), crate::expr::to_f64(&v))
            })
            .collect())
    }
}

/// Order in which answers are shown. `result[k]` is the canonical index of
/// the answer displayed at position `k`.
pub fn presented_order(question: &Question, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..question.answers.len()).collect();
    if question.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    order
}

/// A bank entry: either a fixed question or a template rendered per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Item {
    Fixed(Question),
    Template(QuestionTemplate),
}

impl Item {
    pub fn id(&self) -> &QuestionId {
        match self {
            Item::Fixed(q) => &q.id,
            Item::Template(t) => &t.id,
        }
    }

    pub fn lecture(&self) -> &NodeId {
        match self {
            Item::Fixed(q) => &q.lecture,
            Item::Template(t) => &t.lecture,
        }
    }

    fn validate(&self) -> Result<(), ItemError> {
        match self {
            Item::Fixed(q) => check_answers(q.answers.iter().map(|a| a.correct)),
            Item::Template(t) => t.validate(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ItemBank {
    items: BTreeMap<QuestionId, Item>,
    by_lecture: BTreeMap<NodeId, BTreeSet<QuestionId>>,
    stats: BTreeMap<QuestionId, QuestionStats>,
    next_id: u64,
}

impl ItemBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.items.values()
    }

    pub fn get(&self, id: &QuestionId) -> Option<&Item> {
        self.items.get(id)
    }

    /// Item ids of a lecture in ascending id order.
    pub fn lecture_items(&self, lecture: &NodeId) -> Vec<QuestionId> {
        self.by_lecture.get(lecture).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }

    fn check_lecture(content: &ContentTree, lecture: &NodeId) -> Result<(), ItemError> {
        match content.get(lecture) {
            Some(n) if n.kind == NodeKind::Lecture => Ok(()),
            _ => Err(ItemError::UnknownLecture(lecture.clone())),
        }
    }

    /// Adds a fixed question under a generated id.
    pub fn add_question(
        &mut self,
        content: &ContentTree,
        lecture: &NodeId,
        stem: &str,
        answers: Vec<Answer>,
        shuffle: bool,
    ) -> Result<QuestionId, ItemError> {
        let id = loop {
            self.next_id += 1;
            let candidate = QuestionId(format!("q{:05}", self.next_id));
            if !self.items.contains_key(&candidate) {
                break candidate;
            }
        };
        self.insert(
            content,
            Item::Fixed(Question {
                id: id.clone(),
                lecture: lecture.clone(),
                stem: stem.to_owned(),
                format: TextFormat::Plain,
                shuffle,
                answers,
            }),
        )?;
        Ok(id)
    }

    /// Inserts an item under its own id with zeroed counters.
    pub fn insert(&mut self, content: &ContentTree, item: Item) -> Result<(), ItemError> {
        Self::check_lecture(content, item.lecture())?;
        item.validate()?;
        let id = item.id().clone();
        if self.items.contains_key(&id) {
            return Err(ItemError::DuplicateId(id));
        }
        self.by_lecture.entry(item.lecture().clone()).or_default().insert(id.clone());
        self.stats.insert(id.clone(), QuestionStats::default());
        self.items.insert(id, item);
        Ok(())
    }

    pub fn instantiate(&self, template: &QuestionId, seed: u64) -> Result<Question, ItemError> {
        match self.items.get(template) {
            Some(Item::Template(t)) => t.instantiate(seed),
            _ => Err(ItemError::UnknownTemplate(template.clone())),
        }
    }

    /// The concrete question shown for an allocation with the given seed.
    pub fn render(&self, id: &QuestionId, seed: u64) -> Result<Question, ItemError> {
        match self.items.get(id) {
            Some(Item::Fixed(q)) => Ok(q.clone()),
            Some(Item::Template(t)) => t.instantiate(seed),
            None => Err(ItemError::UnknownQuestion(id.clone())),
        }
    }

    pub fn stats(&self, id: &QuestionId) -> Option<QuestionStats> {
        self.stats.get(id).copied()
    }

    pub fn all_stats(&self) -> &BTreeMap<QuestionId, QuestionStats> {
        &self.stats
    }

    /// Overwrites the counters of an item, e.g. to seed a calibrated bank.
    pub fn set_stats(&mut self, id: &QuestionId, stats: QuestionStats) -> Result<(), ItemError> {
        if !stats.is_valid() {
            return Err(ItemError::AnswerWithoutAllocation);
        }
        *self.stats.get_mut(id).ok_or_else(|| ItemError::UnknownQuestion(id.clone()))? = stats;
        Ok(())
    }

    pub fn bump_stats(&mut self, id: &QuestionId, event: StatsEvent) -> Result<QuestionStats, ItemError> {
        let s = self.stats.get_mut(id).ok_or_else(|| ItemError::UnknownQuestion(id.clone()))?;
        match event {
            StatsEvent::Allocated => s.times_allocated += 1,
            StatsEvent::AnsweredCorrect | StatsEvent::AnsweredWrong => {
                if s.times_answered >= s.times_allocated {
                    return Err(ItemError::AnswerWithoutAllocation);
                }
                s.times_answered += 1;
                if event == StatsEvent::AnsweredCorrect {
                    s.times_correct += 1;
                }
            }
        }
        Ok(*s)
    }

    /// Zeroes every counter.
    pub fn reset_stats(&mut self) {
        for s in self.stats.values_mut() {
            *s = QuestionStats::default();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lecture() -> (ContentTree, NodeId) {
        let mut c = ContentTree::new();
        let d = c.add_node(None, NodeKind::Department, "D", "").unwrap();
        let co = c.add_node(Some(&d), NodeKind::Course, "C", "").unwrap();
        let t = c.add_node(Some(&co), NodeKind::Tutorial, "T", "").unwrap();
        let l = c.add_node(Some(&t), NodeKind::Lecture, "L", "").unwrap();
        (c, l)
    }

    fn four_answers() -> Vec<Answer> {
        vec![Answer::new("1", false), Answer::new("2", true), Answer::new("3", false), Answer::new("4", false)]
    }

    fn sum_template(lecture: &NodeId) -> QuestionTemplate {
        QuestionTemplate {
            id: "t-sum".into(),
            lecture: lecture.clone(),
            stem_template: "What is {a} + {b}?".into(),
            format: TextFormat::Plain,
            shuffle: true,
            parameter_specs: BTreeMap::from([
                ("a".to_string(), ParamSpec { min: 1.0, max: 5.0, step: 1.0 }),
                ("b".to_string(), ParamSpec { min: 1.0, max: 5.0, step: 1.0 }),
            ]),
            answer_expressions: vec![
                AnswerExpression { expression: "a + b".into(), correct: true },
                AnswerExpression { expression: "a * b + 1".into(), correct: false },
                AnswerExpression { expression: "a - b".into(), correct: false },
            ],
        }
    }

    #[test]
    fn add_question_zeroes_stats() {
        let (c, l) = lecture();
        let mut bank = ItemBank::new();
        let q = bank.add_question(&c, &l, "1+1?", four_answers(), false).unwrap();
        assert_eq!(bank.stats(&q), Some(QuestionStats::default()));
        assert_eq!(bank.lecture_items(&l), vec![q]);
    }

    #[test]
    fn answer_validation() {
        let (c, l) = lecture();
        let mut bank = ItemBank::new();
        let none = vec![Answer::new("a", false), Answer::new("b", false)];
        assert_eq!(bank.add_question(&c, &l, "?", none, false), Err(ItemError::NoCorrectAnswer));
        let two = vec![Answer::new("a", true), Answer::new("b", true)];
        assert_eq!(bank.add_question(&c, &l, "?", two, false), Err(ItemError::MultipleCorrectAnswers));
        assert_eq!(bank.add_question(&c, &l, "?", vec![Answer::new("a", true)], false), Err(ItemError::TooFewAnswers));
        assert_eq!(
            bank.add_question(&c, &"nope".into(), "?", four_answers(), false),
            Err(ItemError::UnknownLecture("nope".into()))
        );
        assert!(bank.is_empty());
    }

    #[test]
    fn stats_transitions() {
        let (c, l) = lecture();
        let mut bank = ItemBank::new();
        let q = bank.add_question(&c, &l, "?", four_answers(), false).unwrap();
        assert_eq!(bank.bump_stats(&q, StatsEvent::AnsweredCorrect), Err(ItemError::AnswerWithoutAllocation));
        assert_eq!(bank.bump_stats(&q, StatsEvent::Allocated).unwrap(), QuestionStats::new(1, 0, 0).unwrap());
        assert_eq!(bank.bump_stats(&q, StatsEvent::AnsweredCorrect).unwrap(), QuestionStats::new(1, 1, 1).unwrap());
        assert!(matches!(bank.bump_stats(&"zz".into(), StatsEvent::Allocated), Err(ItemError::UnknownQuestion(_))));
    }

    #[test]
    fn instantiate_is_deterministic_and_correct() {
        let (c, l) = lecture();
        let mut bank = ItemBank::new();
        bank.insert(&c, Item::Template(sum_template(&l))).unwrap();
        let q1 = bank.instantiate(&"t-sum".into(), 42).unwrap();
        let q2 = bank.instantiate(&"t-sum".into(), 42).unwrap();
        assert_eq!(q1, q2);
        let vals = sum_template(&l).draw_values(42).unwrap();
        let (a, b) = (vals["a"], vals["b"]);
        assert_eq!(q1.stem, format!("What is {a} + {b}?"));
        assert_eq!(q1.answers[q1.correct_index()].text, format!("{}", a + b));
        assert!(matches!(bank.instantiate(&"missing".into(), 1), Err(ItemError::UnknownTemplate(_))));
    }

    #[test]
    fn template_validation() {
        let (_, l) = lecture();
        let mut t = sum_template(&l);
        t.parameter_specs.remove("b");
        assert!(matches!(t.validate(), Err(ItemError::InvalidTemplate(_))));
        let mut t = sum_template(&l);
        t.parameter_specs.insert("a".into(), ParamSpec { min: 3.0, max: 1.0, step: 1.0 });
        assert!(matches!(t.validate(), Err(ItemError::InvalidTemplate(_))));
        let mut t = sum_template(&l);
        t.parameter_specs.insert("a".into(), ParamSpec { min: 1.0, max: 3.0, step: 0.0 });
        assert!(matches!(t.validate(), Err(ItemError::InvalidTemplate(_))));
        let mut t = sum_template(&l);
        t.answer_expressions[1].correct = true;
        assert_eq!(t.validate(), Err(ItemError::MultipleCorrectAnswers));
    }

    #[test]
    fn division_by_zero_redraws_then_fails() {
        let (_, l) = lecture();
        let mut t = sum_template(&l);
        // a - 3 is zero for one of five grid values; redraw must succeed.
        t.answer_expressions[1].expression = "1 / (a - 3)".into();
        for seed in 0..50 {
            let q = t.instantiate(seed).unwrap();
            assert_eq!(q.answers.len(), 3);
        }
        t.answer_expressions[1].expression = "1 / (a - a)".into();
        assert_eq!(t.instantiate(7), Err(ItemError::ExpressionError(ExprError::DivisionByZero)));
    }

    #[test]
    fn fractional_steps_are_exact() {
        let (_, l) = lecture();
        let t = QuestionTemplate {
            id: "t-frac".into(),
            lecture: l,
            stem_template: "{p} of {n}".into(),
            format: TextFormat::Plain,
            shuffle: false,
            parameter_specs: BTreeMap::from([
                ("p".to_string(), ParamSpec { min: 0.1, max: 0.9, step: 0.1 }),
                ("n".to_string(), ParamSpec { min: 10.0, max: 30.0, step: 10.0 }),
            ]),
            answer_expressions: vec![
                AnswerExpression { expression: "p * n".into(), correct: true },
                AnswerExpression { expression: "n / 3".into(), correct: false },
            ],
        };
        let mut seen = BTreeSet::new();
        for seed in 0..500 {
            let q = t.instantiate(seed).unwrap();
            // p*n with p on a 0.1 grid and n a multiple of 10 is an integer.
            assert!(!q.answers[0].text.contains('.'), "{}", q.answers[0].text);
            seen.insert(q.stem);
        }
        assert_eq!(seen.len(), 27);
    }

    #[test]
    fn presented_order_identity_without_shuffle() {
        let (c, l) = lecture();
        let mut bank = ItemBank::new();
        let q = bank.add_question(&c, &l, "?", four_answers(), false).unwrap();
        let Item::Fixed(q) = bank.get(&q).unwrap().clone() else { unreachable!() };
        assert_eq!(presented_order(&q, 99), vec![0, 1, 2, 3]);
        let mut shuffled = q.clone();
        shuffled.shuffle = true;
        let mut p = presented_order(&shuffled, 99);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
