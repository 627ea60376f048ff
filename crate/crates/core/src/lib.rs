//! Adaptive quizzing with difficulty-ranked item allocation.
//!
//! The crate is organised around the pieces of a small tutoring system:
//!
//! - [`content`]: the department / course / tutorial / lecture / slide tree
//!   and its lecture and tutorial views.
//! - [`item_bank`]: questions and parameterized templates attached to
//!   lectures, plus allocation and answer counters.
//! - [`engine`]: empirical difficulty, ranking, the grade-dependent
//!   allocation distribution and the last-eight-answers grade.
//! - [`anova`]: sequential fixed-effects ANOVA, backward elimination and
//!   contrast intervals for crossover exam data.
//! - [`trial_sim`]: crossover assignment, a logistic student model and
//!   synthetic exam scores.
//! - [`log`] and [`service`]: the append-only answer log, replay and the
//!   HTTP API.
//! - [`cli`]: the `tutorweb` command line.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod anova;
pub mod cli;
pub mod content;
pub mod document;
pub mod engine;
pub mod expr;
pub mod item_bank;
pub mod log;
pub mod service;
pub mod trial_sim;

pub use content::{ContentTree, NodeId, NodeKind};
pub use engine::{AllocationPolicy, Engine, StudentId};
pub use item_bank::{ItemBank, QuestionId};
