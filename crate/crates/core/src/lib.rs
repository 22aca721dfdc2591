//! Learning answer set programs from context-dependent examples.
//!
//! The crate covers the whole pipeline: a parser for a clingo-like
//! fragment, a grounder, an answer-set solver with an independent
//! stability oracle, weak-constraint preferences, learning tasks with
//! context-dependent examples, a meta-level coverage check, and optimal
//! hypothesis search (batch and iterative).

pub mod error;
pub mod ground;
pub mod harness;
pub mod learn;
pub mod meta;
pub mod preference;
pub mod solve;
pub mod syntax;
pub mod task;

pub use error::{Error, Result};
pub use ground::{ground, GroundProgram, DEFAULT_ATOM_BUDGET};
pub use solve::{answer_sets, extends, is_answer_set, AnswerSet, Interpretation, PartialInterpretation, Solver};
pub use syntax::{parse_program, Atom, Program, Rule, Term};
pub use task::{Cdoe, Cdpi, ExampleRef, Hypothesis, LearningTask, Mode, Polarity, Relation};
pub use learn::{learn_batch, learn_iterative, learn_iterative_pretranslated, LearnMode, LearnOptions, LearnResult, Outcome};
