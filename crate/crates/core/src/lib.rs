//! Successive prompting for compositional question answering.
//!
//! A complex question is answered by alternating two steps: decomposition
//! proposes the next simple question, answering resolves it, either with a
//! language model or with a small deterministic calculator. The crate holds
//! the data model, the calculator, a synthetic generator that turns tables
//! into decomposed questions, the demonstration indices, the control loop and
//! DROP-style scoring.

pub mod eval;
pub mod generator;
pub mod model;
pub mod orchestrator;
pub mod retrieval;
pub mod symbolic;
pub mod text;

pub use model::{
    Answer, Chain, ColumnType, ComplexExample, ModelError, Provenance, Quantity, QuestionForm, ReasoningType,
    SimpleQuestion, Step, StepOrigin, StepSource, Table, DEFAULT_MAX_STEPS,
};
pub use symbolic::{eval_symbolic, naturalize_symbolic, parse_symbolic, EvalError, MalformedExpr, Op, SymbolicExpr};
pub use text::{normalize_answer_text, parse_quantity, split_list_answer};
