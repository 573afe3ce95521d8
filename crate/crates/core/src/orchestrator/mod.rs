//! Successive prompting: retrieve demonstrations, ask the model for the next
//! simple question, answer it with the calculator or the model, repeat.

mod backend;
mod prompt;
mod run;

pub use backend::{
    Backend, BackendError, LmRequest, LmResponse, RemoteBackend, ReplayBackend, ScriptedBackend, SymbolicAnswers,
    ENDPOINT_ENV, WRONG_ANSWER,
};
pub use prompt::{
    format_qa_prompt, format_qd_prompt, one_line, parse_qa_output, parse_qd_output, parse_test_block, Prompt,
    PromptFormat, PromptOverflow, QdOutput, TestBlock, END_PHRASE, EOQ, FINAL_PREFIX,
};
pub use run::{run, ConfigError, Indices, RunConfig, RunError, RunOutput, Routing, Stage, Termination, Trace, TraceEvent};
