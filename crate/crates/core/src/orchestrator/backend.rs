//! Language-model backends: a scripted stand-in, a gold-chain replayer and a
//! remote HTTP endpoint.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::{one_line, parse_test_block, PromptFormat, TestBlock};
use crate::model::{Answer, ComplexExample};

/// Endpoint used by the remote backend when none is configured.
pub const ENDPOINT_ENV: &str = "SUCCESSIVE_LM_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmRequest {
    pub prompt: String,
    pub max_tokens: usize,
    pub stop: Vec<String>,
    pub temperature: f64,
    pub beams: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<usize>,
}

impl LmResponse {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), tokens: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend returned a malformed response: {0}")]
    BadResponse(String),
}

/// A text generator. Implementations must tolerate concurrent calls.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, request: &LmRequest) -> Result<LmResponse, BackendError>;
}

/// Fixed completions keyed by whitespace-normalized prompt.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    fixtures: HashMap<String, String>,
    default: String,
}

impl ScriptedBackend {
    pub fn new(default: impl Into<String>) -> Self {
        Self { fixtures: HashMap::new(), default: default.into() }
    }

    pub fn with(mut self, prompt: &str, completion: impl Into<String>) -> Self {
        self.fixtures.insert(one_line(prompt), completion.into());
        self
    }
}

impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn generate(&self, request: &LmRequest) -> Result<LmResponse, BackendError> {
        let text = self.fixtures.get(&one_line(&request.prompt)).unwrap_or(&self.default);
        Ok(LmResponse::text(text.clone()))
    }
}

/// How the replayer answers calculator-style questions sent to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolicAnswers {
    #[default]
    Gold,
    /// Always wrong, to model a language model that cannot do arithmetic.
    Wrong,
}

pub const WRONG_ANSWER: &str = "unknown";

/// Replays gold chains. Decomposition prompts are matched on passage and
/// complex question, and the step is read off the partial chain in the
/// prompt; after the last gold step it terminates with the answer of the
/// last step in the prompt. Answering prompts are matched on passage and
/// simple question.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    format: PromptFormat,
    chains: HashMap<(String, String), Vec<String>>,
    answers: HashMap<(String, String), String>,
    symbolic: SymbolicAnswers,
    default: String,
}

impl ReplayBackend {
    pub fn new(gold: &[ComplexExample], format: PromptFormat) -> Self {
        let mut chains = HashMap::new();
        let mut answers = HashMap::new();
        for e in gold {
            let passage = one_line(&e.passage);
            chains
                .entry((passage.clone(), one_line(&e.question)))
                .or_insert_with(|| e.chain.steps.iter().map(|s| one_line(s.question.surface())).collect());
            for s in &e.chain.steps {
                answers
                    .entry((passage.clone(), one_line(s.question.surface())))
                    .or_insert_with(|| one_line(&s.answer.render()));
            }
        }
        Self { format, chains, answers, symbolic: SymbolicAnswers::Gold, default: String::new() }
    }

    pub fn symbolic_answers(mut self, policy: SymbolicAnswers) -> Self {
        self.symbolic = policy;
        self
    }

    pub fn default_text(mut self, text: impl Into<String>) -> Self {
        self.default = text.into();
        self
    }

    fn reply(&self, prompt: &str) -> Option<String> {
        match parse_test_block(prompt, self.format)? {
            TestBlock::Qd { passage, question, steps } => {
                let chain = self.chains.get(&(passage, question))?;
                match chain.get(steps.len()) {
                    Some(q) => Some(q.clone()),
                    None => {
                        let last = steps.last().map(|(_, a)| a.as_str()).unwrap_or_default();
                        Some(self.format.end_line(&Answer::from_generation(last)))
                    }
                }
            }
            TestBlock::Qa { passage, question } => {
                if self.symbolic == SymbolicAnswers::Wrong && crate::model::SimpleQuestion::classify(&question).is_symbolic() {
                    return Some(WRONG_ANSWER.to_string());
                }
                self.answers.get(&(passage, question)).cloned()
            }
        }
    }
}

impl Backend for ReplayBackend {
    fn name(&self) -> &str {
        "replay"
    }

    fn generate(&self, request: &LmRequest) -> Result<LmResponse, BackendError> {
        Ok(LmResponse::text(self.reply(&request.prompt).unwrap_or_else(|| self.default.clone())))
    }
}

/// JSON over HTTP POST: sends `{prompt, max_tokens, stop, temperature,
/// beams}` and reads `{text}`.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    endpoint: String,
    agent: ureq::Agent,
    retries: usize,
    backoff: Duration,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: usize) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        Self { endpoint: endpoint.into(), agent, retries, backoff: Duration::from_millis(200) }
    }

    /// Endpoint from the environment.
    pub fn from_env(timeout: Duration, retries: usize) -> Result<Self, BackendError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| BackendError::Unavailable(format!("{ENDPOINT_ENV} is not set")))?;
        Ok(Self::new(endpoint, timeout, retries))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, request: &LmRequest) -> Result<LmResponse, BackendError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(request)
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        response.body_mut().read_json::<LmResponse>().map_err(|e| BackendError::BadResponse(e.to_string()))
    }
}

impl Backend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn generate(&self, request: &LmRequest) -> Result<LmResponse, BackendError> {
        let mut last = None;
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * attempt as u32);
            }
            match self.attempt(request) {
                Ok(r) => return Ok(r),
                Err(e @ BackendError::BadResponse(_)) => return Err(e),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
