//! The decompose/answer loop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{Backend, BackendError, LmRequest};
use super::prompt::{format_qa_prompt, format_qd_prompt, parse_qa_output, parse_qd_output, PromptFormat, PromptOverflow, QdOutput};
use crate::generator::{QaExample, QdExample};
use crate::model::{Answer, Chain, SimpleQuestion, Step, StepSource};
use crate::retrieval::{Index, IndexError, Payload, RetrievalResult};
use crate::symbolic::eval_symbolic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub max_steps: usize,
    pub calculator_enabled: bool,
    pub n_qd_demos: usize,
    pub m_qa_demos: usize,
    pub format: PromptFormat,
    pub seed: u64,
    /// Prompt length budget in characters.
    pub max_prompt_chars: usize,
    /// Spread decomposition demos over reasoning types among the top 3n.
    pub stratify: bool,
    pub max_tokens: usize,
    pub temperature: f64,
    pub beams: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_steps: 10,
            calculator_enabled: true,
            n_qd_demos: 3,
            m_qa_demos: 3,
            format: PromptFormat::Natural,
            seed: 0,
            max_prompt_chars: 16_000,
            stratify: true,
            max_tokens: 64,
            temperature: 0.0,
            beams: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid run config: {0}")]
    Parse(String),
    #[error("max_steps must be at least 1")]
    NoSteps,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_steps == 0 {
            return Err(ConfigError::NoSteps);
        }
        Ok(())
    }

    fn request(&self, prompt: String) -> LmRequest {
        LmRequest {
            prompt,
            max_tokens: self.max_tokens,
            stop: self.format.stop_sequences(),
            temperature: self.temperature,
            beams: self.beams,
        }
    }
}

/// Demonstration indices; either may be absent for zero-shot prompting.
#[derive(Debug, Clone, Default)]
pub struct Indices {
    pub qd: Option<Index>,
    pub qa: Option<Index>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Qd,
    QdRetry,
    Qa,
    Calculator,
}

/// Where a generated question was sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", content = "reason", rename_all = "snake_case")]
pub enum Routing {
    Calculator,
    Lm,
    /// A calculator call that failed to evaluate, answered by the model.
    CalculatorFallback(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// 1-based step the event belongs to.
    pub step: usize,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub generation: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demo_ids: Vec<String>,
    /// Decomposition step whose demos were used when the requested one had none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<Routing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The decomposer emitted the end marker.
    Marker,
    /// The step cap was reached.
    Forced,
    /// The decomposer produced unusable output twice.
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub backend: String,
    pub events: Vec<TraceEvent>,
    pub qd_calls: usize,
    pub qa_calls: usize,
    pub unparseable: usize,
    pub termination: Option<Termination>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub chain: Chain,
    pub trace: Trace,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{source}")]
    Backend { source: BackendError, trace: Box<Trace> },
    #[error("{source}")]
    Prompt { source: PromptOverflow, trace: Box<Trace> },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl RunError {
    /// The trace up to the failure, when there is one.
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            RunError::Backend { trace, .. } | RunError::Prompt { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

struct Loop<'a> {
    passage: &'a str,
    question: &'a str,
    config: &'a RunConfig,
    indices: &'a Indices,
    backend: &'a dyn Backend,
    steps: Vec<Step>,
    trace: Trace,
}

/// Alternate decomposition and answering until the decomposer terminates or
/// `max_steps` decomposition calls have been made. Each decomposition call
/// re-retrieves demonstrations for the current step. Calculator calls are
/// evaluated locally when enabled; a call that fails to evaluate goes to the
/// model instead. One unparseable decomposition is retried with the top demo
/// skipped; a second ends the run with an empty answer.
pub fn run(
    passage: &str,
    question: &str,
    config: &RunConfig,
    indices: &Indices,
    backend: &dyn Backend,
) -> Result<RunOutput, RunError> {
    config.validate()?;
    let mut state = Loop {
        passage,
        question,
        config,
        indices,
        backend,
        steps: Vec::new(),
        trace: Trace {
            backend: backend.name().to_string(),
            events: Vec::new(),
            qd_calls: 0,
            qa_calls: 0,
            unparseable: 0,
            termination: None,
        },
    };
    let final_answer = state.drive()?;
    Ok(RunOutput { chain: Chain::new(state.steps, Some(final_answer)), trace: state.trace })
}

impl Loop<'_> {
    fn drive(&mut self) -> Result<Answer, RunError> {
        let mut retry = false;
        while self.trace.qd_calls < self.config.max_steps {
            match self.decompose(retry)? {
                QdOutput::Next(q) => {
                    retry = false;
                    self.answer(q)?;
                }
                QdOutput::Terminate(answer) => {
                    self.trace.termination = Some(Termination::Marker);
                    return Ok(answer.unwrap_or_else(|| self.last_answer()));
                }
                QdOutput::Unparseable => {
                    self.trace.unparseable += 1;
                    if retry {
                        self.trace.termination = Some(Termination::Unparseable);
                        return Ok(Answer::text(""));
                    }
                    retry = true;
                }
            }
        }
        self.trace.termination = Some(if retry { Termination::Unparseable } else { Termination::Forced });
        Ok(if retry { Answer::text("") } else { self.last_answer() })
    }

    fn last_answer(&self) -> Answer {
        self.steps.last().map_or_else(|| Answer::text(""), |s| s.answer.clone())
    }

    fn step_number(&self) -> usize {
        self.steps.len() + 1
    }

    fn backend_error(&self, source: BackendError) -> RunError {
        RunError::Backend { source, trace: Box::new(self.trace.clone()) }
    }

    fn prompt_error(&self, source: PromptOverflow) -> RunError {
        RunError::Prompt { source, trace: Box::new(self.trace.clone()) }
    }

    fn qd_demos(&self, skip_top: bool) -> Result<(Vec<&QdExample>, Option<usize>), RunError> {
        let Some(index) = self.indices.qd.as_ref().filter(|i| !i.is_empty()) else {
            return Ok((Vec::new(), None));
        };
        let n = self.config.n_qd_demos;
        if n == 0 {
            return Ok((Vec::new(), None));
        }
        let skip = usize::from(skip_top);
        let pool = if self.config.stratify { 3 * n } else { n };
        let found = index.query_qd(self.question, self.step_number(), pool + skip)?;
        let ranked = found.results.get(skip..).unwrap_or_default();
        let chosen = if self.config.stratify { index.stratified(ranked, n) } else { ranked.iter().take(n).cloned().collect() };
        let demos = payloads(index, &chosen, |p| match p {
            Payload::Qd(e) => Some(e),
            Payload::Qa(_) => None,
        });
        Ok((demos, found.fallback_step))
    }

    fn decompose(&mut self, retry: bool) -> Result<QdOutput, RunError> {
        let (demos, fallback_step) = self.qd_demos(retry)?;
        let prompt = format_qd_prompt(
            self.passage,
            self.question,
            &self.steps,
            &demos,
            self.config.format,
            self.config.max_prompt_chars,
        )
        .map_err(|e| self.prompt_error(e))?;
        let demo_ids = demos[..prompt.demos_used].iter().map(|d| d.id()).collect();
        self.trace.qd_calls += 1;
        let response = self.backend.generate(&self.config.request(prompt.text.clone()));
        let generation = match response {
            Ok(r) => r.text,
            Err(e) => return Err(self.backend_error(e)),
        };
        let parsed = parse_qd_output(&generation, self.config.format);
        let routing = match &parsed {
            QdOutput::Next(q) => Some(self.route(q)),
            _ => None,
        };
        self.trace.events.push(TraceEvent {
            step: self.step_number(),
            stage: if retry { Stage::QdRetry } else { Stage::Qd },
            prompt: Some(prompt.text),
            generation,
            demo_ids,
            fallback_step,
            routing,
        });
        Ok(parsed)
    }

    /// Routing decided up front; calculator failures are resolved in `answer`.
    fn route(&self, q: &SimpleQuestion) -> Routing {
        if self.config.calculator_enabled && q.is_symbolic() {
            Routing::Calculator
        } else {
            Routing::Lm
        }
    }

    fn answer(&mut self, q: SimpleQuestion) -> Result<(), RunError> {
        let step = self.step_number();
        if self.config.calculator_enabled {
            if let Some(expr) = q.parsed() {
                match eval_symbolic(expr) {
                    Ok(answer) => {
                        self.trace.events.push(TraceEvent {
                            step,
                            stage: Stage::Calculator,
                            prompt: None,
                            generation: answer.render(),
                            demo_ids: Vec::new(),
                            fallback_step: None,
                            routing: Some(Routing::Calculator),
                        });
                        let s = Step::new(q, answer, StepSource::Calculator).expect("symbolic question");
                        self.steps.push(s);
                        return Ok(());
                    }
                    Err(e) => {
                        if let Some(last) = self.trace.events.last_mut() {
                            last.routing = Some(Routing::CalculatorFallback(e.to_string()));
                        }
                    }
                }
            }
        }
        let demos: Vec<&QaExample> = match self.indices.qa.as_ref().filter(|i| !i.is_empty() && self.config.m_qa_demos > 0) {
            Some(index) => {
                let found = index.query_qa(q.surface(), self.config.m_qa_demos)?;
                payloads(index, &found, |p| match p {
                    Payload::Qa(e) => Some(e),
                    Payload::Qd(_) => None,
                })
            }
            None => Vec::new(),
        };
        let prompt = format_qa_prompt(self.passage, q.surface(), &demos, self.config.format, self.config.max_prompt_chars)
            .map_err(|e| self.prompt_error(e))?;
        let demo_ids = demos[..prompt.demos_used].iter().map(|d| format!("{}@{}", d.source_id, d.question.surface())).collect();
        self.trace.qa_calls += 1;
        let generation = match self.backend.generate(&self.config.request(prompt.text.clone())) {
            Ok(r) => r.text,
            Err(e) => return Err(self.backend_error(e)),
        };
        let answer = parse_qa_output(&generation);
        self.trace.events.push(TraceEvent {
            step,
            stage: Stage::Qa,
            prompt: Some(prompt.text),
            generation,
            demo_ids,
            fallback_step: None,
            routing: Some(Routing::Lm),
        });
        self.steps.push(Step::new(q, answer, StepSource::Lm).expect("model steps carry any question"));
        Ok(())
    }
}

fn payloads<'i, T>(index: &'i Index, results: &[RetrievalResult], pick: impl Fn(&'i Payload) -> Option<&'i T>) -> Vec<&'i T> {
    results.iter().filter_map(|r| pick(&index.entry(r.entry).payload)).collect()
}
