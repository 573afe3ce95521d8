//! The `run` subcommand: answer every input question and keep one trace file
//! per run beside the predictions.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use successive_core::eval::Prediction;
use successive_core::orchestrator::{
    run, Backend, Indices, RemoteBackend, ReplayBackend, RunConfig, RunError, ScriptedBackend, SymbolicAnswers, Trace,
};
use successive_core::retrieval::Index;
use successive_core::{Answer, Chain, ComplexExample};

use crate::commands::{index_path, QA_INDEX_FILE, QD_INDEX_FILE};
use crate::io::{read_jsonl, write_json, write_jsonl};
use crate::RunMeta;

#[derive(Debug, Deserialize)]
struct RunInput {
    id: String,
    passage: String,
    question: String,
}

#[derive(Debug, Deserialize)]
struct ScriptLine {
    prompt: String,
    completion: String,
}

#[derive(Serialize)]
struct TraceFile<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<&'a Chain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    trace: Option<&'a Trace>,
}

pub enum BackendChoice<'a> {
    Replay { gold: &'a Path, wrong_symbolic: bool },
    Scripted { script: &'a Path, default: String },
    Remote { endpoint: Option<String>, timeout: Duration, retries: usize },
}

pub struct RunArgs<'a> {
    pub input: &'a Path,
    pub index: Option<&'a Path>,
    pub backend: BackendChoice<'a>,
    pub config: Option<&'a Path>,
    pub out: &'a Path,
    pub traces: Option<&'a Path>,
}

pub const META_FILE: &str = "run.json";

pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(canonical);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Ok(RunConfig::from_toml(&text)?)
        }
    }
}

fn load_indices(dir: Option<&Path>) -> Result<Indices> {
    let Some(dir) = dir else { return Ok(Indices::default()) };
    if !dir.is_dir() {
        bail!("index directory {} does not exist", dir.display());
    }
    let load = |file| index_path(dir, file).map(|p| Index::load(&p)).transpose();
    Ok(Indices { qd: load(QD_INDEX_FILE)?, qa: load(QA_INDEX_FILE)? })
}

fn make_backend(choice: &BackendChoice, config: &RunConfig) -> Result<Box<dyn Backend>> {
    Ok(match choice {
        BackendChoice::Replay { gold, wrong_symbolic } => {
            let gold: Vec<ComplexExample> = read_jsonl(gold)?;
            let policy = if *wrong_symbolic { SymbolicAnswers::Wrong } else { SymbolicAnswers::Gold };
            Box::new(ReplayBackend::new(&gold, config.format).symbolic_answers(policy))
        }
        BackendChoice::Scripted { script, default } => {
            let lines: Vec<ScriptLine> = read_jsonl(script)?;
            Box::new(lines.iter().fold(ScriptedBackend::new(default.clone()), |b, l| b.with(&l.prompt, l.completion.clone())))
        }
        BackendChoice::Remote { endpoint, timeout, retries } => match endpoint {
            Some(url) => Box::new(RemoteBackend::new(url.clone(), *timeout, *retries)),
            None => Box::new(RemoteBackend::from_env(*timeout, *retries)?),
        },
    })
}

/// Trace file name: input position plus a filesystem-safe form of the id.
fn trace_name(position: usize, id: &str) -> String {
    let safe: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).take(80).collect();
    format!("{position:06}-{safe}.json")
}

pub fn default_traces_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".traces");
    out.with_file_name(name)
}

pub fn run_command(args: RunArgs) -> Result<()> {
    let config = load_config(args.config)?;
    let inputs: Vec<RunInput> = read_jsonl(args.input)?;
    let indices = load_indices(args.index)?;
    let backend = make_backend(&args.backend, &config)?;
    let traces = args.traces.map(Path::to_path_buf).unwrap_or_else(|| default_traces_dir(args.out));
    fs::create_dir_all(&traces).with_context(|| format!("cannot create {}", traces.display()))?;
    let meta = RunMeta { backend: backend.name().to_string(), config_hash: config_hash(&config), config: config.clone() };
    write_json(&traces.join(META_FILE), &meta)?;

    let results: Vec<Result<Prediction, RunError>> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, input)| {
            let name = trace_name(i, &input.id);
            let outcome = run(&input.passage, &input.question, &config, &indices, backend.as_ref());
            let record = match &outcome {
                Ok(out) => TraceFile { id: &input.id, chain: Some(&out.chain), error: None, trace: Some(&out.trace) },
                Err(e) => TraceFile { id: &input.id, chain: None, error: Some(e.to_string()), trace: e.trace() },
            };
            // A trace that cannot be written is reported but does not lose the prediction.
            if let Err(e) = write_json(&traces.join(&name), &record) {
                eprintln!("warning: {e:#}");
            }
            let out = outcome?;
            Ok(Prediction {
                id: input.id.clone(),
                answer: out.chain.final_answer.clone().unwrap_or_else(|| Answer::text("")),
                chain: Some(out.chain),
                trace_ref: Some(name),
            })
        })
        .collect();

    let mut predictions = Vec::with_capacity(results.len());
    for (input, r) in inputs.iter().zip(results) {
        predictions.push(r.with_context(|| format!("run {} failed", input.id))?);
    }
    write_jsonl(args.out, &predictions)?;
    eprintln!("{} runs, traces in {}", predictions.len(), traces.display());
    Ok(())
}
