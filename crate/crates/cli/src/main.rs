//! Command-line entry point: corpus generation, indexing, runs and scoring.

mod commands;
mod io;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use successive_core::generator::{EmissionMode, SampleConfig};
use successive_core::orchestrator::{BackendError, RunConfig};
use successive_core::ReasoningType;

use commands::{EvalArgs, GenerateArgs, SampleArgs, SplitsArgs};
use run::{BackendChoice, RunArgs};

/// Run configuration as recorded beside a run's traces.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub backend: String,
    pub config_hash: String,
    pub config: RunConfig,
}

#[derive(Parser)]
#[command(name = "successive", version, about = "Decompose-and-answer question answering over tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Natural,
    Symbolic,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    /// Replays gold chains from --gold.
    Replay,
    /// Fixed completions from --script.
    Scripted,
    /// HTTP endpoint from --endpoint or the environment.
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Generate decomposed questions from a directory of tables.
    Generate {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated reasoning types; all when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_type)]
        types: Vec<ReasoningType>,
        /// Examples per type per table.
        #[arg(long, default_value_t = 20)]
        limit: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Symbolic)]
        mode: Mode,
        /// TOML file of passage templates.
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Hold out a dev split and derive decomposition and answering training data.
    Splits {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        qd: PathBuf,
        #[arg(long)]
        qa: PathBuf,
        #[arg(long, default_value_t = 0)]
        dev_size: usize,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build demonstration indices.
    Index {
        #[arg(long)]
        qd: Option<PathBuf>,
        #[arg(long)]
        qa: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Precomputed vectors, one {"text", "vector"} record per line.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Pick training examples by vertex cover over the question kNN graph.
    SelectExamples {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 300)]
        target: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer questions with successive prompting.
    Run {
        /// Records with id, passage and question.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: BackendKind,
        /// TOML run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Trace directory; defaults to `<out>.traces`.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Replay wrong answers to calculator questions.
        #[arg(long)]
        wrong_symbolic: bool,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Completion for prompts missing from the script.
        #[arg(long, default_value = "")]
        default_completion: String,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
        #[arg(long, default_value_t = 2)]
        retries: usize,
    },
    /// Score predictions against gold examples.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// The run.json written beside a run's traces.
        #[arg(long)]
        run_meta: Option<PathBuf>,
        /// Where to write a tagged sample of wrong predictions.
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Allocate the next epoch's budget across reasoning types.
    Sample {
        /// JSON list of per-type scores and pool sizes.
        #[arg(long)]
        perf: PathBuf,
        /// Corpus whose ids form the per-type pools.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        first_epoch: bool,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long)]
        replacement: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count examples per reasoning type.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
    },
}

fn parse_type(s: &str) -> Result<ReasoningType, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn usage(msg: &str) -> anyhow::Error {
    clap::Error::raw(clap::error::ErrorKind::MissingRequiredArgument, format!("{msg}\n")).into()
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate { tables, out, types, limit, seed, mode, templates } => commands::generate(GenerateArgs {
            tables: &tables,
            out: &out,
            types: if types.is_empty() { ReasoningType::ALL.to_vec() } else { types },
            limit,
            seed,
            mode: match mode {
                Mode::Natural => EmissionMode::Natural,
                Mode::Symbolic => EmissionMode::Symbolic,
                Mode::Both => EmissionMode::Both,
            },
            templates: templates.as_deref(),
        }),
        Command::Splits { corpus, qd, qa, dev_size, dev, train, seed } => commands::splits(SplitsArgs {
            corpus: &corpus,
            qd: &qd,
            qa: &qa,
            dev_size,
            dev: dev.as_deref(),
            train: train.as_deref(),
            seed,
        }),
        Command::Index { qd, qa, out, vectors } => {
            if qd.is_none() && qa.is_none() {
                return Err(usage("index needs --qd, --qa or both"));
            }
            commands::index(qd.as_deref(), qa.as_deref(), &out, vectors.as_deref())
        }
        Command::SelectExamples { corpus, k, target, out } => commands::select_examples(&corpus, k, target, out.as_deref()),
        Command::Run {
            input,
            index,
            backend,
            config,
            out,
            traces,
            gold,
            wrong_symbolic,
            script,
            default_completion,
            endpoint,
            timeout_secs,
            retries,
        } => {
            let backend = match backend {
                BackendKind::Replay => BackendChoice::Replay {
                    gold: gold.as_deref().ok_or_else(|| usage("--backend replay needs --gold"))?,
                    wrong_symbolic,
                },
                BackendKind::Scripted => BackendChoice::Scripted {
                    script: script.as_deref().ok_or_else(|| usage("--backend scripted needs --script"))?,
                    default: default_completion,
                },
                BackendKind::Remote => {
                    BackendChoice::Remote { endpoint, timeout: Duration::from_secs(timeout_secs), retries }
                }
            };
            run::run_command(RunArgs {
                input: &input,
                index: index.as_deref(),
                backend,
                config: config.as_deref(),
                out: &out,
                traces: traces.as_deref(),
            })
        }
        Command::Eval { pred, gold, report, run_meta, taxonomy, sample, seed } => commands::eval(EvalArgs {
            pred: &pred,
            gold: &gold,
            report: &report,
            run_meta: run_meta.as_deref(),
            taxonomy: taxonomy.as_deref(),
            sample,
            seed,
        }),
        Command::Sample { perf, corpus, budget, first_epoch, epsilon, replacement, seed, out } => {
            commands::sample(SampleArgs {
                perf: &perf,
                corpus: &corpus,
                budget,
                first_epoch,
                config: SampleConfig { epsilon, replacement, seed },
                out: out.as_deref(),
            })
        }
        Command::Stats { corpus } => commands::stats(&corpus),
    }
}

/// 1 for usage errors, 3 when the language-model backend failed, 2 for
/// everything else (unreadable or invalid data).
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<clap::Error>()) {
        1
    } else if err.chain().any(|e| e.is::<BackendError>()) {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
