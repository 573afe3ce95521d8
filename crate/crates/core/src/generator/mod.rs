//! Synthetic complex questions from tables: passages, gold chains, training
//! splits and the per-epoch sampler.

mod check;
mod lookup;
mod patterns;
mod sampling;
mod splits;
mod stats;
mod table;
mod template;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ComplexExample, Provenance, ReasoningType, SimpleQuestion, Step, StepOrigin, DEFAULT_MAX_STEPS};
use crate::symbolic::naturalize_symbolic;

pub use check::{self_check, CheckReport};
pub use lookup::{distinct_targets, Filter, Lookup, LookupError};
pub use patterns::{roles, ColumnRoles};
pub use sampling::{dynamic_sample, SampleConfig, SampleError, SampleOutcome, TypePerformance};
pub use splits::{derive_training_splits, QaExample, QdExample, QdTarget};
pub use stats::{corpus_stats, CorpusStats};
pub use table::{load_table, load_table_file, parse_delimited, table_paths, TableError};
pub use template::{verbalize, Template, TemplateError, TemplateSet};

/// How calculator steps are written in emitted chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionMode {
    Natural,
    #[default]
    Symbolic,
    /// Each example twice, ids suffixed `/sym` and `/nl`.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub limit_per_type: usize,
    pub seed: u64,
    pub mode: EmissionMode,
    pub max_steps: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { limit_per_type: 20, seed: 0, mode: EmissionMode::Symbolic, max_steps: DEFAULT_MAX_STEPS }
    }
}

/// One candidate decomposition before passage and id are attached.
#[derive(Debug, Clone)]
pub(crate) struct Draft {
    pub question: String,
    pub steps: Vec<Step>,
}

/// Generate up to `limit_per_type` examples for every requested type the
/// table supports. Types the table cannot support are skipped silently.
pub fn generate_examples(
    table: &crate::model::Table,
    types: &[ReasoningType],
    config: &GeneratorConfig,
    templates: &TemplateSet,
) -> Result<Vec<ComplexExample>, TemplateError> {
    let passage = verbalize(table, &templates.select(table))?;
    let mut out = Vec::new();
    for kind in ReasoningType::ALL.into_iter().filter(|t| types.contains(t)) {
        let mut drafts = patterns::drafts(table, kind);
        drafts.retain(|d| !d.steps.is_empty() && d.steps.len() <= config.max_steps);
        dedup_questions(&mut drafts);
        let picked = pick(drafts.len(), config.limit_per_type, stream_seed(config.seed, table.id(), kind));
        for (n, i) in picked.into_iter().enumerate() {
            let draft = &drafts[i];
            let id = format!("{}/{}/{n}", table.id(), kind.as_str());
            let build = |id: String, natural: bool| {
                let steps = if natural { naturalized(&draft.steps) } else { draft.steps.clone() };
                let answer = steps.last().map(|s| s.answer.clone());
                ComplexExample {
                    id,
                    passage: passage.clone(),
                    question: draft.question.clone(),
                    chain: crate::model::Chain::new(steps, answer),
                    reasoning_type: Some(kind),
                    provenance: Provenance { table: table.id().to_string(), generator: kind.as_str().to_string() },
                    alternatives: Vec::new(),
                }
            };
            match config.mode {
                EmissionMode::Symbolic => out.push(build(id, false)),
                EmissionMode::Natural => out.push(build(id, true)),
                EmissionMode::Both => {
                    out.push(build(format!("{id}/sym"), false));
                    out.push(build(format!("{id}/nl"), true));
                }
            }
        }
    }
    Ok(out)
}

fn dedup_questions(drafts: &mut Vec<Draft>) {
    let mut seen = std::collections::HashSet::new();
    drafts.retain(|d| seen.insert(d.question.clone()));
}

/// Indices of a seeded uniform subset, in original order.
fn pick(len: usize, limit: usize, seed: u64) -> Vec<usize> {
    if len <= limit {
        return (0..len).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, len, limit).into_vec();
    chosen.sort_unstable();
    chosen
}

/// FNV-1a over table id and type name, mixed with the user seed, so that each
/// (table, type) stream is independent of which other types were requested.
fn stream_seed(seed: u64, table: &str, kind: ReasoningType) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in table.bytes().chain([0u8]).chain(kind.as_str().bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

/// Calculator steps rewritten as their English paraphrase; the call stays in
/// the step origin so the chain can still be replayed.
fn naturalized(steps: &[Step]) -> Vec<Step> {
    steps
        .iter()
        .map(|s| match (&s.origin, s.question.parsed()) {
            (Some(StepOrigin::Calculator(expr)), Some(_)) => Step {
                question: SimpleQuestion::natural(naturalize_symbolic(expr)),
                answer: s.answer.clone(),
                source: s.source,
                origin: s.origin.clone(),
            },
            _ => s.clone(),
        })
        .collect()
}
