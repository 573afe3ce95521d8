//! Aggregate scores over a run.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metric::example_score;
use crate::model::{Answer, Chain, ComplexExample};

/// One line of a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Chain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("predictions for unknown ids: {}", .0.join(", "))]
    MissingIds(Vec<String>),
    #[error("more than one prediction for: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeScore {
    pub f1: f64,
    pub em: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
}

/// Scores on a 0-100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub f1: f64,
    pub em: f64,
    pub count: usize,
    /// Keyed by reasoning type, or `untyped`.
    pub per_type: BTreeMap<String, TypeScore>,
    /// Predictions scored with the greedy span alignment.
    pub approximate: usize,
    pub metadata: RunMetadata,
}

pub const UNTYPED: &str = "untyped";

/// Score every prediction against its gold example. Sums run in id order so
/// the report does not depend on prediction order.
pub fn score_run(predictions: &[Prediction], gold: &[ComplexExample], metadata: RunMetadata) -> Result<ScoreReport, ScoreError> {
    let by_id: HashMap<&str, &ComplexExample> = gold.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut missing: Vec<String> = predictions.iter().filter(|p| !by_id.contains_key(p.id.as_str())).map(|p| p.id.clone()).collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(ScoreError::MissingIds(missing));
    }
    let mut sorted: Vec<&Prediction> = predictions.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut dups: Vec<String> = sorted.windows(2).filter(|w| w[0].id == w[1].id).map(|w| w[0].id.clone()).collect();
    if !dups.is_empty() {
        dups.dedup();
        return Err(ScoreError::DuplicateIds(dups));
    }

    let mut sums: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    let (mut f1, mut em, mut approximate) = (0.0, 0.0, 0);
    for p in &sorted {
        let g = by_id[p.id.as_str()];
        let s = example_score(&p.answer, g);
        let key = g.reasoning_type.map_or_else(|| UNTYPED.to_string(), |t| t.as_str().to_string());
        let slot = sums.entry(key).or_default();
        slot.0 += s.f1;
        slot.1 += s.em;
        slot.2 += 1;
        f1 += s.f1;
        em += s.em;
        approximate += usize::from(s.approximate);
    }
    let n = sorted.len();
    let pct = |sum: f64, count: usize| if count == 0 { 0.0 } else { 100.0 * sum / count as f64 };
    Ok(ScoreReport {
        f1: pct(f1, n),
        em: pct(em, n),
        count: n,
        per_type: sums.into_iter().map(|(k, (f, e, c))| (k, TypeScore { f1: pct(f, c), em: pct(e, c), count: c })).collect(),
        approximate,
        metadata,
    })
}
