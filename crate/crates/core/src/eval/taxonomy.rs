//! Automatic tagging of wrong predictions by where the chain went astray.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metric::{answer_f1, example_score};
use super::report::Prediction;
use crate::model::ComplexExample;
use crate::orchestrator::one_line;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorTag {
    /// A step asked the gold question but got a different answer.
    Qa,
    /// A step asked something other than the gold question.
    Qd,
    /// The gold question has no reasoning type we generate for.
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedError {
    pub id: String,
    pub tag: ErrorTag,
    /// 1-based step where the chain first diverged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub total_errors: usize,
    pub sample: Vec<TaggedError>,
}

fn tag(pred: &Prediction, gold: &ComplexExample) -> TaggedError {
    let make = |tag, step, detail: String| TaggedError { id: pred.id.clone(), tag, step, detail };
    if gold.reasoning_type.is_none() {
        return make(ErrorTag::OutOfScope, None, "gold question has no reasoning type".into());
    }
    let Some(chain) = &pred.chain else {
        return make(ErrorTag::Qd, None, "no chain recorded".into());
    };
    for (i, (p, g)) in chain.steps.iter().zip(&gold.chain.steps).enumerate() {
        if one_line(p.question.surface()) != one_line(g.question.surface()) {
            return make(ErrorTag::Qd, Some(i + 1), format!("asked {:?}, gold {:?}", p.question.surface(), g.question.surface()));
        }
        if answer_f1(&p.answer, &g.answer).em < 1.0 {
            return make(ErrorTag::Qa, Some(i + 1), format!("answered {:?}, gold {:?}", p.answer.render(), g.answer.render()));
        }
    }
    let (n, m) = (chain.steps.len(), gold.chain.steps.len());
    let detail = if n < m {
        "stopped before the gold chain ended".to_string()
    } else if n > m {
        "kept asking after the gold chain ended".to_string()
    } else {
        "matching chain with a different final answer".to_string()
    };
    make(ErrorTag::Qd, Some(n.min(m) + 1), detail)
}

/// Tag up to `n` incorrect predictions (EM 0), sampled with `seed` and
/// reported in id order.
pub fn error_taxonomy(predictions: &[Prediction], gold: &[ComplexExample], n: usize, seed: u64) -> ErrorReport {
    let by_id: HashMap<&str, &ComplexExample> = gold.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut wrong: Vec<(&Prediction, &ComplexExample)> = predictions
        .iter()
        .filter_map(|p| by_id.get(p.id.as_str()).map(|g| (p, *g)))
        .filter(|(p, g)| example_score(&p.answer, g).em < 1.0)
        .collect();
    wrong.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, wrong.len(), n.min(wrong.len())).into_vec();
    picked.sort_unstable();
    ErrorReport { total_errors: wrong.len(), sample: picked.into_iter().map(|i| tag(wrong[i].0, wrong[i].1)).collect() }
}
