//! Per-epoch reallocation of a training budget across reasoning types.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ReasoningType;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypePerformance {
    pub reasoning_type: ReasoningType,
    pub previous: f64,
    pub current: f64,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    /// Weight floor so types that did not get worse keep a small share.
    pub epsilon: f64,
    /// Allow drawing more examples of a type than its pool holds.
    pub replacement: bool,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { epsilon: 0.001, replacement: false, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("budget {budget} is invalid: {reason}")]
    InvalidBudget { budget: usize, reason: String },
    #[error("score {value} for {reasoning_type} is outside [0, 1]")]
    InvalidScore { reasoning_type: ReasoningType, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub allocation: BTreeMap<ReasoningType, usize>,
    /// Sampled ids grouped by type in taxonomy order.
    pub ids: Vec<String>,
}

/// Split `budget` across the non-empty pools and draw that many ids from each.
///
/// The first epoch weights types by pool size; later epochs by
/// `max(previous - current, 0) + epsilon`. Shares are rounded with the
/// largest-remainder method (ties to taxonomy order) so they sum to the
/// budget exactly, and types whose share exceeds their pool are capped with
/// the excess spread over the rest.
pub fn dynamic_sample(
    pools: &BTreeMap<ReasoningType, Vec<String>>,
    perf: &[TypePerformance],
    budget: usize,
    first_epoch: bool,
    config: &SampleConfig,
) -> Result<SampleOutcome, SampleError> {
    for p in perf {
        for value in [p.previous, p.current] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SampleError::InvalidScore { reasoning_type: p.reasoning_type, value });
            }
        }
    }
    let types: Vec<ReasoningType> = pools.iter().filter(|(_, ids)| !ids.is_empty()).map(|(t, _)| *t).collect();
    if budget < types.len() {
        return Err(SampleError::InvalidBudget {
            budget,
            reason: format!("fewer than the {} types to cover", types.len()),
        });
    }
    let total: usize = types.iter().map(|t| pools[t].len()).sum();
    if budget > total && !config.replacement {
        return Err(SampleError::InvalidBudget {
            budget,
            reason: format!("only {total} examples available and replacement is off"),
        });
    }
    let weights: Vec<f64> = types
        .iter()
        .map(|t| {
            if first_epoch {
                pools[t].len() as f64
            } else {
                let drop = perf.iter().find(|p| p.reasoning_type == *t).map_or(0.0, |p| p.previous - p.current);
                drop.max(0.0) + config.epsilon
            }
        })
        .collect();
    let caps: Vec<Option<usize>> =
        types.iter().map(|t| if config.replacement { None } else { Some(pools[t].len()) }).collect();
    let counts = allocate(&weights, &caps, budget);

    let mut allocation = BTreeMap::new();
    let mut ids = Vec::with_capacity(budget);
    for (t, &n) in types.iter().zip(&counts) {
        allocation.insert(*t, n);
        let pool = &pools[t];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (*t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for _ in 0..n / pool.len() {
            ids.extend(pool.iter().cloned());
        }
        let rest = n % pool.len();
        ids.extend(sample(&mut rng, pool.len(), rest).into_iter().map(|i| pool[i].clone()));
    }
    Ok(SampleOutcome { allocation, ids })
}

/// Largest-remainder apportionment with caps. Capped entries are fixed at
/// their cap and the remaining budget is re-apportioned over the others.
pub(crate) fn allocate(weights: &[f64], caps: &[Option<usize>], budget: usize) -> Vec<usize> {
    let mut out = vec![0usize; weights.len()];
    let mut open: Vec<usize> = (0..weights.len()).collect();
    let mut remaining = budget;
    while !open.is_empty() && remaining > 0 {
        let shares = apportion(&open.iter().map(|&i| weights[i]).collect::<Vec<_>>(), remaining);
        let over: Vec<usize> = open
            .iter()
            .zip(&shares)
            .filter(|(&i, &s)| caps[i].is_some_and(|c| s > c))
            .map(|(&i, _)| i)
            .collect();
        if over.is_empty() {
            for (&i, &s) in open.iter().zip(&shares) {
                out[i] = s;
            }
            break;
        }
        for &i in &over {
            let cap = caps[i].expect("only capped entries overflow");
            out[i] = cap;
            remaining -= cap;
        }
        open.retain(|i| !over.contains(i));
    }
    out
}

fn apportion(weights: &[f64], budget: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * budget as f64).collect()
    } else {
        vec![budget as f64 / weights.len() as f64; weights.len()]
    };
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(budget.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
