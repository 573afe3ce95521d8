//! Token-level F1 and exact match over multi-span answers.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::model::{format_number, Answer, ComplexExample};
use crate::text::{canonical_number, normalize_answer_text, parse_quantity};

/// Span sets up to this size are aligned exactly.
pub const EXACT_ALIGNMENT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub f1: f64,
    pub em: f64,
    /// The span alignment was greedy because a side had too many spans.
    pub approximate: bool,
}

/// Normalized form of one span. A span that is a number with an optional
/// unit compares by value alone. A span made only of an article (venue "A")
/// keeps that word rather than vanishing.
pub fn normalize_span(span: &str) -> String {
    match parse_quantity(span) {
        Some(q) => format_number(q.value),
        None => {
            let n = normalize_answer_text(span);
            if n.is_empty() {
                span.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
            } else {
                n
            }
        }
    }
}

fn normalized_spans(answer: &Answer) -> Vec<String> {
    answer.scoring_spans().iter().map(|s| normalize_span(s)).filter(|s| !s.is_empty()).collect()
}

/// Token F1 between two normalized spans. When either side mentions numbers
/// the two sides must mention the same numbers, otherwise the pair scores 0.
pub fn span_f1(a: &str, b: &str) -> f64 {
    let ta: Vec<&str> = a.split_whitespace().collect();
    let tb: Vec<&str> = b.split_whitespace().collect();
    let numbers = |t: &[&str]| t.iter().filter(|w| canonical_number(w).is_some()).map(|w| w.to_string()).collect::<BTreeSet<_>>();
    if numbers(&ta) != numbers(&tb) {
        return 0.0;
    }
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let mut bag: HashMap<&str, usize> = HashMap::new();
    for w in &tb {
        *bag.entry(w).or_default() += 1;
    }
    let mut common = 0;
    for w in &ta {
        if let Some(n) = bag.get_mut(w).filter(|n| **n > 0) {
            *n -= 1;
            common += 1;
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / ta.len() as f64;
    let recall = common as f64 / tb.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Maximum total score of a one-to-one pairing of rows and columns. Exact
/// (subset dynamic programming over the larger side) up to
/// `EXACT_ALIGNMENT_LIMIT`, greedy beyond; the flag reports which.
pub fn best_alignment(scores: &[Vec<f64>]) -> (f64, bool) {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0.0, false);
    }
    if rows.max(cols) > EXACT_ALIGNMENT_LIMIT {
        return (greedy_alignment(scores), true);
    }
    // Iterate over the smaller side, masking the larger.
    let transpose = rows > cols;
    let (small, large) = if transpose { (cols, rows) } else { (rows, cols) };
    let at = |i: usize, j: usize| if transpose { scores[j][i] } else { scores[i][j] };
    let mut best = vec![f64::NEG_INFINITY; 1 << large];
    best[0] = 0.0;
    for i in 0..small {
        let mut next = vec![f64::NEG_INFINITY; 1 << large];
        for mask in 0..1usize << large {
            if best[mask] == f64::NEG_INFINITY {
                continue;
            }
            for j in (0..large).filter(|j| mask & (1 << j) == 0) {
                let v = best[mask] + at(i, j);
                let slot = &mut next[mask | (1 << j)];
                if v > *slot {
                    *slot = v;
                }
            }
        }
        best = next;
    }
    (best.into_iter().fold(0.0, f64::max), false)
}

fn greedy_alignment(scores: &[Vec<f64>]) -> f64 {
    let mut pairs: Vec<(usize, usize, f64)> =
        scores.iter().enumerate().flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &s)| (i, j, s))).collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let (mut used_r, mut used_c) = (BTreeSet::new(), BTreeSet::new());
    let mut total = 0.0;
    for (i, j, s) in pairs {
        if !used_r.contains(&i) && !used_c.contains(&j) {
            used_r.insert(i);
            used_c.insert(j);
            total += s;
        }
    }
    total
}

/// F1 and EM of a prediction against one gold answer. Spans are aligned one
/// to one to maximize summed F1, which is divided by the larger span count.
/// EM requires equal sets of normalized spans.
pub fn answer_f1(pred: &Answer, gold: &Answer) -> Score {
    let p = normalized_spans(pred);
    let g = normalized_spans(gold);
    let em = if p.iter().collect::<BTreeSet<_>>() == g.iter().collect::<BTreeSet<_>>() { 1.0 } else { 0.0 };
    if p.is_empty() || g.is_empty() {
        let f1 = if p.is_empty() && g.is_empty() { 1.0 } else { 0.0 };
        return Score { f1, em, approximate: false };
    }
    let scores: Vec<Vec<f64>> = p.iter().map(|a| g.iter().map(|b| span_f1(a, b)).collect()).collect();
    let (total, approximate) = best_alignment(&scores);
    Score { f1: total / p.len().max(g.len()) as f64, em, approximate }
}

/// Best F1 and best EM over every acceptable gold answer.
pub fn example_score(pred: &Answer, gold: &ComplexExample) -> Score {
    gold.gold_answers().map(|g| answer_f1(pred, g)).fold(Score { f1: 0.0, em: 0.0, approximate: false }, |acc, s| Score {
        f1: acc.f1.max(s.f1),
        em: acc.em.max(s.em),
        approximate: acc.approximate || s.approximate,
    })
}
