use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::model::{ComplexExample, ReasoningType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    /// Every taxonomy member, zero when absent.
    pub counts: BTreeMap<ReasoningType, usize>,
    /// Examples without a taxonomy type (hand-annotated questions).
    pub untyped: usize,
    pub total: usize,
}

pub fn corpus_stats(examples: &[ComplexExample]) -> CorpusStats {
    let mut counts: BTreeMap<ReasoningType, usize> = ReasoningType::ALL.iter().map(|t| (*t, 0)).collect();
    let mut untyped = 0;
    for e in examples {
        match e.reasoning_type {
            Some(t) => *counts.entry(t).or_default() += 1,
            None => untyped += 1,
        }
    }
    CorpusStats { counts, untyped, total: examples.len() }
}

impl CorpusStats {
    /// Plain-text table, one row per type, then the total.
    pub fn render(&self) -> String {
        let width = ReasoningType::ALL.iter().map(|t| t.label().len()).max().unwrap_or(0).max("Untyped".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>8}", "Reasoning", "Count");
        let _ = writeln!(out, "{}  {}", "-".repeat(width), "-".repeat(8));
        for (t, n) in &self.counts {
            let _ = writeln!(out, "{:<width$}  {n:>8}", t.label());
        }
        if self.untyped > 0 {
            let _ = writeln!(out, "{:<width$}  {:>8}", "Untyped", self.untyped);
        }
        let _ = writeln!(out, "{:<width$}  {:>8}", "Total", self.total);
        out
    }
}
