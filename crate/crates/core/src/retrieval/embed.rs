//! Text embeddings. The default is a corpus-local TF-IDF over unigrams and
//! bigrams; precomputed vectors can be supplied instead.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedder has no vocabulary; fit it on a corpus first")]
    NotFitted,
    #[error("no precomputed vector for {0:?}")]
    Missing(String),
    #[error("precomputed vectors: {0}")]
    Load(String),
}

/// Sparse vector with term ids in ascending order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector(pub Vec<(u32, f64)>);

impl SparseVector {
    /// Normalize to unit length; the zero vector stays zero.
    pub fn normalized(mut terms: Vec<(u32, f64)>) -> Self {
        terms.retain(|(_, w)| *w != 0.0);
        terms.sort_by_key(|(t, _)| *t);
        let norm = terms.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut terms {
                *w /= norm;
            }
        }
        Self(terms)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Dot product by merging term lists, summing in ascending term order.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

pub trait Embedder {
    fn embed(&self, text: &str) -> Result<SparseVector, EmbedError>;
}

/// Lowercased alphanumeric words plus adjacent-word bigrams.
pub fn terms(text: &str) -> Vec<String> {
    let words: Vec<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let mut out = words.clone();
    out.extend(words.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

/// Smoothed TF-IDF: `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, raw term
/// counts, L2-normalized. Terms unseen at fit time are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    /// Vocabulary in sorted order; a term's id is its position.
    vocab: Vec<String>,
    idf: Vec<f64>,
    docs: usize,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl TfIdf {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut docs = 0;
        for text in texts {
            docs += 1;
            let unique: BTreeSet<String> = terms(text).into_iter().collect();
            for t in unique {
                *df.entry(t).or_default() += 1;
            }
        }
        let n = docs as f64;
        let (vocab, idf): (Vec<String>, Vec<f64>) =
            df.into_iter().map(|(t, d)| (t, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)).unzip();
        let mut model = Self { vocab, idf, docs, lookup: HashMap::new() };
        model.rebuild_lookup();
        model
    }

    fn rebuild_lookup(&mut self) {
        self.lookup = self.vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    }

    /// Call after deserializing.
    pub fn restore(mut self) -> Self {
        self.rebuild_lookup();
        self
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn docs(&self) -> usize {
        self.docs
    }
}

impl Embedder for TfIdf {
    fn embed(&self, text: &str) -> Result<SparseVector, EmbedError> {
        if self.vocab.is_empty() {
            return Err(EmbedError::NotFitted);
        }
        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for t in terms(text) {
            if let Some(&id) = self.lookup.get(&t) {
                *tf.entry(id).or_default() += 1.0;
            }
        }
        Ok(SparseVector::normalized(tf.into_iter().map(|(id, c)| (id, c * self.idf[id as usize])).collect()))
    }
}

/// Dense vectors computed elsewhere, keyed by exact text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Precomputed {
    vectors: BTreeMap<String, Vec<f64>>,
}

#[derive(Deserialize)]
struct VectorRecord {
    text: String,
    vector: Vec<f64>,
}

impl Precomputed {
    pub fn new(vectors: BTreeMap<String, Vec<f64>>) -> Self {
        Self { vectors }
    }

    /// One `{"text": ..., "vector": [...]}` record per line.
    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let raw = std::fs::read_to_string(path).map_err(|e| EmbedError::Load(format!("{}: {e}", path.display())))?;
        let mut vectors = BTreeMap::new();
        for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let r: VectorRecord =
                serde_json::from_str(line).map_err(|e| EmbedError::Load(format!("line {}: {e}", i + 1)))?;
            vectors.insert(r.text, r.vector);
        }
        Ok(Self { vectors })
    }
}

impl Embedder for Precomputed {
    fn embed(&self, text: &str) -> Result<SparseVector, EmbedError> {
        let v = self.vectors.get(text).ok_or_else(|| EmbedError::Missing(text.to_string()))?;
        Ok(SparseVector::normalized(v.iter().enumerate().map(|(i, w)| (i as u32, *w)).collect()))
    }
}

/// The embedders an index can be built and persisted with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbedderConfig {
    TfIdf(TfIdf),
    Precomputed(Precomputed),
}

impl EmbedderConfig {
    pub(crate) fn restore(self) -> Self {
        match self {
            EmbedderConfig::TfIdf(t) => EmbedderConfig::TfIdf(t.restore()),
            other => other,
        }
    }
}

impl Embedder for EmbedderConfig {
    fn embed(&self, text: &str) -> Result<SparseVector, EmbedError> {
        match self {
            EmbedderConfig::TfIdf(t) => t.embed(text),
            EmbedderConfig::Precomputed(p) => p.embed(text),
        }
    }
}
