use std::cmp::Ordering;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embed::{EmbedError, Embedder, EmbedderConfig, SparseVector, TfIdf};
use crate::generator::{QaExample, QdExample};
use crate::model::ReasoningType;

pub const INDEX_FORMAT: &str = "successive-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("index is empty")]
    Empty,
    #[error("expected a {expected:?} index, found {found:?}")]
    WrongKind { expected: IndexKind, found: IndexKind },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Format { path: String, line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// Partial decomposition chains keyed by complex question.
    Qd,
    /// Simple question/answer pairs keyed by simple question.
    Qa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "example", rename_all = "snake_case")]
pub enum Payload {
    Qd(QdExample),
    Qa(QaExample),
}

impl Payload {
    pub fn reasoning_type(&self) -> Option<ReasoningType> {
        match self {
            Payload::Qd(e) => e.reasoning_type,
            Payload::Qa(e) => e.reasoning_type,
        }
    }

    pub fn id(&self) -> String {
        match self {
            Payload::Qd(e) => e.id(),
            Payload::Qa(e) => format!("{}@{}", e.source_id, e.question.surface()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_number: Option<usize>,
    pub payload: Payload,
    pub embedding: SparseVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    /// Position of the entry in the index; the stable tie-breaker.
    pub entry: usize,
    pub score: f64,
}

/// Ranked results from the decomposition index.
#[derive(Debug, Clone, PartialEq)]
pub struct QdResults {
    pub results: Vec<RetrievalResult>,
    /// Step actually used when no entry had the requested step.
    pub fallback_step: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: IndexKind,
    entries: usize,
    embedder: EmbedderConfig,
}

/// Immutable embedded collection of demonstrations with an inverted index
/// for cosine queries.
#[derive(Debug, Clone)]
pub struct Index {
    kind: IndexKind,
    embedder: EmbedderConfig,
    entries: Vec<IndexEntry>,
    /// term id -> (entry, weight), entries ascending.
    postings: Vec<Vec<(u32, f64)>>,
}

/// Decomposition index over complex questions; each entry keeps its step.
pub fn build_qd_index(examples: &[QdExample]) -> Result<Index, IndexError> {
    let model = TfIdf::fit(examples.iter().map(|e| e.question.as_str()));
    build_qd_index_with(examples, EmbedderConfig::TfIdf(model))
}

pub fn build_qd_index_with(examples: &[QdExample], embedder: EmbedderConfig) -> Result<Index, IndexError> {
    let entries = examples
        .iter()
        .map(|e| {
            Ok(IndexEntry {
                key: e.question.clone(),
                step_number: Some(e.step_number),
                payload: Payload::Qd(e.clone()),
                embedding: embedder.embed(&e.question)?,
            })
        })
        .collect::<Result<Vec<_>, IndexError>>()?;
    Ok(Index::from_entries(IndexKind::Qd, embedder, entries))
}

/// Answering index over simple questions.
pub fn build_qa_index(examples: &[QaExample]) -> Result<Index, IndexError> {
    let model = TfIdf::fit(examples.iter().map(|e| e.question.surface()));
    build_qa_index_with(examples, EmbedderConfig::TfIdf(model))
}

pub fn build_qa_index_with(examples: &[QaExample], embedder: EmbedderConfig) -> Result<Index, IndexError> {
    let entries = examples
        .iter()
        .map(|e| {
            Ok(IndexEntry {
                key: e.question.surface().to_string(),
                step_number: None,
                payload: Payload::Qa(e.clone()),
                embedding: embedder.embed(e.question.surface())?,
            })
        })
        .collect::<Result<Vec<_>, IndexError>>()?;
    Ok(Index::from_entries(IndexKind::Qa, embedder, entries))
}

impl Index {
    fn from_entries(kind: IndexKind, embedder: EmbedderConfig, entries: Vec<IndexEntry>) -> Self {
        let dims = entries.iter().flat_map(|e| e.embedding.0.iter().map(|(t, _)| *t as usize + 1)).max().unwrap_or(0);
        let mut postings = vec![Vec::new(); dims];
        for (i, e) in entries.iter().enumerate() {
            for &(t, w) in &e.embedding.0 {
                postings[t as usize].push((i as u32, w));
            }
        }
        Self { kind, embedder, entries, postings }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &IndexEntry {
        &self.entries[i]
    }

    pub fn embedder(&self) -> &EmbedderConfig {
        &self.embedder
    }

    pub fn embed(&self, text: &str) -> Result<SparseVector, IndexError> {
        Ok(self.embedder.embed(text)?)
    }

    /// Cosine scores of every entry against `query`, accumulated term by
    /// term in ascending term order.
    pub fn scores(&self, query: &SparseVector) -> Vec<f64> {
        let mut acc = vec![0.0; self.entries.len()];
        for &(t, w) in &query.0 {
            if let Some(list) = self.postings.get(t as usize) {
                for &(e, ew) in list {
                    acc[e as usize] += w * ew;
                }
            }
        }
        acc
    }

    /// Rank `candidates` by score. Among equal scores an entry whose key is
    /// exactly the query text comes first, then the lower entry id.
    fn rank(&self, query_text: &str, scores: &[f64], candidates: impl Iterator<Item = usize>, n: usize) -> Vec<RetrievalResult> {
        let mut keyed: Vec<(f64, bool, usize)> =
            candidates.map(|i| (scores[i], scores[i] > 0.0 && self.entries[i].key == query_text, i)).collect();
        let order = |a: &(f64, bool, usize), b: &(f64, bool, usize)| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2));
        if n == 0 {
            return Vec::new();
        }
        if keyed.len() > n {
            keyed.select_nth_unstable_by(n - 1, order);
            keyed.truncate(n);
        }
        keyed.sort_by(order);
        keyed.into_iter().map(|(score, _, entry)| RetrievalResult { entry, score }).collect()
    }

    fn expect(&self, kind: IndexKind) -> Result<(), IndexError> {
        if self.kind != kind {
            return Err(IndexError::WrongKind { expected: kind, found: self.kind });
        }
        if self.entries.is_empty() {
            return Err(IndexError::Empty);
        }
        Ok(())
    }

    /// Entries for step `k` ranked by similarity to the complex question.
    /// When no entry has step `k`, the nearest available step is used
    /// (the lower one on ties) and reported.
    pub fn query_qd(&self, complex_question: &str, k: usize, n: usize) -> Result<QdResults, IndexError> {
        self.expect(IndexKind::Qd)?;
        let mut steps: Vec<usize> = self.entries.iter().filter_map(|e| e.step_number).collect();
        steps.sort_unstable();
        steps.dedup();
        let step = if steps.binary_search(&k).is_ok() {
            k
        } else {
            *steps.iter().min_by_key(|&&s| (s.abs_diff(k), s)).ok_or(IndexError::Empty)?
        };
        let scores = self.scores(&self.embed(complex_question)?);
        let candidates = (0..self.entries.len()).filter(|&i| self.entries[i].step_number == Some(step));
        Ok(QdResults {
            results: self.rank(complex_question, &scores, candidates, n),
            fallback_step: (step != k).then_some(step),
        })
    }

    pub fn query_qa(&self, simple_question: &str, m: usize) -> Result<Vec<RetrievalResult>, IndexError> {
        self.expect(IndexKind::Qa)?;
        let scores = self.scores(&self.embed(simple_question)?);
        Ok(self.rank(simple_question, &scores, 0..self.entries.len(), m))
    }

    /// Pick `n` of `results` spreading over reasoning types: types take turns
    /// in the order their best result ranks, each contributing its next-best
    /// result. The chosen results keep their rank order.
    pub fn stratified(&self, results: &[RetrievalResult], n: usize) -> Vec<RetrievalResult> {
        let mut groups: Vec<(Option<ReasoningType>, Vec<usize>)> = Vec::new();
        for (pos, r) in results.iter().enumerate() {
            let t = self.entries[r.entry].payload.reasoning_type();
            match groups.iter_mut().find(|(g, _)| *g == t) {
                Some((_, members)) => members.push(pos),
                None => groups.push((t, vec![pos])),
            }
        }
        let mut chosen = Vec::new();
        let mut round = 0;
        while chosen.len() < n.min(results.len()) {
            for (_, members) in &groups {
                if chosen.len() == n {
                    break;
                }
                if let Some(&pos) = members.get(round) {
                    chosen.push(pos);
                }
            }
            round += 1;
        }
        chosen.sort_unstable();
        chosen.into_iter().map(|p| results[p].clone()).collect()
    }

    /// Header line then one entry per line.
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let io = |source| IndexError::Io { path: path.display().to_string(), source };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = BufWriter::new(file);
        let header = Header {
            format: INDEX_FORMAT.into(),
            version: INDEX_VERSION,
            kind: self.kind,
            entries: self.entries.len(),
            embedder: self.embedder.clone(),
        };
        let line = |v: &dyn erased::Json| v.to_line();
        writeln!(w, "{}", line(&header)).map_err(io)?;
        for e in &self.entries {
            writeln!(w, "{}", line(e)).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let shown = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| IndexError::Io { path: shown.clone(), source })?;
        let mut lines = std::io::BufReader::new(file).lines();
        let bad = |line: usize, reason: String| IndexError::Format { path: shown.clone(), line, reason };
        let first = lines
            .next()
            .ok_or_else(|| bad(1, "missing header".into()))?
            .map_err(|source| IndexError::Io { path: shown.clone(), source })?;
        let header: Header = serde_json::from_str(&first).map_err(|e| bad(1, e.to_string()))?;
        if header.format != INDEX_FORMAT || header.version != INDEX_VERSION {
            return Err(bad(1, format!("unsupported format {} v{}", header.format, header.version)));
        }
        let mut entries = Vec::with_capacity(header.entries);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|source| IndexError::Io { path: shown.clone(), source })?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str::<IndexEntry>(&line).map_err(|e| bad(i + 2, e.to_string()))?);
        }
        if entries.len() != header.entries {
            return Err(bad(0, format!("header promises {} entries, found {}", header.entries, entries.len())));
        }
        Ok(Self::from_entries(header.kind, header.embedder.restore(), entries))
    }
}

mod erased {
    pub trait Json {
        fn to_line(&self) -> String;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_line(&self) -> String {
            serde_json::to_string(self).expect("index records serialize")
        }
    }
}

/// Reference ranking by a full linear scan, for checking the inverted index.
pub fn linear_scan(index: &Index, query: &SparseVector, n: usize) -> Vec<RetrievalResult> {
    let mut all: Vec<RetrievalResult> = index
        .entries()
        .iter()
        .enumerate()
        .map(|(entry, e)| RetrievalResult { entry, score: query.dot(&e.embedding) })
        .collect();
    all.sort_by(|a, b| match b.score.total_cmp(&a.score) {
        Ordering::Equal => a.entry.cmp(&b.entry),
        o => o,
    });
    all.truncate(n);
    all
}
