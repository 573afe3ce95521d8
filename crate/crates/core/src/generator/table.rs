//! Table files: tab/comma separated text with a header row, or JSON records
//! `{id, headers, column_types?, rows}` (one per line for `.jsonl`).

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{ModelError, Table};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: String, line: u64, reason: String },
    #[error("{path}: expected exactly one table, found {found}")]
    NotSingle { path: String, found: usize },
    #[error("{path}: unsupported table format (expected .tsv, .csv, .json or .jsonl)")]
    UnknownFormat { path: String },
}

pub fn load_table(path: &Path) -> Result<Table, TableError> {
    let mut tables = load_table_file(path)?;
    if tables.len() != 1 {
        return Err(TableError::NotSingle { path: path.display().to_string(), found: tables.len() });
    }
    Ok(tables.remove(0))
}

/// Load every table in a file; `.jsonl` files may hold several.
pub fn load_table_file(path: &Path) -> Result<Vec<Table>, TableError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| TableError::Io { path: shown.clone(), source })?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => parse_delimited(&shown, &id, &text, b'\t').map(|t| vec![t]),
        Some("csv") => parse_delimited(&shown, &id, &text, b',').map(|t| vec![t]),
        Some("json") => serde_json::from_str(&text)
            .map(|t| vec![t])
            .map_err(|e| TableError::Malformed { path: shown, line: e.line() as u64, reason: e.to_string() }),
        Some("jsonl") => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| TableError::Malformed {
                    path: shown.clone(),
                    line: i as u64 + 1,
                    reason: e.to_string(),
                })
            })
            .collect(),
        _ => Err(TableError::UnknownFormat { path: shown }),
    }
}

pub fn parse_delimited(path: &str, id: &str, text: &str, delimiter: u8) -> Result<Table, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| TableError::Malformed { path: path.into(), line: 1, reason: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TableError::Malformed {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(TableError::Malformed {
                path: path.into(),
                line,
                reason: format!("row has {} cells, expected {}", record.len(), headers.len()),
            });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Table::infer(id, headers, rows).map_err(|e| model_error(path, e))
}

fn model_error(path: &str, e: ModelError) -> TableError {
    let line = match &e {
        ModelError::RaggedRow { row, .. } | ModelError::BadCell { row, .. } => *row as u64 + 2,
        _ => 0,
    };
    TableError::Malformed { path: path.into(), line, reason: e.to_string() }
}

/// Table files in a directory, sorted by file name.
pub fn table_paths(dir: &Path) -> Result<Vec<PathBuf>, TableError> {
    let entries =
        std::fs::read_dir(dir).map_err(|source| TableError::Io { path: dir.display().to_string(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("tsv" | "csv" | "json" | "jsonl")))
        .collect();
    paths.sort();
    Ok(paths)
}
