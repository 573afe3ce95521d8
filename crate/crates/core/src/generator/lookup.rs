//! Natural simple questions that a table answers directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Answer, ColumnType, Table};
use crate::text::{natural_list, parse_date, parse_quantity, pluralize};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LookupError {
    #[error("table has no column {0:?}")]
    UnknownColumn(String),
    #[error("cannot compare text column {0:?} by order")]
    UnorderedColumn(String),
    #[error("threshold {value:?} does not parse for column {column:?}")]
    BadThreshold { column: String, value: String },
    #[error("lookup matched no rows")]
    Empty,
}

/// A row filter. `Above`/`Below` mean greater/less for numbers and
/// later/earlier for dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Filter {
    Equals { column: String, value: String },
    Above { column: String, value: String },
    Below { column: String, value: String },
}

impl Filter {
    pub fn column(&self) -> &str {
        match self {
            Filter::Equals { column, .. } | Filter::Above { column, .. } | Filter::Below { column, .. } => column,
        }
    }

    fn comparison_words(&self, kind: ColumnType) -> &'static str {
        match (self, kind) {
            (Filter::Above { .. }, ColumnType::Date) => "later than",
            (Filter::Below { .. }, ColumnType::Date) => "earlier than",
            (Filter::Above { .. }, _) => "greater than",
            (Filter::Below { .. }, _) => "less than",
            (Filter::Equals { .. }, _) => "",
        }
    }

    /// `venue was A`, `attendance was less than 20,000`.
    pub fn when_phrase(&self, table: &Table) -> Result<String, LookupError> {
        let col = column_index(table, self.column())?;
        let name = self.column().to_lowercase();
        Ok(match self {
            Filter::Equals { value, .. } => format!("{name} was {value}"),
            Filter::Above { value, .. } | Filter::Below { value, .. } => {
                format!("{name} was {} {value}", self.comparison_words(table.column_type(col)))
            }
        })
    }

    /// `venue as A`, `attendance greater than 30,000`.
    pub fn have_phrase(&self, table: &Table) -> Result<String, LookupError> {
        let col = column_index(table, self.column())?;
        let name = self.column().to_lowercase();
        Ok(match self {
            Filter::Equals { value, .. } => format!("{name} as {value}"),
            Filter::Above { value, .. } | Filter::Below { value, .. } => {
                format!("{name} {} {value}", self.comparison_words(table.column_type(col)))
            }
        })
    }

    /// Compiled predicate over rows.
    fn matcher(&self, table: &Table) -> Result<RowTest, LookupError> {
        let col = column_index(table, self.column())?;
        let kind = table.column_type(col);
        let (value, want) = match self {
            Filter::Equals { value, .. } => (value, std::cmp::Ordering::Equal),
            Filter::Above { value, .. } => (value, std::cmp::Ordering::Greater),
            Filter::Below { value, .. } => (value, std::cmp::Ordering::Less),
        };
        let bad = || LookupError::BadThreshold { column: self.column().to_string(), value: value.clone() };
        let key = match kind {
            ColumnType::Number => Key::Number(parse_quantity(value).ok_or_else(bad)?.value),
            ColumnType::Date => Key::Date(parse_date(value).ok_or_else(bad)?),
            ColumnType::Text if want == std::cmp::Ordering::Equal => Key::Text(value.clone()),
            ColumnType::Text => return Err(LookupError::UnorderedColumn(self.column().to_string())),
        };
        Ok(RowTest { col, key, want })
    }
}

enum Key {
    Number(f64),
    Date(chrono::NaiveDate),
    Text(String),
}

struct RowTest {
    col: usize,
    key: Key,
    want: std::cmp::Ordering,
}

impl RowTest {
    fn matches(&self, row: &[String]) -> bool {
        let cell = &row[self.col];
        if cell.is_empty() {
            return false;
        }
        let order = match &self.key {
            Key::Number(k) => parse_quantity(cell).map(|q| q.value.total_cmp(k)),
            Key::Date(k) => parse_date(cell).map(|d| d.cmp(k)),
            Key::Text(k) => Some(cell.as_str().cmp(k.as_str())),
        };
        order == Some(self.want)
    }
}

/// Table-answerable question, kept on gold steps so chains can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lookup {
    /// Every distinct value of a column.
    All { column: String },
    /// Values of `target` on rows passing every filter.
    Where { target: String, filters: Vec<Filter>, singular: bool },
    /// Members of `among` (values of `target`) on rows passing the filter.
    OutOf { target: String, among: Vec<String>, filter: Filter },
    /// Keys whose rows hold exactly `count` distinct `target` values.
    KeyWithCount { key: String, target: String, count: usize },
}

impl Lookup {
    pub fn question(&self, table: &Table) -> Result<String, LookupError> {
        Ok(match self {
            Lookup::All { column } => {
                column_index(table, column)?;
                format!("What are all the {}?", pluralize(&column.to_lowercase()))
            }
            Lookup::Where { target, filters, singular } => {
                column_index(table, target)?;
                let conds = filters.iter().map(|f| f.when_phrase(table)).collect::<Result<Vec<_>, _>>()?;
                let target = target.to_lowercase();
                if *singular {
                    format!("What was the {target} when {}?", conds.join(" and "))
                } else {
                    format!("What are the {} when {}?", pluralize(&target), conds.join(" and "))
                }
            }
            Lookup::OutOf { target, among, filter } => {
                column_index(table, target)?;
                format!(
                    "Out of {}, which {} have {}?",
                    natural_list(among),
                    pluralize(&target.to_lowercase()),
                    filter.have_phrase(table)?
                )
            }
            Lookup::KeyWithCount { key, target, count } => {
                column_index(table, key)?;
                column_index(table, target)?;
                format!("Which {} has {count} {}?", key.to_lowercase(), pluralize(&target.to_lowercase()))
            }
        })
    }

    pub fn execute(&self, table: &Table) -> Result<Answer, LookupError> {
        let values = match self {
            Lookup::All { column } => table.distinct(column_index(table, column)?),
            Lookup::Where { target, filters, .. } => {
                let col = column_index(table, target)?;
                let tests = filters.iter().map(|f| f.matcher(table)).collect::<Result<Vec<_>, _>>()?;
                let rows = table.rows().iter().filter(|r| tests.iter().all(|t| t.matches(r)));
                collect_values(table, col, rows)
            }
            Lookup::OutOf { target, among, filter } => {
                let col = column_index(table, target)?;
                let test = filter.matcher(table)?;
                let rows = table.rows().iter().filter(|r| among.contains(&r[col]) && test.matches(r));
                collect_values(table, col, rows)
            }
            Lookup::KeyWithCount { key, target, count } => {
                let k = column_index(table, key)?;
                let t = column_index(table, target)?;
                table
                    .distinct(k)
                    .into_iter()
                    .filter(|value| distinct_targets(table, k, value, t).len() == *count)
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(LookupError::Empty);
        }
        Answer::spans(values).map_err(|_| LookupError::Empty)
    }
}

/// Numeric columns report one value per matching row; other columns report
/// distinct values.
fn collect_values<'a>(table: &Table, col: usize, rows: impl Iterator<Item = &'a Vec<String>>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let per_row = table.column_type(col) == ColumnType::Number;
    for row in rows {
        let v = &row[col];
        if !v.is_empty() && (per_row || !out.contains(v)) {
            out.push(v.clone());
        }
    }
    out
}

/// Distinct `target` values on rows whose `key` column equals `value`.
pub fn distinct_targets(table: &Table, key: usize, value: &str, target: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for row in table.rows().iter().filter(|r| r[key] == value) {
        let v = &row[target];
        if !v.is_empty() && !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

fn column_index(table: &Table, name: &str) -> Result<usize, LookupError> {
    table.column_index(name).ok_or_else(|| LookupError::UnknownColumn(name.to_string()))
}
