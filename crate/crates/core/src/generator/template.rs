//! Row-to-sentence templates.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ColumnType, Table};

const BUILTIN: &str = include_str!("../../templates/default.toml");

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("placeholder {{{0}}} does not name a column")]
    Unresolved(String),
    #[error("unclosed placeholder in pattern {0:?}")]
    Unclosed(String),
    #[error("reading templates from {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing templates: {0}")]
    Parse(#[from] toml::de::Error),
}

/// A sentence pattern with `{Column}` placeholders, instantiated once per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub pattern: String,
    /// Column types the table must have for the template to apply.
    #[serde(default)]
    pub applicable_when: BTreeMap<String, ColumnType>,
}

impl Template {
    pub fn placeholders(&self) -> Result<Vec<String>, TemplateError> {
        let mut out = Vec::new();
        let mut rest = self.pattern.as_str();
        while let Some(open) = rest.find('{') {
            let close = rest[open..].find('}').ok_or_else(|| TemplateError::Unclosed(self.pattern.clone()))?;
            out.push(rest[open + 1..open + close].to_string());
            rest = &rest[open + close + 1..];
        }
        Ok(out)
    }

    pub fn applies_to(&self, table: &Table) -> bool {
        let Ok(names) = self.placeholders() else {
            return false;
        };
        names.iter().all(|n| table.column_index(n).is_some())
            && self
                .applicable_when
                .iter()
                .all(|(col, kind)| table.column_index(col).is_some_and(|i| table.column_type(i) == *kind))
    }

    /// `The round was {Round}, the date was {Date} and the venue was {Venue}.`
    pub fn generic(table: &Table) -> Self {
        let clauses: Vec<String> =
            table.headers().iter().map(|h| format!("the {} was {{{h}}}", h.to_lowercase())).collect();
        let body = crate::text::natural_list(&clauses);
        let mut pattern = String::with_capacity(body.len() + 1);
        let mut chars = body.chars();
        if let Some(first) = chars.next() {
            pattern.extend(first.to_uppercase());
            pattern.push_str(chars.as_str());
        }
        pattern.push('.');
        Self { name: "generic".into(), pattern, applicable_when: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    #[serde(default)]
    pub templates: Vec<Template>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        toml::from_str(BUILTIN).expect("built-in templates parse")
    }

    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TemplateError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    /// First applicable template, else the generic one.
    pub fn select(&self, table: &Table) -> Template {
        self.templates.iter().find(|t| t.applies_to(table)).cloned().unwrap_or_else(|| Template::generic(table))
    }
}

/// One sentence per row, joined with spaces in row order.
pub fn verbalize(table: &Table, template: &Template) -> Result<String, TemplateError> {
    let names = template.placeholders()?;
    let columns = names
        .iter()
        .map(|n| table.column_index(n).ok_or_else(|| TemplateError::Unresolved(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let sentences: Vec<String> = table
        .rows()
        .iter()
        .map(|row| {
            let mut sentence = template.pattern.clone();
            for (name, &col) in names.iter().zip(&columns) {
                sentence = sentence.replacen(&format!("{{{name}}}"), &row[col], 1);
            }
            sentence
        })
        .collect();
    Ok(sentences.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cup_row() -> Table {
        Table::infer(
            "cup",
            ["Round", "Date", "Opponent", "Venue", "Attendance"].map(String::from).to_vec(),
            vec![["R2 1st Leg", "26 Sep 1990", "Walsall", "A", "5,666"].map(String::from).to_vec()],
        )
        .unwrap()
    }

    #[test]
    fn builtin_cup_sentence() {
        let t = cup_row();
        let template = TemplateSet::builtin().select(&t);
        assert_eq!(template.name, "cup_fixture");
        let passage = verbalize(&t, &template).unwrap();
        assert_eq!(
            passage,
            "In round R2 1st Leg, on 26 Sep 1990, the opponent was Walsall at venue A with attendance 5,666."
        );
        for part in ["In round R2 1st Leg", "on 26 Sep 1990", "opponent was Walsall", "venue A", "attendance 5,666"] {
            assert!(passage.contains(part));
        }
    }

    #[test]
    fn generic_fallback_mentions_every_cell() {
        let t = Table::infer(
            "x",
            vec!["Name".into(), "Goals".into()],
            vec![vec!["Ann".into(), "3".into()], vec!["Bo".into(), "5".into()]],
        )
        .unwrap();
        let template = TemplateSet::builtin().select(&t);
        assert_eq!(template.name, "generic");
        let passage = verbalize(&t, &template).unwrap();
        assert_eq!(passage, "The name was Ann and the goals was 3. The name was Bo and the goals was 5.");
    }

    #[test]
    fn empty_table_and_bad_placeholders() {
        let t = Table::infer("e", vec!["A".into()], vec![]).unwrap();
        assert_eq!(verbalize(&t, &Template::generic(&t)).unwrap(), "");
        let bad = Template { name: "b".into(), pattern: "{Missing} here".into(), applicable_when: BTreeMap::new() };
        assert!(matches!(verbalize(&t, &bad), Err(TemplateError::Unresolved(n)) if n == "Missing"));
        assert!(!bad.applies_to(&t));
    }

    #[test]
    fn templates_load_from_toml() {
        let set = TemplateSet::from_toml(
            r#"
            [[templates]]
            name = "scores"
            pattern = "{Name} scored {Goals}."
            [templates.applicable_when]
            Goals = "number"
            "#,
        )
        .unwrap();
        assert_eq!(set.templates[0].applicable_when["Goals"], ColumnType::Number);
    }
}
