//! Shared value types: answers, simple questions, reasoning chains, complex
//! examples, the reasoning-type taxonomy and typed tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Lookup;
use crate::symbolic::{parse_symbolic, SymbolicExpr};
use crate::text;

/// Default cap on the number of steps in a chain.
pub const DEFAULT_MAX_STEPS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("span answers need at least one span")]
    EmptySpans,
    #[error("span answers cannot contain empty spans")]
    EmptySpan,
    #[error("quantity value must be finite, got {0}")]
    NonFinite(f64),
    #[error("question {0:?} is marked symbolic but does not parse as a calculator call")]
    NotSymbolic(String),
    #[error("calculator steps must carry a symbolic question: {0:?}")]
    CalculatorNeedsSymbolic(String),
    #[error("gold chain must be terminated with a final answer")]
    Unterminated,
    #[error("chain has {steps} steps, more than the limit of {limit}")]
    TooManySteps { steps: usize, limit: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("column {column:?} is typed {kind} but cell {value:?} in row {row} does not parse")]
    BadCell { column: String, kind: &'static str, row: usize, value: String },
    #[error("table needs {headers} column types, got {types}")]
    ColumnTypeCount { headers: usize, types: usize },
    #[error("unknown reasoning type {0:?}")]
    UnknownReasoningType(String),
}

/// Render a finite value without exponent or trailing zeros.
pub fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Quantity {
    pub fn new(value: f64, unit: Option<String>) -> Result<Self, ModelError> {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(value));
        }
        // -0.0 and 0.0 must compare and render the same.
        let value = if value == 0.0 { 0.0 } else { value };
        Ok(Self { value, unit })
    }

    pub fn unitless(value: f64) -> Result<Self, ModelError> {
        Self::new(value, None)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let number = format_number(self.value);
        match self.unit.as_deref() {
            None => f.write_str(&number),
            Some("%") => write!(f, "{number}%"),
            Some(unit) => write!(f, "{number}-{unit}"),
        }
    }
}

/// The universal return type of a question: a list of spans, a number with
/// optional unit, or free text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnswerRepr", into = "AnswerRepr")]
pub enum Answer {
    Spans(Vec<String>),
    Quantity(Quantity),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AnswerRepr {
    Spans {
        spans: Vec<String>,
    },
    Quantity {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<String>,
    },
    Text {
        text: String,
    },
}

impl TryFrom<AnswerRepr> for Answer {
    type Error = ModelError;

    fn try_from(repr: AnswerRepr) -> Result<Self, Self::Error> {
        match repr {
            AnswerRepr::Spans { spans } => Answer::spans(spans),
            AnswerRepr::Quantity { value, unit } => Quantity::new(value, unit).map(Answer::Quantity),
            AnswerRepr::Text { text } => Ok(Answer::Text(text)),
        }
    }
}

impl From<Answer> for AnswerRepr {
    fn from(answer: Answer) -> Self {
        match answer {
            Answer::Spans(spans) => AnswerRepr::Spans { spans },
            Answer::Quantity(q) => AnswerRepr::Quantity { value: q.value, unit: q.unit },
            Answer::Text(text) => AnswerRepr::Text { text },
        }
    }
}

impl Answer {
    pub fn spans<I, S>(spans: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let spans: Vec<String> = spans.into_iter().map(Into::into).collect();
        if spans.is_empty() {
            return Err(ModelError::EmptySpans);
        }
        if spans.iter().any(String::is_empty) {
            return Err(ModelError::EmptySpan);
        }
        Ok(Answer::Spans(spans))
    }

    pub fn span(span: impl Into<String>) -> Result<Self, ModelError> {
        Self::spans([span.into()])
    }

    pub fn number(value: f64) -> Result<Self, ModelError> {
        Quantity::unitless(value).map(Answer::Quantity)
    }

    pub fn text(text: impl Into<String>) -> Self {
        Answer::Text(text.into())
    }

    /// Parse a model generation. Semicolons separate spans; anything else is
    /// kept as a single span so that `render` reproduces the generation.
    /// Blank generations become empty text.
    pub fn from_generation(raw: &str) -> Self {
        let spans: Vec<String> = raw
            .split(';')
            .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
            .filter(|s| !s.is_empty())
            .collect();
        if spans.is_empty() {
            Answer::Text(String::new())
        } else {
            Answer::Spans(spans)
        }
    }

    /// Gold answers written as natural lists (`"a, b and c"`).
    pub fn from_natural_list(raw: &str) -> Self {
        Answer::spans(text::split_list_answer(raw)).unwrap_or_else(|_| Answer::Text(String::new()))
    }

    /// Canonical one-line surface, as it appears in prompts and chains.
    pub fn render(&self) -> String {
        match self {
            Answer::Spans(spans) => spans.join("; "),
            Answer::Quantity(q) => q.to_string(),
            Answer::Text(t) => t.clone(),
        }
    }

    /// Spans used for scoring. Quantities and text each form one span.
    pub fn scoring_spans(&self) -> Vec<String> {
        match self {
            Answer::Spans(spans) => spans.clone(),
            Answer::Quantity(q) => vec![q.to_string()],
            Answer::Text(t) => vec![t.clone()],
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Answer::Text(t) if t.trim().is_empty())
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionForm {
    Natural,
    Symbolic,
}

/// One simple question `q_k`. Symbolic questions keep their parsed call.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleQuestion {
    surface: String,
    parsed: Option<SymbolicExpr>,
}

impl SimpleQuestion {
    pub fn natural(surface: impl Into<String>) -> Self {
        Self { surface: surface.into(), parsed: None }
    }

    pub fn symbolic(expr: SymbolicExpr) -> Self {
        Self { surface: expr.render(), parsed: Some(expr) }
    }

    /// Classify free text: calculator calls become symbolic, everything else
    /// (including malformed calls) stays natural.
    pub fn classify(surface: &str) -> Self {
        let surface = surface.trim();
        match parse_symbolic(surface) {
            Ok(Some(expr)) => Self { surface: surface.to_string(), parsed: Some(expr) },
            _ => Self::natural(surface),
        }
    }

    pub fn with_form(surface: &str, form: QuestionForm) -> Result<Self, ModelError> {
        match form {
            QuestionForm::Natural => Ok(Self::natural(surface)),
            QuestionForm::Symbolic => match parse_symbolic(surface) {
                Ok(Some(expr)) => Ok(Self { surface: surface.to_string(), parsed: Some(expr) }),
                _ => Err(ModelError::NotSymbolic(surface.to_string())),
            },
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn form(&self) -> QuestionForm {
        if self.parsed.is_some() {
            QuestionForm::Symbolic
        } else {
            QuestionForm::Natural
        }
    }

    pub fn parsed(&self) -> Option<&SymbolicExpr> {
        self.parsed.as_ref()
    }

    pub fn is_symbolic(&self) -> bool {
        self.parsed.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSource {
    Lm,
    Calculator,
    Gold,
}

/// How a gold step was produced, kept so the chain can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOrigin {
    Lookup(Lookup),
    Calculator(SymbolicExpr),
}

/// One `(q_k, a_k)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepRepr", into = "StepRepr")]
pub struct Step {
    pub question: SimpleQuestion,
    pub answer: Answer,
    pub source: StepSource,
    pub origin: Option<StepOrigin>,
}

#[derive(Serialize, Deserialize)]
struct StepRepr {
    q: String,
    form: QuestionForm,
    a: Answer,
    source: StepSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<StepOrigin>,
}

impl TryFrom<StepRepr> for Step {
    type Error = ModelError;

    fn try_from(r: StepRepr) -> Result<Self, Self::Error> {
        let question = SimpleQuestion::with_form(&r.q, r.form)?;
        let step = Step { question, answer: r.a, source: r.source, origin: r.origin };
        step.validate()?;
        Ok(step)
    }
}

impl From<Step> for StepRepr {
    fn from(s: Step) -> Self {
        StepRepr {
            form: s.question.form(),
            q: s.question.surface,
            a: s.answer,
            source: s.source,
            origin: s.origin,
        }
    }
}

impl Step {
    pub fn new(question: SimpleQuestion, answer: Answer, source: StepSource) -> Result<Self, ModelError> {
        let step = Self { question, answer, source, origin: None };
        step.validate()?;
        Ok(step)
    }

    pub fn with_origin(mut self, origin: StepOrigin) -> Self {
        self.origin = Some(origin);
        self
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.source == StepSource::Calculator && !self.question.is_symbolic() {
            return Err(ModelError::CalculatorNeedsSymbolic(self.question.surface.clone()));
        }
        Ok(())
    }
}

/// The latent reasoning record: ordered steps plus an optional final answer.
/// A chain is terminated exactly when it carries a final answer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Chain {
    pub steps: Vec<Step>,
    #[serde(rename = "final", default)]
    pub final_answer: Option<Answer>,
}

impl Chain {
    pub fn new(steps: Vec<Step>, final_answer: Option<Answer>) -> Self {
        Self { steps, final_answer }
    }

    pub fn terminated(&self) -> bool {
        self.final_answer.is_some()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn check_len(&self, limit: usize) -> Result<(), ModelError> {
        if self.steps.len() > limit {
            return Err(ModelError::TooManySteps { steps: self.steps.len(), limit });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningType {
    Filter,
    Count,
    Comparison,
    Difference,
    Negation,
    Intersection,
    Sum,
    Sort,
    SortFilter,
    DifferenceSort,
    SumSort,
    CountFilter,
    GatherCount,
    SumCount,
    DifferenceCount,
    SortCount,
    ComparisonCount,
}

impl ReasoningType {
    pub const ALL: [ReasoningType; 17] = [
        ReasoningType::Filter,
        ReasoningType::Count,
        ReasoningType::Comparison,
        ReasoningType::Difference,
        ReasoningType::Negation,
        ReasoningType::Intersection,
        ReasoningType::Sum,
        ReasoningType::Sort,
        ReasoningType::SortFilter,
        ReasoningType::DifferenceSort,
        ReasoningType::SumSort,
        ReasoningType::CountFilter,
        ReasoningType::GatherCount,
        ReasoningType::SumCount,
        ReasoningType::DifferenceCount,
        ReasoningType::SortCount,
        ReasoningType::ComparisonCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReasoningType::Filter => "filter",
            ReasoningType::Count => "count",
            ReasoningType::Comparison => "comparison",
            ReasoningType::Difference => "difference",
            ReasoningType::Negation => "negation",
            ReasoningType::Intersection => "intersection",
            ReasoningType::Sum => "sum",
            ReasoningType::Sort => "sort",
            ReasoningType::SortFilter => "sort_filter",
            ReasoningType::DifferenceSort => "difference_sort",
            ReasoningType::SumSort => "sum_sort",
            ReasoningType::CountFilter => "count_filter",
            ReasoningType::GatherCount => "gather_count",
            ReasoningType::SumCount => "sum_count",
            ReasoningType::DifferenceCount => "difference_count",
            ReasoningType::SortCount => "sort_count",
            ReasoningType::ComparisonCount => "comparison_count",
        }
    }

    /// Title-case label used in reports, e.g. `Sort-Filter`.
    pub fn label(self) -> String {
        self.as_str()
            .split('_')
            .map(|w| {
                let mut c = w.chars();
                c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
            })
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn is_higher_order(self) -> bool {
        self.as_str().contains('_')
    }
}

impl fmt::Display for ReasoningType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReasoningType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ReasoningType::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| ModelError::UnknownReasoningType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub table: String,
    pub generator: String,
}

/// A complex question with its passage and gold chain. `reasoning_type` is
/// `None` for annotated questions outside the synthetic taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExampleRecord", into = "ExampleRecord")]
pub struct ComplexExample {
    pub id: String,
    pub passage: String,
    pub question: String,
    pub chain: Chain,
    pub reasoning_type: Option<ReasoningType>,
    pub provenance: Provenance,
    /// Further acceptable gold answers; scoring takes the best match.
    pub alternatives: Vec<Answer>,
}

/// Line-delimited corpus record.
#[derive(Serialize, Deserialize)]
struct ExampleRecord {
    id: String,
    passage: String,
    question: String,
    reasoning_type: Option<ReasoningType>,
    chain: Vec<Step>,
    answer: Answer,
    #[serde(default)]
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    alt_answers: Vec<Answer>,
}

impl TryFrom<ExampleRecord> for ComplexExample {
    type Error = ModelError;

    fn try_from(r: ExampleRecord) -> Result<Self, Self::Error> {
        Ok(ComplexExample {
            id: r.id,
            passage: r.passage,
            question: r.question,
            chain: Chain::new(r.chain, Some(r.answer)),
            reasoning_type: r.reasoning_type,
            provenance: r.provenance,
            alternatives: r.alt_answers,
        })
    }
}

impl From<ComplexExample> for ExampleRecord {
    fn from(e: ComplexExample) -> Self {
        ExampleRecord {
            id: e.id,
            passage: e.passage,
            question: e.question,
            reasoning_type: e.reasoning_type,
            answer: e.chain.final_answer.unwrap_or_else(|| Answer::text("")),
            chain: e.chain.steps,
            provenance: e.provenance,
            alt_answers: e.alternatives,
        }
    }
}

impl ComplexExample {
    pub fn final_answer(&self) -> &Answer {
        self.chain.final_answer.as_ref().expect("gold chains are terminated")
    }

    /// All acceptable gold answers, primary first.
    pub fn gold_answers(&self) -> impl Iterator<Item = &Answer> {
        self.chain.final_answer.iter().chain(self.alternatives.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Text,
    Number,
    Date,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
            ColumnType::Date => "date",
        }
    }
}

/// Typed semi-structured table. Rows are rectangular and typed columns parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr")]
pub struct Table {
    id: String,
    headers: Vec<String>,
    column_types: Vec<ColumnType>,
    rows: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct TableRepr {
    id: String,
    headers: Vec<String>,
    #[serde(default)]
    column_types: Option<Vec<ColumnType>>,
    rows: Vec<Vec<String>>,
}

impl TryFrom<TableRepr> for Table {
    type Error = ModelError;

    fn try_from(r: TableRepr) -> Result<Self, Self::Error> {
        match r.column_types {
            Some(types) => Table::new(r.id, r.headers, types, r.rows),
            None => Table::infer(r.id, r.headers, r.rows),
        }
    }
}

impl Table {
    pub fn new(
        id: impl Into<String>,
        headers: Vec<String>,
        column_types: Vec<ColumnType>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, ModelError> {
        if column_types.len() != headers.len() {
            return Err(ModelError::ColumnTypeCount { headers: headers.len(), types: column_types.len() });
        }
        check_rectangular(&headers, &rows)?;
        let rows: Vec<Vec<String>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.trim().to_string()).collect())
            .collect();
        for (col, kind) in column_types.iter().enumerate() {
            let parses: fn(&str) -> bool = match kind {
                ColumnType::Text => continue,
                ColumnType::Number => |c| text::parse_quantity(c).is_some(),
                ColumnType::Date => |c| text::parse_date(c).is_some(),
            };
            for (r, row) in rows.iter().enumerate() {
                let cell = &row[col];
                if !cell.is_empty() && !parses(cell) {
                    return Err(ModelError::BadCell {
                        column: headers[col].clone(),
                        kind: kind.as_str(),
                        row: r,
                        value: cell.clone(),
                    });
                }
            }
        }
        Ok(Self { id: id.into(), headers, column_types, rows })
    }

    /// Build a table and infer column types: date when every non-empty cell
    /// is a date, number when every non-empty cell is a quantity, else text.
    pub fn infer(id: impl Into<String>, headers: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, ModelError> {
        check_rectangular(&headers, &rows)?;
        let types = (0..headers.len())
            .map(|col| {
                let cells: Vec<&str> =
                    rows.iter().map(|r| r[col].trim()).filter(|c| !c.is_empty()).collect();
                infer_column_type(&cells)
            })
            .collect();
        Self::new(id, headers, types, rows)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn column_types(&self) -> &[ColumnType] {
        &self.column_types
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column_type(&self, col: usize) -> ColumnType {
        self.column_types[col]
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.rows[row][col]
    }

    /// Distinct non-empty values of a column in first-occurrence order.
    pub fn distinct(&self, col: usize) -> Vec<String> {
        let mut seen = Vec::new();
        for row in &self.rows {
            let v = &row[col];
            if !v.is_empty() && !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }
}

fn check_rectangular(headers: &[String], rows: &[Vec<String>]) -> Result<(), ModelError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != headers.len() {
            return Err(ModelError::RaggedRow { row: i, found: row.len(), expected: headers.len() });
        }
    }
    Ok(())
}

/// Fraction of non-empty cells that must parse for a numeric column.
pub const NUMBER_COLUMN_THRESHOLD: f64 = 0.9;

fn infer_column_type(cells: &[&str]) -> ColumnType {
    if cells.is_empty() {
        return ColumnType::Text;
    }
    if cells.iter().all(|c| text::parse_date(c).is_some()) {
        return ColumnType::Date;
    }
    let numeric = cells.iter().filter(|c| text::parse_quantity(c).is_some()).count();
    // A numeric column must also satisfy the every-cell invariant, so the
    // threshold only matters when it is met by all cells.
    if numeric as f64 >= NUMBER_COLUMN_THRESHOLD * cells.len() as f64 && numeric == cells.len() {
        ColumnType::Number
    } else {
        ColumnType::Text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{Op, SymbolicExpr};

    #[test]
    fn answer_invariants() {
        assert_eq!(Answer::spans(Vec::<String>::new()), Err(ModelError::EmptySpans));
        assert_eq!(Answer::spans(["a", ""]), Err(ModelError::EmptySpan));
        assert!(matches!(Answer::number(f64::NAN), Err(ModelError::NonFinite(_))));
        let bad: Result<Answer, _> = serde_json::from_str(r#"{"kind":"spans","spans":[]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn answer_json_shape() {
        let a = Answer::Quantity(Quantity::new(42.0, Some("yard".into())).unwrap());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"kind":"quantity","value":42.0,"unit":"yard"}"#);
        assert_eq!(serde_json::from_str::<Answer>(&json).unwrap(), a);
        assert_eq!(a.render(), "42-yard");
    }

    #[test]
    fn generation_round_trips_render() {
        let a = Answer::spans(["Walsall", "Sheffield Wed."]).unwrap();
        assert_eq!(Answer::from_generation(&a.render()), a);
        assert_eq!(Answer::from_generation("  "), Answer::text(""));
        assert_eq!(Answer::from_generation("2 and 3").render(), "2 and 3");
    }

    #[test]
    fn calculator_step_needs_symbolic_question() {
        let err = Step::new(SimpleQuestion::natural("How many?"), Answer::number(3.0).unwrap(), StepSource::Calculator);
        assert!(err.is_err());
        let expr = SymbolicExpr::new(Op::Count, vec!["A".into(), "B".into()]).unwrap();
        let ok = Step::new(SimpleQuestion::symbolic(expr), Answer::number(2.0).unwrap(), StepSource::Calculator);
        assert!(ok.is_ok());
    }

    #[test]
    fn step_json_round_trip() {
        let expr = SymbolicExpr::new(Op::Count, vec!["A".into(), "H".into()]).unwrap();
        let step = Step::new(SimpleQuestion::symbolic(expr.clone()), Answer::number(2.0).unwrap(), StepSource::Gold)
            .unwrap()
            .with_origin(StepOrigin::Calculator(expr));
        let json = serde_json::to_string(&step).unwrap();
        assert!(json.contains(r#""q":"count(A; H)""#));
        assert!(json.contains(r#""form":"symbolic""#));
        assert_eq!(serde_json::from_str::<Step>(&json).unwrap(), step);
        let bad = r#"{"q":"Who?","form":"symbolic","a":{"kind":"text","text":"x"},"source":"lm"}"#;
        assert!(serde_json::from_str::<Step>(bad).is_err());
    }

    #[test]
    fn taxonomy_has_seventeen_members() {
        assert_eq!(ReasoningType::ALL.len(), 17);
        let mut names: Vec<_> = ReasoningType::ALL.iter().map(|t| t.as_str()).collect();
        names.dedup();
        assert_eq!(names.len(), 17);
        assert_eq!(ReasoningType::SortFilter.label(), "Sort-Filter");
        assert_eq!("Comparison-Count".parse::<ReasoningType>().unwrap(), ReasoningType::ComparisonCount);
        assert!("count_argmax".parse::<ReasoningType>().is_err());
    }

    #[test]
    fn table_inference_and_invariants() {
        let headers = vec!["Round".to_string(), "Date".into(), "Attendance".into()];
        let rows = vec![
            vec!["R2 1st Leg".to_string(), "26 Sep 1990".into(), "5,666".into()],
            vec!["QFR".to_string(), "23 Oct 1990".into(), "18,246".into()],
        ];
        let t = Table::infer("t", headers.clone(), rows.clone()).unwrap();
        assert_eq!(t.column_types(), [ColumnType::Text, ColumnType::Date, ColumnType::Number]);

        let mut ragged = rows.clone();
        ragged[1].pop();
        assert!(matches!(Table::infer("t", headers.clone(), ragged), Err(ModelError::RaggedRow { row: 1, .. })));

        let forced = Table::new("t", headers, vec![ColumnType::Number; 3], rows);
        assert!(matches!(forced, Err(ModelError::BadCell { .. })));
    }

    #[test]
    fn chain_termination_follows_final() {
        let mut c = Chain::default();
        assert!(!c.terminated());
        c.final_answer = Some(Answer::text("x"));
        assert!(c.terminated());
        assert!(c.check_len(DEFAULT_MAX_STEPS).is_ok());
    }
}
