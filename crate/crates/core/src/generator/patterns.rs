//! One decomposition pattern per reasoning type.
//!
//! Each pattern enumerates candidate questions over the table's column roles
//! and builds the gold chain by actually running every lookup and calculator
//! call, so a draft exists only if each step has a well-defined answer.

use super::lookup::{Filter, Lookup};
use super::Draft;
use crate::model::{Answer, ColumnType, ReasoningType, SimpleQuestion, Step, StepOrigin, StepSource, Table};
use crate::symbolic::{eval_symbolic, parse_symbolic, Comparator, Condition, MalformedExpr, Op, SymbolicExpr};
use crate::text::{ordinal_word, parse_date, parse_quantity, pluralize};

/// Distinct values of a key column considered per pattern.
const MAX_KEY_VALUES: usize = 8;
/// Thresholds tried per ordered column.
const MAX_THRESHOLDS: usize = 3;
/// Largest k used for top/bottom.
const MAX_RANK: usize = 3;
/// Sort-count enumerates every key value, so the key column must be small.
const MAX_SORT_COUNT_KEYS: usize = 3;

/// Columns usable in each role. Every listed column is fully populated and
/// its cells are safe to use as calculator arguments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnRoles {
    /// Categorical text columns with at least two distinct values.
    pub keys: Vec<usize>,
    pub numbers: Vec<usize>,
    pub dates: Vec<usize>,
    /// Numeric columns holding percentages.
    pub percents: Vec<usize>,
    /// Numeric columns holding a total that other columns are parts of.
    pub totals: Vec<usize>,
}

pub fn roles(table: &Table) -> ColumnRoles {
    let mut r = ColumnRoles::default();
    for (col, header) in table.headers().iter().enumerate() {
        let usable = !table.rows().is_empty()
            && table.rows().iter().all(|row| !row[col].is_empty() && safe_cell(&row[col]))
            && table.distinct(col).len() >= 2;
        if !usable {
            continue;
        }
        let lower = header.to_lowercase();
        match table.column_type(col) {
            ColumnType::Text => r.keys.push(col),
            ColumnType::Date => r.dates.push(col),
            ColumnType::Number => {
                r.numbers.push(col);
                let all_percent = table
                    .rows()
                    .iter()
                    .all(|row| parse_quantity(&row[col]).is_some_and(|q| q.unit.as_deref() == Some("%")));
                if lower.contains('%') || lower.contains("percent") || all_percent {
                    r.percents.push(col);
                }
                if lower.contains("total") {
                    r.totals.push(col);
                }
            }
        }
    }
    r
}

fn safe_cell(cell: &str) -> bool {
    !cell.contains([';', '|', '<', '>', '\n', '(', ')'])
}

pub(crate) fn drafts(table: &Table, kind: ReasoningType) -> Vec<Draft> {
    let g = Gen { table, roles: roles(table) };
    match kind {
        ReasoningType::Filter => g.filter(false),
        ReasoningType::Count => g.count(),
        ReasoningType::Comparison => g.comparison(),
        ReasoningType::Difference => g.difference(),
        ReasoningType::Negation => g.negation(),
        ReasoningType::Intersection => g.intersection(),
        ReasoningType::Sum => g.sum(),
        ReasoningType::Sort => g.sort(),
        ReasoningType::SortFilter => g.sort_filter(),
        ReasoningType::DifferenceSort => g.sort_arithmetic(Op::Diff),
        ReasoningType::SumSort => g.sort_arithmetic(Op::Sum),
        ReasoningType::CountFilter => g.filter(true),
        ReasoningType::GatherCount => g.pair_counts(Op::Gather),
        ReasoningType::SumCount => g.pair_counts(Op::Sum),
        ReasoningType::DifferenceCount => g.pair_counts(Op::Diff),
        ReasoningType::SortCount => g.sort_count(),
        ReasoningType::ComparisonCount => g.comparison_count(),
    }
}

/// Accumulates gold steps, executing each one as it is added.
struct ChainBuilder<'t> {
    table: &'t Table,
    steps: Vec<Step>,
}

impl<'t> ChainBuilder<'t> {
    fn new(table: &'t Table) -> Self {
        Self { table, steps: Vec::new() }
    }

    fn ask(&mut self, lookup: Lookup) -> Option<Answer> {
        let question = lookup.question(self.table).ok()?;
        let answer = lookup.execute(self.table).ok()?;
        self.steps.push(Step {
            question: SimpleQuestion::natural(question),
            answer: answer.clone(),
            source: StepSource::Gold,
            origin: Some(StepOrigin::Lookup(lookup)),
        });
        Some(answer)
    }

    fn calc(&mut self, expr: Result<SymbolicExpr, MalformedExpr>) -> Option<Answer> {
        let expr = expr.ok()?;
        // Cells that would not survive a render/parse round trip are skipped.
        if parse_symbolic(&expr.render()).ok()?.as_ref() != Some(&expr) {
            return None;
        }
        let answer = eval_symbolic(&expr).ok()?;
        self.steps.push(Step {
            question: SimpleQuestion::symbolic(expr.clone()),
            answer: answer.clone(),
            source: StepSource::Gold,
            origin: Some(StepOrigin::Calculator(expr)),
        });
        Some(answer)
    }

    fn finish(self, question: String) -> Draft {
        Draft { question, steps: self.steps }
    }
}

fn spans(answer: &Answer) -> Vec<String> {
    match answer {
        Answer::Spans(s) => s.clone(),
        other => vec![other.render()],
    }
}

/// `5,666` → `5666`, `42-yard` stays `42-yard`.
fn canonical(values: &[String]) -> Option<Vec<String>> {
    values.iter().map(|v| parse_quantity(v).map(|q| q.to_string())).collect()
}

fn single(answer: &Answer) -> Option<&str> {
    match answer {
        Answer::Spans(s) if s.len() == 1 => Some(&s[0]),
        _ => None,
    }
}

fn eq(column: &str, value: &str) -> Filter {
    Filter::Equals { column: column.to_string(), value: value.to_string() }
}

fn ranked_phrase(k: usize, extreme: &str) -> String {
    match ordinal_word(k).as_str() {
        "" => extreme.to_string(),
        ord => format!("{ord} {extreme}"),
    }
}

fn ordered_pairs(values: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

struct Gen<'t> {
    table: &'t Table,
    roles: ColumnRoles,
}

impl<'t> Gen<'t> {
    fn name(&self, col: usize) -> &str {
        &self.table.headers()[col]
    }

    fn lower(&self, col: usize) -> String {
        self.name(col).to_lowercase()
    }

    fn plural(&self, col: usize) -> String {
        pluralize(&self.lower(col))
    }

    fn key_values(&self, col: usize) -> Vec<String> {
        self.table.distinct(col).into_iter().take(MAX_KEY_VALUES).collect()
    }

    /// Key values that occur on exactly one row.
    fn unique_key_values(&self, col: usize) -> Vec<String> {
        self.key_values(col)
            .into_iter()
            .filter(|v| self.table.rows().iter().filter(|r| &r[col] == v).count() == 1)
            .collect()
    }

    fn ordered_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.roles.numbers.iter().chain(&self.roles.dates).copied()
    }

    /// Observed interior values of an ordered column, so that both sides of
    /// each threshold are non-empty.
    fn thresholds(&self, col: usize) -> Vec<String> {
        let mut values = self.table.distinct(col);
        match self.table.column_type(col) {
            ColumnType::Number => values.sort_by(|a, b| {
                let (x, y) = (parse_quantity(a).map(|q| q.value), parse_quantity(b).map(|q| q.value));
                x.unwrap_or(0.0).total_cmp(&y.unwrap_or(0.0))
            }),
            ColumnType::Date => values.sort_by_key(|v| parse_date(v)),
            ColumnType::Text => return Vec::new(),
        }
        // Equal numeric values with different surfaces collapse to one.
        values.dedup_by(|a, b| parse_quantity(a).zip(parse_quantity(b)).is_some_and(|(x, y)| x.value == y.value));
        let n = values.len();
        if n < 3 {
            return Vec::new();
        }
        let interior = n - 2;
        let take = interior.min(MAX_THRESHOLDS);
        let mut picked: Vec<usize> = (0..take).map(|j| 1 + j * interior / take).collect();
        picked.dedup();
        picked.into_iter().map(|i| values[i].clone()).collect()
    }

    /// Row filters over every column except `exclude`.
    fn filters(&self, exclude: &[usize]) -> Vec<Filter> {
        let mut out = Vec::new();
        for &col in &self.roles.keys {
            if !exclude.contains(&col) {
                out.extend(self.key_values(col).iter().map(|v| eq(self.name(col), v)));
            }
        }
        for col in self.ordered_columns() {
            if exclude.contains(&col) {
                continue;
            }
            for v in self.thresholds(col) {
                let column = self.name(col).to_string();
                out.push(Filter::Above { column: column.clone(), value: v.clone() });
                out.push(Filter::Below { column, value: v });
            }
        }
        out
    }

    fn count(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            let mut c = ChainBuilder::new(self.table);
            let Some(all) = c.ask(Lookup::All { column: self.name(k).into() }) else { continue };
            if c.calc(SymbolicExpr::new(Op::Count, spans(&all))).is_some() {
                out.push(c.finish(format!("How many {} were there?", self.plural(k))));
            }
        }
        out
    }

    /// Filter: two successive filters on a text target. With `then_count` the
    /// surviving values are counted (count_filter).
    fn filter(&self, then_count: bool) -> Vec<Draft> {
        let mut out = Vec::new();
        for &t in &self.roles.keys {
            let target = self.name(t).to_string();
            let filters = self.filters(&[t]);
            for f1 in &filters {
                let first = Lookup::Where { target: target.clone(), filters: vec![f1.clone()], singular: false };
                let Ok(l1) = first.execute(self.table) else { continue };
                for f2 in filters.iter().filter(|f| f.column() != f1.column()) {
                    let both = Lookup::Where { target: target.clone(), filters: vec![f1.clone(), f2.clone()], singular: false };
                    let Ok(expected) = both.execute(self.table) else { continue };
                    if expected == l1 {
                        continue;
                    }
                    let mut c = ChainBuilder::new(self.table);
                    c.ask(first.clone());
                    let among = spans(&l1);
                    let Some(kept) = c.ask(Lookup::OutOf { target: target.clone(), among, filter: f2.clone() }) else {
                        continue;
                    };
                    // The "out of" step must agree with applying both filters.
                    if kept != expected {
                        continue;
                    }
                    let question = if then_count {
                        if c.calc(SymbolicExpr::new(Op::Count, spans(&kept))).is_none() {
                            continue;
                        }
                        let (Ok(h1), Ok(h2)) = (f1.have_phrase(self.table), f2.have_phrase(self.table)) else {
                            continue;
                        };
                        format!("How many {} had {h1} and {h2}?", self.plural(t))
                    } else {
                        let Ok(q) = both.question(self.table) else { continue };
                        q
                    };
                    out.push(c.finish(question));
                }
            }
        }
        out
    }

    fn comparison(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            let uniques = self.unique_key_values(k);
            for v in self.ordered_columns() {
                for (a, b) in ordered_pairs(&uniques) {
                    let is_date = self.table.column_type(v) == ColumnType::Date;
                    let variants: &[(Comparator, &str)] = if is_date {
                        &[(Comparator::Less, "an earlier"), (Comparator::Greater, "a later")]
                    } else {
                        &[(Comparator::Greater, "a higher"), (Comparator::Less, "a lower")]
                    };
                    for &(cmp, words) in variants {
                        let mut c = ChainBuilder::new(self.table);
                        let target = self.name(v).to_string();
                        let Some(va) = c.ask(Lookup::Where {
                            target: target.clone(),
                            filters: vec![eq(self.name(k), &a)],
                            singular: true,
                        }) else {
                            continue;
                        };
                        let Some(vb) =
                            c.ask(Lookup::Where { target, filters: vec![eq(self.name(k), &b)], singular: true })
                        else {
                            continue;
                        };
                        let (Some(x), Some(y)) = (single(&va), single(&vb)) else { continue };
                        if same_value(x, y) {
                            continue;
                        }
                        let cond = Condition { left: x.to_string(), cmp, right: y.to_string() };
                        if c.calc(SymbolicExpr::if_then(cond, a.clone(), b.clone())).is_none() {
                            continue;
                        }
                        out.push(c.finish(format!(
                            "Which {} had {words} {}: {a} or {b}?",
                            self.lower(k),
                            self.lower(v)
                        )));
                    }
                }
            }
        }
        out
    }

    /// Two single-row lookups and a calculator call over their numbers.
    fn two_lookups(&self, k: usize, v: usize, a: &str, b: &str, op: Op) -> Option<(ChainBuilder<'t>, Vec<String>)> {
        let mut c = ChainBuilder::new(self.table);
        let target = self.name(v).to_string();
        let va = c.ask(Lookup::Where { target: target.clone(), filters: vec![eq(self.name(k), a)], singular: true })?;
        let vb = c.ask(Lookup::Where { target, filters: vec![eq(self.name(k), b)], singular: true })?;
        let mut args = canonical(&spans(&va))?;
        args.extend(canonical(&spans(&vb))?);
        c.calc(SymbolicExpr::new(op, args.clone()))?;
        Some((c, args))
    }

    fn difference(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            let uniques = self.unique_key_values(k);
            for &v in &self.roles.numbers {
                for (a, b) in ordered_pairs(&uniques) {
                    // Larger value first, as a person would phrase it.
                    let (Some(x), Some(y)) = (self.value_of(k, &a, v), self.value_of(k, &b, v)) else { continue };
                    let (a, b) = if x >= y { (a, b) } else { (b, a) };
                    let Some((c, _)) = self.two_lookups(k, v, &a, &b, Op::Diff) else { continue };
                    out.push(c.finish(format!(
                        "What is the difference between {} when the {} was {a} and {b}?",
                        self.plural(v),
                        self.lower(k)
                    )));
                }
            }
        }
        out
    }

    fn value_of(&self, key: usize, value: &str, col: usize) -> Option<f64> {
        let row = self.table.rows().iter().find(|r| r[key] == value)?;
        parse_quantity(&row[col]).map(|q| q.value)
    }

    fn sum(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            let values = self.key_values(k);
            for &v in &self.roles.numbers {
                for (a, b) in ordered_pairs(&values) {
                    let Some((c, _)) = self.two_lookups(k, v, &a, &b, Op::Sum) else { continue };
                    out.push(c.finish(format!(
                        "What were the total {} when {} were {a} and {b}?",
                        self.plural(v),
                        self.plural(k)
                    )));
                }
            }
        }
        out
    }

    fn negation(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &p in &self.roles.percents {
            let subject = percent_subject(self.name(p));
            for &k in &self.roles.keys {
                for a in self.unique_key_values(k) {
                    let mut c = ChainBuilder::new(self.table);
                    let lookup = Lookup::Where { target: self.name(p).into(), filters: vec![eq(self.name(k), &a)], singular: true };
                    let Some(share) = c.ask(lookup) else { continue };
                    let Some(args) = canonical(&spans(&share)) else { continue };
                    if c.calc(SymbolicExpr::new(Op::Negation, args)).is_none() {
                        continue;
                    }
                    out.push(c.finish(format!(
                        "How many percent were not {subject} when {} was {a}?",
                        self.lower(k)
                    )));
                }
            }
        }
        for &total in &self.roles.totals {
            for &part in self.roles.numbers.iter().filter(|&&c| c != total && !self.roles.totals.contains(&c)) {
                for &k in &self.roles.keys {
                    for a in self.unique_key_values(k) {
                        let (Some(t), Some(p)) = (self.value_of(k, &a, total), self.value_of(k, &a, part)) else {
                            continue;
                        };
                        if t < p {
                            continue;
                        }
                        let mut c = ChainBuilder::new(self.table);
                        let Some(tv) = c.ask(Lookup::Where {
                            target: self.name(total).into(),
                            filters: vec![eq(self.name(k), &a)],
                            singular: true,
                        }) else {
                            continue;
                        };
                        let Some(pv) = c.ask(Lookup::Where {
                            target: self.name(part).into(),
                            filters: vec![eq(self.name(k), &a)],
                            singular: true,
                        }) else {
                            continue;
                        };
                        let (Some(mut args), Some(rest)) = (canonical(&spans(&tv)), canonical(&spans(&pv))) else {
                            continue;
                        };
                        args.extend(rest);
                        if c.calc(SymbolicExpr::new(Op::Diff, args)).is_none() {
                            continue;
                        }
                        out.push(c.finish(format!(
                            "How many of the {} were not {} when {} was {a}?",
                            self.lower(total),
                            self.lower(part),
                            self.lower(k)
                        )));
                    }
                }
            }
        }
        out
    }

    fn intersection(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &t in &self.roles.keys {
            let target = self.name(t).to_string();
            let filters = self.filters(&[t]);
            for (i, f1) in filters.iter().enumerate() {
                for f2 in filters[i + 1..].iter().filter(|f| f.column() != f1.column()) {
                    let mut c = ChainBuilder::new(self.table);
                    let Some(l1) = c.ask(Lookup::Where { target: target.clone(), filters: vec![f1.clone()], singular: false })
                    else {
                        continue;
                    };
                    let Some(l2) = c.ask(Lookup::Where { target: target.clone(), filters: vec![f2.clone()], singular: false })
                    else {
                        continue;
                    };
                    let (s1, s2) = (spans(&l1), spans(&l2));
                    let Some(common) = c.calc(SymbolicExpr::intersection(s1.clone(), s2.clone())) else { continue };
                    let n = spans(&common).len();
                    if n == s1.len() && n == s2.len() {
                        continue;
                    }
                    let (Ok(w1), Ok(w2)) = (f1.when_phrase(self.table), f2.when_phrase(self.table)) else { continue };
                    out.push(c.finish(format!("Which {} were there both when {w1} and when {w2}?", self.plural(t))));
                }
            }
        }
        out
    }

    fn sort(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            for &v in &self.roles.numbers {
                for rank in 1..=MAX_RANK {
                    for (op, extreme) in [(Op::Top, "highest"), (Op::Bottom, "lowest")] {
                        let mut c = ChainBuilder::new(self.table);
                        let Some(all) = c.ask(Lookup::All { column: self.name(v).into() }) else { continue };
                        if let Some(d) = self.select_then_name(c, k, v, op, rank, &all, &format!(
                            "Which {} had the {} {}?",
                            self.lower(k),
                            ranked_phrase(rank, extreme),
                            self.lower(v)
                        )) {
                            out.push(d);
                        }
                    }
                }
            }
        }
        out
    }

    /// top/bottom over `list`, then the key of the unique row holding it.
    #[allow(clippy::too_many_arguments)]
    fn select_then_name(
        &self,
        mut c: ChainBuilder<'t>,
        k: usize,
        v: usize,
        op: Op,
        rank: usize,
        list: &Answer,
        question: &str,
    ) -> Option<Draft> {
        let chosen = c.calc(SymbolicExpr::ranked(op, rank, spans(list)))?;
        let value = single(&chosen)?.to_string();
        let name = c.ask(Lookup::Where { target: self.name(k).into(), filters: vec![eq(self.name(v), &value)], singular: true })?;
        single(&name)?;
        Some(c.finish(question.to_string()))
    }

    fn sort_filter(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            for &v in &self.roles.numbers {
                for f in self.filters(&[k, v]) {
                    let Ok(when) = f.when_phrase(self.table) else { continue };
                    let subset = Lookup::Where { target: self.name(v).into(), filters: vec![f.clone()], singular: false };
                    match subset.execute(self.table) {
                        Ok(a) if spans(&a).len() >= 2 => {}
                        _ => continue,
                    }
                    for rank in 1..=MAX_RANK {
                        for (op, extreme) in [(Op::Top, "highest"), (Op::Bottom, "lowest")] {
                            let mut c = ChainBuilder::new(self.table);
                            let Some(list) = c.ask(subset.clone()) else { continue };
                            let question = format!(
                                "Which {} had the {} {} when {when}?",
                                self.lower(k),
                                ranked_phrase(rank, extreme),
                                self.lower(v)
                            );
                            if let Some(d) = self.select_then_name(c, k, v, op, rank, &list, &question) {
                                out.push(d);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// difference_sort and sum_sort: k1-th highest combined with k2-th lowest.
    fn sort_arithmetic(&self, op: Op) -> Vec<Draft> {
        let mut out = Vec::new();
        for &v in &self.roles.numbers {
            for k1 in 1..=MAX_RANK {
                for k2 in 1..=MAX_RANK {
                    let mut c = ChainBuilder::new(self.table);
                    let Some(all) = c.ask(Lookup::All { column: self.name(v).into() }) else { continue };
                    let list = spans(&all);
                    let Some(hi) = c.calc(SymbolicExpr::ranked(Op::Top, k1, list.clone())) else { continue };
                    let Some(lo) = c.calc(SymbolicExpr::ranked(Op::Bottom, k2, list)) else { continue };
                    if hi == lo {
                        continue;
                    }
                    let Some(args) = canonical(&[spans(&hi), spans(&lo)].concat()) else { continue };
                    if c.calc(SymbolicExpr::new(op, args)).is_none() {
                        continue;
                    }
                    let (high, low) = (ranked_phrase(k1, "highest"), ranked_phrase(k2, "lowest"));
                    let name = self.lower(v);
                    let question = if op == Op::Diff {
                        format!("What is the difference between the {high} {name} and the {low} {name}?")
                    } else {
                        format!("What was the total of the {high} {name} and the {low} {name}?")
                    };
                    out.push(c.finish(question));
                }
            }
        }
        out
    }

    /// Lookup of `t` values for one key value, then count them.
    fn count_for(&self, c: &mut ChainBuilder<'t>, k: usize, t: usize, value: &str) -> Option<Answer> {
        let list = c.ask(Lookup::Where { target: self.name(t).into(), filters: vec![eq(self.name(k), value)], singular: false })?;
        c.calc(SymbolicExpr::new(Op::Count, spans(&list)))
    }

    fn key_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &k in &self.roles.keys {
            for &t in self.roles.keys.iter().filter(|&&t| t != k) {
                out.push((k, t));
            }
        }
        out
    }

    /// gather_count, sum_count, difference_count.
    fn pair_counts(&self, op: Op) -> Vec<Draft> {
        let mut out = Vec::new();
        for (k, t) in self.key_pairs() {
            for (a, b) in ordered_pairs(&self.key_values(k)) {
                let mut c = ChainBuilder::new(self.table);
                let Some(na) = self.count_for(&mut c, k, t, &a) else { continue };
                let Some(nb) = self.count_for(&mut c, k, t, &b) else { continue };
                if c.calc(SymbolicExpr::new(op, vec![na.render(), nb.render()])).is_none() {
                    continue;
                }
                let (ts, kl) = (self.plural(t), self.lower(k));
                let question = match op {
                    Op::Gather => format!("How many {ts} were there for each of {kl}: {a} and {b}?"),
                    Op::Sum => format!("What are the total number of {ts} when {} were {a} and {b}?", self.plural(k)),
                    _ => format!("What is the difference between number of {ts} when {kl} was {a} and {b}?"),
                };
                out.push(c.finish(question));
            }
        }
        out
    }

    fn sort_count(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for (k, t) in self.key_pairs() {
            let values = self.table.distinct(k);
            if values.len() > MAX_SORT_COUNT_KEYS {
                continue;
            }
            for (op, words) in [(Op::Top, "the most number"), (Op::Bottom, "the fewest number")] {
                let mut c = ChainBuilder::new(self.table);
                let Some(all) = c.ask(Lookup::All { column: self.name(k).into() }) else { continue };
                let mut counts = Vec::new();
                for value in spans(&all) {
                    match self.count_for(&mut c, k, t, &value) {
                        Some(n) => counts.push(n.render()),
                        None => break,
                    }
                }
                if counts.len() != values.len() {
                    continue;
                }
                let Some(extreme) = c.calc(SymbolicExpr::ranked(op, 1, counts)) else { continue };
                let Some(count) = single(&extreme).and_then(|s| s.parse::<usize>().ok()) else { continue };
                let Some(winner) =
                    c.ask(Lookup::KeyWithCount { key: self.name(k).into(), target: self.name(t).into(), count })
                else {
                    continue;
                };
                if single(&winner).is_none() {
                    continue;
                }
                out.push(c.finish(format!("Which {} had {words} of {}?", self.lower(k), self.plural(t))));
            }
        }
        out
    }

    fn comparison_count(&self) -> Vec<Draft> {
        let mut out = Vec::new();
        for (k, t) in self.key_pairs() {
            for (a, b) in ordered_pairs(&self.key_values(k)) {
                for (cmp, words) in [(Comparator::Greater, "more"), (Comparator::Less, "fewer")] {
                    let mut c = ChainBuilder::new(self.table);
                    let Some(na) = self.count_for(&mut c, k, t, &a) else { continue };
                    let Some(nb) = self.count_for(&mut c, k, t, &b) else { continue };
                    if na == nb {
                        continue;
                    }
                    let cond = Condition { left: na.render(), cmp, right: nb.render() };
                    if c.calc(SymbolicExpr::if_then(cond, a.clone(), b.clone())).is_none() {
                        continue;
                    }
                    out.push(c.finish(format!(
                        "Which {} had {words} {}: {a} or {b}?",
                        self.lower(k),
                        self.plural(t)
                    )));
                }
            }
        }
        out
    }
}

fn same_value(x: &str, y: &str) -> bool {
    match (parse_quantity(x), parse_quantity(y)) {
        (Some(a), Some(b)) => a.value == b.value,
        _ => match (parse_date(x), parse_date(y)) {
            (Some(a), Some(b)) => a == b,
            _ => x == y,
        },
    }
}

/// `Vote %` → `vote`, `Percent turnout` → `turnout`.
fn percent_subject(header: &str) -> String {
    let words: Vec<String> = header
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| c == '%' || c == '(' || c == ')').to_lowercase())
        .filter(|w| !w.is_empty() && w != "percent" && w != "percentage" && w != "share")
        .collect();
    if words.is_empty() {
        "counted".to_string()
    } else {
        words.join(" ")
    }
}
