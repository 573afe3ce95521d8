use std::cmp::Ordering;

use thiserror::Error;

use super::{Comparator, Op, SymbolicExpr};
use crate::model::{Answer, Quantity};
use crate::text::{parse_date, parse_quantity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} needs numeric arguments, {arg:?} is not a number")]
    NonNumeric { op: &'static str, arg: String },
    #[error("{op}: k = {k} but only {distinct} distinct values")]
    RankOutOfRange { op: &'static str, k: usize, distinct: usize },
    #[error("intersection of the two lists is empty")]
    EmptyIntersection,
}

/// Evaluate a call deterministically.
///
/// * `count` counts arguments verbatim, duplicates included.
/// * `top`/`bottom` return the argument holding the k-th largest/smallest
///   distinct value, in its original surface form; among equal values the
///   earliest argument wins.
/// * `sum`/`diff` ignore units for arithmetic and keep the common unit when
///   every argument agrees; `diff` is the absolute difference.
/// * `negation` subtracts from 100.
pub fn eval_symbolic(expr: &SymbolicExpr) -> Result<Answer, EvalError> {
    let args = expr.args();
    let answer = match expr.op() {
        Op::Count => Answer::Quantity(quantity(args.len() as f64, None)),
        Op::Top | Op::Bottom => {
            let k = expr.k().expect("ranked calls carry k");
            let values = numbers(expr.op(), args)?;
            let index = kth_distinct(&values, k, expr.op() == Op::Top)
                .ok_or(EvalError::RankOutOfRange { op: expr.op().name(), k, distinct: distinct_count(&values) })?;
            Answer::Spans(vec![args[index].clone()])
        }
        Op::Sum => {
            let values = numbers(Op::Sum, args)?;
            let total = values.iter().map(|q| q.value).sum();
            Answer::Quantity(quantity(total, common_unit(&values)))
        }
        Op::Diff => {
            let values = numbers(Op::Diff, args)?;
            let delta = (values[0].value - values[1].value).abs();
            Answer::Quantity(quantity(delta, common_unit(&values)))
        }
        Op::Negation => {
            let values = numbers(Op::Negation, args)?;
            Answer::Quantity(quantity(100.0 - values[0].value, values[0].unit.clone()))
        }
        Op::IfThen => {
            let c = expr.condition().expect("if_then carries a condition");
            let order = compare_operands(&c.left, &c.right);
            let holds = match c.cmp {
                Comparator::Greater => order == Ordering::Greater,
                Comparator::Less => order == Ordering::Less,
            };
            Answer::Spans(vec![if holds { args[0].clone() } else { args[1].clone() }])
        }
        Op::Gather => Answer::Text(gather(args)),
        Op::Intersection => {
            let (first, second) = expr.lists().expect("intersection carries two lists");
            let mut common: Vec<String> = Vec::new();
            for item in first {
                if second.contains(item) && !common.contains(item) {
                    common.push(item.clone());
                }
            }
            if common.is_empty() {
                return Err(EvalError::EmptyIntersection);
            }
            Answer::Spans(common)
        }
    };
    Ok(answer)
}

fn quantity(value: f64, unit: Option<String>) -> Quantity {
    Quantity::new(value, unit).expect("finite inputs give finite results")
}

fn numbers(op: Op, args: &[String]) -> Result<Vec<Quantity>, EvalError> {
    args.iter()
        .map(|a| parse_quantity(a).ok_or_else(|| EvalError::NonNumeric { op: op.name(), arg: a.clone() }))
        .collect()
}

fn common_unit(values: &[Quantity]) -> Option<String> {
    let first = values.first()?.unit.clone();
    values.iter().all(|q| q.unit == first).then_some(first).flatten()
}

fn distinct_count(values: &[Quantity]) -> usize {
    let mut v: Vec<f64> = values.iter().map(|q| q.value).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Index of the earliest argument holding the k-th distinct value.
fn kth_distinct(values: &[Quantity], k: usize, descending: bool) -> Option<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].value.total_cmp(&values[b].value);
        if descending {
            c.reverse()
        } else {
            c
        }
    });
    let mut rank = 0;
    let mut previous: Option<f64> = None;
    for i in order {
        if previous != Some(values[i].value) {
            rank += 1;
            previous = Some(values[i].value);
            if rank == k {
                return Some(i);
            }
        }
    }
    None
}

/// Quantities compare numerically, dates chronologically, anything else
/// lexicographically.
fn compare_operands(left: &str, right: &str) -> Ordering {
    if let (Some(l), Some(r)) = (parse_quantity(left), parse_quantity(right)) {
        return l.value.total_cmp(&r.value);
    }
    if let (Some(l), Some(r)) = (parse_date(left), parse_date(right)) {
        return l.cmp(&r);
    }
    left.cmp(right)
}

fn gather(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}
