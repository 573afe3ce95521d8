//! Reference implementations written directly from the definitions, without
//! any of the library's parsing or scoring code.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;

/// A calculator call built from known values, with its expected result.
pub struct Case {
    pub text: String,
    pub expected: Expected,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Number { value: f64, unit: Option<String> },
    Spans(Vec<String>),
    Text(String),
    EmptyIntersection,
}

const WORDS: [&str; 8] = ["Walsall", "Liverpool", "Oxford United", "Sheffield Wed.", "Portsmouth", "SF 2nd Leg", "QFR", "Chemulpo"];
const UNITS: [&str; 3] = ["yard", "point", "%"];

/// Surface form of a non-negative value: integers may get thousands
/// separators, and a unit suffix may follow.
fn surface(value: f64, unit: Option<&str>, commas: bool) -> String {
    let mut number = if value.fract() == 0.0 {
        let digits = format!("{}", value as u64);
        if commas {
            let mut out = String::new();
            for (i, c) in digits.chars().enumerate() {
                if i > 0 && (digits.len() - i).is_multiple_of(3) {
                    out.push(',');
                }
                out.push(c);
            }
            out
        } else {
            digits
        }
    } else {
        format!("{value}")
    };
    match unit {
        None => {}
        Some("%") => number.push('%'),
        Some(u) => {
            number.push('-');
            number.push_str(u);
        }
    }
    number
}

fn random_value(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(0..20) as f64,
        1 => rng.random_range(0..100_000) as f64,
        2 => f64::from(rng.random_range(0..1000)) / 10.0,
        _ => rng.random_range(0..5) as f64,
    }
}

fn numbers(rng: &mut impl Rng, n: usize) -> (Vec<f64>, Vec<String>, Option<String>) {
    let shared_unit = rng.random_bool(0.3).then(|| UNITS.choose(rng).unwrap().to_string());
    let mixed = rng.random_bool(0.1);
    let values: Vec<f64> = (0..n).map(|_| random_value(rng)).collect();
    let mut units = Vec::new();
    let surfaces = values
        .iter()
        .map(|&v| {
            let unit = if mixed { rng.random_bool(0.5).then(|| UNITS[0].to_string()) } else { shared_unit.clone() };
            units.push(unit.clone());
            surface(v, unit.as_deref(), rng.random_bool(0.5))
        })
        .collect();
    let first = units.first().cloned().flatten();
    let common = units.iter().all(|u| *u == first).then_some(first).flatten();
    (values, surfaces, common)
}

/// Index of the earliest argument holding the k-th distinct value.
fn kth(values: &[f64], k: usize, largest: bool) -> Option<usize> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if largest {
        distinct.reverse();
    }
    let target = *distinct.get(k - 1)?;
    values.iter().position(|&v| v == target)
}

pub fn random_case(rng: &mut impl Rng) -> Case {
    let n = rng.random_range(1..=8);
    match rng.random_range(0..9) {
        0 => {
            let args: Vec<String> = (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
            Case { text: format!("count({})", args.join("; ")), expected: Expected::Number { value: n as f64, unit: None } }
        }
        1 => {
            let (values, surfaces, unit) = numbers(rng, n);
            let mut total = 0.0;
            for v in &values {
                total += v;
            }
            Case { text: format!("sum({})", surfaces.join("; ")), expected: Expected::Number { value: total, unit } }
        }
        2 => {
            let (values, surfaces, unit) = numbers(rng, 2);
            let delta = if values[0] >= values[1] { values[0] - values[1] } else { values[1] - values[0] };
            Case { text: format!("diff({}; {})", surfaces[0], surfaces[1]), expected: Expected::Number { value: delta, unit } }
        }
        3 | 4 => {
            let largest = rng.random_bool(0.5);
            let (values, surfaces, _) = numbers(rng, n);
            let mut distinct = values.clone();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            let k = rng.random_range(1..=distinct.len());
            let alias = k == 1 && rng.random_bool(0.3);
            let name = match (largest, alias) {
                (true, false) => "top",
                (false, false) => "bottom",
                (true, true) => "max",
                (false, true) => "min",
            };
            let text = if alias {
                format!("{name}({})", surfaces.join("; "))
            } else {
                let sep = if rng.random_bool(0.5) { "; " } else { ";" };
                format!("{name}({k}, {})", surfaces.join(sep))
            };
            let i = kth(&values, k, largest).unwrap();
            Case { text, expected: Expected::Spans(vec![surfaces[i].clone()]) }
        }
        5 => {
            let (values, surfaces, _) = numbers(rng, 2);
            let greater = rng.random_bool(0.5);
            let (yes, no) = (WORDS.choose(rng).unwrap(), WORDS.choose(rng).unwrap());
            let holds = if greater { values[0] > values[1] } else { values[0] < values[1] };
            Case {
                text: format!("if_then({} {} {}; {yes}; {no})", surfaces[0], if greater { '>' } else { '<' }, surfaces[1]),
                expected: Expected::Spans(vec![if holds { yes } else { no }.to_string()]),
            }
        }
        6 => {
            let args: Vec<String> = (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
            let expected = match args.len() {
                1 => args[0].clone(),
                2 => format!("{} and {}", args[0], args[1]),
                k => format!("{}, and {}", args[..k - 1].join(", "), args[k - 1]),
            };
            Case { text: format!("gather({})", args.join("; ")), expected: Expected::Text(expected) }
        }
        7 => {
            let a: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
            let b: Vec<&str> = (0..rng.random_range(1..=8)).map(|_| *WORDS.choose(rng).unwrap()).collect();
            let mut common: Vec<String> = Vec::new();
            for x in &a {
                if b.contains(x) && !common.iter().any(|c| c == x) {
                    common.push(x.to_string());
                }
            }
            let expected = if common.is_empty() { Expected::EmptyIntersection } else { Expected::Spans(common) };
            Case { text: format!("intersection({} | {})", a.join("; "), b.join("; ")), expected }
        }
        _ => {
            let v = f64::from(rng.random_range(0..=1000)) / 10.0;
            let percent = rng.random_bool(0.5);
            Case {
                text: format!("negation({})", surface(v, percent.then_some("%"), false)),
                expected: Expected::Number { value: 100.0 - v, unit: percent.then(|| "%".to_string()) },
            }
        }
    }
}

/// Token-bag F1 of two already-normalized spans.
fn token_f1(a: &str, b: &str) -> f64 {
    let bag = |s: &str| {
        let mut m: BTreeMap<String, usize> = BTreeMap::new();
        for w in s.split_whitespace() {
            *m.entry(w.to_string()).or_default() += 1;
        }
        m
    };
    let (ba, bb) = (bag(a), bag(b));
    let common: usize = ba.iter().map(|(w, n)| (*n).min(*bb.get(w).unwrap_or(&0))).sum();
    if common == 0 {
        return 0.0;
    }
    let p = common as f64 / a.split_whitespace().count() as f64;
    let r = common as f64 / b.split_whitespace().count() as f64;
    2.0 * p * r / (p + r)
}

/// Every injective map from the smaller span list into the larger, scored by
/// summed F1 and divided by the larger count.
pub fn brute_force_f1(pred: &[String], gold: &[String]) -> f64 {
    let (small, large) = if pred.len() <= gold.len() { (pred, gold) } else { (gold, pred) };
    fn go(i: usize, small: &[String], large: &[String], used: &mut Vec<bool>) -> f64 {
        if i == small.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..large.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(token_f1(&small[i], &large[j]) + go(i + 1, small, large, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, small, large, &mut vec![false; large.len()]) / large.len() as f64
}

pub fn brute_force_em(pred: &[String], gold: &[String]) -> f64 {
    let a: BTreeSet<&String> = pred.iter().collect();
    let b: BTreeSet<&String> = gold.iter().collect();
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Minimum vertex cover size by exhaustive branching: some endpoint of each
/// edge must be in the cover.
pub fn minimum_cover(edges: &[(usize, usize)]) -> usize {
    fn go(edges: &[(usize, usize)], chosen: u64, size: usize, best: &mut usize) {
        if size >= *best {
            return;
        }
        match edges.iter().find(|(a, b)| chosen & (1 << a) == 0 && chosen & (1 << b) == 0) {
            None => *best = size,
            Some(&(a, b)) => {
                go(edges, chosen | (1 << a), size + 1, best);
                go(edges, chosen | (1 << b), size + 1, best);
            }
        }
    }
    let mut best = usize::MAX;
    go(edges, 0, 0, &mut best);
    best
}

/// Exhaustive check over all 2^n subsets, for cross-checking `minimum_cover`.
pub fn minimum_cover_by_subsets(n: usize, edges: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|(a, b)| s & (1 << a) != 0 || s & (1 << b) != 0))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap()
}
