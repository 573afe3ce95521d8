//! The calculator sub-language used for symbolic simple questions.
//!
//! A symbolic question is a single call. Its surface grammar, roughly:
//!
//! ```text
//! call        = name "(" body ")"
//! name        = "count" | "sum" | "diff" | "gather" | "negation"
//!             | "top" | "bottom" | "max" | "min" | "if_then" | "intersection"
//! body        = args                          (count, sum, diff, gather, negation)
//!             | k "," args                    (top, bottom)
//!             | args                          (max = top(1, ..), min = bottom(1, ..))
//!             | cond ";" arg ";" arg          (if_then)
//!             | args "|" args                 (intersection)
//! args        = arg { ";" arg }
//! cond        = operand ( "<" | ">" ) operand
//! ```
//!
//! The comma after `k` is the first comma that is not a thousands separator,
//! so `top(2, 5,666;10,037)` has `k = 2`. The closing parenthesis may be
//! missing; generations are often cut at the stop sequence. Nesting is not
//! supported: multi-step arithmetic is expressed as several chain steps.

mod eval;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{find_delimiter_comma, natural_list, ordinal_word};

pub use eval::{eval_symbolic, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Count,
    Top,
    Bottom,
    Sum,
    Diff,
    IfThen,
    Gather,
    Intersection,
    Negation,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::Count,
        Op::Top,
        Op::Bottom,
        Op::Sum,
        Op::Diff,
        Op::IfThen,
        Op::Gather,
        Op::Intersection,
        Op::Negation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::Count => "count",
            Op::Top => "top",
            Op::Bottom => "bottom",
            Op::Sum => "sum",
            Op::Diff => "diff",
            Op::IfThen => "if_then",
            Op::Gather => "gather",
            Op::Intersection => "intersection",
            Op::Negation => "negation",
        }
    }

    fn is_ranked(self) -> bool {
        matches!(self, Op::Top | Op::Bottom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

impl Comparator {
    pub fn symbol(self) -> char {
        match self {
            Comparator::Less => '<',
            Comparator::Greater => '>',
        }
    }
}

/// `left <cmp> right` inside `if_then`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub left: String,
    pub cmp: Comparator,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed {op} call: {reason}")]
pub struct MalformedExpr {
    pub op: &'static str,
    pub reason: String,
}

fn malformed(op: Op, reason: impl Into<String>) -> MalformedExpr {
    MalformedExpr { op: op.name(), reason: reason.into() }
}

/// A parsed calculator call. Construction validates arity and `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicExpr {
    op: Op,
    k: Option<usize>,
    condition: Option<Condition>,
    args: Vec<String>,
    /// Intersection only: `args[..split]` and `args[split..]` are the two lists.
    split: Option<usize>,
}

impl SymbolicExpr {
    /// Calls without `k`, condition or list split: count, sum, diff, gather,
    /// negation.
    pub fn new(op: Op, args: Vec<String>) -> Result<Self, MalformedExpr> {
        if op.is_ranked() || matches!(op, Op::IfThen | Op::Intersection) {
            return Err(malformed(op, "use the dedicated constructor"));
        }
        Self::build(op, None, None, args, None)
    }

    pub fn ranked(op: Op, k: usize, args: Vec<String>) -> Result<Self, MalformedExpr> {
        if !op.is_ranked() {
            return Err(malformed(op, "only top and bottom take k"));
        }
        Self::build(op, Some(k), None, args, None)
    }

    pub fn if_then(
        condition: Condition,
        then: impl Into<String>,
        otherwise: impl Into<String>,
    ) -> Result<Self, MalformedExpr> {
        Self::build(Op::IfThen, None, Some(condition), vec![then.into(), otherwise.into()], None)
    }

    pub fn intersection(first: Vec<String>, second: Vec<String>) -> Result<Self, MalformedExpr> {
        let split = first.len();
        let mut args = first;
        args.extend(second);
        Self::build(Op::Intersection, None, None, args, Some(split))
    }

    fn build(
        op: Op,
        k: Option<usize>,
        condition: Option<Condition>,
        args: Vec<String>,
        split: Option<usize>,
    ) -> Result<Self, MalformedExpr> {
        if args.is_empty() {
            return Err(malformed(op, "no arguments"));
        }
        for arg in &args {
            check_arg(op, arg)?;
        }
        match op {
            Op::Top | Op::Bottom => {
                let k = k.ok_or_else(|| malformed(op, "missing k"))?;
                if k == 0 || k > args.len() {
                    return Err(malformed(op, format!("k = {k} outside 1..={}", args.len())));
                }
            }
            Op::IfThen => {
                let c = condition.as_ref().ok_or_else(|| malformed(op, "missing condition"))?;
                for side in [&c.left, &c.right] {
                    check_arg(op, side)?;
                    if side.contains(['<', '>']) {
                        return Err(malformed(op, "condition operand contains a comparator"));
                    }
                }
                if args.len() != 2 {
                    return Err(malformed(op, format!("expected 2 branches, got {}", args.len())));
                }
            }
            Op::Diff if args.len() != 2 => {
                return Err(malformed(op, format!("expected 2 arguments, got {}", args.len())));
            }
            Op::Negation if args.len() != 1 => {
                return Err(malformed(op, format!("expected 1 argument, got {}", args.len())));
            }
            Op::Intersection => match split {
                Some(s) if s > 0 && s < args.len() => {}
                _ => return Err(malformed(op, "both lists must be non-empty")),
            },
            _ => {}
        }
        Ok(Self { op, k, condition, args, split })
    }

    pub fn op(&self) -> Op {
        self.op
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn condition(&self) -> Option<&Condition> {
        self.condition.as_ref()
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    /// The two operand lists of an intersection.
    pub fn lists(&self) -> Option<(&[String], &[String])> {
        self.split.map(|s| self.args.split_at(s))
    }

    /// Canonical surface: `op(a; b)`, `top(k, a; b)`, `if_then(l > r; x; y)`,
    /// `intersection(a; b | c)`.
    pub fn render(&self) -> String {
        let body = match (self.op, &self.condition, self.split) {
            (Op::IfThen, Some(c), _) => {
                format!("{} {} {}; {}", c.left, c.cmp.symbol(), c.right, self.args.join("; "))
            }
            (Op::Intersection, _, Some(s)) => {
                format!("{} | {}", self.args[..s].join("; "), self.args[s..].join("; "))
            }
            _ => match self.k {
                Some(k) => format!("{k}, {}", self.args.join("; ")),
                None => self.args.join("; "),
            },
        };
        format!("{}({body})", self.op.name())
    }
}

impl fmt::Display for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for SymbolicExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for SymbolicExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match parse_symbolic(&s) {
            Ok(Some(expr)) => Ok(expr),
            Ok(None) => Err(serde::de::Error::custom(format!("not a calculator call: {s:?}"))),
            Err(e) => Err(serde::de::Error::custom(e)),
        }
    }
}

fn check_arg(op: Op, arg: &str) -> Result<(), MalformedExpr> {
    if arg.is_empty() || arg.trim() != arg {
        return Err(malformed(op, format!("argument {arg:?} is empty or padded")));
    }
    if arg.contains([';', '|', '\n']) {
        return Err(malformed(op, format!("argument {arg:?} contains a separator")));
    }
    Ok(())
}

fn op_by_name(name: &str) -> Option<(Op, Option<usize>)> {
    let name = name.to_ascii_lowercase();
    let found = match name.as_str() {
        "max" => (Op::Top, Some(1)),
        "min" => (Op::Bottom, Some(1)),
        other => (Op::ALL.into_iter().find(|op| op.name() == other)?, None),
    };
    Some(found)
}

fn split_args(body: &str) -> Vec<String> {
    body.split(';').map(str::trim).filter(|a| !a.is_empty()).map(str::to_string).collect()
}

/// Parse a simple question as a calculator call.
///
/// `Ok(None)` means the text is not a call at all (a natural question);
/// `Err` means it names a known operation but breaks its arity rules.
pub fn parse_symbolic(surface: &str) -> Result<Option<SymbolicExpr>, MalformedExpr> {
    let s = surface.trim();
    let Some(open) = s.find('(') else {
        return Ok(None);
    };
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
        return Ok(None);
    }
    let Some((op, alias_k)) = op_by_name(name) else {
        return Ok(None);
    };
    let inner = &s[open + 1..];
    let body = inner.strip_suffix(')').unwrap_or(inner).trim();

    match op {
        Op::Top | Op::Bottom if alias_k.is_some() => SymbolicExpr::ranked(op, 1, split_args(body)),
        Op::Top | Op::Bottom => {
            let comma = find_delimiter_comma(body).ok_or_else(|| malformed(op, "missing k"))?;
            let k: usize = body[..comma]
                .trim()
                .parse()
                .map_err(|_| malformed(op, format!("k {:?} is not a positive integer", body[..comma].trim())))?;
            SymbolicExpr::ranked(op, k, split_args(&body[comma + 1..]))
        }
        Op::IfThen => {
            let parts: Vec<&str> = body.split(';').map(str::trim).collect();
            let [cond, then, otherwise] = parts.as_slice() else {
                return Err(malformed(op, format!("expected 3 parts, got {}", parts.len())));
            };
            let at = cond.find(['<', '>']).ok_or_else(|| malformed(op, "condition has no comparator"))?;
            let cmp = if cond.as_bytes()[at] == b'<' { Comparator::Less } else { Comparator::Greater };
            let condition =
                Condition { left: cond[..at].trim().to_string(), cmp, right: cond[at + 1..].trim().to_string() };
            SymbolicExpr::if_then(condition, *then, *otherwise)
        }
        Op::Intersection => {
            let lists: Vec<&str> = body.split('|').collect();
            let [first, second] = lists.as_slice() else {
                return Err(malformed(op, "expected two lists separated by '|'"));
            };
            SymbolicExpr::intersection(split_args(first), split_args(second))
        }
        _ => SymbolicExpr::new(op, split_args(body)),
    }
    .map(Some)
}

/// Render the English paraphrase of a call, used when arithmetic is left to
/// the language model.
pub fn naturalize_symbolic(expr: &SymbolicExpr) -> String {
    let list = natural_list(&expr.args);
    match expr.op {
        Op::Count => format!("How many items are in the list: {list}?"),
        Op::Top | Op::Bottom => {
            let k = expr.k.unwrap_or(1);
            let extreme = if expr.op == Op::Top { "largest" } else { "smallest" };
            let ordinal = ordinal_word(k);
            if ordinal.is_empty() {
                format!("What is the {extreme} value in: {list}?")
            } else {
                format!("What is the {ordinal} {extreme} value in: {list}?")
            }
        }
        Op::Sum => format!("What is the sum of {list}?"),
        Op::Diff => format!("What is the difference between {} and {}?", expr.args[0], expr.args[1]),
        Op::IfThen => {
            let c = expr.condition.as_ref().expect("if_then has a condition");
            format!(
                "If {} {} {} then answer is {} else it is {}",
                c.left,
                c.cmp.symbol(),
                c.right,
                expr.args[0],
                expr.args[1]
            )
        }
        Op::Gather => format!("What are all the values in: {list}?"),
        Op::Intersection => {
            let (a, b) = expr.lists().expect("intersection has two lists");
            format!("Which of {} are also in {}?", natural_list(a), natural_list(b))
        }
        Op::Negation => format!("What is 100 minus {}?", expr.args[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn parse(s: &str) -> SymbolicExpr {
        parse_symbolic(s).unwrap().unwrap()
    }

    #[test]
    fn parses_worked_calls() {
        let count = parse("count(Walsall; Oxford United; Portsmouth)");
        assert_eq!(count.op(), Op::Count);
        assert_eq!(count.args(), strings(&["Walsall", "Oxford United", "Portsmouth"]));

        let top = parse("top(2, 5,666;10,037;14,074;34,669;33,861)");
        assert_eq!(top.op(), Op::Top);
        assert_eq!(top.k(), Some(2));
        assert_eq!(top.args(), strings(&["5,666", "10,037", "14,074", "34,669", "33,861"]));

        // closing parenthesis cut off
        let open = parse("bottom(3, 14,074;34,669;33,861");
        assert_eq!(open.k(), Some(3));
        assert_eq!(open.args().len(), 3);

        let max = parse("max(22;eight)");
        assert_eq!((max.op(), max.k()), (Op::Top, Some(1)));
        assert_eq!(max.args(), strings(&["22", "eight"]));

        let cond = parse("if_then(34,669 > 33,861; SF 2nd Leg; QFR)");
        let c = cond.condition().unwrap();
        assert_eq!((c.left.as_str(), c.cmp, c.right.as_str()), ("34,669", Comparator::Greater, "33,861"));
        assert_eq!(cond.args(), strings(&["SF 2nd Leg", "QFR"]));

        let inter = parse("intersection(A; B; C | B; D)");
        assert_eq!(inter.lists().unwrap(), (&strings(&["A", "B", "C"])[..], &strings(&["B", "D"])[..]));
    }

    #[test]
    fn natural_questions_are_not_symbolic() {
        for s in [
            "Who kicked the 42-yard field goal?",
            "What is the sum (roughly) of goals?",
            "There are no more questions left to ask.",
            "foo(a; b)",
            "",
        ] {
            assert_eq!(parse_symbolic(s), Ok(None), "{s:?}");
        }
    }

    #[test]
    fn malformed_calls_are_errors() {
        for s in [
            "top(7, 1; 2)",
            "top(0, 1; 2)",
            "top(1; 2)",
            "bottom(x, 1; 2)",
            "diff(1; 2; 3)",
            "negation(1; 2)",
            "count()",
            "if_then(1; 2; 3)",
            "if_then(1 > 2; a)",
            "intersection(a; b)",
            "intersection(a | )",
        ] {
            assert!(parse_symbolic(s).is_err(), "{s:?}");
        }
    }

    #[test]
    fn canonical_rendering() {
        let e = SymbolicExpr::new(Op::Count, strings(&["A", "H"])).unwrap();
        assert_eq!(e.render(), "count(A; H)");
        let e = SymbolicExpr::ranked(Op::Top, 1, strings(&["2", "3"])).unwrap();
        assert_eq!(e.render(), "top(1, 2; 3)");
        assert_eq!(parse("max(22;eight)").render(), "top(1, 22; eight)");
        let e = parse("if_then(1905<1905;Chemulpo;Veracruz)");
        assert_eq!(e.render(), "if_then(1905 < 1905; Chemulpo; Veracruz)");
    }

    #[test]
    fn constructors_reject_unrenderable_args() {
        assert!(SymbolicExpr::new(Op::Count, strings(&["a;b"])).is_err());
        assert!(SymbolicExpr::new(Op::Count, strings(&[" a"])).is_err());
        assert!(SymbolicExpr::new(Op::Top, strings(&["1"])).is_err());
        let c = Condition { left: "a>b".into(), cmp: Comparator::Less, right: "c".into() };
        assert!(SymbolicExpr::if_then(c, "x", "y").is_err());
    }

    #[test]
    fn paraphrases() {
        assert_eq!(
            naturalize_symbolic(&SymbolicExpr::new(Op::Count, strings(&["Walsall", "Liverpool"])).unwrap()),
            "How many items are in the list: Walsall and Liverpool?"
        );
        assert_eq!(naturalize_symbolic(&parse("top(1, 2; 3)")), "What is the largest value in: 2 and 3?");
        assert_eq!(
            naturalize_symbolic(&parse("diff(34669; 24632)")),
            "What is the difference between 34669 and 24632?"
        );
        assert_eq!(naturalize_symbolic(&parse("bottom(1, 33861; 5666)")), "What is the smallest value in: 33861 and 5666?");
        assert_eq!(naturalize_symbolic(&parse("sum(33861; 5666)")), "What is the sum of 33861 and 5666?");
        assert_eq!(
            naturalize_symbolic(&parse("if_then(1 > 2; SF 1st Leg; QFR)")),
            "If 1 > 2 then answer is SF 1st Leg else it is QFR"
        );
        assert_eq!(naturalize_symbolic(&parse("top(2, 1; 2; 3)")), "What is the second largest value in: 1, 2 and 3?");
    }

    #[test]
    fn json_form_is_the_surface() {
        let e = parse("top(2, 5,666; 10,037)");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#""top(2, 5,666; 10,037)""#);
        assert_eq!(serde_json::from_str::<SymbolicExpr>(&json).unwrap(), e);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arg() -> impl Strategy<Value = String> {
            prop_oneof![
                "[A-Za-z][A-Za-z0-9 .']{0,10}[A-Za-z0-9.]",
                "[A-Za-z]",
                (0u32..2_000_000).prop_map(|n| n.to_string()),
                (1u32..999, 0u32..1000).prop_map(|(a, b)| format!("{a},{b:03}")),
                (1u32..100).prop_map(|n| format!("{n}-yard")),
            ]
        }

        fn expr() -> impl Strategy<Value = SymbolicExpr> {
            let args = || proptest::collection::vec(arg(), 1..8);
            prop_oneof![
                (prop::sample::select(vec![Op::Count, Op::Sum, Op::Gather]), args())
                    .prop_map(|(op, a)| SymbolicExpr::new(op, a).unwrap()),
                (arg(), arg()).prop_map(|(a, b)| SymbolicExpr::new(Op::Diff, vec![a, b]).unwrap()),
                arg().prop_map(|a| SymbolicExpr::new(Op::Negation, vec![a]).unwrap()),
                (prop::bool::ANY, args(), 1usize..8).prop_map(|(top, a, k)| {
                    let k = 1 + (k - 1) % a.len();
                    SymbolicExpr::ranked(if top { Op::Top } else { Op::Bottom }, k, a).unwrap()
                }),
                (arg(), prop::bool::ANY, arg(), arg(), arg()).prop_map(|(l, gt, r, x, y)| {
                    let cmp = if gt { Comparator::Greater } else { Comparator::Less };
                    SymbolicExpr::if_then(Condition { left: l, cmp, right: r }, x, y).unwrap()
                }),
                (args(), args()).prop_map(|(a, b)| SymbolicExpr::intersection(a, b).unwrap()),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn render_parse_round_trip(e in expr()) {
                let rendered = e.render();
                prop_assert_eq!(parse_symbolic(&rendered), Ok(Some(e)));
            }
        }
    }
}
