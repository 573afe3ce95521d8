use serde::Serialize;

use crate::model::{ComplexExample, StepOrigin, Table};
use crate::symbolic::eval_symbolic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    /// Index of the first step that does not replay; `None` when the steps
    /// all replay but the final answer disagrees, or on success.
    pub failing_step: Option<usize>,
    pub reason: Option<String>,
}

impl CheckReport {
    fn pass() -> Self {
        Self { passed: true, failing_step: None, reason: None }
    }

    fn fail(step: Option<usize>, reason: impl Into<String>) -> Self {
        Self { passed: false, failing_step: step, reason: Some(reason.into()) }
    }
}

/// Replay a gold chain against its table: lookups re-run on the table,
/// calculator calls re-run through the evaluator. Passes when every recorded
/// answer is reproduced and the final answer equals the last step's.
pub fn self_check(example: &ComplexExample, table: &Table) -> CheckReport {
    let chain = &example.chain;
    if chain.steps.is_empty() {
        return CheckReport::fail(None, "chain has no steps");
    }
    for (i, step) in chain.steps.iter().enumerate() {
        let replayed = match (&step.origin, step.question.parsed()) {
            (Some(StepOrigin::Lookup(lookup)), _) => {
                match lookup.question(table) {
                    Ok(q) if q == step.question.surface() => {}
                    Ok(q) => return CheckReport::fail(Some(i), format!("question {:?} should read {q:?}", step.question.surface())),
                    Err(e) => return CheckReport::fail(Some(i), e.to_string()),
                }
                lookup.execute(table).map_err(|e| e.to_string())
            }
            (Some(StepOrigin::Calculator(expr)), parsed) => {
                if parsed.is_some_and(|p| p != expr) {
                    return CheckReport::fail(Some(i), "symbolic question differs from its recorded call");
                }
                eval_symbolic(expr).map_err(|e| e.to_string())
            }
            (None, Some(expr)) => eval_symbolic(expr).map_err(|e| e.to_string()),
            (None, None) => return CheckReport::fail(Some(i), "natural step has no replayable origin"),
        };
        match replayed {
            Ok(answer) if answer == step.answer => {}
            Ok(answer) => {
                return CheckReport::fail(
                    Some(i),
                    format!("recorded {:?}, replay gives {:?}", step.answer.render(), answer.render()),
                )
            }
            Err(e) => return CheckReport::fail(Some(i), e),
        }
    }
    match &chain.final_answer {
        None => CheckReport::fail(None, "chain is not terminated"),
        Some(f) if Some(f) != chain.steps.last().map(|s| &s.answer) => {
            CheckReport::fail(None, "final answer differs from the last step")
        }
        Some(_) => CheckReport::pass(),
    }
}
