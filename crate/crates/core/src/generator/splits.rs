//! Per-step training examples for decomposition (QD) and answering (QA).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::{Answer, ComplexExample, ModelError, QuestionForm, ReasoningType, SimpleQuestion, Step};

/// What the decomposer should produce after a partial chain.
#[derive(Debug, Clone, PartialEq)]
pub enum QdTarget {
    Next(SimpleQuestion),
    End(Answer),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TargetRepr {
    Next { q: String, form: QuestionForm },
    End { answer: Answer },
}

impl Serialize for QdTarget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            QdTarget::Next(q) => TargetRepr::Next { q: q.surface().to_string(), form: q.form() },
            QdTarget::End(a) => TargetRepr::End { answer: a.clone() },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QdTarget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match TargetRepr::deserialize(d)? {
            TargetRepr::Next { q, form } => SimpleQuestion::with_form(&q, form)
                .map(QdTarget::Next)
                .map_err(|e: ModelError| serde::de::Error::custom(e)),
            TargetRepr::End { answer } => Ok(QdTarget::End(answer)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdExample {
    pub source_id: String,
    pub passage: String,
    pub question: String,
    pub partial: Vec<Step>,
    pub target: QdTarget,
    /// 1-based number of the step being predicted.
    pub step_number: usize,
    #[serde(default)]
    pub reasoning_type: Option<ReasoningType>,
}

impl QdExample {
    pub fn id(&self) -> String {
        format!("{}#{}", self.source_id, self.step_number)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaExample {
    /// Example the pair was first seen in.
    pub source_id: String,
    pub passage: String,
    #[serde(with = "natural_question")]
    pub question: SimpleQuestion,
    pub answer: Answer,
    #[serde(default)]
    pub reasoning_type: Option<ReasoningType>,
}

mod natural_question {
    use super::SimpleQuestion;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &SimpleQuestion, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(q.surface())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SimpleQuestion, D::Error> {
        Ok(SimpleQuestion::natural(String::deserialize(d)?))
    }
}

/// For a chain of `s` steps: `s + 1` decomposition examples (one per prefix,
/// the last targeting the end marker) and one answering example per natural
/// step. Answering examples are deduplicated on (passage, question, answer).
pub fn derive_training_splits(examples: &[ComplexExample]) -> (Vec<QdExample>, Vec<QaExample>) {
    let mut qd = Vec::new();
    let mut qa = Vec::new();
    let mut seen: HashSet<(String, String, String)> = HashSet::new();
    for e in examples {
        let steps = &e.chain.steps;
        for k in 0..=steps.len() {
            let target = match steps.get(k) {
                Some(step) => QdTarget::Next(step.question.clone()),
                None => QdTarget::End(e.final_answer().clone()),
            };
            qd.push(QdExample {
                source_id: e.id.clone(),
                passage: e.passage.clone(),
                question: e.question.clone(),
                partial: steps[..k].to_vec(),
                target,
                step_number: k + 1,
                reasoning_type: e.reasoning_type,
            });
        }
        for step in steps.iter().filter(|s| !s.question.is_symbolic()) {
            let key = (e.passage.clone(), step.question.surface().to_string(), step.answer.render());
            if seen.insert(key) {
                qa.push(QaExample {
                    source_id: e.id.clone(),
                    passage: e.passage.clone(),
                    question: step.question.clone(),
                    answer: step.answer.clone(),
                    reasoning_type: e.reasoning_type,
                });
            }
        }
    }
    (qd, qa)
}
