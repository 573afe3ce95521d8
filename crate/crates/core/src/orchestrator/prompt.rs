//! Prompt assembly and decomposer-output parsing.
//!
//! Every prompt is a sequence of blocks separated by one blank line:
//! demonstrations in rank order, then the test block ending in a cue. Text is
//! collapsed onto single lines so blocks never contain blank lines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{QaExample, QdExample, QdTarget};
use crate::model::{Answer, SimpleQuestion, Step};

pub const END_PHRASE: &str = "There are no more questions left to ask";
pub const FINAL_PREFIX: &str = "The final answer is";
pub const EOQ: &str = "EOQ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptFormat {
    /// `Q:`/`A:` blocks with the end phrase.
    #[default]
    Natural,
    /// `QI:`/`A:`/`QS:` segments with the `EOQ` marker.
    ControlCode,
}

impl PromptFormat {
    fn step_label(self) -> &'static str {
        match self {
            PromptFormat::Natural => "Q:",
            PromptFormat::ControlCode => "QI:",
        }
    }

    fn next_label(self) -> &'static str {
        match self {
            PromptFormat::Natural => "Q:",
            PromptFormat::ControlCode => "QS:",
        }
    }

    fn question_label(self) -> &'static str {
        match self {
            PromptFormat::Natural => "Question: ",
            PromptFormat::ControlCode => "",
        }
    }

    /// Stop sequences: the next segment label on a new line, and a blank line.
    pub fn stop_sequences(self) -> Vec<String> {
        let labels: &[&str] = match self {
            PromptFormat::Natural => &["\nQ:", "\nA:", "\nQuestion:"],
            PromptFormat::ControlCode => &["\nQI:", "\nQS:", "\nA:"],
        };
        labels.iter().map(|s| s.to_string()).chain(["\n\n".to_string()]).collect()
    }

    /// The decomposer's termination line.
    pub fn end_line(self, answer: &Answer) -> String {
        match self {
            PromptFormat::Natural => format!("{END_PHRASE}. {FINAL_PREFIX} {}", one_line(&answer.render())),
            PromptFormat::ControlCode => EOQ.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("prompt needs {needed} characters without demonstrations, budget is {budget}")]
pub struct PromptOverflow {
    pub needed: usize,
    pub budget: usize,
}

/// An assembled prompt and how many of the offered demonstrations fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub text: String,
    pub demos_used: usize,
}

/// Collapse all whitespace runs to single spaces.
pub fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn push_steps(out: &mut String, steps: &[Step], format: PromptFormat) {
    for s in steps {
        out.push_str(&format!("\n{} {}\nA: {}", format.step_label(), one_line(s.question.surface()), one_line(&s.answer.render())));
    }
}

fn qd_head(passage: &str, question: &str, steps: &[Step], format: PromptFormat) -> String {
    let mut out = format!("{}\n{}{}", one_line(passage), format.question_label(), one_line(question));
    push_steps(&mut out, steps, format);
    out
}

fn qd_demo(demo: &QdExample, format: PromptFormat) -> String {
    let target = match &demo.target {
        QdTarget::Next(q) => one_line(q.surface()),
        QdTarget::End(a) => format.end_line(a),
    };
    format!("{}\n{} {target}", qd_head(&demo.passage, &demo.question, &demo.partial, format), format.next_label())
}

fn qa_block(passage: &str, question: &str, format: PromptFormat) -> String {
    format!("{}\n{} {}\nA:", one_line(passage), format.next_label(), one_line(question))
}

/// Join demonstrations and the test block, dropping the lowest-ranked
/// demonstrations until the prompt fits `budget` characters.
fn assemble(demos: Vec<String>, test: String, budget: usize) -> Result<Prompt, PromptOverflow> {
    let test_len = test.chars().count();
    if test_len > budget {
        return Err(PromptOverflow { needed: test_len, budget });
    }
    let mut total = test_len;
    let mut used = 0;
    for d in &demos {
        let extra = d.chars().count() + 2;
        if total + extra > budget {
            break;
        }
        total += extra;
        used += 1;
    }
    let mut text = String::with_capacity(total);
    for d in &demos[..used] {
        text.push_str(d);
        text.push_str("\n\n");
    }
    text.push_str(&test);
    Ok(Prompt { text, demos_used: used })
}

/// Decomposition prompt: demonstrations, then passage, complex question and
/// the chain so far, ending with the next-question cue.
pub fn format_qd_prompt(
    passage: &str,
    question: &str,
    chain: &[Step],
    demos: &[&QdExample],
    format: PromptFormat,
    budget: usize,
) -> Result<Prompt, PromptOverflow> {
    let test = format!("{}\n{}", qd_head(passage, question, chain, format), format.next_label());
    assemble(demos.iter().map(|d| qd_demo(d, format)).collect(), test, budget)
}

/// Answering prompt: demonstrations, then passage and simple question ending
/// with the answer cue.
pub fn format_qa_prompt(
    passage: &str,
    question: &str,
    demos: &[&QaExample],
    format: PromptFormat,
    budget: usize,
) -> Result<Prompt, PromptOverflow> {
    let rendered = demos
        .iter()
        .map(|d| format!("{} {}", qa_block(&d.passage, d.question.surface(), format), one_line(&d.answer.render())))
        .collect();
    assemble(rendered, qa_block(passage, question, format), budget)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QdOutput {
    Next(SimpleQuestion),
    /// `None` when the marker carries no answer (control codes); the loop
    /// then takes the last step's answer.
    Terminate(Option<Answer>),
    Unparseable,
}

fn strip_label<'a>(line: &'a str, labels: &[&str]) -> &'a str {
    let line = line.trim();
    labels.iter().find_map(|l| line.strip_prefix(l)).map_or(line, str::trim)
}

/// Interpret a decomposer generation: the end marker terminates, otherwise
/// the first non-empty line is the next question.
pub fn parse_qd_output(text: &str, format: PromptFormat) -> QdOutput {
    let Some(line) = text.lines().map(str::trim).find(|l| !l.is_empty()) else {
        return QdOutput::Unparseable;
    };
    let line = strip_label(line, &["QS:", "QI:", "Q:"]);
    let terminal = match format {
        PromptFormat::Natural => line.find(END_PHRASE).map(|i| &line[i + END_PHRASE.len()..]),
        PromptFormat::ControlCode => line.strip_prefix(EOQ),
    };
    if let Some(rest) = terminal {
        let answer = rest
            .find(FINAL_PREFIX)
            .map(|i| &rest[i + FINAL_PREFIX.len()..])
            .or_else(|| (format == PromptFormat::ControlCode).then_some(rest))
            .map(|a| a.trim().trim_start_matches(':').trim())
            .map(|a| a.strip_suffix('.').unwrap_or(a).trim())
            .filter(|a| !a.is_empty())
            .map(Answer::from_generation);
        return QdOutput::Terminate(answer);
    }
    if line.is_empty() {
        return QdOutput::Unparseable;
    }
    QdOutput::Next(SimpleQuestion::classify(line))
}

/// Answer text from an answering generation: the first non-empty line without
/// a leading `A:` label.
pub fn parse_qa_output(text: &str) -> Answer {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    Answer::from_generation(strip_label(line, &["A:"]))
}

/// The final block of a prompt, as a model would read it.
#[derive(Debug, Clone, PartialEq)]
pub enum TestBlock {
    Qd { passage: String, question: String, steps: Vec<(String, String)> },
    Qa { passage: String, question: String },
}

/// Recover the test block from a prompt produced by this module.
pub fn parse_test_block(prompt: &str, format: PromptFormat) -> Option<TestBlock> {
    let block = prompt.rsplit("\n\n").next()?;
    let lines: Vec<&str> = block.lines().collect();
    let (passage, second) = (lines.first()?.to_string(), *lines.get(1)?);
    if lines.len() == 3 && lines[2] == "A:" {
        if let Some(q) = second.strip_prefix(format.next_label()) {
            return Some(TestBlock::Qa { passage, question: q.trim().to_string() });
        }
    }
    let question = second.strip_prefix(format.question_label())?.to_string();
    if lines.last() != Some(&format.next_label()) {
        return None;
    }
    let body = &lines[2..lines.len() - 1];
    if !body.len().is_multiple_of(2) {
        return None;
    }
    let steps = body
        .chunks(2)
        .map(|pair| {
            let q = pair[0].strip_prefix(format.step_label())?.trim().to_string();
            let a = pair[1].strip_prefix("A:")?.trim().to_string();
            Some((q, a))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(TestBlock::Qd { passage, question, steps })
}
