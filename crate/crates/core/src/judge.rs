//! Judge critique prompts and response handling.
//!
//! Reports with annotations are checked through a seven-question critique
//! prompt answered in JSON; empty reports are confirmed through a single
//! yes/no question. The templates live under `resources/templates` and are
//! filled verbatim. Parsed answers map onto failure modes for the fields
//! each question governs, and are unioned with the deterministic check
//! outcomes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::checks::{CheckOutcome, FailureMode, PhrasePair};
use crate::report::{DiagnosticReport, EvalInstance, Severity};
use crate::templates;

/// Which judge prompt to build: the Q1-Q7 critique for reports with
/// annotations, or the single-question confirmation for empty reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Critique,
    NoError,
}

/// The judged severity from Q4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JudgedSeverity {
    #[serde(rename = "no-error")]
    NoError,
    #[serde(rename = "minor-error")]
    MinorError,
    #[serde(rename = "major-error")]
    MajorError,
}

/// Q1-Q6 answers for one annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationAnswers {
    /// Q1: the error span the judge extracted from the location field.
    pub span: String,
    /// Q2: incorrect/correct phrase pairs parsed from the explanation.
    pub pairs: Vec<PhrasePair>,
    /// Q3: whether the pair aligns reference and output. `None` exactly
    /// when Q2 contains a `None` side.
    pub alignment_ok: Option<bool>,
    /// Q4: the judged severity.
    pub severity: JudgedSeverity,
    /// Q5: explanation consistent with the error type.
    pub type_consistent: bool,
    /// Q6: explanation discusses the given location.
    pub location_discussed: bool,
}

/// Q7: repetition across annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionAnswer {
    pub flag: bool,
    pub pair_count: u32,
}

/// Parsed critique reply covering every annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeAnswers {
    pub annotations: Vec<AnnotationAnswers>,
    pub repetition: RepetitionAnswer,
}

/// Parsed reply to the no-error confirmation prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoErrorVerdict {
    pub contains_error: bool,
}

/// Either reply, depending on the prompt kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JudgeResponse {
    Critique(JudgeAnswers),
    NoError(NoErrorVerdict),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JudgeError {
    #[error("prompt kind {kind:?} does not match a report with {n_annotations} annotations")]
    KindMismatch { kind: String, n_annotations: usize },
    #[error("could not parse judge response: {0}")]
    UnparseableResponse(String),
    #[error("judge response is missing the {key} block")]
    MissingAnnotationBlock { key: String },
    #[error("bad value for {field}: {value:?}")]
    BadEnumValue { field: String, value: String },
    #[error("no answers for annotation {index}")]
    CoverageGap { index: u32 },
}

/// Builds the judge prompt for one instance/report pair. Rendering is a
/// pure template fill: identical inputs produce byte-identical prompts.
pub fn build_judge_prompt(
    kind: JudgeKind,
    instance: &EvalInstance,
    report: &DiagnosticReport,
) -> Result<String, JudgeError> {
    match kind {
        JudgeKind::Critique => {
            if report.annotations.is_empty() {
                return Err(JudgeError::KindMismatch {
                    kind: "critique".into(),
                    n_annotations: 0,
                });
            }
            let mut blocks = String::new();
            for ann in &report.annotations {
                let i = ann.index;
                blocks.push_str(&format!(
                    "Error{i}:\nError location {i}: {}\nError type {i}: {}\nExplanation {i}: {}\n",
                    ann.location_raw, ann.error_type, ann.explanation
                ));
            }
            let err_schema = report
                .annotations
                .iter()
                .map(|ann| {
                    format!(
                        "Err{}: {{Q1: A1, Q2: A2, Q3: A3, Q4: A4, Q5: A5, Q6: A6}}",
                        ann.index
                    )
                })
                .collect::<Vec<_>>()
                .join(", ");
            Ok(templates::CRITIQUE_PROMPT
                .replace("{reference}", &instance.reference)
                .replace("{candidate}", &instance.candidate)
                .replace("{error_blocks}", &blocks)
                .replace("{err_schema}", &err_schema))
        }
        JudgeKind::NoError => {
            if !report.annotations.is_empty() {
                return Err(JudgeError::KindMismatch {
                    kind: "no_error".into(),
                    n_annotations: report.annotations.len(),
                });
            }
            Ok(templates::NO_ERROR_PROMPT
                .replace("{reference}", &instance.reference)
                .replace("{candidate}", &instance.candidate))
        }
    }
}

/// Extracts the first balanced JSON object from free-form reply text.
fn first_json_object(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, c) in raw[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&raw[start..start + offset + c.len_utf8()]);
                }
            }
            _ => {}
        }
    }
    None
}

fn yes_no(value: &Value, field: &str) -> Result<bool, JudgeError> {
    let text = value.as_str().unwrap_or_default().trim();
    if text.eq_ignore_ascii_case("yes") {
        Ok(true)
    } else if text.eq_ignore_ascii_case("no") {
        Ok(false)
    } else {
        Err(JudgeError::BadEnumValue {
            field: field.into(),
            value: value.to_string(),
        })
    }
}

fn phrase_side(value: &Value) -> Option<String> {
    match value {
        Value::Null => None,
        Value::String(s) if s.trim().eq_ignore_ascii_case("none") || s.trim().is_empty() => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn parse_pairs(value: &Value, field: &str) -> Result<Vec<PhrasePair>, JudgeError> {
    match value {
        // ["incorrect", "correct"] or [["i1","c1"], ["i2","c2"]]
        Value::Array(items) if items.iter().all(Value::is_array) => items
            .iter()
            .map(|item| parse_one_pair(item, field))
            .collect(),
        Value::Array(_) => Ok(vec![parse_one_pair(value, field)?]),
        Value::String(_) => Ok(vec![PhrasePair { incorrect: phrase_side(value), correct: None }]),
        _ => Err(JudgeError::BadEnumValue {
            field: field.into(),
            value: value.to_string(),
        }),
    }
}

fn parse_one_pair(value: &Value, field: &str) -> Result<PhrasePair, JudgeError> {
    let items = value.as_array().ok_or_else(|| JudgeError::BadEnumValue {
        field: field.into(),
        value: value.to_string(),
    })?;
    if items.len() != 2 {
        return Err(JudgeError::BadEnumValue {
            field: field.into(),
            value: value.to_string(),
        });
    }
    Ok(PhrasePair {
        incorrect: phrase_side(&items[0]),
        correct: phrase_side(&items[1]),
    })
}

fn parse_q7(value: &Value) -> Result<RepetitionAnswer, JudgeError> {
    // The composite "Yes/No, number" form, an object, or a bare yes/no.
    let bad = || JudgeError::BadEnumValue {
        field: "Q7".into(),
        value: value.to_string(),
    };
    let (flag, count) = match value {
        Value::String(s) => {
            let (flag_part, count_part) = match s.split_once(',') {
                Some((f, c)) => (f.trim(), Some(c.trim())),
                None => (s.trim(), None),
            };
            let flag = if flag_part.eq_ignore_ascii_case("yes") {
                true
            } else if flag_part.eq_ignore_ascii_case("no") {
                false
            } else {
                return Err(bad());
            };
            let count = match count_part {
                Some(c) => c.parse::<u32>().map_err(|_| bad())?,
                None => u32::from(flag),
            };
            (flag, count)
        }
        Value::Object(map) => {
            let flag = yes_no(map.get("flag").ok_or_else(bad)?, "Q7.flag")?;
            let count = map
                .get("pairs")
                .or_else(|| map.get("count"))
                .and_then(Value::as_u64)
                .unwrap_or(u64::from(flag)) as u32;
            (flag, count)
        }
        _ => return Err(bad()),
    };
    // pair count is only meaningful when repetition was flagged
    Ok(RepetitionAnswer { flag, pair_count: if flag { count } else { 0 } })
}

/// Parses the judge's reply. Critique replies must contain `Err1`..`ErrN`
/// and `Q7`; no-error replies are a bare yes/no.
pub fn parse_judge_response(
    kind: JudgeKind,
    raw: &str,
    n_annotations: usize,
) -> Result<JudgeResponse, JudgeError> {
    match kind {
        JudgeKind::NoError => {
            let text = raw.trim().trim_matches(['"', '.', '!']);
            if text.eq_ignore_ascii_case("yes") {
                Ok(JudgeResponse::NoError(NoErrorVerdict { contains_error: true }))
            } else if text.eq_ignore_ascii_case("no") {
                Ok(JudgeResponse::NoError(NoErrorVerdict { contains_error: false }))
            } else {
                Err(JudgeError::UnparseableResponse(format!(
                    "expected Yes/No, got {raw:?}"
                )))
            }
        }
        JudgeKind::Critique => {
            let json = first_json_object(raw)
                .ok_or_else(|| JudgeError::UnparseableResponse("no JSON object found".into()))?;
            let value: Value = serde_json::from_str(json)
                .map_err(|e| JudgeError::UnparseableResponse(e.to_string()))?;
            let object = value
                .as_object()
                .ok_or_else(|| JudgeError::UnparseableResponse("reply is not an object".into()))?;

            let mut annotations = Vec::with_capacity(n_annotations);
            for i in 1..=n_annotations {
                let key = format!("Err{i}");
                let block = object
                    .get(&key)
                    .and_then(Value::as_object)
                    .ok_or_else(|| JudgeError::MissingAnnotationBlock { key: key.clone() })?;
                let q = |name: &str| {
                    block.get(name).ok_or_else(|| JudgeError::MissingAnnotationBlock {
                        key: format!("{key}.{name}"),
                    })
                };

                let span = q("Q1")?.as_str().unwrap_or_default().to_string();
                let pairs = parse_pairs(q("Q2")?, &format!("{key}.Q2"))?;
                let has_none_side =
                    pairs.iter().any(|p| p.incorrect.is_none() || p.correct.is_none());

                let q3 = q("Q3")?;
                let alignment_ok = if has_none_side {
                    // Q3 is defined only for complete pairs.
                    None
                } else {
                    Some(yes_no(q3, &format!("{key}.Q3"))?)
                };

                let q4_raw = q("Q4")?.as_str().unwrap_or_default().trim().to_lowercase();
                let severity = match q4_raw.as_str() {
                    "no-error" => JudgedSeverity::NoError,
                    "minor-error" => JudgedSeverity::MinorError,
                    "major-error" => JudgedSeverity::MajorError,
                    _ => {
                        return Err(JudgeError::BadEnumValue {
                            field: format!("{key}.Q4"),
                            value: q4_raw,
                        })
                    }
                };

                annotations.push(AnnotationAnswers {
                    span,
                    pairs,
                    alignment_ok,
                    severity,
                    type_consistent: yes_no(q("Q5")?, &format!("{key}.Q5"))?,
                    location_discussed: yes_no(q("Q6")?, &format!("{key}.Q6"))?,
                });
            }

            let repetition = parse_q7(
                object
                    .get("Q7")
                    .ok_or_else(|| JudgeError::MissingAnnotationBlock { key: "Q7".into() })?,
            )?;

            Ok(JudgeResponse::Critique(JudgeAnswers { annotations, repetition }))
        }
    }
}

/// Maps judge answers onto failure modes per annotation and unions them
/// with the deterministic outcomes. Never removes a deterministically
/// triggered mode.
pub fn map_answers_to_failures(
    answers: &JudgeAnswers,
    report: &DiagnosticReport,
    deterministic: &[CheckOutcome],
) -> Result<Vec<BTreeSet<FailureMode>>, JudgeError> {
    let n = report.annotations.len();
    if answers.annotations.len() != n {
        let index = answers.annotations.len().min(n) as u32 + 1;
        return Err(JudgeError::CoverageGap { index });
    }

    let mut failures: Vec<BTreeSet<FailureMode>> = Vec::with_capacity(n);
    for (ann, ans) in report.annotations.iter().zip(&answers.annotations) {
        let mut set = BTreeSet::new();
        if !ans.type_consistent {
            set.insert(FailureMode::M1);
        }
        if !ans.location_discussed {
            set.insert(FailureMode::M2);
        }
        if ans.alignment_ok == Some(false) {
            set.insert(FailureMode::G3);
        }
        match ans.severity {
            // A "no-error" verdict invalidates the whole annotation and
            // supersedes the severity comparison.
            JudgedSeverity::NoError => {
                set.insert(FailureMode::G1);
            }
            JudgedSeverity::MinorError if ann.severity == Severity::Major => {
                set.insert(FailureMode::M5);
            }
            JudgedSeverity::MajorError if ann.severity == Severity::Minor => {
                set.insert(FailureMode::M5);
            }
            _ => {}
        }
        failures.push(set);
    }

    if answers.repetition.flag {
        // Zero the annotations of each lexically identified duplicate pair;
        // with no lexical pair to localize the repetition, apply it to all.
        let lexical: Vec<usize> = deterministic
            .iter()
            .enumerate()
            .filter(|(_, o)| o.triggered.contains(&FailureMode::G2))
            .map(|(i, _)| i)
            .collect();
        if lexical.is_empty() {
            for set in &mut failures {
                set.insert(FailureMode::G2);
            }
        } else {
            for i in lexical {
                if i < failures.len() {
                    failures[i].insert(FailureMode::G2);
                }
            }
        }
    }

    for outcome in deterministic {
        let pos = outcome.annotation_index as usize;
        if pos == 0 || pos > failures.len() {
            return Err(JudgeError::CoverageGap { index: outcome.annotation_index });
        }
        failures[pos - 1].extend(outcome.triggered.iter().copied());
    }

    Ok(failures)
}
