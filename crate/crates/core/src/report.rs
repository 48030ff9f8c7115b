//! Diagnostic-report data model and its canonical text grammar.
//!
//! A report is a header line (`Your Translation contains N errors:`) followed
//! by one four-line block per error:
//!
//! ```text
//! Error type 1: Incorrect translation is missing content from the correct translation
//! Major/minor: Major
//! Error location 1: "with air"
//! Explanation for error 1: The incorrect translation changes ...
//! ```
//!
//! `parse_report` accepts model emissions (strict or lenient), and
//! `render_report` produces the canonical text used as a fine-tune target;
//! the two are exact inverses on strict-valid reports.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Error severity label. Major errors alter sentence meaning, minor ones
/// do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Severity {
    Major,
    Minor,
}

impl Severity {
    /// Matches a severity token case-insensitively, after trimming
    /// whitespace and stripping surrounding markup asterisks.
    pub fn parse_token(token: &str) -> Option<Severity> {
        let cleaned = token.trim().trim_matches('*').trim();
        if cleaned.eq_ignore_ascii_case("major") {
            Some(Severity::Major)
        } else if cleaned.eq_ignore_ascii_case("minor") {
            Some(Severity::Minor)
        } else {
            None
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Major => write!(f, "Major"),
            Severity::Minor => write!(f, "Minor"),
        }
    }
}

/// One error annotation inside a diagnostic report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    /// 1-based position within the report.
    pub index: u32,
    pub error_type: String,
    pub severity: Severity,
    /// The location field exactly as emitted, including any surrounding
    /// quotes or trailing commentary. Span extraction happens downstream.
    pub location_raw: String,
    pub explanation: String,
}

/// A full diagnostic report: the declared error count plus the annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub declared_count: u32,
    pub annotations: Vec<ErrorAnnotation>,
}

impl DiagnosticReport {
    pub fn empty() -> Self {
        DiagnosticReport {
            declared_count: 0,
            annotations: Vec::new(),
        }
    }

    pub fn n_major(&self) -> usize {
        self.annotations
            .iter()
            .filter(|a| a.severity == Severity::Major)
            .count()
    }

    pub fn n_minor(&self) -> usize {
        self.annotations
            .iter()
            .filter(|a| a.severity == Severity::Minor)
            .count()
    }

    /// Checks the strict invariants: declared count matches the annotation
    /// list, indices run 1..N, and every field is non-empty.
    pub fn validate_strict(&self) -> Result<(), InvariantViolation> {
        if self.declared_count as usize != self.annotations.len() {
            return Err(InvariantViolation(format!(
                "declared_count {} does not match {} annotations",
                self.declared_count,
                self.annotations.len()
            )));
        }
        for (pos, ann) in self.annotations.iter().enumerate() {
            let expected = pos as u32 + 1;
            if ann.index != expected {
                return Err(InvariantViolation(format!(
                    "annotation at position {} has index {}",
                    expected, ann.index
                )));
            }
            if ann.error_type.is_empty() {
                return Err(InvariantViolation(format!("annotation {expected}: empty error type")));
            }
            if ann.location_raw.is_empty() {
                return Err(InvariantViolation(format!("annotation {expected}: empty location")));
            }
            if ann.explanation.is_empty() {
                return Err(InvariantViolation(format!("annotation {expected}: empty explanation")));
            }
        }
        Ok(())
    }
}

/// A reference/candidate sentence pair under evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalInstance {
    pub instance_id: String,
    pub reference: String,
    pub candidate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    Strict,
    Lenient,
}

/// A repair applied while parsing in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Repair {
    /// Header count disagreed with the number of annotation blocks.
    CountAdjusted { declared: u32, actual: u32 },
    /// A block carried an out-of-sequence index and was renumbered.
    IndexRenumbered { found: u32, assigned: u32 },
    /// A block mixed different indices across its field lines.
    InconsistentBlockIndex { position: u32 },
    /// The location field was empty (tolerated in lenient mode only).
    EmptyLocation { index: u32 },
}

/// Result of parsing: the report plus any lenient-mode repairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parsed {
    pub report: DiagnosticReport,
    pub repairs: Vec<Repair>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing report header line")]
    MissingHeader,
    #[error("header declares {declared} errors but {actual} annotation blocks found")]
    CountMismatch { declared: u32, actual: u32 },
    #[error("malformed annotation block {index}: {reason}")]
    MalformedBlock { index: u32, reason: String },
    #[error("bad severity token {token:?}")]
    BadSeverity { token: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invariant violation: {0}")]
pub struct InvariantViolation(pub String);

fn header_count(line: &str) -> Option<Option<u32>> {
    // "Your Translation contains {N} error(s)[:]" with "no" accepted for 0.
    let lower = line.trim().to_lowercase();
    let rest = lower.strip_prefix("your translation contains")?.trim_start();
    let (count_tok, rest) = rest.split_once(char::is_whitespace)?;
    let rest = rest.trim();
    let rest = rest.strip_suffix(':').unwrap_or(rest).trim_end();
    if rest != "error" && rest != "errors" {
        return None;
    }
    if count_tok == "no" {
        return Some(None);
    }
    count_tok.parse::<u32>().ok().map(Some)
}

/// One field line: returns (index if the field carries one, content).
/// Keys are ASCII and matched case-insensitively.
fn field_line<'a>(line: &'a str, key: &str, indexed: bool) -> Option<(Option<u32>, &'a str)> {
    if line.len() < key.len() || !line.as_bytes()[..key.len()].eq_ignore_ascii_case(key.as_bytes()) {
        return None;
    }
    let tail = &line[key.len()..];
    let (idx, tail) = if indexed {
        let digits: String = tail.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return None;
        }
        (Some(digits.parse::<u32>().ok()?), &tail[digits.len()..])
    } else {
        (None, tail)
    };
    let tail = tail.strip_prefix(':')?;
    // Exactly one space after the colon is part of the grammar; everything
    // beyond it belongs to the field verbatim.
    Some((idx, tail.strip_prefix(' ').unwrap_or(tail)))
}

/// Parses a raw report emission. Input is normalized to NFC so that
/// substring checks downstream are stable.
pub fn parse_report(text: &str, mode: ParseMode) -> Result<Parsed, ParseError> {
    let text: String = text.nfc().collect();
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty());

    let declared = lines
        .next()
        .and_then(header_count)
        .ok_or(ParseError::MissingHeader)?
        .unwrap_or(0);

    let mut repairs = Vec::new();
    let mut annotations: Vec<ErrorAnnotation> = Vec::new();
    let mut lines = lines.peekable();

    while let Some(line) = lines.next() {
        let position = annotations.len() as u32 + 1;
        let (type_idx, error_type) = field_line(line, "error type ", true).ok_or_else(|| {
            ParseError::MalformedBlock {
                index: position,
                reason: format!("expected an error-type line, found {line:?}"),
            }
        })?;

        let sev_line = lines.next().ok_or_else(|| ParseError::MalformedBlock {
            index: position,
            reason: "missing severity line".into(),
        })?;
        let (_, sev_tok) =
            field_line(sev_line, "major/minor", false).ok_or_else(|| ParseError::MalformedBlock {
                index: position,
                reason: format!("expected a Major/minor line, found {sev_line:?}"),
            })?;
        let severity = Severity::parse_token(sev_tok).ok_or_else(|| ParseError::BadSeverity {
            token: sev_tok.trim().to_string(),
        })?;

        let loc_line = lines.next().ok_or_else(|| ParseError::MalformedBlock {
            index: position,
            reason: "missing location line".into(),
        })?;
        let (loc_idx, location_raw) = field_line(loc_line, "error location ", true).ok_or_else(|| {
            ParseError::MalformedBlock {
                index: position,
                reason: format!("expected an error-location line, found {loc_line:?}"),
            }
        })?;

        let exp_line = lines.next().ok_or_else(|| ParseError::MalformedBlock {
            index: position,
            reason: "missing explanation line".into(),
        })?;
        let (exp_idx, explanation) = field_line(exp_line, "explanation for error ", true)
            .ok_or_else(|| ParseError::MalformedBlock {
                index: position,
                reason: format!("expected an explanation line, found {exp_line:?}"),
            })?;

        let found = type_idx.unwrap();
        if loc_idx.unwrap() != found || exp_idx.unwrap() != found {
            match mode {
                ParseMode::Strict => {
                    return Err(ParseError::MalformedBlock {
                        index: position,
                        reason: "field lines disagree on the annotation index".into(),
                    })
                }
                ParseMode::Lenient => repairs.push(Repair::InconsistentBlockIndex { position }),
            }
        }
        if found != position {
            match mode {
                ParseMode::Strict => {
                    return Err(ParseError::MalformedBlock {
                        index: position,
                        reason: format!("annotation numbered {found}, expected {position}"),
                    })
                }
                ParseMode::Lenient => repairs.push(Repair::IndexRenumbered {
                    found,
                    assigned: position,
                }),
            }
        }

        if error_type.is_empty() {
            return Err(ParseError::MalformedBlock {
                index: position,
                reason: "empty error type".into(),
            });
        }
        if explanation.is_empty() {
            return Err(ParseError::MalformedBlock {
                index: position,
                reason: "empty explanation".into(),
            });
        }
        if location_raw.is_empty() {
            match mode {
                ParseMode::Strict => {
                    return Err(ParseError::MalformedBlock {
                        index: position,
                        reason: "empty location".into(),
                    })
                }
                ParseMode::Lenient => repairs.push(Repair::EmptyLocation { index: position }),
            }
        }

        annotations.push(ErrorAnnotation {
            index: position,
            error_type: error_type.to_string(),
            severity,
            location_raw: location_raw.to_string(),
            explanation: explanation.to_string(),
        });
    }

    let actual = annotations.len() as u32;
    let declared_final = if declared != actual {
        match mode {
            ParseMode::Strict => return Err(ParseError::CountMismatch { declared, actual }),
            ParseMode::Lenient => {
                repairs.push(Repair::CountAdjusted { declared, actual });
                actual
            }
        }
    } else {
        declared
    };

    Ok(Parsed {
        report: DiagnosticReport {
            declared_count: declared_final,
            annotations,
        },
        repairs,
    })
}

/// Renders a strict-valid report to its canonical text form. The no-error
/// report renders as exactly `Your Translation contains 0 errors`.
pub fn render_report(report: &DiagnosticReport) -> Result<String, InvariantViolation> {
    report.validate_strict()?;
    if report.annotations.is_empty() {
        return Ok("Your Translation contains 0 errors".to_string());
    }
    let n = report.annotations.len();
    let noun = if n == 1 { "error" } else { "errors" };
    let mut out = format!("Your Translation contains {n} {noun}:");
    for ann in &report.annotations {
        let i = ann.index;
        out.push_str(&format!(
            "\nError type {i}: {}\nMajor/minor: {}\nError location {i}: {}\nExplanation for error {i}: {}",
            ann.error_type, ann.severity, ann.location_raw, ann.explanation
        ));
    }
    Ok(out)
}
