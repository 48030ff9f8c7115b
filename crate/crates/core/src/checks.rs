//! Deterministic failure-mode checks: the subset of report pathologies that
//! can be decided offline by span extraction and substring tests, without a
//! judge model.
//!
//! This module decides M3 (location hallucination), M4 (explanation span
//! hallucination), G4 (multiple errors in one annotation), G5 (phrase
//! inconsistency) and the lexical form of G2 (repetition). The remaining
//! modes need the judge.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::report::{DiagnosticReport, ErrorAnnotation, EvalInstance};

/// Failure modes of a diagnostic report. M-codes invalidate a single field,
/// G-codes invalidate the whole annotation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum FailureMode {
    /// Error type inconsistent with the explanation.
    M1,
    /// Error location inconsistent with the explanation.
    M2,
    /// Error location not present in the output text.
    M3,
    /// Explanation phrase not present in the output text.
    M4,
    /// Major/minor label disagrees with the judged severity.
    M5,
    /// The described error is not an error.
    G1,
    /// The same error is reported twice.
    G2,
    /// Incorrect and correct phrases are misaligned.
    G3,
    /// One annotation describes multiple errors.
    G4,
    /// The explanation is logically inconsistent.
    G5,
}

impl FailureMode {
    pub fn is_global(self) -> bool {
        matches!(
            self,
            FailureMode::G1 | FailureMode::G2 | FailureMode::G3 | FailureMode::G4 | FailureMode::G5
        )
    }

    pub const ALL: [FailureMode; 10] = [
        FailureMode::M1,
        FailureMode::M2,
        FailureMode::M3,
        FailureMode::M4,
        FailureMode::M5,
        FailureMode::G1,
        FailureMode::G2,
        FailureMode::G3,
        FailureMode::G4,
        FailureMode::G5,
    ];
}

/// An incorrect/correct phrase pair parsed out of an explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhrasePair {
    pub incorrect: Option<String>,
    pub correct: Option<String>,
}

impl PhrasePair {
    pub fn complete(&self) -> bool {
        matches!((&self.incorrect, &self.correct), (Some(i), Some(c)) if !i.is_empty() && !c.is_empty())
    }
}

/// Result of span extraction for one annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    /// The error span named by the location field, if any.
    pub location_span: Option<String>,
    pub pairs: Vec<PhrasePair>,
}

/// Judge-provided extraction (Q1/Q2 answers) that replaces the heuristics
/// for one annotation when present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionOverride {
    pub annotation_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location_span: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PhrasePair>>,
}

/// Outcome of the deterministic checks for one annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub annotation_index: u32,
    pub triggered: BTreeSet<FailureMode>,
    pub evidence: BTreeMap<FailureMode, String>,
}

impl CheckOutcome {
    fn new(annotation_index: u32) -> Self {
        CheckOutcome {
            annotation_index,
            triggered: BTreeSet::new(),
            evidence: BTreeMap::new(),
        }
    }

    fn trigger(&mut self, mode: FailureMode, note: String) {
        self.triggered.insert(mode);
        self.evidence.entry(mode).or_insert(note);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Fold case before substring tests. Off by default: error spans are
    /// quotes of the output and should match exactly.
    pub case_fold: bool,
}

/// Returns byte ranges and inner text of double-quoted substrings,
/// recognizing both ASCII and typographic quotes.
fn quoted_spans(text: &str) -> Vec<(usize, usize, String)> {
    let mut spans = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        let close = match c {
            '"' => Some('"'),
            '\u{201c}' => Some('\u{201d}'),
            _ => None,
        };
        if let Some(close) = close {
            if let Some(j) = chars[i + 1..].iter().position(|&(_, c2)| c2 == close) {
                let j = i + 1 + j;
                let (inner_start, _) = chars[i + 1];
                let (end, _) = chars[j];
                spans.push((start, end + close.len_utf8(), text[inner_start..end].to_string()));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// Cleans an extracted span: trims whitespace and drops one trailing
/// punctuation character that American quoting style pulls inside quotes.
fn clean_span(span: &str) -> String {
    let trimmed = span.trim();
    let stripped = trimmed
        .strip_suffix([',', '.', ';', ':'])
        .unwrap_or(trimmed);
    stripped.trim_end().to_string()
}

/// True when the text between two quoted spans marks them as an
/// incorrect/correct replacement pair.
fn is_replacement_cue(between: &str) -> bool {
    let between = between.trim().trim_matches(',').trim();
    matches!(between, "instead of" | "rather than" | "to" | "should be" | "in place of")
        || between.contains("instead")
}

/// Parses the explanation into incorrect/correct phrase pairs and extracts
/// the error span from the location field.
pub fn extract_phrase_pairs(annotation: &ErrorAnnotation) -> Extraction {
    let location_span = {
        let spans = quoted_spans(&annotation.location_raw);
        let raw = if let Some((_, _, first)) = spans.first() {
            first.clone()
        } else {
            annotation.location_raw.trim().to_string()
        };
        let cleaned = clean_span(&raw);
        if cleaned.is_empty() { None } else { Some(cleaned) }
    };

    let spans = quoted_spans(&annotation.explanation);
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < spans.len() {
        if i + 1 < spans.len() {
            let between = &annotation.explanation[spans[i].1..spans[i + 1].0];
            if is_replacement_cue(between) {
                pairs.push(PhrasePair {
                    incorrect: Some(clean_span(&spans[i].2)),
                    correct: Some(clean_span(&spans[i + 1].2)),
                });
                i += 2;
                continue;
            }
        }
        let lone = clean_span(&spans[i].2);
        if !lone.is_empty() {
            pairs.push(PhrasePair { incorrect: Some(lone), correct: None });
        }
        i += 1;
    }
    Extraction { location_span, pairs }
}

fn fold(text: &str, options: CheckOptions) -> String {
    if options.case_fold {
        text.to_lowercase()
    } else {
        text.to_string()
    }
}

/// Runs the deterministic failure-mode checks over one instance. Judge
/// extractions, when provided, replace the heuristic ones per annotation.
pub fn run_deterministic_checks(
    instance: &EvalInstance,
    report: &DiagnosticReport,
    overrides: Option<&[ExtractionOverride]>,
    options: CheckOptions,
) -> Vec<CheckOutcome> {
    let candidate: String = instance.candidate.nfc().collect();
    let candidate = fold(&candidate, options);
    let contains = |needle: &str| candidate.contains(&fold(&needle.nfc().collect::<String>(), options));

    let extractions: Vec<Extraction> = report
        .annotations
        .iter()
        .map(|ann| {
            let mut ex = extract_phrase_pairs(ann);
            if let Some(ov) = overrides
                .and_then(|ovs| ovs.iter().find(|o| o.annotation_index == ann.index))
            {
                if let Some(span) = &ov.location_span {
                    let cleaned = clean_span(span);
                    ex.location_span = if cleaned.is_empty() { None } else { Some(cleaned) };
                }
                if let Some(pairs) = &ov.pairs {
                    ex.pairs = pairs
                        .iter()
                        .map(|p| PhrasePair {
                            incorrect: p.incorrect.as_deref().map(clean_span).filter(|s| !s.is_empty()),
                            correct: p.correct.as_deref().map(clean_span).filter(|s| !s.is_empty()),
                        })
                        .collect();
                }
            }
            ex
        })
        .collect();

    let mut outcomes: Vec<CheckOutcome> = report
        .annotations
        .iter()
        .map(|ann| CheckOutcome::new(ann.index))
        .collect();

    for (outcome, ex) in outcomes.iter_mut().zip(&extractions) {
        if let Some(span) = &ex.location_span {
            if !contains(span) {
                outcome.trigger(
                    FailureMode::M3,
                    format!("location span {span:?} not found in the candidate"),
                );
            }
        }

        for pair in &ex.pairs {
            if let Some(incorrect) = pair.incorrect.as_deref().filter(|s| !s.is_empty()) {
                if !contains(incorrect) {
                    outcome.trigger(
                        FailureMode::M4,
                        format!("incorrect phrase {incorrect:?} not found in the candidate"),
                    );
                }
            }
        }

        let complete = ex.pairs.iter().filter(|p| p.complete()).count();
        if complete > 1 {
            outcome.trigger(
                FailureMode::G4,
                format!("{complete} incorrect/correct pairs in one annotation"),
            );
        }

        for pair in &ex.pairs {
            match (&pair.incorrect, &pair.correct) {
                (Some(incorrect), Some(correct)) if incorrect == correct => {
                    outcome.trigger(
                        FailureMode::G5,
                        format!("incorrect and correct phrases are identical: {incorrect:?}"),
                    );
                }
                (incorrect, Some(correct)) if contains(correct) => {
                    let incorrect_present = incorrect
                        .as_deref()
                        .map(&contains)
                        .unwrap_or(false);
                    if !incorrect_present {
                        outcome.trigger(
                            FailureMode::G5,
                            format!("suggested phrase {correct:?} already appears in the candidate"),
                        );
                    }
                }
                _ => {}
            }
        }
    }

    // Lexical repetition: identical or nested location spans across
    // annotations zero both sides of each pair.
    for i in 0..extractions.len() {
        for j in i + 1..extractions.len() {
            let (Some(a), Some(b)) = (&extractions[i].location_span, &extractions[j].location_span)
            else {
                continue;
            };
            let (fa, fb) = (fold(a, options), fold(b, options));
            if fa == fb || fa.contains(&fb) || fb.contains(&fa) {
                let note = format!("location spans {a:?} and {b:?} overlap");
                let (left, right) = outcomes.split_at_mut(j);
                left[i].trigger(FailureMode::G2, note.clone());
                right[0].trigger(FailureMode::G2, note);
            }
        }
    }

    outcomes
}
