//! Severity-weighted scoring of diagnostic reports: each major error costs
//! 5 points and each minor error 1, summed into a non-positive total.

use serde::{Deserialize, Serialize};

use crate::report::{DiagnosticReport, Severity};

/// Per-severity penalty weights. Negative by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub major: i64,
    pub minor: i64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { major: -5, minor: -1 }
    }
}

/// The scalar quality score for one report, with the counts that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityScore {
    pub value: i64,
    pub n_major: usize,
    pub n_minor: usize,
}

/// Scores a report by severity-weighted error counting. Total function on
/// valid reports; no lower clamp is applied (see [`score_report_clamped`]).
pub fn score_report(report: &DiagnosticReport, weights: ScoreWeights) -> QualityScore {
    let mut n_major = 0usize;
    let mut n_minor = 0usize;
    for ann in &report.annotations {
        match ann.severity {
            Severity::Major => n_major += 1,
            Severity::Minor => n_minor += 1,
        }
    }
    QualityScore {
        value: weights.major * n_major as i64 + weights.minor * n_minor as i64,
        n_major,
        n_minor,
    }
}

/// Like [`score_report`] but clamps the value below at `floor`, for
/// consumers that want a bounded range.
pub fn score_report_clamped(
    report: &DiagnosticReport,
    weights: ScoreWeights,
    floor: i64,
) -> QualityScore {
    let mut score = score_report(report, weights);
    score.value = score.value.max(floor);
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::report::{parse_report, ErrorAnnotation, ParseMode};

    fn report(n_major: usize, n_minor: usize) -> DiagnosticReport {
        let mut annotations = Vec::new();
        for i in 0..n_major + n_minor {
            annotations.push(ErrorAnnotation {
                index: i as u32 + 1,
                error_type: "t".into(),
                severity: if i < n_major { Severity::Major } else { Severity::Minor },
                location_raw: "\"x\"".into(),
                explanation: "e".into(),
            });
        }
        DiagnosticReport { declared_count: annotations.len() as u32, annotations }
    }

    #[test]
    fn default_weights() {
        assert_eq!(score_report(&report(2, 0), ScoreWeights::default()).value, -10);
        assert_eq!(score_report(&report(0, 0), ScoreWeights::default()).value, 0);
        let s = score_report(&report(3, 1), ScoreWeights::default());
        assert_eq!((s.value, s.n_major, s.n_minor), (-16, 3, 1));
    }

    #[test]
    fn custom_weights_and_clamp() {
        let w = ScoreWeights { major: -10, minor: -2 };
        assert_eq!(score_report(&report(1, 2), w).value, -14);
        assert_eq!(score_report_clamped(&report(5, 5), ScoreWeights::default(), -25).value, -25);
        // clamp leaves small scores alone
        assert_eq!(score_report_clamped(&report(1, 0), ScoreWeights::default(), -25).value, -5);
    }

    #[test]
    fn case_reports_score_as_expected() {
        let expected = [
            ("misalign", -16),
            ("logic", -6),
            ("repeat", -11),
            ("multiple", -10),
            ("critic", -6),
        ];
        for ((name, text, _), (ename, value)) in fixtures::CASE_REPORTS.iter().zip(expected) {
            assert_eq!(*name, ename);
            let parsed = parse_report(text, ParseMode::Strict).unwrap().report;
            assert_eq!(score_report(&parsed, ScoreWeights::default()).value, value, "{name}");
        }
    }

    #[test]
    fn adding_any_annotation_strictly_decreases_score() {
        let base = report(1, 1);
        let base_score = score_report(&base, ScoreWeights::default()).value;
        for sev in [Severity::Major, Severity::Minor] {
            let mut bigger = base.clone();
            bigger.annotations.push(ErrorAnnotation {
                index: 3,
                error_type: "t".into(),
                severity: sev,
                location_raw: "\"y\"".into(),
                explanation: "e".into(),
            });
            bigger.declared_count += 1;
            assert!(score_report(&bigger, ScoreWeights::default()).value < base_score);
        }
    }

    #[test]
    fn score_is_linear_in_annotation_counts() {
        let a = score_report(&report(2, 1), ScoreWeights::default());
        let b = score_report(&report(1, 3), ScoreWeights::default());
        let combined = score_report(&report(3, 4), ScoreWeights::default());
        assert_eq!(combined.value, a.value + b.value);
    }
}
