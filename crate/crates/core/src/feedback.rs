//! Field-level feedback scores.
//!
//! Each annotation carries three binary field scores (type, location,
//! explanation). A local failure zeroes its field, any global failure
//! zeroes all three, and the annotation score is the fraction of correct
//! fields. Instance totals are exact-rational means so that downstream tie
//! detection never depends on float rounding.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::FailureMode;
use crate::judge::NoErrorVerdict;
use crate::rational::Rational;

/// Binary per-field correctness for one annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldScores {
    pub type_ok: bool,
    pub location_ok: bool,
    pub explanation_ok: bool,
}

impl FieldScores {
    pub fn correct_count(&self) -> u32 {
        u32::from(self.type_ok) + u32::from(self.location_ok) + u32::from(self.explanation_ok)
    }
}

/// Feedback for one annotation: the triggered failure modes, the field
/// scores they induce, and the resulting score in [0, 1].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationFeedback {
    pub annotation_index: u32,
    pub failures: BTreeSet<FailureMode>,
    pub fields: FieldScores,
    pub score: Rational,
}

/// Feedback for a whole instance: per-annotation scores and their mean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFeedback {
    pub instance_id: String,
    pub per_annotation: Vec<AnnotationFeedback>,
    pub total: Rational,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeedbackError {
    #[error("instance has neither annotation feedback nor a no-error verdict")]
    EmptyInstance,
}

/// Scores one annotation from its failure-mode set: any global mode zeroes
/// every field; M1 zeroes the type field, M2/M3 the location field, M4/M5
/// the explanation field.
pub fn score_annotation(
    annotation_index: u32,
    failures: BTreeSet<FailureMode>,
) -> AnnotationFeedback {
    let any_global = failures.iter().any(|m| m.is_global());
    let fields = if any_global {
        FieldScores { type_ok: false, location_ok: false, explanation_ok: false }
    } else {
        FieldScores {
            type_ok: !failures.contains(&FailureMode::M1),
            location_ok: !failures.contains(&FailureMode::M2)
                && !failures.contains(&FailureMode::M3),
            explanation_ok: !failures.contains(&FailureMode::M4)
                && !failures.contains(&FailureMode::M5),
        }
    };
    AnnotationFeedback {
        annotation_index,
        failures,
        fields,
        score: Rational::new(fields.correct_count() as i64, 3),
    }
}

/// Aggregates annotation feedback into the instance total. An empty report
/// scores 1 when the judge confirms it and 0 when the judge found errors.
pub fn aggregate_instance(
    instance_id: &str,
    per_annotation: Vec<AnnotationFeedback>,
    no_error_verdict: Option<NoErrorVerdict>,
) -> Result<InstanceFeedback, FeedbackError> {
    let total = if per_annotation.is_empty() {
        let verdict = no_error_verdict.ok_or(FeedbackError::EmptyInstance)?;
        if verdict.contains_error {
            Rational::zero()
        } else {
            Rational::one()
        }
    } else {
        let scores: Vec<Rational> = per_annotation.iter().map(|a| a.score).collect();
        Rational::mean(&scores).expect("non-empty annotation list")
    };
    Ok(InstanceFeedback {
        instance_id: instance_id.to_string(),
        per_annotation,
        total,
    })
}
