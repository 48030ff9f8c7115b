//! Core building blocks for explainable translation evaluation.
//!
//! The pipeline revolves around *diagnostic reports*: structured error
//! listings (type, severity, location, explanation) emitted by an evaluator
//! model for a reference/candidate sentence pair. This crate owns the report
//! grammar, severity-weighted scoring, the deterministic failure-mode checks,
//! judge prompt construction and response parsing, field-level feedback
//! scores, pairwise ranking dataset construction, reranking, segment-level
//! meta-evaluation statistics, and the synthetic data generation templates.
//!
//! Everything in here is pure and deterministic; talking to model endpoints
//! lives in `xeval-gateway`, and the HTTP surface lives in `xeval-service`.

pub mod checks;
pub mod datagen;
pub mod feedback;
pub mod fixtures;
pub mod judge;
pub mod metaeval;
pub mod ranking;
pub mod rational;
pub mod report;
pub mod scoring;
pub mod templates;

pub use rational::Rational;
pub use report::{DiagnosticReport, ErrorAnnotation, EvalInstance, ParseMode, Severity};
