//! Handlers for the deterministic operations (no model calls).

use std::collections::BTreeMap;

use axum::extract::State;
use axum::Json;
use serde_json::{json, Value};

use xeval_api::*;
use xeval_core::checks::{run_deterministic_checks, CheckOptions};
use xeval_core::feedback::{aggregate_instance, score_annotation, InstanceFeedback};
use xeval_core::judge::{
    build_judge_prompt, map_answers_to_failures, parse_judge_response, JudgeKind, JudgeResponse,
};
use xeval_core::metaeval::{correlation_report, render_table};
use xeval_core::ranking::{build_pairs, pair_loss, rerank, SampledOutput};
use xeval_core::report::{parse_report, render_report, DiagnosticReport, ParseMode};
use xeval_core::scoring::{score_report, score_report_clamped};

use crate::error::ServiceError;
use crate::AppState;

pub async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub async fn parse(
    Json(req): Json<ParseRequest>,
) -> Result<Json<ParseResponse>, ServiceError> {
    let parsed = parse_report(&req.text, req.mode)?;
    Ok(Json(ParseResponse { report: parsed.report, repairs: parsed.repairs }))
}

pub async fn render(
    Json(req): Json<RenderRequest>,
) -> Result<Json<RenderResponse>, ServiceError> {
    Ok(Json(RenderResponse { text: render_report(&req.report)? }))
}

/// Resolves a record to a report: prefer the parsed form, else parse `raw`.
fn resolve_report(
    instance_id: &str,
    report: Option<DiagnosticReport>,
    raw: Option<&str>,
    mode: ParseMode,
) -> Result<DiagnosticReport, ServiceError> {
    match (report, raw) {
        (Some(report), _) => Ok(report),
        (None, Some(raw)) => parse_report(raw, mode)
            .map(|p| p.report)
            .map_err(|e| ServiceError::Validation(format!("{instance_id}: {e}"))),
        (None, None) => Err(ServiceError::Validation(format!(
            "{instance_id}: record carries neither a report nor raw text"
        ))),
    }
}

pub async fn score(
    Json(req): Json<ScoreRequest>,
) -> Result<Json<ScoreResponse>, ServiceError> {
    let weights = req.weights.unwrap_or_default();
    let mut scores = Vec::with_capacity(req.records.len());
    for record in req.records {
        let report =
            resolve_report(&record.instance_id, record.report, record.raw.as_deref(), req.mode)?;
        let quality = match req.clamp {
            Some(floor) => score_report_clamped(&report, weights, floor),
            None => score_report(&report, weights),
        };
        scores.push(ScoredRecord {
            instance_id: record.instance_id,
            score: quality.value,
            n_major: quality.n_major,
            n_minor: quality.n_minor,
        });
    }
    Ok(Json(ScoreResponse { scores }))
}

pub async fn check(
    Json(req): Json<CheckRequest>,
) -> Result<Json<CheckResponse>, ServiceError> {
    let options = CheckOptions { case_fold: req.case_fold };
    let mut results = Vec::with_capacity(req.records.len());
    for record in req.records {
        let report = resolve_report(
            &record.instance.instance_id,
            record.report,
            record.raw.as_deref(),
            req.mode,
        )?;
        let outcomes = run_deterministic_checks(
            &record.instance,
            &report,
            record.overrides.as_deref(),
            options,
        );
        results.push(CheckedRecord { instance_id: record.instance.instance_id, outcomes });
    }
    Ok(Json(CheckResponse { results }))
}

pub async fn judge_prompt(
    Json(req): Json<JudgePromptRequest>,
) -> Result<Json<JudgePromptResponse>, ServiceError> {
    Ok(Json(JudgePromptResponse {
        prompt: build_judge_prompt(req.kind, &req.instance, &req.report)?,
    }))
}

pub async fn judge_parse(
    Json(req): Json<JudgeParseRequest>,
) -> Result<Json<JudgeParseResponse>, ServiceError> {
    Ok(Json(JudgeParseResponse {
        response: parse_judge_response(req.kind, &req.raw, req.n_annotations)?,
    }))
}

pub async fn feedback(
    Json(req): Json<FeedbackRequest>,
) -> Result<Json<FeedbackResponse>, ServiceError> {
    let mut results = Vec::with_capacity(req.records.len());
    for record in req.records {
        results.push(feedback_for_record(record)?);
    }
    Ok(Json(FeedbackResponse { results }))
}

fn feedback_for_record(record: FeedbackRecord) -> Result<InstanceFeedback, ServiceError> {
    let id = &record.instance_id;
    match record.judge {
        JudgeResponse::Critique(answers) => {
            if record.report.annotations.is_empty() {
                return Err(ServiceError::Validation(format!(
                    "{id}: critique answers for an empty report"
                )));
            }
            let failures = map_answers_to_failures(&answers, &record.report, &record.outcomes)
                .map_err(|e| ServiceError::Validation(format!("{id}: {e}")))?;
            let per_annotation = failures
                .into_iter()
                .enumerate()
                .map(|(i, set)| score_annotation(i as u32 + 1, set))
                .collect();
            Ok(aggregate_instance(id, per_annotation, None)?)
        }
        JudgeResponse::NoError(verdict) => {
            if !record.report.annotations.is_empty() {
                return Err(ServiceError::Validation(format!(
                    "{id}: no-error verdict for a report with annotations"
                )));
            }
            Ok(aggregate_instance(id, Vec::new(), Some(verdict))?)
        }
    }
}

pub async fn pairs(Json(req): Json<PairsRequest>) -> Result<Json<PairsResponse>, ServiceError> {
    let (pairs, stats) = build_pairs(&req.samples)?;
    Ok(Json(PairsResponse { pairs, stats }))
}

pub async fn pairs_loss(
    Json(req): Json<PairLossRequest>,
) -> Result<Json<PairLossResponse>, ServiceError> {
    Ok(Json(PairLossResponse { loss: pair_loss(req.reward_winner, req.reward_loser)? }))
}

pub async fn rerank_handler(
    Json(req): Json<RerankRequest>,
) -> Result<Json<RerankResponse>, ServiceError> {
    let mut grouped: BTreeMap<&str, Vec<&SampledOutput>> = BTreeMap::new();
    for sample in &req.samples {
        grouped.entry(sample.instance_id.as_str()).or_default().push(sample);
    }
    let mut selected = Vec::with_capacity(grouped.len());
    for (instance_id, group) in grouped {
        let owned: Vec<SampledOutput> = group.into_iter().cloned().collect();
        let winner = rerank(&owned)
            .map_err(|e| ServiceError::Validation(format!("{instance_id}: {e}")))?;
        selected.push(winner.clone());
    }
    Ok(Json(RerankResponse { selected }))
}

pub async fn metaeval(
    Json(req): Json<MetaevalRequest>,
) -> Result<Json<MetaevalResponse>, ServiceError> {
    let report = correlation_report(&req.metrics, &req.ratings)?;
    let table = render_table(&report);
    Ok(Json(MetaevalResponse { report, table }))
}

pub async fn significance(
    Json(req): Json<SignificanceRequest>,
) -> Result<Json<SignificanceResponse>, ServiceError> {
    let report = correlation_report(&[req.metric_a, req.metric_b], &req.ratings)?;
    Ok(Json(SignificanceResponse { results: report.significance }))
}

/// Decides the judge prompt kind from the report shape.
pub fn kind_for_report(report: &DiagnosticReport) -> JudgeKind {
    if report.annotations.is_empty() {
        JudgeKind::NoError
    } else {
        JudgeKind::Critique
    }
}

pub use crate::llm_handlers::{datagen_domains, datagen_finetune, datagen_inject, datagen_sentences, datagen_topics, evaluate, judge_run, reward};

// State is unused by the pure handlers; re-exported here so the router can
// treat every handler uniformly.
pub async fn version(State(_): State<AppState>) -> Json<Value> {
    Json(json!({
        "name": "xeval",
        "version": env!("CARGO_PKG_VERSION"),
        "template_version": xeval_core::templates::TEMPLATE_VERSION,
    }))
}
