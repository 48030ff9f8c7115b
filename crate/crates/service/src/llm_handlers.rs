//! Handlers that go through the gateway to a model endpoint. These are the
//! only routes whose behavior depends on the gateway mode (live, record,
//! replay).

use axum::extract::State;
use axum::Json;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xeval_api::*;
use xeval_core::datagen::{
    build_domains_prompt, build_injection_prompt, build_sentences_prompt, build_topics_prompt,
    parse_injection_response, parse_name_list, parse_numbered_list, select_sentence,
    to_finetune_record, DatagenManifest, ErrorRecipe,
};
use xeval_core::judge::parse_judge_response;
use xeval_core::ranking::{parse_reward_reply, SampledOutput};
use xeval_core::report::{parse_report, EvalInstance};
use xeval_core::templates;
use xeval_gateway::{ChatRequest, DecodeParams, EndpointRole};

use crate::error::ServiceError;
use crate::handlers::kind_for_report;
use crate::AppState;

/// Sends each instance through the evaluator endpoint and parses the
/// sampled reports. Unparseable samples keep their raw text with no report.
pub async fn evaluate(
    State(state): State<AppState>,
    Json(req): Json<EvaluateRequest>,
) -> Result<Json<EvaluateResponse>, ServiceError> {
    let params = req.params.unwrap_or_default();
    let template = req.template.as_deref().unwrap_or(templates::EVAL_INSTRUCTION);

    let requests: Vec<ChatRequest> = req
        .instances
        .iter()
        .map(|instance| {
            ChatRequest::user(
                EndpointRole::Evaluator,
                templates::render_eval_prompt(template, &instance.reference, &instance.candidate),
                params,
            )
        })
        .collect();
    let replies = state.gateway.complete_all(requests).await;

    let mut samples = Vec::new();
    for (instance, reply) in req.instances.iter().zip(replies) {
        let texts = reply.map_err(ServiceError::from)?;
        for (index, raw) in texts.into_iter().enumerate() {
            let report = parse_report(&raw, req.mode).ok().map(|p| p.report);
            samples.push(SampledOutput {
                instance_id: instance.instance_id.clone(),
                sample_index: index as u32,
                raw,
                report,
                feedback: None,
                reward: None,
            });
        }
    }
    Ok(Json(EvaluateResponse { samples }))
}

/// Builds the per-report judge prompt, queries the judge endpoint, and
/// parses the replies. Results line up with the request records.
pub async fn judge_run(
    State(state): State<AppState>,
    Json(req): Json<JudgeRunRequest>,
) -> Result<Json<JudgeRunResponse>, ServiceError> {
    let params = req.params.unwrap_or_default();
    let mut requests = Vec::with_capacity(req.records.len());
    for record in &req.records {
        let kind = kind_for_report(&record.report);
        let prompt = xeval_core::judge::build_judge_prompt(kind, &record.instance, &record.report)
            .map_err(|e| {
                ServiceError::Validation(format!("{}: {e}", record.instance.instance_id))
            })?;
        requests.push(ChatRequest::user(EndpointRole::Judge, prompt, params));
    }
    let replies = state.gateway.complete_all(requests).await;

    let mut results = Vec::with_capacity(req.records.len());
    for (record, reply) in req.records.iter().zip(replies) {
        let texts = reply.map_err(ServiceError::from)?;
        let transcript = texts.into_iter().next().unwrap_or_default();
        let kind = kind_for_report(&record.report);
        let response =
            parse_judge_response(kind, &transcript, record.report.annotations.len()).map_err(
                |e| ServiceError::Validation(format!("{}: {e}", record.instance.instance_id)),
            )?;
        results.push(JudgedRecord {
            instance_id: record.instance.instance_id.clone(),
            response,
            transcript,
        });
    }
    Ok(Json(JudgeRunResponse { results }))
}

/// Scores each sample's report with the reward endpoint, filling the
/// `reward` field.
pub async fn reward(
    State(state): State<AppState>,
    Json(req): Json<RewardRequest>,
) -> Result<Json<RewardResponse>, ServiceError> {
    let params = req.params.unwrap_or_default();
    let instance_of = |id: &str| -> Result<&EvalInstance, ServiceError> {
        req.instances
            .iter()
            .find(|i| i.instance_id == id)
            .ok_or_else(|| ServiceError::Validation(format!("sample references unknown instance {id}")))
    };

    let mut requests = Vec::with_capacity(req.samples.len());
    for sample in &req.samples {
        let instance = instance_of(&sample.instance_id)?;
        let prompt = templates::render_reward_prompt(
            &instance.reference,
            &instance.candidate,
            &sample.raw,
        );
        requests.push(ChatRequest::user(EndpointRole::Reward, prompt, params));
    }
    let replies = state.gateway.complete_all(requests).await;

    let mut samples = req.samples;
    for (sample, reply) in samples.iter_mut().zip(replies) {
        let texts = reply.map_err(ServiceError::from)?;
        let text = texts.into_iter().next().unwrap_or_default();
        let value = parse_reward_reply(&text).ok_or_else(|| {
            ServiceError::Endpoint(format!(
                "reward reply for {}/{} carries no number: {text:?}",
                sample.instance_id, sample.sample_index
            ))
        })?;
        sample.reward = Some(value);
    }
    Ok(Json(RewardResponse { samples }))
}

pub async fn datagen_domains(
    State(state): State<AppState>,
    Json(req): Json<DomainsRequest>,
) -> Result<Json<DomainsResponse>, ServiceError> {
    let prompt = build_domains_prompt(&req.seed_domains, req.count);
    let reply = state
        .gateway
        .complete(&ChatRequest::user(EndpointRole::Datagen, prompt, DecodeParams::default()))
        .await?;
    Ok(Json(DomainsResponse { domains: parse_name_list(reply.first().map(String::as_str).unwrap_or("")) }))
}

pub async fn datagen_topics(
    State(state): State<AppState>,
    Json(req): Json<TopicsRequest>,
) -> Result<Json<TopicsResponse>, ServiceError> {
    let prompt = build_topics_prompt(&req.domain, req.count);
    let reply = state
        .gateway
        .complete(&ChatRequest::user(EndpointRole::Datagen, prompt, DecodeParams::default()))
        .await?;
    Ok(Json(TopicsResponse {
        topics: parse_numbered_list(reply.first().map(String::as_str).unwrap_or("")),
    }))
}

pub async fn datagen_sentences(
    State(state): State<AppState>,
    Json(req): Json<SentencesRequest>,
) -> Result<Json<SentencesResponse>, ServiceError> {
    let prompt = build_sentences_prompt(&req.topic, req.count, &req.language);
    let reply = state
        .gateway
        .complete(&ChatRequest::user(EndpointRole::Datagen, prompt, DecodeParams::default()))
        .await?;
    let candidates = parse_numbered_list(reply.first().map(String::as_str).unwrap_or(""));
    if candidates.is_empty() {
        return Err(ServiceError::Endpoint("sentence reply parsed to an empty list".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.selection_seed);
    let selected = select_sentence(&candidates, &mut rng);
    Ok(Json(SentencesResponse { candidates, selected }))
}

/// Samples one error recipe per raw text (a single seeded stream, in input
/// order), renders the injection prompts, and parses the replies.
pub async fn datagen_inject(
    State(state): State<AppState>,
    Json(req): Json<InjectRequest>,
) -> Result<Json<InjectResponse>, ServiceError> {
    let params = req.params.unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let recipes: Vec<ErrorRecipe> =
        req.raw_texts.iter().map(|_| ErrorRecipe::sample(&mut rng)).collect();

    let requests: Vec<ChatRequest> = req
        .raw_texts
        .iter()
        .zip(&recipes)
        .map(|(raw_text, recipe)| {
            ChatRequest::user(
                EndpointRole::Datagen,
                build_injection_prompt(raw_text, recipe, &req.source_lang, &req.target_lang),
                params,
            )
        })
        .collect();
    let replies = state.gateway.complete_all(requests).await;

    let mut records = Vec::with_capacity(req.raw_texts.len());
    for ((raw_text, recipe), reply) in req.raw_texts.iter().zip(&recipes).zip(replies) {
        let texts = reply.map_err(ServiceError::from)?;
        let text = texts.first().map(String::as_str).unwrap_or("");
        let mut record = parse_injection_response(text, recipe)
            .map_err(|e| ServiceError::Validation(format!("{raw_text:.40?}: {e}")))?;
        record.raw_text = raw_text.clone();
        records.push(record);
    }

    let mut manifest = DatagenManifest::new(req.seed);
    manifest.counts.insert("raw_texts".into(), req.raw_texts.len() as u64);
    manifest.counts.insert("records".into(), records.len() as u64);
    Ok(Json(InjectResponse { records, manifest }))
}

pub async fn datagen_finetune(
    Json(req): Json<FinetuneRequest>,
) -> Result<Json<FinetuneResponse>, ServiceError> {
    let template = req.template.as_deref().unwrap_or(templates::EVAL_INSTRUCTION);
    let records = req
        .records
        .iter()
        .map(|record| to_finetune_record(record, template))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Json(FinetuneResponse { records }))
}
