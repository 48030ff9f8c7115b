//! Subcommand bodies: read input files, call the service, write output
//! files. Outputs are sorted by (instance_id, sample_index) so re-runs are
//! byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use xeval_api::*;
use xeval_client::Client;
use xeval_core::checks::{CheckOutcome, ExtractionOverride};
use xeval_core::feedback::InstanceFeedback;
use xeval_core::judge::JudgeResponse;
use xeval_core::ranking::SampledOutput;
use xeval_core::report::{DiagnosticReport, EvalInstance, ParseMode};
use xeval_core::scoring::ScoreWeights;
use xeval_gateway::DecodeParams;

use crate::io::{read_jsonl, read_ratings, read_scores, write_json, write_jsonl};
use crate::CliError;

fn sorted_samples(mut samples: Vec<SampledOutput>) -> Vec<SampledOutput> {
    samples.sort_by(|a, b| {
        a.instance_id.cmp(&b.instance_id).then(a.sample_index.cmp(&b.sample_index))
    });
    samples
}

fn instance_map(instances: Vec<EvalInstance>) -> Result<BTreeMap<String, EvalInstance>, CliError> {
    let mut map = BTreeMap::new();
    for instance in instances {
        let id = instance.instance_id.clone();
        if map.insert(id.clone(), instance).is_some() {
            return Err(CliError::validation(format!("duplicate instance_id {id}")));
        }
    }
    Ok(map)
}

fn require_report(sample: &SampledOutput) -> Result<DiagnosticReport, CliError> {
    sample.report.clone().ok_or_else(|| {
        CliError::validation(format!(
            "sample {}/{} has no parsed report",
            sample.instance_id, sample.sample_index
        ))
    })
}

fn read_template(path: &Option<PathBuf>) -> Result<Option<String>, CliError> {
    match path {
        None => Ok(None),
        Some(path) => std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display()))),
    }
}

pub async fn evaluate(
    client: &Client,
    input: &Path,
    out: &Path,
    mode: ParseMode,
    template: Option<PathBuf>,
    params: DecodeParams,
) -> Result<(), CliError> {
    let mut instances: Vec<EvalInstance> = read_jsonl(input)?;
    instances.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    for window in instances.windows(2) {
        if window[0].instance_id == window[1].instance_id {
            return Err(CliError::validation(format!(
                "duplicate instance_id {}",
                window[0].instance_id
            )));
        }
    }
    let response = client
        .evaluate(&EvaluateRequest {
            instances,
            params: Some(params),
            mode,
            template: read_template(&template)?,
        })
        .await?;
    write_jsonl(out, &sorted_samples(response.samples))
}

/// Output line for `score`.
#[derive(Serialize)]
struct ScoredLine {
    instance_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_index: Option<u32>,
    score: i64,
    n_major: usize,
    n_minor: usize,
}

/// Input line for `score`: a report record with an optional sample index.
#[derive(Deserialize)]
struct ScoreInputLine {
    instance_id: String,
    #[serde(default)]
    sample_index: Option<u32>,
    #[serde(default)]
    report: Option<DiagnosticReport>,
    #[serde(default)]
    raw: Option<String>,
}

pub async fn score(
    client: &Client,
    input: &Path,
    out: &Path,
    major_weight: i64,
    minor_weight: i64,
    clamp: Option<i64>,
    mode: ParseMode,
) -> Result<(), CliError> {
    let lines: Vec<ScoreInputLine> = read_jsonl(input)?;
    let records: Vec<ReportRecord> = lines
        .iter()
        .map(|l| ReportRecord {
            instance_id: l.instance_id.clone(),
            report: l.report.clone(),
            raw: l.raw.clone(),
        })
        .collect();
    let response = client
        .score(&ScoreRequest {
            records,
            weights: Some(ScoreWeights { major: major_weight, minor: minor_weight }),
            clamp,
            mode,
        })
        .await?;
    let out_lines: Vec<ScoredLine> = lines
        .iter()
        .zip(response.scores)
        .map(|(input, scored)| ScoredLine {
            instance_id: scored.instance_id,
            sample_index: input.sample_index,
            score: scored.score,
            n_major: scored.n_major,
            n_minor: scored.n_minor,
        })
        .collect();
    write_jsonl(out, &out_lines)
}

/// One judged sample, as stored in the judge output file.
#[derive(Serialize, Deserialize)]
struct JudgedLine {
    instance_id: String,
    #[serde(default)]
    sample_index: u32,
    response: JudgeResponse,
    #[serde(default)]
    transcript: String,
}

/// One checked sample, as stored in the check output file.
#[derive(Serialize, Deserialize)]
struct CheckedLine {
    instance_id: String,
    #[serde(default)]
    sample_index: u32,
    outcomes: Vec<CheckOutcome>,
}

pub async fn check(
    client: &Client,
    instances: &Path,
    input: &Path,
    out: &Path,
    judge: Option<PathBuf>,
    case_fold: bool,
    mode: ParseMode,
) -> Result<(), CliError> {
    let instances = instance_map(read_jsonl(instances)?)?;
    let samples = sorted_samples(read_jsonl(input)?);

    let mut judge_overrides: BTreeMap<(String, u32), Vec<ExtractionOverride>> = BTreeMap::new();
    if let Some(path) = judge {
        for line in read_jsonl::<JudgedLine>(&path)? {
            if let JudgeResponse::Critique(answers) = &line.response {
                let overrides = answers
                    .annotations
                    .iter()
                    .enumerate()
                    .map(|(i, a)| ExtractionOverride {
                        annotation_index: i as u32 + 1,
                        location_span: Some(a.span.clone()),
                        pairs: Some(a.pairs.clone()),
                    })
                    .collect();
                judge_overrides.insert((line.instance_id, line.sample_index), overrides);
            }
        }
    }

    let mut records = Vec::with_capacity(samples.len());
    for sample in &samples {
        let instance = instances.get(&sample.instance_id).ok_or_else(|| {
            CliError::validation(format!("sample references unknown instance {}", sample.instance_id))
        })?;
        records.push(CheckRecord {
            instance: instance.clone(),
            report: sample.report.clone(),
            raw: if sample.report.is_none() { Some(sample.raw.clone()) } else { None },
            overrides: judge_overrides
                .get(&(sample.instance_id.clone(), sample.sample_index))
                .cloned(),
        });
    }
    let response = client.check(&CheckRequest { records, case_fold, mode }).await?;

    let lines: Vec<CheckedLine> = samples
        .iter()
        .zip(response.results)
        .map(|(sample, result)| CheckedLine {
            instance_id: sample.instance_id.clone(),
            sample_index: sample.sample_index,
            outcomes: result.outcomes,
        })
        .collect();
    write_jsonl(out, &lines)
}

pub async fn judge(
    client: &Client,
    instances: &Path,
    input: &Path,
    out: &Path,
    params: DecodeParams,
) -> Result<(), CliError> {
    let instances = instance_map(read_jsonl(instances)?)?;
    let samples = sorted_samples(read_jsonl(input)?);

    let mut records = Vec::with_capacity(samples.len());
    for sample in &samples {
        let instance = instances.get(&sample.instance_id).ok_or_else(|| {
            CliError::validation(format!("sample references unknown instance {}", sample.instance_id))
        })?;
        records.push(JudgeRunRecord { instance: instance.clone(), report: require_report(sample)? });
    }
    let response =
        client.judge_run(&JudgeRunRequest { records, params: Some(params) }).await?;

    let lines: Vec<JudgedLine> = samples
        .iter()
        .zip(response.results)
        .map(|(sample, result)| JudgedLine {
            instance_id: sample.instance_id.clone(),
            sample_index: sample.sample_index,
            response: result.response,
            transcript: result.transcript,
        })
        .collect();
    write_jsonl(out, &lines)
}

/// Feedback details line: the sample key plus per-annotation breakdown.
#[derive(Serialize)]
struct FeedbackDetailsLine {
    instance_id: String,
    sample_index: u32,
    #[serde(flatten)]
    feedback: InstanceFeedback,
}

pub async fn feedback(
    client: &Client,
    input: &Path,
    checks: &Path,
    judge: &Path,
    out: &Path,
    details_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let samples = sorted_samples(read_jsonl(input)?);

    let mut outcome_map: BTreeMap<(String, u32), Vec<CheckOutcome>> = BTreeMap::new();
    for line in read_jsonl::<CheckedLine>(checks)? {
        outcome_map.insert((line.instance_id, line.sample_index), line.outcomes);
    }
    let mut judge_map: BTreeMap<(String, u32), JudgeResponse> = BTreeMap::new();
    for line in read_jsonl::<JudgedLine>(judge)? {
        judge_map.insert((line.instance_id, line.sample_index), line.response);
    }

    let mut records = Vec::with_capacity(samples.len());
    for sample in &samples {
        let key = (sample.instance_id.clone(), sample.sample_index);
        let judge = judge_map.get(&key).ok_or_else(|| {
            CliError::validation(format!("no judge answers for {}/{}", key.0, key.1))
        })?;
        let outcomes = outcome_map.get(&key).cloned().unwrap_or_default();
        records.push(FeedbackRecord {
            instance_id: sample.instance_id.clone(),
            report: require_report(sample)?,
            judge: judge.clone(),
            outcomes,
        });
    }
    let response = client.feedback(&FeedbackRequest { records }).await?;

    let mut enriched = samples;
    let mut details = Vec::with_capacity(enriched.len());
    for (sample, result) in enriched.iter_mut().zip(response.results) {
        sample.feedback = Some(result.total);
        details.push(FeedbackDetailsLine {
            instance_id: sample.instance_id.clone(),
            sample_index: sample.sample_index,
            feedback: result,
        });
    }
    write_jsonl(out, &enriched)?;
    if let Some(path) = details_out {
        write_jsonl(&path, &details)?;
    }
    Ok(())
}

pub async fn pairs(
    client: &Client,
    input: &Path,
    out: &Path,
    stats_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let samples = sorted_samples(read_jsonl(input)?);
    let response = client.pairs(&PairsRequest { samples }).await?;
    write_jsonl(out, &response.pairs)?;
    let stats_path = stats_out
        .unwrap_or_else(|| PathBuf::from(format!("{}.stats.json", out.display())));
    write_json(&stats_path, &response.stats)?;
    println!(
        "instances={} comparisons={} ties_removed={} pairs={}",
        response.stats.instances,
        response.stats.comparisons_possible,
        response.stats.ties_removed,
        response.stats.pairs_emitted
    );
    Ok(())
}

pub async fn rerank(
    client: &Client,
    input: &Path,
    out: &Path,
    score: bool,
    instances: Option<PathBuf>,
    params: DecodeParams,
) -> Result<(), CliError> {
    let mut samples = sorted_samples(read_jsonl(input)?);
    if score {
        let instances_path = instances.ok_or_else(|| {
            CliError::config("--score requires --instances for the reward prompts")
        })?;
        let instances: Vec<EvalInstance> = read_jsonl(&instances_path)?;
        let response = client
            .reward(&RewardRequest { instances, samples, params: Some(params) })
            .await?;
        samples = response.samples;
    }
    let response = client.rerank(&RerankRequest { samples }).await?;
    write_jsonl(out, &sorted_samples(response.selected))
}

pub async fn metaeval(
    client: &Client,
    scores: &[PathBuf],
    ratings: &Path,
    out: Option<PathBuf>,
    table: bool,
) -> Result<(), CliError> {
    let metrics = scores.iter().map(|p| read_scores(p)).collect::<Result<Vec<_>, _>>()?;
    let ratings = read_ratings(ratings)?;
    let response = client.metaeval(&MetaevalRequest { metrics, ratings }).await?;
    if let Some(path) = out {
        write_json(&path, &response.report)?;
    }
    if table {
        print!("{}", response.table);
    }
    Ok(())
}

pub async fn significance(
    client: &Client,
    scores_a: &Path,
    scores_b: &Path,
    ratings: &Path,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let request = SignificanceRequest {
        metric_a: read_scores(scores_a)?,
        metric_b: read_scores(scores_b)?,
        ratings: read_ratings(ratings)?,
    };
    let response = client.significance(&request).await?;
    for pair in &response.results {
        println!(
            "{}\t{} vs {}\tt={:.4}\tp={:.6}",
            pair.domain, pair.metric_a, pair.metric_b, pair.t, pair.p
        );
    }
    if let Some(path) = out {
        write_json(&path, &response.results)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct DomainLine {
    domain: String,
}

#[derive(Serialize, Deserialize)]
struct TopicLine {
    domain: String,
    topic: String,
}

#[derive(Serialize, Deserialize)]
struct SentenceLine {
    domain: String,
    topic: String,
    candidates: Vec<String>,
    selected: usize,
    raw_text: String,
}

#[derive(Deserialize)]
struct RawTextLine {
    raw_text: String,
}

pub async fn datagen_domains(
    client: &Client,
    seeds: &str,
    count: usize,
    out: &Path,
) -> Result<(), CliError> {
    let seed_domains: Vec<String> =
        seeds.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if seed_domains.is_empty() {
        return Err(CliError::config("--seeds must name at least one domain"));
    }
    let response = client.datagen_domains(&DomainsRequest { seed_domains, count }).await?;
    let lines: Vec<DomainLine> =
        response.domains.into_iter().map(|domain| DomainLine { domain }).collect();
    write_jsonl(out, &lines)
}

pub async fn datagen_topics(
    client: &Client,
    domains: &Path,
    count: usize,
    out: &Path,
) -> Result<(), CliError> {
    let domains: Vec<DomainLine> = read_jsonl(domains)?;
    let mut lines = Vec::new();
    for DomainLine { domain } in domains {
        let response = client.datagen_topics(&TopicsRequest { domain: domain.clone(), count }).await?;
        for topic in response.topics {
            lines.push(TopicLine { domain: domain.clone(), topic });
        }
    }
    write_jsonl(out, &lines)
}

pub async fn datagen_sentences(
    client: &Client,
    topics: &Path,
    count: usize,
    language: &str,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let topics: Vec<TopicLine> = read_jsonl(topics)?;
    let mut lines = Vec::new();
    for (index, TopicLine { domain, topic }) in topics.into_iter().enumerate() {
        let response = client
            .datagen_sentences(&SentencesRequest {
                topic: topic.clone(),
                count,
                language: language.to_string(),
                selection_seed: seed.wrapping_add(index as u64),
            })
            .await?;
        let raw_text = response.candidates[response.selected].clone();
        lines.push(SentenceLine {
            domain,
            topic,
            candidates: response.candidates,
            selected: response.selected,
            raw_text,
        });
    }
    write_jsonl(out, &lines)
}

#[allow(clippy::too_many_arguments)]
pub async fn datagen_inject(
    client: &Client,
    raw: &Path,
    seed: u64,
    source_lang: &str,
    target_lang: &str,
    out: &Path,
    manifest_out: Option<PathBuf>,
    params: DecodeParams,
) -> Result<(), CliError> {
    let raw_texts: Vec<String> =
        read_jsonl::<RawTextLine>(raw)?.into_iter().map(|l| l.raw_text).collect();
    let response = client
        .datagen_inject(&InjectRequest {
            raw_texts,
            seed,
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            params: Some(params),
        })
        .await?;
    write_jsonl(out, &response.records)?;
    let manifest_path = manifest_out
        .unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", out.display())));
    write_json(&manifest_path, &response.manifest)
}

pub async fn datagen_finetune(
    client: &Client,
    input: &Path,
    out: &Path,
    template: Option<PathBuf>,
) -> Result<(), CliError> {
    let records = read_jsonl(input)?;
    let response = client
        .datagen_finetune(&FinetuneRequest { records, template: read_template(&template)? })
        .await?;
    write_jsonl(out, &response.records)
}
