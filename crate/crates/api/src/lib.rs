//! Request and response bodies for the evaluation service, shared by the
//! server and the client so the two cannot drift.

use serde::{Deserialize, Serialize};

use xeval_core::checks::{CheckOutcome, ExtractionOverride};
use xeval_core::datagen::{DatagenManifest, FinetuneRecord, SyntheticRecord};
use xeval_core::feedback::InstanceFeedback;
use xeval_core::judge::{JudgeKind, JudgeResponse};
use xeval_core::metaeval::{CorrelationReport, SegmentRating, SegmentScores, SignificancePair};
use xeval_core::ranking::{PairDatasetStats, RankingPair, SampledOutput};
use xeval_core::report::{DiagnosticReport, EvalInstance, ParseMode, Repair};
use xeval_core::scoring::ScoreWeights;
use xeval_gateway::DecodeParams;

/// Error envelope returned with non-2xx statuses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ApiError,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiError {
    /// Stable machine-readable code: `validation`, `config`,
    /// `cassette_miss`, `endpoint`, or `internal`.
    pub code: String,
    pub message: String,
}

fn default_strict() -> ParseMode {
    ParseMode::Strict
}

// ---- reports ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParseRequest {
    pub text: String,
    #[serde(default = "default_strict")]
    pub mode: ParseMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParseResponse {
    pub report: DiagnosticReport,
    pub repairs: Vec<Repair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderRequest {
    pub report: DiagnosticReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderResponse {
    pub text: String,
}

// ---- scoring ------------------------------------------------------------

/// A report to score: either parsed or raw (parsed server-side).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRecord {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<DiagnosticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub records: Vec<ReportRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ScoreWeights>,
    /// Optional lower clamp on the score.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<i64>,
    #[serde(default = "default_strict")]
    pub mode: ParseMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub instance_id: String,
    pub score: i64,
    pub n_major: usize,
    pub n_minor: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<ScoredRecord>,
}

// ---- deterministic checks ------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub instance: EvalInstance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<DiagnosticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<Vec<ExtractionOverride>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRequest {
    pub records: Vec<CheckRecord>,
    #[serde(default)]
    pub case_fold: bool,
    #[serde(default = "default_strict")]
    pub mode: ParseMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckedRecord {
    pub instance_id: String,
    pub outcomes: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResponse {
    pub results: Vec<CheckedRecord>,
}

// ---- judge ---------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgePromptRequest {
    pub kind: JudgeKind,
    pub instance: EvalInstance,
    pub report: DiagnosticReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgePromptResponse {
    pub prompt: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeParseRequest {
    pub kind: JudgeKind,
    pub raw: String,
    pub n_annotations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeParseResponse {
    pub response: JudgeResponse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRunRecord {
    pub instance: EvalInstance,
    pub report: DiagnosticReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRunRequest {
    pub records: Vec<JudgeRunRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DecodeParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgedRecord {
    pub instance_id: String,
    pub response: JudgeResponse,
    /// The raw judge reply, for audit.
    pub transcript: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRunResponse {
    pub results: Vec<JudgedRecord>,
}

// ---- feedback --------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub instance_id: String,
    pub report: DiagnosticReport,
    pub judge: JudgeResponse,
    #[serde(default)]
    pub outcomes: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub records: Vec<FeedbackRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub results: Vec<InstanceFeedback>,
}

// ---- ranking ----------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairsRequest {
    pub samples: Vec<SampledOutput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairsResponse {
    pub pairs: Vec<RankingPair>,
    pub stats: PairDatasetStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairLossRequest {
    pub reward_winner: f64,
    pub reward_loser: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairLossResponse {
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RerankRequest {
    pub samples: Vec<SampledOutput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RerankResponse {
    /// One winning sample per instance, ordered by instance id.
    pub selected: Vec<SampledOutput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardRequest {
    pub instances: Vec<EvalInstance>,
    pub samples: Vec<SampledOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DecodeParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardResponse {
    pub samples: Vec<SampledOutput>,
}

// ---- evaluate ------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub instances: Vec<EvalInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DecodeParams>,
    #[serde(default = "default_strict")]
    pub mode: ParseMode,
    /// Instruction template with `{reference}`/`{candidate}` slots;
    /// defaults to the bundled one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub samples: Vec<SampledOutput>,
}

// ---- meta-evaluation ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaevalRequest {
    pub metrics: Vec<SegmentScores>,
    pub ratings: Vec<SegmentRating>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaevalResponse {
    pub report: CorrelationReport,
    pub table: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceRequest {
    pub metric_a: SegmentScores,
    pub metric_b: SegmentScores,
    pub ratings: Vec<SegmentRating>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceResponse {
    pub results: Vec<SignificancePair>,
}

// ---- datagen -----------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainsRequest {
    pub seed_domains: Vec<String>,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainsResponse {
    pub domains: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicsRequest {
    pub domain: String,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicsResponse {
    pub topics: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentencesRequest {
    pub topic: String,
    pub count: usize,
    pub language: String,
    /// Seed for the one-of-N sentence selection.
    pub selection_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentencesResponse {
    pub candidates: Vec<String>,
    pub selected: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectRequest {
    pub raw_texts: Vec<String>,
    pub seed: u64,
    pub source_lang: String,
    pub target_lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DecodeParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectResponse {
    pub records: Vec<SyntheticRecord>,
    pub manifest: DatagenManifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneRequest {
    pub records: Vec<SyntheticRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneResponse {
    pub records: Vec<FinetuneRecord>,
}
