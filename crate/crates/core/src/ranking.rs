//! Pairwise ranking data construction and reward-based reranking.
//!
//! Sampled diagnostic outputs for the same instance are compared by their
//! feedback scores: every strict inequality yields a (winner, loser) pair,
//! exact ties are dropped and counted. The pair loss is the evaluable form
//! of the reward-ranking objective, and `rerank` picks the highest-reward
//! sample.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::report::DiagnosticReport;

/// One sampled diagnostic output, progressively enriched by the pipeline:
/// parsing fills `report`, the feedback stage fills `feedback`, and an
/// external reward scorer fills `reward`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledOutput {
    pub instance_id: String,
    #[serde(default)]
    pub sample_index: u32,
    #[serde(default)]
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<DiagnosticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
}

/// An ordered comparison: the winner's feedback strictly exceeds the
/// loser's by `margin`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingPair {
    pub instance_id: String,
    pub winner: u32,
    pub loser: u32,
    pub margin: Rational,
}

/// Bookkeeping for one dataset build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairDatasetStats {
    pub instances: u64,
    pub comparisons_possible: u64,
    pub ties_removed: u64,
    pub pairs_emitted: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("sample {instance_id}/{sample_index} has no feedback score")]
    MissingFeedback { instance_id: String, sample_index: u32 },
    #[error("duplicate sample index {sample_index} for instance {instance_id}")]
    DuplicateSampleIndex { instance_id: String, sample_index: u32 },
    #[error("non-finite reward input")]
    NonFinite,
    #[error("no sample carries a reward")]
    NoRewardedSamples,
}

/// Enumerates all unordered sample pairs per instance and keeps the strict
/// inequalities. Output order is deterministic: instances by id, pairs by
/// (lower index, higher index).
pub fn build_pairs(
    samples: &[SampledOutput],
) -> Result<(Vec<RankingPair>, PairDatasetStats), RankingError> {
    let mut grouped: BTreeMap<&str, Vec<(&SampledOutput, Rational)>> = BTreeMap::new();
    for sample in samples {
        let feedback = sample.feedback.ok_or_else(|| RankingError::MissingFeedback {
            instance_id: sample.instance_id.clone(),
            sample_index: sample.sample_index,
        })?;
        grouped
            .entry(sample.instance_id.as_str())
            .or_default()
            .push((sample, feedback));
    }

    let mut pairs = Vec::new();
    let mut stats = PairDatasetStats { instances: grouped.len() as u64, ..Default::default() };

    for (instance_id, mut group) in grouped {
        group.sort_by_key(|(s, _)| s.sample_index);
        for window in group.windows(2) {
            if window[0].0.sample_index == window[1].0.sample_index {
                return Err(RankingError::DuplicateSampleIndex {
                    instance_id: instance_id.to_string(),
                    sample_index: window[0].0.sample_index,
                });
            }
        }
        let n = group.len() as u64;
        stats.comparisons_possible += n * n.saturating_sub(1) / 2;
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let (a, fa) = &group[i];
                let (b, fb) = &group[j];
                if fa == fb {
                    stats.ties_removed += 1;
                    continue;
                }
                let (winner, loser, margin) = if fa > fb {
                    (a.sample_index, b.sample_index, *fa - *fb)
                } else {
                    (b.sample_index, a.sample_index, *fb - *fa)
                };
                pairs.push(RankingPair {
                    instance_id: instance_id.to_string(),
                    winner,
                    loser,
                    margin,
                });
            }
        }
    }
    stats.pairs_emitted = pairs.len() as u64;
    Ok((pairs, stats))
}

/// The ranking loss for one comparison: `-ln(sigmoid(winner - loser))`,
/// computed in the numerically stable softplus form.
pub fn pair_loss(reward_winner: f64, reward_loser: f64) -> Result<f64, RankingError> {
    if !reward_winner.is_finite() || !reward_loser.is_finite() {
        return Err(RankingError::NonFinite);
    }
    let margin = reward_winner - reward_loser;
    // softplus(-margin) = max(-margin, 0) + ln(1 + exp(-|margin|))
    Ok((-margin).max(0.0) + (-margin.abs()).exp().ln_1p())
}

/// Extracts the scalar score from a reward endpoint reply: the first
/// decimal number in the text.
pub fn parse_reward_reply(raw: &str) -> Option<f64> {
    let re = regex::Regex::new(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?").expect("static regex");
    re.find(raw).and_then(|m| m.as_str().parse().ok())
}

/// Selects the sample with the highest reward; ties break toward the
/// lowest sample index. Samples without a reward are ignored.
pub fn rerank(samples: &[SampledOutput]) -> Result<&SampledOutput, RankingError> {
    let mut best: Option<(&SampledOutput, f64)> = None;
    let mut ordered: Vec<&SampledOutput> = samples.iter().collect();
    ordered.sort_by_key(|s| s.sample_index);
    for sample in ordered {
        let Some(reward) = sample.reward else { continue };
        match best {
            Some((_, best_reward)) if reward <= best_reward => {}
            _ => best = Some((sample, reward)),
        }
    }
    best.map(|(s, _)| s).ok_or(RankingError::NoRewardedSamples)
}
