//! Segment-level meta-evaluation: Kendall tau-b and Pearson correlations
//! between metric scores and human ratings, per domain, with Williams
//! pairwise significance tests between metrics that share the same ratings.
//!
//! Tau-b is computed with the merge-sort formulation (O(n log n)); pairs
//! tied in both variables are excluded from every count. Significance is
//! computed on the Pearson correlations, as is standard for the Williams
//! test.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("input vectors have different lengths ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least {required} observations, got {got}")]
    InsufficientLength { required: usize, got: usize },
    #[error("degenerate vector: {0}")]
    DegenerateVector(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("parameters outside the test's domain: {0}")]
    DomainError(String),
}

fn validate_paired(x: &[f64], y: &[f64], min_len: usize) -> Result<(), StatError> {
    if x.len() != y.len() {
        return Err(StatError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < min_len {
        return Err(StatError::InsufficientLength { required: min_len, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatError::NonFinite);
    }
    Ok(())
}

fn tied_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Counts inversions (strict descents across i < j) by bottom-up merge sort.
fn count_inversions(values: &mut Vec<f64>) -> u64 {
    let n = values.len();
    let mut buffer = vec![0.0f64; n];
    let mut swaps = 0u64;
    let mut width = 1usize;
    while width < n {
        for start in (0..n).step_by(2 * width) {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buffer[k] = values[i];
                    i += 1;
                } else {
                    buffer[k] = values[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
        }
        std::mem::swap(values, &mut buffer);
        width *= 2;
    }
    swaps
}

/// Kendall tau-b: `(C - D) / sqrt((C + D + Tx)(C + D + Ty))` where C/D are
/// concordant/discordant pair counts and Tx/Ty count pairs tied only in x
/// or only in y. Pairs tied in both are excluded from all counts.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, StatError> {
    validate_paired(x, y, 2)?;
    let n = x.len() as u64;

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // tie counts over x (grouped) and over (x, y) jointly
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                tied_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            tied_xy += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    tied_xy += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys);
    ys.sort_by(|a, b| a.total_cmp(b));
    let tied_y = tied_pairs(&ys);

    let total = n * (n - 1) / 2;
    if total == tied_x || total == tied_y {
        return Err(StatError::DegenerateVector(
            "all pairs tied in one variable".into(),
        ));
    }
    // numerator: C - D = total - Tx - Ty + Txy - 2D (Tx/Ty here include
    // jointly tied pairs, which cancel via the Txy term)
    let numer = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64
        - 2.0 * discordant as f64;
    let denom = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    Ok((numer / denom).clamp(-1.0, 1.0))
}

/// Pearson product-moment correlation, computed with Welford-style
/// streaming co-moments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatError> {
    validate_paired(x, y, 2)?;
    let mut mean_x = 0.0;
    let mut mean_y = 0.0;
    let mut m2x = 0.0;
    let mut m2y = 0.0;
    let mut cxy = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let k = (i + 1) as f64;
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        mean_x += dx / k;
        mean_y += dy / k;
        m2x += dx * (xi - mean_x);
        m2y += dy * (yi - mean_y);
        cxy += dx * (yi - mean_y);
    }
    if m2x == 0.0 || m2y == 0.0 {
        return Err(StatError::DegenerateVector("zero variance".into()));
    }
    Ok((cxy / (m2x * m2y).sqrt()).clamp(-1.0, 1.0))
}

/// Result of one Williams test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilliamsResult {
    pub t: f64,
    pub p: f64,
}

/// Williams test for the difference between two correlations r12 and r13
/// that share variable 1 (here: two metrics against the same human
/// ratings, with r23 the correlation between the metrics). Two-sided p
/// from Student's t with n-3 degrees of freedom.
pub fn williams_test(r12: f64, r13: f64, r23: f64, n: usize) -> Result<WilliamsResult, StatError> {
    if n < 4 {
        return Err(StatError::DomainError(format!("n = {n} < 4")));
    }
    for (name, r) in [("r12", r12), ("r13", r13), ("r23", r23)] {
        if !r.is_finite() || r.abs() >= 1.0 {
            return Err(StatError::DomainError(format!("{name} = {r} outside (-1, 1)")));
        }
    }
    let nf = n as f64;
    let k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if k <= 0.0 {
        return Err(StatError::DomainError(format!(
            "correlation matrix is numerically degenerate (K = {k})"
        )));
    }
    let numer = (r12 - r13) * ((nf - 1.0) * (1.0 + r23)).sqrt();
    let denom = (2.0 * k * (nf - 1.0) / (nf - 3.0)
        + (r12 + r13).powi(2) / 4.0 * (1.0 - r23).powi(3))
    .sqrt();
    let t = numer / denom;
    let p = student_t_two_sided_p(t, nf - 3.0);
    Ok(WilliamsResult { t, p })
}

/// Two-sided tail probability of Student's t, via the regularized
/// incomplete beta function: `p = I_{v/(v+t^2)}(v/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = dof / (dof + t * t);
    beta_reg(dof / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Per-segment scores for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScores {
    pub metric_name: String,
    /// instance_id -> score
    pub scores: BTreeMap<String, f64>,
}

/// One human rating with its domain tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRating {
    pub instance_id: String,
    pub rating: f64,
    pub domain: String,
}

/// Domain name used for the union of all segments.
pub const OVERALL_DOMAIN: &str = "Overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDomainCorrelation {
    pub metric: String,
    pub domain: String,
    pub tau_b: f64,
    pub pearson: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificancePair {
    pub metric_a: String,
    pub metric_b: String,
    pub domain: String,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub correlations: Vec<MetricDomainCorrelation>,
    pub significance: Vec<SignificancePair>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetaEvalError {
    #[error("metric {metric}: instance ids do not match the ratings ({missing_in_scores} rated segments unscored, {missing_in_ratings} scored segments unrated)")]
    JoinMismatch {
        metric: String,
        missing_in_scores: usize,
        missing_in_ratings: usize,
        examples: Vec<String>,
    },
    #[error("duplicate instance id {0} in ratings")]
    DuplicateInstance(String),
    #[error("{context}: {source}")]
    Stat {
        context: String,
        #[source]
        source: StatError,
    },
}

/// Computes per-domain and overall correlations for every metric against
/// the ratings, plus Williams significance for every metric pair. Requires
/// the id sets of each metric and the ratings to match exactly.
pub fn correlation_report(
    metrics: &[SegmentScores],
    ratings: &[SegmentRating],
) -> Result<CorrelationReport, MetaEvalError> {
    let mut rating_map: BTreeMap<&str, &SegmentRating> = BTreeMap::new();
    for r in ratings {
        if rating_map.insert(r.instance_id.as_str(), r).is_some() {
            return Err(MetaEvalError::DuplicateInstance(r.instance_id.clone()));
        }
    }

    for metric in metrics {
        let missing_in_scores: Vec<&str> = rating_map
            .keys()
            .filter(|id| !metric.scores.contains_key(**id))
            .copied()
            .collect();
        let missing_in_ratings: Vec<&str> = metric
            .scores
            .keys()
            .filter(|id| !rating_map.contains_key(id.as_str()))
            .map(String::as_str)
            .collect();
        if !missing_in_scores.is_empty() || !missing_in_ratings.is_empty() {
            let examples = missing_in_scores
                .iter()
                .chain(&missing_in_ratings)
                .take(5)
                .map(|s| s.to_string())
                .collect();
            return Err(MetaEvalError::JoinMismatch {
                metric: metric.metric_name.clone(),
                missing_in_scores: missing_in_scores.len(),
                missing_in_ratings: missing_in_ratings.len(),
                examples,
            });
        }
    }

    let mut domains: BTreeSet<&str> = ratings.iter().map(|r| r.domain.as_str()).collect();
    domains.insert(OVERALL_DOMAIN);

    let mut correlations = Vec::new();
    let mut significance = Vec::new();

    for domain in domains {
        // segment ids in this domain, in deterministic (sorted) order
        let ids: Vec<&str> = rating_map
            .values()
            .filter(|r| domain == OVERALL_DOMAIN || r.domain == domain)
            .map(|r| r.instance_id.as_str())
            .collect();
        let human: Vec<f64> = ids.iter().map(|id| rating_map[id].rating).collect();
        let n = ids.len();

        let mut metric_vectors: Vec<(&str, Vec<f64>)> = Vec::new();
        for metric in metrics {
            let vector: Vec<f64> = ids.iter().map(|id| metric.scores[*id]).collect();
            let context = format!("{} / {domain}", metric.metric_name);
            let tau_b = kendall_tau_b(&vector, &human)
                .map_err(|source| MetaEvalError::Stat { context: context.clone(), source })?;
            let rho = pearson(&vector, &human)
                .map_err(|source| MetaEvalError::Stat { context: context.clone(), source })?;
            correlations.push(MetricDomainCorrelation {
                metric: metric.metric_name.clone(),
                domain: domain.to_string(),
                tau_b,
                pearson: rho,
                n,
            });
            metric_vectors.push((&metric.metric_name, vector));
        }

        for i in 0..metric_vectors.len() {
            for j in i + 1..metric_vectors.len() {
                let (name_a, vec_a) = &metric_vectors[i];
                let (name_b, vec_b) = &metric_vectors[j];
                let r12 = pearson(vec_a, &human).ok();
                let r13 = pearson(vec_b, &human).ok();
                let r23 = pearson(vec_a, vec_b).ok();
                let (Some(r12), Some(r13), Some(r23)) = (r12, r13, r23) else { continue };
                if let Ok(result) = williams_test(r12, r13, r23, n) {
                    significance.push(SignificancePair {
                        metric_a: name_a.to_string(),
                        metric_b: name_b.to_string(),
                        domain: domain.to_string(),
                        t: result.t,
                        p: result.p,
                    });
                }
            }
        }
    }

    Ok(CorrelationReport { correlations, significance })
}

/// Renders the report as an aligned text table.
pub fn render_table(report: &CorrelationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:<12} {:>6} {:>8} {:>8}\n",
        "metric", "domain", "n", "tau_b", "pearson"
    ));
    for c in &report.correlations {
        out.push_str(&format!(
            "{:<24} {:<12} {:>6} {:>8.3} {:>8.3}\n",
            c.metric, c.domain, c.n, c.tau_b, c.pearson
        ));
    }
    if !report.significance.is_empty() {
        out.push('\n');
        out.push_str(&format!(
            "{:<24} {:<24} {:<12} {:>9} {:>10}\n",
            "metric A", "metric B", "domain", "t", "p"
        ));
        for s in &report.significance {
            out.push_str(&format!(
                "{:<24} {:<24} {:<12} {:>9.4} {:>10.6}\n",
                s.metric_a, s.metric_b, s.domain, s.t, s.p
            ));
        }
    }
    out
}
