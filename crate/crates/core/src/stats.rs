//! Monte-Carlo bias/variance estimation.
//!
//! For approximations `f̃^1 … f̃^N` from independent trials and the
//! noiseless target `t` at a point, with `m` the (Karcher) mean of the
//! trials and `ρ` the codomain distance:
//!
//! ```text
//! mse        = mean_j ρ(t, f̃^j)²
//! bias       = ρ(m, t)²
//! variance   = mean_j ρ(m, f̃^j)²
//! bias_ratio = bias / mse        (0 when mse = 0)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ValueSpace;
use crate::Point;

/// Approximations from every trial at a common set of evaluation points.
#[derive(Debug, Clone)]
pub struct TrialEvaluations<V> {
    eval_points: Vec<Point>,
    per_trial: Vec<Vec<V>>,
    truth: Vec<V>,
}

impl<V> TrialEvaluations<V> {
    /// `per_trial[j][k]` is trial `j` at `eval_points[k]`.
    pub fn new(eval_points: Vec<Point>, per_trial: Vec<Vec<V>>, truth: Vec<V>) -> Result<Self> {
        if truth.len() != eval_points.len() {
            return Err(Error::InvalidConfig(format!(
                "{} truth values for {} evaluation points",
                truth.len(),
                eval_points.len()
            )));
        }
        if let Some(row) = per_trial.iter().find(|row| row.len() != eval_points.len()) {
            return Err(Error::InvalidConfig(format!(
                "trial has {} values for {} evaluation points",
                row.len(),
                eval_points.len()
            )));
        }
        Ok(Self {
            eval_points,
            per_trial,
            truth,
        })
    }

    pub fn eval_points(&self) -> &[Point] {
        &self.eval_points
    }

    pub fn trials(&self) -> usize {
        self.per_trial.len()
    }

    pub fn truth(&self) -> &[V] {
        &self.truth
    }

    pub fn trial_values(&self, trial: usize) -> &[V] {
        &self.per_trial[trial]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub mse: f64,
    pub bias: f64,
    pub variance: f64,
    pub bias_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileSummary {
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
}

/// Percentile summaries of the per-point metrics across evaluation points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mse: PercentileSummary,
    pub bias_ratio: PercentileSummary,
}

/// Mean of trial values: arithmetic on the line, Karcher on a manifold.
pub fn mean_estimate<S: ValueSpace>(space: &S, values: &[S::Value]) -> Result<S::Value> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let w = vec![1.0 / values.len() as f64; values.len()];
    space.weighted_mean(values, &w)
}

pub fn point_metrics<S: ValueSpace>(
    space: &S,
    trials: &TrialEvaluations<S::Value>,
    point: usize,
) -> Result<PointMetrics> {
    if trials.trials() < 2 {
        return Err(Error::InvalidConfig("at least two trials are required".into()));
    }
    let samples: Vec<S::Value> = trials.per_trial.iter().map(|row| row[point].clone()).collect();
    metrics_from_samples(space, &samples, &trials.truth[point])
}

/// Metrics of one point from its trial samples and noiseless target.
pub fn metrics_from_samples<S: ValueSpace>(
    space: &S,
    samples: &[S::Value],
    truth: &S::Value,
) -> Result<PointMetrics> {
    let mean = mean_estimate(space, samples)?;
    let n = samples.len() as f64;
    let mut mse = 0.0;
    let mut variance = 0.0;
    for v in samples {
        mse += space.dist(truth, v)?.powi(2);
        variance += space.dist(&mean, v)?.powi(2);
    }
    mse /= n;
    variance /= n;
    let bias = space.dist(&mean, truth)?.powi(2);
    let bias_ratio = if mse > 0.0 { bias / mse } else { 0.0 };
    Ok(PointMetrics {
        mse,
        bias,
        variance,
        bias_ratio,
    })
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of unsorted data:
/// position `q (n - 1)` in the sorted sample.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, q))
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn percentile_summary(values: &[f64]) -> Result<PercentileSummary> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(PercentileSummary {
        p25: percentile_sorted(&sorted, 0.25),
        p50: percentile_sorted(&sorted, 0.5),
        p75: percentile_sorted(&sorted, 0.75),
    })
}

pub fn summarize(metrics: &[PointMetrics]) -> Result<MetricsSummary> {
    let mse: Vec<f64> = metrics.iter().map(|m| m.mse).collect();
    let ratio: Vec<f64> = metrics.iter().map(|m| m.bias_ratio).collect();
    Ok(MetricsSummary {
        mse: percentile_summary(&mse)?,
        bias_ratio: percentile_summary(&ratio)?,
    })
}
