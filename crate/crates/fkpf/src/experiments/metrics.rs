//! Trial traces and aggregated tracking metrics.

use serde::{Deserialize, Serialize};

use crate::leader::HandoffRecord;
use crate::particle::StateVec;

/// Full trace of one Monte Carlo trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    /// True target positions, length `T + 1`.
    pub true_states: Vec<StateVec>,
    /// Candidate-filter posterior means, length `T + 1`.
    pub estimates: Vec<StateVec>,
    /// Reference-filter posterior means, length `T + 1`.
    pub reference_estimates: Vec<StateVec>,
    /// Baseline (no-approximation) posterior means, length `T + 1`.
    pub baseline_estimates: Vec<StateVec>,
    /// Hand-off records of the candidate filter.
    pub handoffs: Vec<HandoffRecord>,
}

impl TrialResult {
    /// Time-averaged approximation error of a trace against the reference:
    /// `sqrt(mean_t ||est_t − ref_t||²)`.
    pub fn trace_rmsae(estimates: &[StateVec], reference: &[StateVec]) -> f64 {
        let n = estimates.len();
        let sum: f64 = estimates
            .iter()
            .zip(reference)
            .map(|(a, b)| a.dist_sq(*b))
            .sum();
        (sum / n as f64).sqrt()
    }

    /// Per-trial deterioration ratio: candidate approximation error over
    /// baseline approximation error (1 when both vanish).
    pub fn deterioration_ratio(&self) -> f64 {
        let cand = Self::trace_rmsae(&self.estimates, &self.reference_estimates);
        let base = Self::trace_rmsae(&self.baseline_estimates, &self.reference_estimates);
        if base == 0.0 {
            if cand == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            cand / base
        }
    }
}

/// Box-plot summary of the per-trial deterioration ratios. Whiskers reach
/// the most extreme points within 1.5 interquartile ranges of the box.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoxStats {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub min: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn from_samples(samples: &[f64]) -> Option<BoxStats> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let q25 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q75 = quantile_sorted(&sorted, 0.75);
        let iqr = q75 - q25;
        let lo_fence = q25 - 1.5 * iqr;
        let hi_fence = q75 + 1.5 * iqr;
        let whisker_lo = sorted
            .iter()
            .copied()
            .find(|&v| v >= lo_fence)
            .unwrap_or(sorted[0]);
        let whisker_hi = sorted
            .iter()
            .rev()
            .copied()
            .find(|&v| v <= hi_fence)
            .unwrap_or(sorted[sorted.len() - 1]);
        Some(BoxStats {
            q25,
            median,
            q75,
            whisker_lo,
            whisker_hi,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Metrics aggregated across the Monte Carlo trials of one run.
#[derive(Debug, Clone)]
pub struct AggregateMetrics {
    pub mode: super::Mode,
    /// Per-step root-mean-squared error against the true trajectory.
    pub rmse: Vec<f64>,
    /// Per-step root-mean-squared approximation error against the
    /// reference filter.
    pub rmsae: Vec<f64>,
    /// Per-step aggregate approximation error of the paired
    /// no-approximation baseline, for deterioration-curve comparisons.
    pub baseline_rmsae: Vec<f64>,
    /// Per-trial deterioration ratios (indexed by included trial order).
    pub deterioration_ratio: Vec<f64>,
    pub quantiles: Option<BoxStats>,
    /// Empirical approximation frequency across all candidate records.
    pub empirical_q: f64,
    /// Hand-off records tagged with their trial index.
    pub handoffs: Vec<(u64, HandoffRecord)>,
    /// Compression factor, when the mode defines one.
    pub compression_factor: Option<f64>,
    pub trials_included: usize,
    pub trials_degenerate: usize,
}
