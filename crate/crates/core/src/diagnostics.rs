//! Posterior summaries and chain-quality checks.

use crate::chain::Chain;
use crate::error::{Error, Result};

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 50;

/// Equal-width histogram over the sample range.
#[derive(Debug, Clone)]
pub struct Histogram {
    /// `bins + 1` edges, ascending.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Moments, credible interval, and histogram of one marginal posterior.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Credible level the interval was computed at.
    pub level: f64,
    pub histogram: Histogram,
    pub n_samples: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac
}

/// Summarizes a raw sample vector (used for derived quantities such as
/// `α₃ = 1 - α₁ - α₂` that are not stored as chain columns).
pub fn summarize_samples(samples: &[f64], level: f64, bins: usize) -> Result<PosteriorSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "credible level must be in (0, 1), got {level}"
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 samples to summarize, got {}",
            samples.len()
        )));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let tail = (1.0 - level) / 2.0;
    let ci_lo = quantile(&sorted, tail);
    let ci_hi = quantile(&sorted, 1.0 - tail);

    // histogram over [min, max]; a degenerate range gets a unit-width span
    // so every sample still lands in a bin
    let (mut lo, mut hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0usize; bins];
    for &v in samples {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(PosteriorSummary {
        mean,
        std,
        ci_lo,
        ci_hi,
        level,
        histogram: Histogram { edges, counts },
        n_samples: n,
    })
}

/// Summarizes the post-burn-in samples of one chain parameter.
pub fn summarize(chain: &Chain, param: &str, level: f64) -> Result<PosteriorSummary> {
    summarize_with_bins(chain, param, level, DEFAULT_BINS)
}

pub fn summarize_with_bins(
    chain: &Chain,
    param: &str,
    level: f64,
    bins: usize,
) -> Result<PosteriorSummary> {
    let idx = chain
        .param_index(param)
        .ok_or_else(|| Error::InvalidParameter(format!("no parameter {param:?} in chain")))?;
    summarize_samples(&chain.post_burn_in(idx), level, bins)
}

/// Stationarity check for one parameter: compares the first and last
/// `window` post-burn-in samples.
#[derive(Debug, Clone)]
pub struct BurnInCheck {
    pub param: String,
    pub first_mean: f64,
    pub last_mean: f64,
    /// `3 · std / sqrt(window)`, with std taken over all kept samples.
    pub threshold: f64,
    pub stable: bool,
}

/// Flags parameters whose early and late post-burn-in window means differ by
/// more than three standard errors, a symptom of a burn-in set too short.
///
/// `window` must leave the two windows disjoint (`2·window ≤` kept samples).
pub fn burn_in_check(chain: &Chain, window: usize) -> Result<Vec<BurnInCheck>> {
    let kept = chain.kept();
    if window == 0 || 2 * window > kept {
        return Err(Error::InvalidParameter(format!(
            "window must satisfy 1 <= window <= kept/2 (kept = {kept}, window = {window})"
        )));
    }
    let mut checks = Vec::with_capacity(chain.n_params());
    for (idx, name) in chain.param_names().iter().enumerate() {
        let samples = chain.post_burn_in(idx);
        let first_mean = samples[..window].iter().sum::<f64>() / window as f64;
        let last_mean = samples[kept - window..].iter().sum::<f64>() / window as f64;
        let mean = samples.iter().sum::<f64>() / kept as f64;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (kept - 1).max(1) as f64;
        let threshold = 3.0 * var.sqrt() / (window as f64).sqrt();
        checks.push(BurnInCheck {
            param: name.clone(),
            first_mean,
            last_mean,
            threshold,
            stable: (first_mean - last_mean).abs() < threshold,
        });
    }
    Ok(checks)
}

/// Fraction of summaries whose credible interval covers `true_value`.
///
/// Requires at least 20 replicates; below that the empirical coverage is too
/// coarse to mean anything.
pub fn coverage_test(true_value: f64, summaries: &[PosteriorSummary]) -> Result<f64> {
    if summaries.len() < 20 {
        return Err(Error::InsufficientSamples(format!(
            "coverage needs at least 20 replicate fits, got {}",
            summaries.len()
        )));
    }
    let covered = summaries
        .iter()
        .filter(|s| s.ci_lo <= true_value && true_value <= s.ci_hi)
        .count();
    Ok(covered as f64 / summaries.len() as f64)
}
