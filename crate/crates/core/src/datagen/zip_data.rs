//! Synthetic (x, y) generation for the static ZIP model.

use crate::datagen::feeder::{power_flow, FeederModel, ZipLoad};
use crate::distributions::{sample_normal, sample_uniform, NormalSpec, RngState};
use crate::error::{Error, Result};
use crate::zip::{zip_power, ZipDataset, ZipParams};

/// Settings for one batch of ZIP measurement experiments.
#[derive(Debug, Clone)]
pub struct ZipExperimentConfig {
    /// Bus carrying the load under identification.
    pub target_bus: usize,
    pub true_params: ZipParams,
    pub n_experiments: usize,
    /// Range of the shared multiplier applied to every other load.
    pub load_factor_range: (f64, f64),
    /// Standard deviation of the additive noise on normalized power.
    pub noise_sigma: f64,
}

impl ZipExperimentConfig {
    /// The standard study setup: bus 18, alpha = (0.25, 0.25, 0.5), factors
    /// U[0.1, 4.5], noise std 0.1, 1000 experiments.
    pub fn standard() -> Self {
        ZipExperimentConfig {
            target_bus: 18,
            true_params: ZipParams::new(0.25, 0.25),
            n_experiments: 1000,
            load_factor_range: (0.1, 4.5),
            noise_sigma: 0.1,
        }
    }
}

/// A generated ZIP dataset plus the bookkeeping needed to interpret it.
#[derive(Debug, Clone)]
pub struct ZipGenerated {
    pub dataset: ZipDataset,
    /// Load-factor draws discarded because the power flow did not converge.
    pub redraws: usize,
    /// Base-case voltage at the target bus, used as V₀.
    pub v0: f64,
    /// Nominal target-bus active power, p.u., used as P₀.
    pub p0_pu: f64,
}

/// Runs `n_experiments` operating points on the feeder and records the
/// normalized voltage/power pair seen at the target bus.
///
/// Each experiment draws one shared factor from `load_factor_range` and
/// scales every load except the target's by it; the target bus consumes
/// `P₀ · zip_power(α, V/V₀)`. Draws whose power flow fails to converge
/// (very heavy loading collapses the feeder) are discarded and redrawn,
/// with the count reported in [`ZipGenerated::redraws`].
pub fn generate_zip_dataset(
    cfg: &ZipExperimentConfig,
    feeder: &FeederModel,
    rng: &mut RngState,
) -> Result<ZipGenerated> {
    if cfg.n_experiments == 0 {
        return Err(Error::InvalidParameter(
            "n_experiments must be at least 1".into(),
        ));
    }
    if cfg.noise_sigma < 0.0 || !cfg.noise_sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be finite and non-negative, got {}",
            cfg.noise_sigma
        )));
    }
    let (lo, hi) = cfg.load_factor_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "load factor range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }

    let target_idx = feeder.index_of(cfg.target_bus)?;
    let (p0_pu, _) = feeder.load_pu(cfg.target_bus)?;
    if p0_pu <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target bus {} has no nominal active load",
            cfg.target_bus
        )));
    }

    // reference point from the unscaled base case with plain spot loads
    let base = power_flow(feeder, None, 1e-10, 200)?;
    let v0 = base[target_idx];
    let zip = ZipLoad {
        bus: cfg.target_bus,
        params: cfg.true_params,
        v0,
    };
    let noise = NormalSpec::new(0.0, 1.0)?;

    let mut xs = Vec::with_capacity(cfg.n_experiments);
    let mut ys = Vec::with_capacity(cfg.n_experiments);
    let mut redraws = 0usize;
    let max_attempts = cfg
        .n_experiments
        .saturating_mul(100)
        .max(1000);
    let mut attempts = 0usize;
    while xs.len() < cfg.n_experiments {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::NonConvergence {
                iters: attempts,
                mismatch: f64::NAN,
            });
        }
        let factor = sample_uniform(lo, hi, rng)?;
        let scaled = feeder.scale_loads(factor, Some(cfg.target_bus));
        let v = match power_flow(&scaled, Some(&zip), 1e-10, 100) {
            Ok(v) => v,
            Err(Error::NonConvergence { .. }) => {
                redraws += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let x = v[target_idx] / v0;
        let mut y = zip_power(&cfg.true_params, x)?;
        if cfg.noise_sigma > 0.0 {
            y += cfg.noise_sigma * sample_normal(&noise, rng);
        }
        xs.push(x);
        ys.push(y);
    }

    Ok(ZipGenerated {
        dataset: ZipDataset::new(xs, ys)?,
        redraws,
        v0,
        p0_pu,
    })
}

/// Reconstruction quality of a fitted ZIP model on fresh operating points.
#[derive(Debug, Clone, Copy)]
pub struct ZipReconReport {
    /// Median absolute target-bus voltage difference, p.u.
    pub median_dv: f64,
    /// Median absolute normalized-power difference.
    pub median_dp: f64,
    /// Operating points discarded because the true-model power flow failed.
    pub redraws: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Solves `n_eval` fresh operating points twice — once with the true ZIP
/// load and once with the estimated one — and reports the median absolute
/// differences in target-bus voltage and normalized power.
///
/// Draws where the true model fails to converge are redrawn, matching the
/// generation protocol. If the estimated model fails on a point the true
/// model solved, that point scores an infinite error instead of being
/// discarded, so a destabilizing estimate cannot hide behind redraws.
pub fn evaluate_zip_reconstruction(
    cfg: &ZipExperimentConfig,
    estimate: &ZipParams,
    feeder: &FeederModel,
    n_eval: usize,
    rng: &mut RngState,
) -> Result<ZipReconReport> {
    if n_eval == 0 {
        return Err(Error::InvalidParameter("n_eval must be at least 1".into()));
    }
    let (lo, hi) = cfg.load_factor_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "load factor range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let target_idx = feeder.index_of(cfg.target_bus)?;
    let base = power_flow(feeder, None, 1e-10, 200)?;
    let v0 = base[target_idx];
    let zip_true = ZipLoad {
        bus: cfg.target_bus,
        params: cfg.true_params,
        v0,
    };
    let zip_est = ZipLoad {
        bus: cfg.target_bus,
        params: *estimate,
        v0,
    };

    let mut dv = Vec::with_capacity(n_eval);
    let mut dp = Vec::with_capacity(n_eval);
    let mut redraws = 0usize;
    let max_attempts = n_eval.saturating_mul(100).max(1000);
    let mut attempts = 0usize;
    while dv.len() < n_eval {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::NonConvergence {
                iters: attempts,
                mismatch: f64::NAN,
            });
        }
        let factor = sample_uniform(lo, hi, rng)?;
        let scaled = feeder.scale_loads(factor, Some(cfg.target_bus));
        let vt = match power_flow(&scaled, Some(&zip_true), 1e-10, 100) {
            Ok(v) => v,
            Err(Error::NonConvergence { .. }) => {
                redraws += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        match power_flow(&scaled, Some(&zip_est), 1e-10, 100) {
            Ok(ve) => {
                let yt = zip_power(&cfg.true_params, vt[target_idx] / v0)?;
                let ye = zip_power(estimate, ve[target_idx] / v0)?;
                dv.push((vt[target_idx] - ve[target_idx]).abs());
                dp.push((yt - ye).abs());
            }
            Err(Error::NonConvergence { .. }) => {
                dv.push(f64::INFINITY);
                dp.push(f64::INFINITY);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ZipReconReport {
        median_dv: median(dv),
        median_dp: median(dp),
        redraws,
    })
}
