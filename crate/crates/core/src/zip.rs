//! Static ZIP load model: quadratic power-voltage law, conjugate conditional
//! posteriors for (α₁, α₂, τ), and the Gibbs sampling driver.
//!
//! The model for normalized measurements x[t] = V[t]/V₀, y[t] = P[t]/P₀ is
//!
//! ```text
//! y[t] = α₁·x[t]² + α₂·x[t] + α₃ + ε[t],   ε[t] ~ N(0, 1/τ),   α₁+α₂+α₃ = 1
//! ```
//!
//! α₃ is always the derived quantity 1 − α₁ − α₂, so subtracting 1 from both
//! sides gives a two-regressor linear model in z₁ = x²−1 and z₂ = x−1 on
//! y−1, which keeps the sum constraint exact by construction.

use crate::chain::Chain;
use crate::distributions::{
    sample_gamma, sample_normal, GammaSpec, NormalSpec, RngState,
};
use crate::error::{Error, Result};

/// ZIP coefficient triple (α₃ derived) plus optional noise precision.
///
/// `tau` is `None` for point estimates that carry no noise model (e.g. the
/// least-squares baseline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau: Option<f64>,
}

impl ZipParams {
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        ZipParams { alpha1, alpha2, tau: None }
    }

    pub fn with_tau(alpha1: f64, alpha2: f64, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise precision must be positive and finite, got {tau}"
            )));
        }
        Ok(ZipParams { alpha1, alpha2, tau: Some(tau) })
    }

    /// Constant-power share, always 1 − α₁ − α₂.
    pub fn alpha3(&self) -> f64 {
        1.0 - self.alpha1 - self.alpha2
    }
}

/// Paired normalized voltage/power observations.
///
/// An empty dataset is representable (conditional updates return the prior on
/// it); the estimation drivers require n ≥ 1.
#[derive(Debug, Clone, Default)]
pub struct ZipDataset {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ZipDataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "x and y lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        for (t, (&xv, &yv)) in x.iter().zip(&y).enumerate() {
            if !xv.is_finite() || !yv.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite sample at index {t}: x={xv}, y={yv}"
                )));
            }
            if xv <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "normalized voltage must be positive, got x[{t}]={xv}"
                )));
            }
        }
        Ok(ZipDataset { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// Priors for the ZIP sampler.
#[derive(Debug, Clone, Copy)]
pub struct ZipPriors {
    pub alpha1: NormalSpec,
    pub alpha2: NormalSpec,
    pub tau: GammaSpec,
}

impl Default for ZipPriors {
    /// Weakly informative defaults centered at an equal ZIP split:
    /// α₁, α₂ ~ N(1/3, variance 1), τ ~ G(1, 1).
    fn default() -> Self {
        ZipPriors {
            alpha1: NormalSpec::new(1.0 / 3.0, 1.0).unwrap(),
            alpha2: NormalSpec::new(1.0 / 3.0, 1.0).unwrap(),
            tau: GammaSpec::new(1.0, 1.0).unwrap(),
        }
    }
}

/// Evaluates the normalized ZIP law P/P₀ = α₁·v̄² + α₂·v̄ + α₃.
pub fn zip_power(params: &ZipParams, vbar: f64) -> Result<f64> {
    if !vbar.is_finite() || vbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "normalized voltage must be positive and finite, got {vbar}"
        )));
    }
    Ok(params.alpha1 * vbar * vbar + params.alpha2 * vbar + params.alpha3())
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "conditioning precision must be positive and finite, got {tau}"
        )));
    }
    Ok(())
}

/// Conditional posterior of α₁ given α₂ and τ.
///
/// With z₁[t] = x[t]²−1 and residual target r[t] = y[t]−1−α₂(x[t]−1):
/// precision = prior.precision + τ·Σz₁² and
/// mean = (prior.precision·prior.mean + τ·Σ z₁·r) / precision.
pub fn cond_post_alpha1(
    data: &ZipDataset,
    alpha2: f64,
    tau: f64,
    prior: &NormalSpec,
) -> Result<NormalSpec> {
    check_tau(tau)?;
    let mut sz2 = 0.0;
    let mut szr = 0.0;
    for (&x, &y) in data.x.iter().zip(&data.y) {
        let z1 = x * x - 1.0;
        let r = y - 1.0 - alpha2 * (x - 1.0);
        sz2 += z1 * z1;
        szr += z1 * r;
    }
    let precision = prior.precision() + tau * sz2;
    let mean = (prior.precision() * prior.mean() + tau * szr) / precision;
    NormalSpec::new(mean, precision)
}

/// Conditional posterior of α₂ given α₁ and τ; regressor z₂[t] = x[t]−1.
pub fn cond_post_alpha2(
    data: &ZipDataset,
    alpha1: f64,
    tau: f64,
    prior: &NormalSpec,
) -> Result<NormalSpec> {
    check_tau(tau)?;
    let mut sz2 = 0.0;
    let mut szr = 0.0;
    for (&x, &y) in data.x.iter().zip(&data.y) {
        let z2 = x - 1.0;
        let r = y - 1.0 - alpha1 * (x * x - 1.0);
        sz2 += z2 * z2;
        szr += z2 * r;
    }
    let precision = prior.precision() + tau * sz2;
    let mean = (prior.precision() * prior.mean() + tau * szr) / precision;
    NormalSpec::new(mean, precision)
}

/// Conditional posterior of τ given the coefficients:
/// shape a⁽¹⁾ = a⁽⁰⁾ + n/2, rate b⁽¹⁾ = b⁽⁰⁾ + SSE/2.
pub fn cond_post_tau(
    data: &ZipDataset,
    alpha1: f64,
    alpha2: f64,
    prior: &GammaSpec,
) -> GammaSpec {
    let alpha3 = 1.0 - alpha1 - alpha2;
    let sse: f64 = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(&x, &y)| {
            let e = y - alpha1 * x * x - alpha2 * x - alpha3;
            e * e
        })
        .sum();
    let shape = prior.shape() + data.n() as f64 / 2.0;
    let rate = prior.rate() + sse / 2.0;
    GammaSpec::new(shape, rate).expect("conjugate update preserves positivity")
}

/// Gibbs sampler for the ZIP model.
///
/// Each iteration draws α₁ | α₂, τ, then α₂ | α₁, τ with the fresh α₁, then
/// τ | α₁, α₂ with both fresh values; all `total` rows are recorded and the
/// first `burn_in` flagged. Initial values are drawn from the priors.
pub fn gibbs_zip(
    data: &ZipDataset,
    priors: &ZipPriors,
    total: usize,
    burn_in: usize,
    rng: &mut RngState,
) -> Result<Chain> {
    if data.n() == 0 {
        return Err(Error::DegenerateData("cannot fit an empty dataset".into()));
    }
    let names = vec!["alpha1".to_string(), "alpha2".to_string(), "tau".to_string()];
    let mut chain = Chain::new(names, total, burn_in, rng.seed())?;

    // starting state: only the values conditioned on before their own first
    // update need a draw; α₁ is refreshed at the top of every sweep
    let mut alpha1;
    let mut alpha2 = sample_normal(&priors.alpha2, rng);
    let mut tau = sample_gamma(&priors.tau, rng);

    for _ in 0..total {
        alpha1 = sample_normal(&cond_post_alpha1(data, alpha2, tau, &priors.alpha1)?, rng);
        alpha2 = sample_normal(&cond_post_alpha2(data, alpha1, tau, &priors.alpha2)?, rng);
        tau = sample_gamma(&cond_post_tau(data, alpha1, alpha2, &priors.tau), rng);
        chain.push_row(&[alpha1, alpha2, tau]);
    }
    Ok(chain)
}
