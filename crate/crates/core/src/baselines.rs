//! Non-Bayesian reference estimators: batch least squares and a recursive
//! Kalman filter over constant parameter states.

use crate::error::{Error, Result};
use crate::im::{ImCoeffs, ImDataset};
use crate::zip::{ZipDataset, ZipParams};

fn solve2(m11: f64, m12: f64, m22: f64, b1: f64, b2: f64) -> Result<(f64, f64)> {
    let det = m11 * m22 - m12 * m12;
    if !(det.is_finite() && det.abs() > 1e-12 * m11.abs().max(m22.abs()).max(1.0)) {
        return Err(Error::DegenerateData(
            "normal equations are singular; regressors carry no independent information".into(),
        ));
    }
    Ok(((m22 * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det))
}

/// Ordinary least squares for the ZIP model in its constrained form:
/// regress `y - 1` on `(x² - 1, x - 1)`.
pub fn ls_zip(data: &ZipDataset) -> Result<ZipParams> {
    if data.n() < 2 {
        return Err(Error::DegenerateData(
            "least squares needs at least two experiments".into(),
        ));
    }
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in data.x().iter().zip(data.y()) {
        let z1 = x * x - 1.0;
        let z2 = x - 1.0;
        let r = y - 1.0;
        s11 += z1 * z1;
        s12 += z1 * z2;
        s22 += z2 * z2;
        b1 += z1 * r;
        b2 += z2 * r;
    }
    let (a1, a2) = solve2(s11, s12, s22, b1, b2)?;
    Ok(ZipParams::new(a1, a2))
}

/// Ordinary least squares for the induction-motor coefficients.
///
/// The five regression equations decouple into three blocks sharing no
/// parameters: `(β₁, β₂)` from the stacked flux equations, `β₃` from the
/// speed equation, and `(α_b, α_c)` from the stacked current equations;
/// each block is solved by its own normal equations.
pub fn ls_im(data: &ImDataset) -> Result<ImCoeffs> {
    let recs = data.records();
    let (mut m11, mut m12, mut m22, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut szw2, mut szwy) = (0.0, 0.0);
    let (mut a11, mut a12, mut a22, mut d1, mut d2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in recs {
        let wm1 = r.omega - 1.0;
        // flux block: y_Ed + (ω-1)E'q = β₁E'd + β₂I_q ; y_Eq - (ω-1)E'd = β₁E'q - β₂I_d
        let t1 = r.y_ed + wm1 * r.eq;
        let t2 = r.y_eq - wm1 * r.ed;
        m11 += r.ed * r.ed + r.eq * r.eq;
        m12 += r.ed * r.iq - r.eq * r.id;
        m22 += r.iq * r.iq + r.id * r.id;
        c1 += r.ed * t1 + r.eq * t2;
        c2 += r.iq * t1 - r.id * t2;
        // speed block
        let zw = r.omega * r.omega - r.ed * r.id - r.eq * r.iq;
        szw2 += zw * zw;
        szwy += zw * r.y_omega;
        // current block
        let dud = r.ud - r.ed;
        let duq = r.uq - r.eq;
        a11 += dud * dud + duq * duq;
        a12 += 2.0 * dud * duq;
        a22 += dud * dud + duq * duq;
        d1 += dud * r.y_id + duq * r.y_iq;
        d2 += duq * r.y_id + dud * r.y_iq;
    }
    let (beta1, beta2) = solve2(m11, m12, m22, c1, c2)?;
    if szw2 <= 0.0 || !szw2.is_finite() {
        return Err(Error::DegenerateData(
            "speed-equation regressor is identically zero".into(),
        ));
    }
    let beta3 = szwy / szw2;
    let (alpha_b, alpha_c) = solve2(a11, a12, a22, d1, d2)?;
    Ok(ImCoeffs::new(beta1, beta2, beta3, alpha_b, alpha_c))
}

/// Kalman-filter settings for constant-parameter tracking.
#[derive(Debug, Clone)]
pub struct KfConfig {
    /// Random-walk variance added to the state covariance every step. Zero
    /// is allowed and reduces the filter to recursive least squares.
    pub process_noise: f64,
    /// Measurement noise variance.
    pub meas_noise: f64,
    /// Initial state variance (per component).
    pub init_cov: f64,
    /// Initial state; leave empty to start from zeros.
    pub init_state: Vec<f64>,
}

impl Default for KfConfig {
    fn default() -> Self {
        KfConfig {
            process_noise: 1e-6,
            meas_noise: 1e-2,
            init_cov: 1.0,
            init_state: Vec::new(),
        }
    }
}

impl KfConfig {
    fn validate(&self) -> Result<()> {
        if !(self.process_noise >= 0.0 && self.process_noise.is_finite()) {
            return Err(Error::InvalidParameter(
                "process noise must be finite and non-negative".into(),
            ));
        }
        if !(self.meas_noise > 0.0 && self.meas_noise.is_finite()) {
            return Err(Error::InvalidParameter(
                "measurement noise must be positive".into(),
            ));
        }
        if !(self.init_cov > 0.0 && self.init_cov.is_finite()) {
            return Err(Error::InvalidParameter(
                "initial covariance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One scalar observation `y = offset + regressorsᵀ·state + noise`.
#[derive(Debug, Clone)]
pub struct KfObservation {
    pub y: f64,
    pub regressors: Vec<f64>,
    pub offset: f64,
}

/// Filter output: the state estimate after each observation plus the final
/// estimate for convenience.
#[derive(Debug, Clone)]
pub struct KfResult {
    pub trace: Vec<Vec<f64>>,
    pub final_estimate: Vec<f64>,
}

/// Runs a scalar-measurement Kalman filter with identity state transition
/// over the observation sequence.
pub fn kf_estimate(observations: &[KfObservation], cfg: &KfConfig) -> Result<KfResult> {
    cfg.validate()?;
    let Some(first) = observations.first() else {
        return Err(Error::DegenerateData("no observations".into()));
    };
    let d = first.regressors.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty regressor vector".into()));
    }
    let mut x = if cfg.init_state.is_empty() {
        vec![0.0; d]
    } else if cfg.init_state.len() == d {
        cfg.init_state.clone()
    } else {
        return Err(Error::InvalidParameter(format!(
            "initial state has {} entries but observations have {} regressors",
            cfg.init_state.len(),
            d
        )));
    };
    let mut p = vec![0.0; d * d];
    for i in 0..d {
        p[i * d + i] = cfg.init_cov;
    }

    let mut trace = Vec::with_capacity(observations.len());
    let mut ph = vec![0.0; d];
    for (step, obs) in observations.iter().enumerate() {
        if obs.regressors.len() != d {
            return Err(Error::InvalidParameter(format!(
                "observation {step} has {} regressors, expected {d}",
                obs.regressors.len()
            )));
        }
        for i in 0..d {
            p[i * d + i] += cfg.process_noise;
        }
        let h = &obs.regressors;
        for i in 0..d {
            ph[i] = (0..d).map(|j| p[i * d + j] * h[j]).sum();
        }
        let s: f64 = cfg.meas_noise + (0..d).map(|i| h[i] * ph[i]).sum::<f64>();
        let innov = obs.y - obs.offset - (0..d).map(|i| h[i] * x[i]).sum::<f64>();
        for i in 0..d {
            x[i] += ph[i] / s * innov;
        }
        for i in 0..d {
            for j in 0..d {
                p[i * d + j] -= ph[i] * ph[j] / s;
            }
        }
        // keep the covariance symmetric against roundoff
        for i in 0..d {
            for j in i + 1..d {
                let m = 0.5 * (p[i * d + j] + p[j * d + i]);
                p[i * d + j] = m;
                p[j * d + i] = m;
            }
        }
        if x.iter().any(|v| !v.is_finite()) || !s.is_finite() {
            return Err(Error::FilterDivergence(format!(
                "state became non-finite at observation {step}"
            )));
        }
        trace.push(x.clone());
    }
    Ok(KfResult {
        final_estimate: x,
        trace,
    })
}

/// Kalman-filter estimate of the ZIP parameters from a dataset, using the
/// same constrained regression form as [`ls_zip`].
pub fn kf_zip(data: &ZipDataset, cfg: &KfConfig) -> Result<ZipParams> {
    let obs: Vec<KfObservation> = data
        .x()
        .iter()
        .zip(data.y())
        .map(|(&x, &y)| KfObservation {
            y: y - 1.0,
            regressors: vec![x * x - 1.0, x - 1.0],
            offset: 0.0,
        })
        .collect();
    let r = kf_estimate(&obs, cfg)?;
    Ok(ZipParams::new(r.final_estimate[0], r.final_estimate[1]))
}

/// Kalman-filter estimate of the motor coefficients, filtering the same
/// three decoupled blocks as [`ls_im`] (flux, speed, currents), with the two
/// equations of a stacked block interleaved as successive scalar updates.
pub fn kf_im(data: &ImDataset, cfg: &KfConfig) -> Result<ImCoeffs> {
    let mut flux = Vec::with_capacity(2 * data.n());
    let mut speed = Vec::with_capacity(data.n());
    let mut current = Vec::with_capacity(2 * data.n());
    for r in data.records() {
        let wm1 = r.omega - 1.0;
        flux.push(KfObservation {
            y: r.y_ed + wm1 * r.eq,
            regressors: vec![r.ed, r.iq],
            offset: 0.0,
        });
        flux.push(KfObservation {
            y: r.y_eq - wm1 * r.ed,
            regressors: vec![r.eq, -r.id],
            offset: 0.0,
        });
        speed.push(KfObservation {
            y: r.y_omega,
            regressors: vec![r.omega * r.omega - r.ed * r.id - r.eq * r.iq],
            offset: 0.0,
        });
        current.push(KfObservation {
            y: r.y_id,
            regressors: vec![r.ud - r.ed, r.uq - r.eq],
            offset: 0.0,
        });
        current.push(KfObservation {
            y: r.y_iq,
            regressors: vec![r.uq - r.eq, r.ud - r.ed],
            offset: 0.0,
        });
    }
    let f = kf_estimate(&flux, cfg)?;
    let s = kf_estimate(&speed, cfg)?;
    let c = kf_estimate(&current, cfg)?;
    Ok(ImCoeffs::new(
        f.final_estimate[0],
        f.final_estimate[1],
        s.final_estimate[0],
        c.final_estimate[0],
        c.final_estimate[1],
    ))
}
