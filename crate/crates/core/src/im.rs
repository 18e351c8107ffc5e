//! Third-order induction-motor load model in its regression form, conjugate
//! conditional posteriors for the five aggregated coefficients and three
//! noise precisions, and the IM Gibbs driver.
//!
//! The regression form treats each sampled instant as five linear
//! observations in the unknown coefficients:
//!
//! ```text
//! y_Ed = β₁·E′d + β₂·I_q − (ω−1)·E′q
//! y_Eq = β₁·E′q − β₂·I_d + (ω−1)·E′d
//! y_ω  = β₃·(ω² − E′d·I_d − E′q·I_q)
//! y_Id = α_b·(U_d−E′d) + α_c·(U_q−E′q)
//! y_Iq = α_b·(U_q−E′q) + α_c·(U_d−E′d)
//! ```
//!
//! where y_Ed, y_Eq, y_ω observe the state derivatives and y_Id, y_Iq the
//! stator currents. β₁ and β₂ appear in two equations sharing precision τ_E,
//! as do α_b and α_c with τ_I; their conditional posteriors stack both
//! equations' targets.

use crate::chain::Chain;
use crate::distributions::{
    sample_gamma, sample_normal, GammaSpec, NormalSpec, RngState,
};
use crate::error::{Error, Result};

/// Physical machine parameters (all per-unit except the inertia constant in
/// seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImPhysical {
    /// Stator winding resistance.
    pub rs: f64,
    /// Stator leakage reactance.
    pub xs: f64,
    /// Magnetizing reactance.
    pub xm: f64,
    /// Rotor resistance.
    pub rr: f64,
    /// Rotor leakage reactance.
    pub xr: f64,
    /// Inertia constant, seconds.
    pub h: f64,
    /// Load torque scale at synchronous speed.
    pub t0: f64,
}

impl ImPhysical {
    pub fn new(rs: f64, xs: f64, xm: f64, rr: f64, xr: f64, h: f64, t0: f64) -> Result<Self> {
        let phys = ImPhysical { rs, xs, xm, rr, xr, h, t0 };
        for (name, v) in [
            ("Rs", rs),
            ("Xs", xs),
            ("Xm", xm),
            ("Rr", rr),
            ("Xr", xr),
            ("H", h),
            ("T0", t0),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(phys)
    }

    /// Reference machine used by the benchmarks. Its derived coefficients are
    /// β₁ = −0.0077, β₂ = −0.018, β₃ = −25, α_b = 0.20, α_c = 0.80.
    pub fn benchmark() -> Self {
        ImPhysical {
            rs: 0.294_117_647_058_823_5,
            xs: 0.314_132_925_897_630_87,
            xm: 3.2,
            rr: 0.033_729_422_222_222_24,
            xr: 1.180_444_444_444_445_7,
            h: 0.02,
            t0: 1.0,
        }
    }
}

/// Aggregated regression coefficients; the three precisions are `None` for
/// point estimates that carry no noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImCoeffs {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub alpha_b: f64,
    pub alpha_c: f64,
    pub tau_e: Option<f64>,
    pub tau_omega: Option<f64>,
    pub tau_i: Option<f64>,
}

impl ImCoeffs {
    pub fn new(beta1: f64, beta2: f64, beta3: f64, alpha_b: f64, alpha_c: f64) -> Self {
        ImCoeffs {
            beta1,
            beta2,
            beta3,
            alpha_b,
            alpha_c,
            tau_e: None,
            tau_omega: None,
            tau_i: None,
        }
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.beta1, self.beta2, self.beta3, self.alpha_b, self.alpha_c]
    }
}

/// Computes the aggregated coefficients from physical machine parameters:
/// X′ = Xs + XmXr/(Xm+Xr), X = Xs+Xm, T′ = (Xr+Xm)/Rr, β₁ = −1/T′,
/// β₂ = −(X−X′)/T′, β₃ = −1/(2H), α_b = Rs/(Rs²+X′²), α_c = X′/(Rs²+X′²).
pub fn derived_coeffs(phys: &ImPhysical) -> ImCoeffs {
    let xprime = phys.xs + phys.xm * phys.xr / (phys.xm + phys.xr);
    let x = phys.xs + phys.xm;
    let tprime = (phys.xr + phys.xm) / phys.rr;
    let den = phys.rs * phys.rs + xprime * xprime;
    ImCoeffs::new(
        -1.0 / tprime,
        -(x - xprime) / tprime,
        -1.0 / (2.0 * phys.h),
        phys.rs / den,
        xprime / den,
    )
}

/// One sampled instant: states, inputs, currents, and the five observation
/// targets (noisy in estimation datasets, exact in simulator output).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImRecord {
    pub ed: f64,
    pub eq: f64,
    pub id: f64,
    pub iq: f64,
    pub ud: f64,
    pub uq: f64,
    pub omega: f64,
    pub y_ed: f64,
    pub y_eq: f64,
    pub y_omega: f64,
    pub y_id: f64,
    pub y_iq: f64,
}

impl ImRecord {
    fn is_finite(&self) -> bool {
        [
            self.ed, self.eq, self.id, self.iq, self.ud, self.uq, self.omega,
            self.y_ed, self.y_eq, self.y_omega, self.y_id, self.y_iq,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Measurement set for IM estimation; at least one record.
#[derive(Debug, Clone)]
pub struct ImDataset {
    records: Vec<ImRecord>,
}

impl ImDataset {
    pub fn new(records: Vec<ImRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidParameter(
                "IM dataset needs at least one record".into(),
            ));
        }
        if let Some(i) = records.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite field in record {i}"
            )));
        }
        Ok(ImDataset { records })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[ImRecord] {
        &self.records
    }
}

/// Priors for the IM sampler.
#[derive(Debug, Clone, Copy)]
pub struct ImPriors {
    pub beta1: NormalSpec,
    pub beta2: NormalSpec,
    pub beta3: NormalSpec,
    pub alpha_b: NormalSpec,
    pub alpha_c: NormalSpec,
    pub tau_e: GammaSpec,
    pub tau_omega: GammaSpec,
    pub tau_i: GammaSpec,
}

impl Default for ImPriors {
    /// β₁, β₂ ~ N(0, 1); β₃ ~ N(0, variance 100) for its larger magnitude;
    /// α_b, α_c ~ N(0.5, 1); all precisions G(1, 1). Deliberately does not
    /// encode the benchmark coefficient values.
    fn default() -> Self {
        ImPriors {
            beta1: NormalSpec::new(0.0, 1.0).unwrap(),
            beta2: NormalSpec::new(0.0, 1.0).unwrap(),
            beta3: NormalSpec::new(0.0, 0.01).unwrap(),
            alpha_b: NormalSpec::new(0.5, 1.0).unwrap(),
            alpha_c: NormalSpec::new(0.5, 1.0).unwrap(),
            tau_e: GammaSpec::new(1.0, 1.0).unwrap(),
            tau_omega: GammaSpec::new(1.0, 1.0).unwrap(),
            tau_i: GammaSpec::new(1.0, 1.0).unwrap(),
        }
    }
}

/// Residuals of the five regression equations at one record, in the order
/// (E′d, E′q, ω, I_d, I_q).
pub fn im_residuals(coeffs: &ImCoeffs, rec: &ImRecord) -> [f64; 5] {
    let wm1 = rec.omega - 1.0;
    let dud = rec.ud - rec.ed;
    let duq = rec.uq - rec.eq;
    [
        rec.y_ed - (coeffs.beta1 * rec.ed + coeffs.beta2 * rec.iq - wm1 * rec.eq),
        rec.y_eq - (coeffs.beta1 * rec.eq - coeffs.beta2 * rec.id + wm1 * rec.ed),
        rec.y_omega
            - coeffs.beta3 * (rec.omega * rec.omega - rec.ed * rec.id - rec.eq * rec.iq),
        rec.y_id - (coeffs.alpha_b * dud + coeffs.alpha_c * duq),
        rec.y_iq - (coeffs.alpha_b * duq + coeffs.alpha_c * dud),
    ]
}

/// One scalar regression observation y = θ·z + offset + ε used by the
/// conjugate update.
#[derive(Debug, Clone, Copy)]
pub struct LinearTarget {
    pub y: f64,
    pub z: f64,
    pub offset: f64,
}

/// Shared conjugate-update core: precision = prior.precision + τΣz²,
/// mean = (prior.precision·prior.mean + τ·Σ z(y−offset)) / precision.
fn conjugate_normal_update(sz2: f64, szr: f64, tau: f64, prior: &NormalSpec) -> Result<NormalSpec> {
    let precision = prior.precision() + tau * sz2;
    let mean = (prior.precision() * prior.mean() + tau * szr) / precision;
    NormalSpec::new(mean, precision)
}

/// Conditional posterior of a scalar coefficient over a set of stacked
/// targets with shared noise precision τ. Empty target sets return the prior.
pub fn cond_post_linear(
    targets: &[LinearTarget],
    tau: f64,
    prior: &NormalSpec,
) -> Result<NormalSpec> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "conditioning precision must be positive and finite, got {tau}"
        )));
    }
    let mut sz2 = 0.0;
    let mut szr = 0.0;
    for t in targets {
        sz2 += t.z * t.z;
        szr += t.z * (t.y - t.offset);
    }
    conjugate_normal_update(sz2, szr, tau, prior)
}

/// Conditional posterior of the flux precision τ_E given (β₁, β₂):
/// shape + n and rate + SSE/2, where the SSE stacks both E′ residuals
/// (2n observations, so the shape grows by n).
pub fn cond_post_tau_flux(
    data: &ImDataset,
    beta1: f64,
    beta2: f64,
    prior: &GammaSpec,
) -> GammaSpec {
    let mut sse = 0.0;
    for r in data.records() {
        let wm1 = r.omega - 1.0;
        let r1 = r.y_ed - (beta1 * r.ed + beta2 * r.iq - wm1 * r.eq);
        let r2 = r.y_eq - (beta1 * r.eq - beta2 * r.id + wm1 * r.ed);
        sse += r1 * r1 + r2 * r2;
    }
    GammaSpec::new(prior.shape() + data.n() as f64, prior.rate() + sse / 2.0)
        .expect("conjugate update preserves positivity")
}

/// Conditional posterior of the speed-equation precision τ_ω given β₃:
/// shape + n/2 and rate + SSE/2 over the single ω residual.
pub fn cond_post_tau_speed(data: &ImDataset, beta3: f64, prior: &GammaSpec) -> GammaSpec {
    let mut sse = 0.0;
    for r in data.records() {
        let zw = r.omega * r.omega - r.ed * r.id - r.eq * r.iq;
        let e = r.y_omega - beta3 * zw;
        sse += e * e;
    }
    GammaSpec::new(
        prior.shape() + data.n() as f64 / 2.0,
        prior.rate() + sse / 2.0,
    )
    .expect("conjugate update preserves positivity")
}

/// Conditional posterior of the current precision τ_I given (α_b, α_c):
/// shape + n and rate + SSE/2 over both stacked current residuals.
pub fn cond_post_tau_current(
    data: &ImDataset,
    alpha_b: f64,
    alpha_c: f64,
    prior: &GammaSpec,
) -> GammaSpec {
    let mut sse = 0.0;
    for r in data.records() {
        let dud = r.ud - r.ed;
        let duq = r.uq - r.eq;
        let r4 = r.y_id - (alpha_b * dud + alpha_c * duq);
        let r5 = r.y_iq - (alpha_b * duq + alpha_c * dud);
        sse += r4 * r4 + r5 * r5;
    }
    GammaSpec::new(prior.shape() + data.n() as f64, prior.rate() + sse / 2.0)
        .expect("conjugate update preserves positivity")
}

/// Column view of a dataset for the tight per-iteration loops.
struct Columns {
    ed: Vec<f64>,
    eq: Vec<f64>,
    id: Vec<f64>,
    iq: Vec<f64>,
    wm1: Vec<f64>,
    dud: Vec<f64>,
    duq: Vec<f64>,
    zw: Vec<f64>,
    y_ed: Vec<f64>,
    y_eq: Vec<f64>,
    y_w: Vec<f64>,
    y_id: Vec<f64>,
    y_iq: Vec<f64>,
}

impl Columns {
    fn from(data: &ImDataset) -> Self {
        let n = data.n();
        let mut c = Columns {
            ed: Vec::with_capacity(n),
            eq: Vec::with_capacity(n),
            id: Vec::with_capacity(n),
            iq: Vec::with_capacity(n),
            wm1: Vec::with_capacity(n),
            dud: Vec::with_capacity(n),
            duq: Vec::with_capacity(n),
            zw: Vec::with_capacity(n),
            y_ed: Vec::with_capacity(n),
            y_eq: Vec::with_capacity(n),
            y_w: Vec::with_capacity(n),
            y_id: Vec::with_capacity(n),
            y_iq: Vec::with_capacity(n),
        };
        for r in data.records() {
            c.ed.push(r.ed);
            c.eq.push(r.eq);
            c.id.push(r.id);
            c.iq.push(r.iq);
            c.wm1.push(r.omega - 1.0);
            c.dud.push(r.ud - r.ed);
            c.duq.push(r.uq - r.eq);
            c.zw.push(r.omega * r.omega - r.ed * r.id - r.eq * r.iq);
            c.y_ed.push(r.y_ed);
            c.y_eq.push(r.y_eq);
            c.y_w.push(r.y_omega);
            c.y_id.push(r.y_id);
            c.y_iq.push(r.y_iq);
        }
        c
    }
}

/// Gibbs sampler for the IM model over the eight parameters
/// (β₁, β₂, β₃, α_b, α_c, τ_E, τ_ω, τ_I).
///
/// Per iteration, each coefficient is drawn from its stacked conditional
/// (β₁, β₂ over both E′ equations with τ_E; β₃ over the ω equation with τ_ω;
/// α_b, α_c over both current equations with τ_I), always using the freshest
/// values of the others; the precisions then get gamma updates with
/// shape + n_eff/2 and rate + SSE/2, where n_eff counts every stacked
/// observation (2n for τ_E and τ_I, n for τ_ω).
pub fn gibbs_im(
    data: &ImDataset,
    priors: &ImPriors,
    total: usize,
    burn_in: usize,
    rng: &mut RngState,
) -> Result<Chain> {
    let names = [
        "beta1", "beta2", "beta3", "alpha_b", "alpha_c", "tau_E", "tau_omega", "tau_I",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut chain = Chain::new(names, total, burn_in, rng.seed())?;

    let c = Columns::from(data);
    let n = data.n();

    // starting state: only the values conditioned on before their own first
    // update need a draw; β₁, β₃ and α_b are refreshed before first use
    let mut b1;
    let mut b2 = sample_normal(&priors.beta2, rng);
    let mut b3;
    let mut ab;
    let mut ac = sample_normal(&priors.alpha_c, rng);
    let mut tau_e = sample_gamma(&priors.tau_e, rng);
    let mut tau_w = sample_gamma(&priors.tau_omega, rng);
    let mut tau_i = sample_gamma(&priors.tau_i, rng);

    // constant regressor energies
    let sz2_b1: f64 = (0..n).map(|t| c.ed[t] * c.ed[t] + c.eq[t] * c.eq[t]).sum();
    let sz2_b2: f64 = (0..n).map(|t| c.iq[t] * c.iq[t] + c.id[t] * c.id[t]).sum();
    let sz2_b3: f64 = c.zw.iter().map(|z| z * z).sum();
    let sz2_a: f64 = (0..n)
        .map(|t| c.dud[t] * c.dud[t] + c.duq[t] * c.duq[t])
        .sum();

    for _ in 0..total {
        // beta1 stacked over the two E' equations
        let mut szr = 0.0;
        for t in 0..n {
            szr += c.ed[t] * (c.y_ed[t] - b2 * c.iq[t] + c.wm1[t] * c.eq[t])
                + c.eq[t] * (c.y_eq[t] + b2 * c.id[t] - c.wm1[t] * c.ed[t]);
        }
        b1 = sample_normal(&conjugate_normal_update(sz2_b1, szr, tau_e, &priors.beta1)?, rng);

        // beta2, z = (I_q, -I_d)
        let mut szr = 0.0;
        for t in 0..n {
            szr += c.iq[t] * (c.y_ed[t] - b1 * c.ed[t] + c.wm1[t] * c.eq[t])
                - c.id[t] * (c.y_eq[t] - b1 * c.eq[t] - c.wm1[t] * c.ed[t]);
        }
        b2 = sample_normal(&conjugate_normal_update(sz2_b2, szr, tau_e, &priors.beta2)?, rng);

        // beta3 over the speed equation
        let mut szr = 0.0;
        for t in 0..n {
            szr += c.zw[t] * c.y_w[t];
        }
        b3 = sample_normal(&conjugate_normal_update(sz2_b3, szr, tau_w, &priors.beta3)?, rng);

        // alpha_b stacked over the two current equations
        let mut szr = 0.0;
        for t in 0..n {
            szr += c.dud[t] * (c.y_id[t] - ac * c.duq[t])
                + c.duq[t] * (c.y_iq[t] - ac * c.dud[t]);
        }
        ab = sample_normal(&conjugate_normal_update(sz2_a, szr, tau_i, &priors.alpha_b)?, rng);

        // alpha_c, z = (U_q-E'q, U_d-E'd)
        let mut szr = 0.0;
        for t in 0..n {
            szr += c.duq[t] * (c.y_id[t] - ab * c.dud[t])
                + c.dud[t] * (c.y_iq[t] - ab * c.duq[t]);
        }
        ac = sample_normal(&conjugate_normal_update(sz2_a, szr, tau_i, &priors.alpha_c)?, rng);

        // precision updates
        tau_e = sample_gamma(&cond_post_tau_flux(data, b1, b2, &priors.tau_e), rng);
        tau_w = sample_gamma(&cond_post_tau_speed(data, b3, &priors.tau_omega), rng);
        tau_i = sample_gamma(&cond_post_tau_current(data, ab, ac, &priors.tau_i), rng);

        chain.push_row(&[b1, b2, b3, ab, ac, tau_e, tau_w, tau_i]);
    }
    Ok(chain)
}
