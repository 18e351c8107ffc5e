//! Shared oracles for the integration tests.
//!
//! Everything here is deliberately independent of the library's estimation
//! code paths: posterior moments come from brute-force quadrature of the
//! written-out log density, power-flow reference solutions come from a dense
//! admittance-matrix fixed point, and the induction-motor regression
//! equations are restated from scratch rather than reusing `im_residuals`.
#![allow(dead_code)]

use std::collections::HashMap;

use bayesload::datagen::{FeederModel, ZipLoad};
use bayesload::distributions::{sample_uniform, GammaSpec, NormalSpec, RngState};
use bayesload::im::{ImDataset, ImRecord, LinearTarget};
use bayesload::zip::{zip_power, ZipDataset};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}

/// Trapezoid-rule mean and variance of the density proportional to
/// `exp(logpost)` on a uniform grid (the spacing cancels against the
/// normalizer, and the running max keeps the exponentials in range).
pub fn moments_on<F: Fn(f64) -> f64>(grid: &[f64], logpost: &F) -> (f64, f64) {
    let lp: Vec<f64> = grid.iter().map(|&x| logpost(x)).collect();
    let m = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let last = grid.len() - 1;
    for (i, (&x, &l)) in grid.iter().zip(&lp).enumerate() {
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        let d = w * (l - m).exp();
        z += d;
        s1 += d * x;
        s2 += d * x * x;
    }
    let mean = s1 / z;
    (mean, s2 / z - mean * mean)
}

/// Quadrature moments for a log density supported on the real line.
///
/// Starts from a fixed wide bracket, recenters twice on the running mean with
/// an eight-sigma half-width, then takes a dense final pass. Accurate to well
/// below 1e-9 for the unimodal conditionals exercised by the tests.
pub fn normal_moments<F: Fn(f64) -> f64>(logpost: F) -> (f64, f64) {
    let mut est = moments_on(&uniform_grid(-100.0, 100.0, 200_001), &logpost);
    for _ in 0..2 {
        let sd = est.1.sqrt().max(1e-12);
        let grid = uniform_grid(est.0 - 8.0 * sd, est.0 + 8.0 * sd, 20_001);
        est = moments_on(&grid, &logpost);
    }
    let sd = est.1.sqrt().max(1e-12);
    moments_on(
        &uniform_grid(est.0 - 8.0 * sd, est.0 + 8.0 * sd, 200_001),
        &logpost,
    )
}

/// Moments of t = u² under the transformed density exp(g(u)) on a uniform
/// u grid.
fn sqrt_space_moments<G: Fn(f64) -> f64>(grid: &[f64], g: &G) -> (f64, f64) {
    let lp: Vec<f64> = grid.iter().map(|&u| g(u)).collect();
    let m = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let last = grid.len() - 1;
    for (i, (&u, &l)) in grid.iter().zip(&lp).enumerate() {
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        let d = w * (l - m).exp();
        let t = u * u;
        z += d;
        s1 += d * t;
        s2 += d * t * t;
    }
    let mean = s1 / z;
    (mean, s2 / z - mean * mean)
}

/// Quadrature moments for a log density supported on (0, ∞).
///
/// A log-spaced scan over 16 decades locates the mode; the integral is then
/// taken in u = √t, whose Jacobian smooths the lower endpoint for every
/// gamma-like density with shape above one half, with mean-recentred passes
/// and an upper edge that runs further out because such densities are
/// right-skewed.
pub fn gamma_moments<F: Fn(f64) -> f64>(logpost: F) -> (f64, f64) {
    let g = |u: f64| logpost(u * u) + (2.0 * u).ln();
    let n_scan = 4000;
    let mut best = (f64::NEG_INFINITY, 1.0);
    for i in 0..=n_scan {
        let t = 1e-8 * 1e16f64.powf(i as f64 / n_scan as f64);
        let l = logpost(t);
        if l > best.0 {
            best = (l, t);
        }
    }
    let u0 = best.1.sqrt();
    let mut est = sqrt_space_moments(&uniform_grid(u0 / 10.0, u0 * 10.0, 40_001), &g);
    for _ in 0..2 {
        let sd = est.1.sqrt().max(est.0.abs() * 1e-9);
        let lo = (est.0 - 12.0 * sd).max(est.0 * 1e-8);
        let hi = est.0 + 30.0 * sd;
        est = sqrt_space_moments(&uniform_grid(lo.sqrt(), hi.sqrt(), 40_001), &g);
    }
    let sd = est.1.sqrt().max(est.0.abs() * 1e-9);
    let lo = (est.0 - 12.0 * sd).max(est.0 * 1e-8);
    let hi = est.0 + 30.0 * sd;
    sqrt_space_moments(&uniform_grid(lo.sqrt(), hi.sqrt(), 200_001), &g)
}

/// Unnormalized normal log prior.
pub fn log_normal_prior(x: f64, spec: &NormalSpec) -> f64 {
    -0.5 * spec.precision() * (x - spec.mean()) * (x - spec.mean())
}

/// Unnormalized gamma log prior; −∞ off the support.
pub fn log_gamma_prior(t: f64, spec: &GammaSpec) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (spec.shape() - 1.0) * t.ln() - spec.rate() * t
}

/// ZIP log likelihood written out directly from the model statement,
/// including the τ-dependent normalizer so precision scans are valid.
pub fn zip_loglik(x: &[f64], y: &[f64], alpha1: f64, alpha2: f64, tau: f64) -> f64 {
    let alpha3 = 1.0 - alpha1 - alpha2;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let e = yi - (alpha1 * xi * xi + alpha2 * xi + alpha3);
            e * e
        })
        .sum();
    0.5 * x.len() as f64 * tau.ln() - 0.5 * tau * sse
}

/// Independent restatement of the five induction-motor regression
/// predictions at θ = (β₁, β₂, β₃, α_b, α_c), in the equation order
/// (E′d, E′q, ω, I_d, I_q).
pub fn im_eq_predictions(theta: &[f64; 5], r: &ImRecord) -> [f64; 5] {
    let [b1, b2, b3, ab, ac] = *theta;
    let dud = r.ud - r.ed;
    let duq = r.uq - r.eq;
    [
        b1 * r.ed + b2 * r.iq - (r.omega - 1.0) * r.eq,
        b1 * r.eq - b2 * r.id + (r.omega - 1.0) * r.ed,
        b3 * (r.omega * r.omega - r.ed * r.id - r.eq * r.iq),
        ab * dud + ac * duq,
        ab * duq + ac * dud,
    ]
}

/// Induction-motor log likelihood over all five equations, built on
/// [`im_eq_predictions`]; the stacked flux and current pairs share τ_E and
/// τ_I, and the τ-dependent normalizers count 2n, n, and 2n observations.
pub fn im_loglik(
    recs: &[ImRecord],
    theta: &[f64; 5],
    tau_e: f64,
    tau_w: f64,
    tau_i: f64,
) -> f64 {
    let mut ll = 0.0;
    for r in recs {
        let p = im_eq_predictions(theta, r);
        let r1 = r.y_ed - p[0];
        let r2 = r.y_eq - p[1];
        let r3 = r.y_omega - p[2];
        let r4 = r.y_id - p[3];
        let r5 = r.y_iq - p[4];
        ll -= 0.5 * tau_e * (r1 * r1 + r2 * r2);
        ll -= 0.5 * tau_w * r3 * r3;
        ll -= 0.5 * tau_i * (r4 * r4 + r5 * r5);
    }
    let n = recs.len() as f64;
    ll + n * tau_e.ln() + 0.5 * n * tau_w.ln() + n * tau_i.ln()
}

/// Stacked regression targets for β₁ given β₂: both E′ equations contribute,
/// with the speed coupling folded into the offsets.
pub fn im_targets_beta1(recs: &[ImRecord], b2: f64) -> Vec<LinearTarget> {
    let mut t = Vec::with_capacity(2 * recs.len());
    for r in recs {
        let wm1 = r.omega - 1.0;
        t.push(LinearTarget { y: r.y_ed, z: r.ed, offset: b2 * r.iq - wm1 * r.eq });
        t.push(LinearTarget { y: r.y_eq, z: r.eq, offset: -b2 * r.id + wm1 * r.ed });
    }
    t
}

/// Stacked regression targets for β₂ given β₁; z = (I_q, −I_d).
pub fn im_targets_beta2(recs: &[ImRecord], b1: f64) -> Vec<LinearTarget> {
    let mut t = Vec::with_capacity(2 * recs.len());
    for r in recs {
        let wm1 = r.omega - 1.0;
        t.push(LinearTarget { y: r.y_ed, z: r.iq, offset: b1 * r.ed - wm1 * r.eq });
        t.push(LinearTarget { y: r.y_eq, z: -r.id, offset: b1 * r.eq + wm1 * r.ed });
    }
    t
}

/// Regression targets for β₃: the speed equation alone.
pub fn im_targets_beta3(recs: &[ImRecord]) -> Vec<LinearTarget> {
    recs.iter()
        .map(|r| LinearTarget {
            y: r.y_omega,
            z: r.omega * r.omega - r.ed * r.id - r.eq * r.iq,
            offset: 0.0,
        })
        .collect()
}

/// Stacked regression targets for α_b given α_c over both current equations.
pub fn im_targets_alpha_b(recs: &[ImRecord], ac: f64) -> Vec<LinearTarget> {
    let mut t = Vec::with_capacity(2 * recs.len());
    for r in recs {
        let dud = r.ud - r.ed;
        let duq = r.uq - r.eq;
        t.push(LinearTarget { y: r.y_id, z: dud, offset: ac * duq });
        t.push(LinearTarget { y: r.y_iq, z: duq, offset: ac * dud });
    }
    t
}

/// Stacked regression targets for α_c given α_b over both current equations.
pub fn im_targets_alpha_c(recs: &[ImRecord], ab: f64) -> Vec<LinearTarget> {
    let mut t = Vec::with_capacity(2 * recs.len());
    for r in recs {
        let dud = r.ud - r.ed;
        let duq = r.uq - r.eq;
        t.push(LinearTarget { y: r.y_id, z: duq, offset: ab * dud });
        t.push(LinearTarget { y: r.y_iq, z: dud, offset: ab * duq });
    }
    t
}

/// Reference power flow built on the full bus admittance matrix.
///
/// Assembles the dense Y-bus from the branch list, LU-factors the reduced
/// system over non-slack buses once, and iterates constant-power (or ZIP,
/// at the designated bus) current injections to a fixed point. Returns bus
/// voltage magnitudes in `bus_ids` order together with the final
/// power-balance mismatch max_k |V_k·conj((Y·V)_k) − S_k(V)|.
pub fn admittance_power_flow(feeder: &FeederModel, zip_at: Option<&ZipLoad>) -> (Vec<f64>, f64) {
    let n = feeder.n_buses();
    let idx: HashMap<usize, usize> = feeder
        .bus_ids()
        .iter()
        .enumerate()
        .map(|(k, &b)| (b, k))
        .collect();

    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (from, to, z) in feeder.branches() {
        let yb = Complex64::new(1.0, 0.0) / z;
        let i = idx[&from];
        let j = idx[&to];
        y[(i, i)] += yb;
        y[(j, j)] += yb;
        y[(i, j)] -= yb;
        y[(j, i)] -= yb;
    }
    let y_rr = y.view((1, 1), (n - 1, n - 1)).into_owned();
    let y_r0 = y.view((1, 0), (n - 1, 1)).into_owned();
    let lu = y_rr.lu();

    let v0 = Complex64::new(feeder.slack_voltage, 0.0);
    let mut v = vec![v0; n];
    let zip_idx = zip_at.map(|z| idx[&z.bus]);
    let spec_power = |k: usize, vk: Complex64| -> Complex64 {
        let (p, q) = feeder.load_pu(feeder.bus_ids()[k]).unwrap();
        let scale = match (zip_idx, zip_at) {
            (Some(zk), Some(zl)) if zk == k => {
                zip_power(&zl.params, vk.norm() / zl.v0).unwrap()
            }
            _ => 1.0,
        };
        Complex64::new(-p * scale, -q * scale)
    };
    for _ in 0..300 {
        let mut rhs = DVector::<Complex64>::zeros(n - 1);
        for k in 1..n {
            let s = spec_power(k, v[k]);
            rhs[k - 1] = (s / v[k]).conj() - y_r0[(k - 1, 0)] * v0;
        }
        let sol = lu
            .solve(&rhs)
            .expect("reduced admittance matrix is nonsingular");
        let mut delta: f64 = 0.0;
        for k in 1..n {
            delta = delta.max((sol[k - 1] - v[k]).norm());
            v[k] = sol[k - 1];
        }
        if delta < 1e-13 {
            break;
        }
    }

    let vv = DVector::from_column_slice(&v);
    let inj = &y * &vv;
    let mut mismatch: f64 = 0.0;
    for k in 1..n {
        let s_inj = v[k] * inj[k].conj();
        mismatch = mismatch.max((s_inj - spec_power(k, v[k])).norm());
    }
    (v.iter().map(|c| c.norm()).collect(), mismatch)
}

/// Random small ZIP dataset with well-spread regressors.
pub fn rand_zip(rng: &mut RngState, n: usize) -> ZipDataset {
    let x = (0..n).map(|_| sample_uniform(0.5, 1.5, rng).unwrap()).collect();
    let y = (0..n).map(|_| sample_uniform(-0.5, 2.0, rng).unwrap()).collect();
    ZipDataset::new(x, y).unwrap()
}

/// Random motor record with every channel in a physically plausible band.
pub fn rand_record(rng: &mut RngState) -> ImRecord {
    let mut u = |lo: f64, hi: f64| sample_uniform(lo, hi, rng).unwrap();
    ImRecord {
        ed: u(-1.0, 1.0),
        eq: u(-1.0, 1.0),
        id: u(-1.5, 1.5),
        iq: u(-1.5, 1.5),
        ud: u(-1.2, 1.2),
        uq: u(-1.2, 1.2),
        omega: u(0.9, 1.05),
        y_ed: u(-1.0, 1.0),
        y_eq: u(-1.0, 1.0),
        y_omega: u(-30.0, 5.0),
        y_id: u(-1.5, 1.5),
        y_iq: u(-1.5, 1.5),
    }
}

pub fn rand_im(rng: &mut RngState, n: usize) -> ImDataset {
    ImDataset::new((0..n).map(|_| rand_record(rng)).collect()).unwrap()
}

/// Random conditioning point (β₁, β₂, β₃, α_b, α_c).
pub fn rand_theta(rng: &mut RngState) -> [f64; 5] {
    [
        sample_uniform(-1.0, 1.0, rng).unwrap(),
        sample_uniform(-1.0, 1.0, rng).unwrap(),
        sample_uniform(-30.0, -1.0, rng).unwrap(),
        sample_uniform(0.0, 1.0, rng).unwrap(),
        sample_uniform(0.0, 1.0, rng).unwrap(),
    ]
}

pub fn rand_normal_prior(rng: &mut RngState) -> NormalSpec {
    NormalSpec::new(
        sample_uniform(-0.5, 0.8, rng).unwrap(),
        sample_uniform(0.5, 4.0, rng).unwrap(),
    )
    .unwrap()
}

pub fn rand_gamma_prior(rng: &mut RngState) -> GammaSpec {
    GammaSpec::new(
        sample_uniform(1.0, 3.0, rng).unwrap(),
        sample_uniform(0.5, 2.0, rng).unwrap(),
    )
    .unwrap()
}
