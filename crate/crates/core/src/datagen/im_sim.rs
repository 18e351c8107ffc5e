//! Induction-motor trajectory simulation and measurement synthesis.
//!
//! The third-order model is integrated with classical RK4 under piecewise-
//! constant terminal voltage, and every sample is expanded into a full
//! regression record (states, inputs, algebraic currents, and the exact
//! right-hand-side values the estimators treat as measurements).

use crate::distributions::{sample_normal, NormalSpec, RngState};
use crate::error::{Error, Result};
use crate::im::{derived_coeffs, ImCoeffs, ImDataset, ImPhysical, ImRecord};

/// Default integration step, seconds.
pub const DEFAULT_IM_DT: f64 = 1e-3;

/// One simulated trajectory at a fixed step.
#[derive(Debug, Clone)]
pub struct ImTrajectory {
    pub dt: f64,
    pub records: Vec<ImRecord>,
}

/// Terminal-voltage samples for a step change: `(1, 0)` before `dip_index`,
/// `(dip_factor, 0)` from then on.
pub fn step_dip_inputs(n_samples: usize, dip_index: usize, dip_factor: f64) -> Vec<(f64, f64)> {
    (0..n_samples)
        .map(|k| {
            if k < dip_index {
                (1.0, 0.0)
            } else {
                (dip_factor, 0.0)
            }
        })
        .collect()
}

/// The default excitation: 10 s at 1 ms with a 10% voltage dip at 5 s.
pub fn default_im_inputs() -> Vec<(f64, f64)> {
    step_dip_inputs(10_001, 5_000, 0.9)
}

fn currents(c: &ImCoeffs, ed: f64, eq: f64, ud: f64, uq: f64) -> (f64, f64) {
    let id = c.alpha_b * (ud - ed) + c.alpha_c * (uq - eq);
    let iq = c.alpha_b * (uq - eq) + c.alpha_c * (ud - ed);
    (id, iq)
}

fn rhs(c: &ImCoeffs, ed: f64, eq: f64, w: f64, ud: f64, uq: f64) -> (f64, f64, f64) {
    let (id, iq) = currents(c, ed, eq, ud, uq);
    let ded = c.beta1 * ed + c.beta2 * iq - (w - 1.0) * eq;
    let deq = c.beta1 * eq - c.beta2 * id + (w - 1.0) * ed;
    let dw = c.beta3 * (w * w - ed * id - eq * iq);
    (ded, deq, dw)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col];
        for row in col + 1..3 {
            let f = a[row][col] / pivot_row[col];
            for (entry, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *entry -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Steady state `(E'_d, E'_q, ω)` for a constant terminal voltage, found by
/// Newton iteration on the three right-hand sides (the speed equation is
/// scaled by `1/β₃` so the system stays well conditioned for heavy rotors).
pub fn im_equilibrium(coeffs: &ImCoeffs, ud: f64, uq: f64) -> Result<(f64, f64, f64)> {
    if !(ud.is_finite() && uq.is_finite()) {
        return Err(Error::InvalidParameter(
            "terminal voltage must be finite".into(),
        ));
    }
    let guesses = [
        (0.9 * ud, 0.9 * uq + 0.05, 0.95),
        (0.5, 0.5, 0.9),
        (-0.5, 0.7, 0.98),
        (ud, uq, 1.0),
    ];
    for &(mut ed, mut eq, mut w) in &guesses {
        for _ in 0..60 {
            let (id, iq) = currents(coeffs, ed, eq, ud, uq);
            let f = [
                coeffs.beta1 * ed + coeffs.beta2 * iq - (w - 1.0) * eq,
                coeffs.beta1 * eq - coeffs.beta2 * id + (w - 1.0) * ed,
                w * w - ed * id - eq * iq,
            ];
            if f.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-12 {
                return Ok((ed, eq, w));
            }
            let j = [
                [
                    coeffs.beta1 - coeffs.beta2 * coeffs.alpha_c,
                    -coeffs.beta2 * coeffs.alpha_b - (w - 1.0),
                    -eq,
                ],
                [
                    coeffs.beta2 * coeffs.alpha_b + (w - 1.0),
                    coeffs.beta1 + coeffs.beta2 * coeffs.alpha_c,
                    ed,
                ],
                [
                    -id + coeffs.alpha_b * ed + coeffs.alpha_c * eq,
                    -iq + coeffs.alpha_c * ed + coeffs.alpha_b * eq,
                    2.0 * w,
                ],
            ];
            let Some(step) = solve3(j, f) else { break };
            ed -= step[0];
            eq -= step[1];
            w -= step[2];
            if !(ed.is_finite() && eq.is_finite() && w.is_finite()) {
                break;
            }
        }
    }
    Err(Error::NonConvergence {
        iters: 60,
        mismatch: f64::NAN,
    })
}

fn make_record(c: &ImCoeffs, ed: f64, eq: f64, w: f64, ud: f64, uq: f64) -> ImRecord {
    let (id, iq) = currents(c, ed, eq, ud, uq);
    let (ded, deq, dw) = rhs(c, ed, eq, w, ud, uq);
    ImRecord {
        ed,
        eq,
        id,
        iq,
        ud,
        uq,
        omega: w,
        y_ed: ded,
        y_eq: deq,
        y_omega: dw,
        y_id: id,
        y_iq: iq,
    }
}

/// Integrates the motor from `init = (E'_d, E'_q, ω)` through the input
/// samples; `inputs[k]` is held constant over the step from sample `k` to
/// `k+1`, and one record is emitted per sample.
pub fn simulate_im(
    phys: &ImPhysical,
    inputs: &[(f64, f64)],
    dt: f64,
    init: (f64, f64, f64),
) -> Result<ImTrajectory> {
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("no input samples".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    let (mut ed, mut eq, mut w) = init;
    if !(ed.is_finite() && eq.is_finite() && w.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    let c = derived_coeffs(phys);

    let mut records = Vec::with_capacity(inputs.len());
    for (k, &(ud, uq)) in inputs.iter().enumerate() {
        records.push(make_record(&c, ed, eq, w, ud, uq));
        if k + 1 == inputs.len() {
            break;
        }
        let (k1d, k1q, k1w) = rhs(&c, ed, eq, w, ud, uq);
        let h = dt / 2.0;
        let (k2d, k2q, k2w) = rhs(&c, ed + h * k1d, eq + h * k1q, w + h * k1w, ud, uq);
        let (k3d, k3q, k3w) = rhs(&c, ed + h * k2d, eq + h * k2q, w + h * k2w, ud, uq);
        let (k4d, k4q, k4w) = rhs(&c, ed + dt * k3d, eq + dt * k3q, w + dt * k3w, ud, uq);
        ed += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        eq += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if !(ed.is_finite() && eq.is_finite() && w.is_finite()) {
            return Err(Error::Integration { step: k + 1 });
        }
    }
    Ok(ImTrajectory { dt, records })
}

/// Adds independent Gaussian noise to the five measurement channels.
///
/// Each channel gets noise with standard deviation `sigma_rel` times that
/// channel's RMS over the trajectory, so "5% noise" means the same thing for
/// small flux derivatives and order-one currents. Regressor columns are left
/// exact. Channels are perturbed one at a time (all `y_Ed`, then all `y_Eq`,
/// ...) so the draw order is reproducible.
pub fn add_im_noise(
    trajectory: &ImTrajectory,
    sigma_rel: f64,
    rng: &mut RngState,
) -> Result<ImDataset> {
    if sigma_rel < 0.0 || !sigma_rel.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite and non-negative, got {sigma_rel}"
        )));
    }
    let mut records = trajectory.records.clone();
    if sigma_rel > 0.0 {
        let std_normal = NormalSpec::new(0.0, 1.0)?;
        let n = records.len() as f64;
        type Channel = (fn(&ImRecord) -> f64, fn(&mut ImRecord) -> &mut f64);
        let channels: [Channel; 5] = [
            (|r| r.y_ed, |r| &mut r.y_ed),
            (|r| r.y_eq, |r| &mut r.y_eq),
            (|r| r.y_omega, |r| &mut r.y_omega),
            (|r| r.y_id, |r| &mut r.y_id),
            (|r| r.y_iq, |r| &mut r.y_iq),
        ];
        for (get, get_mut) in channels {
            let rms = (records.iter().map(|r| get(r) * get(r)).sum::<f64>() / n).sqrt();
            let sigma = sigma_rel * rms;
            if sigma == 0.0 {
                continue;
            }
            for r in &mut records {
                *get_mut(r) += sigma * sample_normal(&std_normal, rng);
            }
        }
    }
    ImDataset::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::im::im_residuals;

    fn bench_coeffs() -> ImCoeffs {
        derived_coeffs(&ImPhysical::benchmark())
    }

    #[test]
    fn equilibrium_zeroes_the_dynamics() {
        let c = bench_coeffs();
        let (ed, eq, w) = im_equilibrium(&c, 1.0, 0.0).unwrap();
        let (ded, deq, dw) = rhs(&c, ed, eq, w, 1.0, 0.0);
        assert!(ded.abs() < 1e-10 && deq.abs() < 1e-10 && dw.abs() < 1e-10);
        assert!((ed - (-0.5345)).abs() < 2e-3, "ed {ed}");
        assert!((eq - 0.7460).abs() < 2e-3, "eq {eq}");
        assert!((w - 0.9795).abs() < 2e-3, "w {w}");
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_integrator() {
        let phys = ImPhysical::benchmark();
        let init = im_equilibrium(&bench_coeffs(), 1.0, 0.0).unwrap();
        let inputs = vec![(1.0, 0.0); 101];
        let traj = simulate_im(&phys, &inputs, 1e-3, init).unwrap();
        let last = traj.records.last().unwrap();
        assert!((last.ed - init.0).abs() < 1e-9);
        assert!((last.eq - init.1).abs() < 1e-9);
        assert!((last.omega - init.2).abs() < 1e-9);
    }

    #[test]
    fn integrator_shows_fourth_order_convergence() {
        let phys = ImPhysical::benchmark();
        let eqm = im_equilibrium(&bench_coeffs(), 1.0, 0.0).unwrap();
        // start away from equilibrium so the error is not identically zero
        let init = (eqm.0 + 0.05, eqm.1 - 0.05, eqm.2);
        let horizon = 0.2;
        let run = |dt: f64| {
            let n = (horizon / dt).round() as usize + 1;
            let traj = simulate_im(&phys, &vec![(1.0, 0.0); n], dt, init).unwrap();
            let r = traj.records.last().unwrap();
            (r.ed, r.eq, r.omega)
        };
        let reference = run(1.25e-4);
        let err = |dt: f64| {
            let (a, b, c) = run(dt);
            (a - reference.0)
                .abs()
                .max((b - reference.1).abs())
                .max((c - reference.2).abs())
        };
        let e_coarse = err(2e-3);
        let e_fine = err(1e-3);
        assert!(
            e_coarse / e_fine > 8.0,
            "expected ~16x error drop, got {} / {}",
            e_coarse,
            e_fine
        );
    }

    #[test]
    fn records_satisfy_the_regression_model_exactly() {
        let phys = ImPhysical::benchmark();
        let c = bench_coeffs();
        let init = im_equilibrium(&c, 1.0, 0.0).unwrap();
        let inputs = step_dip_inputs(501, 250, 0.9);
        let traj = simulate_im(&phys, &inputs, 1e-3, init).unwrap();
        assert_eq!(traj.records.len(), 501);
        for rec in &traj.records {
            for r in im_residuals(&c, rec) {
                assert!(r.abs() < 1e-13, "residual {r}");
            }
        }
        // the dip actually perturbs the trajectory
        let w_end = traj.records.last().unwrap().omega;
        assert!((w_end - init.2).abs() > 1e-3);
    }

    #[test]
    fn inputs_are_recorded_verbatim() {
        let inputs = step_dip_inputs(12, 5, 0.8);
        let traj = simulate_im(&ImPhysical::benchmark(), &inputs, 1e-3, (0.0, 0.0, 1.0)).unwrap();
        assert_eq!(traj.records.len(), 12);
        assert_eq!(traj.records[4].ud, 1.0);
        assert_eq!(traj.records[5].ud, 0.8);
        assert_eq!(traj.records[5].uq, 0.0);
    }

    #[test]
    fn default_inputs_cover_ten_seconds() {
        let inputs = default_im_inputs();
        assert_eq!(inputs.len(), 10_001);
        assert_eq!(inputs[4_999], (1.0, 0.0));
        assert_eq!(inputs[5_000], (0.9, 0.0));
    }

    #[test]
    fn noise_scales_with_channel_rms() {
        let phys = ImPhysical::benchmark();
        let init = im_equilibrium(&bench_coeffs(), 1.0, 0.0).unwrap();
        let traj = simulate_im(&phys, &step_dip_inputs(2001, 1000, 0.9), 1e-3, init).unwrap();

        let exact = add_im_noise(&traj, 0.0, &mut RngState::new(1)).unwrap();
        for (a, b) in exact.records().iter().zip(&traj.records) {
            assert_eq!(a.y_id, b.y_id);
            assert_eq!(a.y_ed, b.y_ed);
        }

        let noisy = add_im_noise(&traj, 0.05, &mut RngState::new(1)).unwrap();
        let n = traj.records.len() as f64;
        let rms_id = (traj.records.iter().map(|r| r.y_id * r.y_id).sum::<f64>() / n).sqrt();
        let dev = (noisy
            .records()
            .iter()
            .zip(&traj.records)
            .map(|(a, b)| (a.y_id - b.y_id).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let target = 0.05 * rms_id;
        assert!(
            (dev - target).abs() < 0.3 * target,
            "noise std {dev} vs target {target}"
        );

        assert!(add_im_noise(&traj, -0.01, &mut RngState::new(1)).is_err());
    }

    #[test]
    fn noise_is_reproducible() {
        let phys = ImPhysical::benchmark();
        let traj = simulate_im(&phys, &step_dip_inputs(64, 32, 0.9), 1e-3, (0.1, 0.2, 1.0)).unwrap();
        let a = add_im_noise(&traj, 0.05, &mut RngState::new(9)).unwrap();
        let b = add_im_noise(&traj, 0.05, &mut RngState::new(9)).unwrap();
        for (ra, rb) in a.records().iter().zip(b.records()) {
            assert_eq!(ra.y_omega, rb.y_omega);
            assert_eq!(ra.y_iq, rb.y_iq);
        }
    }
}
