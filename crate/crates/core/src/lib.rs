//! Bayesian estimation of composite load-model parameters.
//!
//! The crate covers the full measurement-to-posterior pipeline for two load
//! models used in power-system identification:
//!
//! * a static ZIP load, `P/P₀ = α₁·v̄² + α₂·v̄ + α₃` with `Σαᵢ = 1`, whose
//!   data come from repeated power-flow solutions of a radial feeder under
//!   randomized loading ([`datagen::generate_zip_dataset`]);
//! * a third-order induction motor, whose data come from RK4 integration of
//!   the machine dynamics through a terminal-voltage step
//!   ([`datagen::simulate_im`]).
//!
//! Both posteriors are sampled with conjugate Gibbs updates ([`zip::gibbs_zip`],
//! [`im::gibbs_im`]): every coefficient has a closed-form normal conditional
//! and every noise precision a closed-form gamma conditional, so no tuning is
//! involved. [`baselines`] provides least-squares and Kalman-filter reference
//! estimators, and [`diagnostics`] turns chains into summaries, credible
//! intervals, histograms, and stationarity checks.
//!
//! ```
//! use bayesload::datagen::{generate_zip_dataset, FeederModel, ZipExperimentConfig};
//! use bayesload::distributions::RngState;
//! use bayesload::zip::{gibbs_zip, ZipPriors};
//!
//! let feeder = FeederModel::ieee33();
//! let cfg = ZipExperimentConfig { n_experiments: 50, ..ZipExperimentConfig::standard() };
//! let mut rng = RngState::new(1);
//! let data = generate_zip_dataset(&cfg, &feeder, &mut rng).unwrap().dataset;
//! let chain = gibbs_zip(&data, &ZipPriors::default(), 2_000, 500, &mut rng).unwrap();
//! let alpha1 = chain.posterior_mean(0);
//! assert!(alpha1.is_finite());
//! ```

pub mod baselines;
pub mod chain;
pub mod cli;
pub mod datagen;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod im;
pub mod io;
pub mod zip;

pub use chain::Chain;
pub use error::{Error, Result};
