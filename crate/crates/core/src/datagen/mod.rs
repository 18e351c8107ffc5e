//! Synthetic data generation: feeder power flow for the static ZIP study and
//! ODE simulation for the dynamic induction-motor study.

pub mod feeder;
pub mod im_sim;
pub mod zip_data;

pub use feeder::{power_flow, Branch, Bus, FeederModel, ZipLoad};
pub use im_sim::{
    add_im_noise, default_im_inputs, im_equilibrium, simulate_im, step_dip_inputs, ImTrajectory,
    DEFAULT_IM_DT,
};
pub use zip_data::{
    evaluate_zip_reconstruction, generate_zip_dataset, ZipExperimentConfig, ZipGenerated,
    ZipReconReport,
};
