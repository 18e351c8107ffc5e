//! Command-line interface: dataset generation, Gibbs fits, and baseline
//! benchmarks, wired together through a JSON config file plus flag overrides.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::baselines::{kf_im, kf_zip, ls_im, ls_zip, KfConfig};
use crate::chain::Chain;
use crate::datagen::{
    add_im_noise, evaluate_zip_reconstruction, generate_zip_dataset, im_equilibrium, simulate_im,
    step_dip_inputs, FeederModel, ZipExperimentConfig, DEFAULT_IM_DT,
};
use crate::diagnostics::{burn_in_check, summarize_samples, PosteriorSummary};
use crate::distributions::{GammaSpec, NormalSpec, RngState};
use crate::error::{Error, Result};
use crate::im::{derived_coeffs, gibbs_im, ImCoeffs, ImPhysical, ImPriors};
use crate::io::{
    read_im_dataset, read_zip_dataset, write_bench, write_chain, write_histogram, write_im_dataset,
    write_summaries, write_zip_dataset, BenchRow, CsvMeta,
};
use crate::zip::{gibbs_zip, ZipParams, ZipPriors};

#[derive(Debug, Parser)]
#[command(name = "bayesload", version, about = "Bayesian load-model parameter estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Total Gibbs iterations M.
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    /// Burn-in iterations m.
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    /// Noise level for data generation.
    #[arg(long, global = true)]
    pub noise: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Input dataset CSV (for fit/bench commands).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Feeder description file (defaults to the bundled 33-bus case).
    #[arg(long, global = true)]
    pub feeder: Option<PathBuf>,
    /// Short-chain profile for CI: M=5000, m=1000.
    #[arg(long, global = true)]
    pub fast: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate ZIP measurement experiments on the feeder.
    GenZip,
    /// Generate an induction-motor trajectory dataset.
    GenIm,
    /// Gibbs-sample the ZIP posterior from a dataset.
    FitZip,
    /// Gibbs-sample the induction-motor posterior from a dataset.
    FitIm,
    /// Compare Gibbs, least squares, and Kalman filter on ZIP data.
    BenchZip,
    /// Compare Gibbs, least squares, and Kalman filter on motor data.
    BenchIm,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    iters: Option<usize>,
    burn_in: Option<usize>,
    noise: Option<f64>,
    out: Option<PathBuf>,
    data: Option<PathBuf>,
    feeder: Option<PathBuf>,
    base_kv: Option<f64>,
    base_mva: Option<f64>,
    slack_voltage: Option<f64>,
    target_bus: Option<usize>,
    n_experiments: Option<usize>,
    load_factor_range: Option<(f64, f64)>,
    true_alpha: Option<(f64, f64)>,
    n_eval: Option<usize>,
    level: Option<f64>,
    bins: Option<usize>,
    im: Option<ImSection>,
    kf: Option<KfSection>,
    priors: Option<PriorsSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImSection {
    dt: Option<f64>,
    horizon: Option<f64>,
    dip: Option<f64>,
    phys: Option<PhysSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysSection {
    rs: f64,
    xs: f64,
    xm: f64,
    rr: f64,
    xr: f64,
    h: f64,
    t0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct KfSection {
    process_noise: Option<f64>,
    meas_noise: Option<f64>,
    init_cov: Option<f64>,
}

/// Normal priors are given as `[mean, precision]`, gamma priors as
/// `[shape, rate]`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorsSection {
    zip: Option<ZipPriorsSection>,
    im: Option<ImPriorsSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZipPriorsSection {
    alpha1: Option<(f64, f64)>,
    alpha2: Option<(f64, f64)>,
    tau: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImPriorsSection {
    beta1: Option<(f64, f64)>,
    beta2: Option<(f64, f64)>,
    beta3: Option<(f64, f64)>,
    alpha_b: Option<(f64, f64)>,
    alpha_c: Option<(f64, f64)>,
    tau_e: Option<(f64, f64)>,
    tau_omega: Option<(f64, f64)>,
    tau_i: Option<(f64, f64)>,
}

/// Fully resolved run settings: defaults, then config file, then the `--fast`
/// profile, then explicit flags.
#[derive(Debug)]
struct Settings {
    seed: u64,
    iters: usize,
    burn_in: usize,
    noise: Option<f64>,
    out: PathBuf,
    data: Option<PathBuf>,
    feeder: Option<PathBuf>,
    base_kv: f64,
    base_mva: f64,
    slack_voltage: f64,
    target_bus: usize,
    n_experiments: usize,
    load_factor_range: (f64, f64),
    true_alpha: (f64, f64),
    n_eval: usize,
    level: f64,
    bins: usize,
    im_dt: f64,
    im_horizon: f64,
    im_dip: f64,
    phys: ImPhysical,
    kf: KfConfig,
    zip_priors: ZipPriors,
    im_priors: ImPriors,
}

fn normal(spec: Option<(f64, f64)>, fallback: NormalSpec) -> Result<NormalSpec> {
    match spec {
        Some((mean, precision)) => {
            NormalSpec::new(mean, precision).map_err(|e| Error::Config(e.to_string()))
        }
        None => Ok(fallback),
    }
}

fn gamma(spec: Option<(f64, f64)>, fallback: GammaSpec) -> Result<GammaSpec> {
    match spec {
        Some((shape, rate)) => {
            GammaSpec::new(shape, rate).map_err(|e| Error::Config(e.to_string()))
        }
        None => Ok(fallback),
    }
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let file: ConfigFile = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let mut iters = file.iters.unwrap_or(40_000);
    let mut burn_in = file.burn_in.unwrap_or(5_000);
    if cli.fast {
        iters = 5_000;
        burn_in = 1_000;
    }
    if let Some(m) = cli.iters {
        iters = m;
    }
    if let Some(b) = cli.burn_in {
        burn_in = b;
    }
    if burn_in >= iters {
        return Err(Error::Config(format!(
            "burn-in m={burn_in} must be smaller than total iterations M={iters}"
        )));
    }

    let level = file.level.unwrap_or(0.95);
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "credible level must be in (0, 1), got {level}"
        )));
    }
    let bins = file.bins.unwrap_or(crate::diagnostics::DEFAULT_BINS);
    if bins == 0 {
        return Err(Error::Config("bins must be at least 1".into()));
    }

    let im = file.im.unwrap_or_default();
    let im_dt = im.dt.unwrap_or(DEFAULT_IM_DT);
    let im_horizon = im.horizon.unwrap_or(10.0);
    let im_dip = im.dip.unwrap_or(0.9);
    if !(im_dt > 0.0 && im_horizon > im_dt) {
        return Err(Error::Config(format!(
            "need 0 < dt < horizon, got dt={im_dt} horizon={im_horizon}"
        )));
    }
    if im_dip.is_nan() || im_dip <= 0.0 {
        return Err(Error::Config(format!(
            "dip factor must be positive, got {im_dip}"
        )));
    }
    let phys = match im.phys {
        Some(p) => ImPhysical::new(p.rs, p.xs, p.xm, p.rr, p.xr, p.h, p.t0.unwrap_or(1.0))
            .map_err(|e| Error::Config(e.to_string()))?,
        None => ImPhysical::benchmark(),
    };

    let kf_sec = file.kf.unwrap_or_default();
    let kf_default = KfConfig::default();
    let kf = KfConfig {
        process_noise: kf_sec.process_noise.unwrap_or(kf_default.process_noise),
        meas_noise: kf_sec.meas_noise.unwrap_or(kf_default.meas_noise),
        init_cov: kf_sec.init_cov.unwrap_or(kf_default.init_cov),
        init_state: Vec::new(),
    };

    let priors = file.priors.unwrap_or_default();
    let zp = priors.zip.unwrap_or_default();
    let zp_default = ZipPriors::default();
    let zip_priors = ZipPriors {
        alpha1: normal(zp.alpha1, zp_default.alpha1)?,
        alpha2: normal(zp.alpha2, zp_default.alpha2)?,
        tau: gamma(zp.tau, zp_default.tau)?,
    };
    let ip = priors.im.unwrap_or_default();
    let ip_default = ImPriors::default();
    let im_priors = ImPriors {
        beta1: normal(ip.beta1, ip_default.beta1)?,
        beta2: normal(ip.beta2, ip_default.beta2)?,
        beta3: normal(ip.beta3, ip_default.beta3)?,
        alpha_b: normal(ip.alpha_b, ip_default.alpha_b)?,
        alpha_c: normal(ip.alpha_c, ip_default.alpha_c)?,
        tau_e: gamma(ip.tau_e, ip_default.tau_e)?,
        tau_omega: gamma(ip.tau_omega, ip_default.tau_omega)?,
        tau_i: gamma(ip.tau_i, ip_default.tau_i)?,
    };

    let noise = cli.noise.or(file.noise);
    if let Some(s) = noise {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Config(format!(
                "noise must be finite and non-negative, got {s}"
            )));
        }
    }

    Ok(Settings {
        seed: cli.seed.or(file.seed).unwrap_or(1),
        iters,
        burn_in,
        noise,
        out: cli.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        data: cli.data.clone().or(file.data),
        feeder: cli.feeder.clone().or(file.feeder),
        base_kv: file.base_kv.unwrap_or(12.66),
        base_mva: file.base_mva.unwrap_or(10.0),
        slack_voltage: file.slack_voltage.unwrap_or(1.0),
        target_bus: file.target_bus.unwrap_or(18),
        n_experiments: file.n_experiments.unwrap_or(1000),
        load_factor_range: file.load_factor_range.unwrap_or((0.1, 4.5)),
        true_alpha: file.true_alpha.unwrap_or((0.25, 0.25)),
        n_eval: file.n_eval.unwrap_or(100),
        level,
        bins,
        im_dt,
        im_horizon,
        im_dip,
        phys,
        kf,
        zip_priors,
        im_priors,
    })
}

impl Settings {
    fn meta(&self) -> CsvMeta {
        CsvMeta {
            seed: self.seed,
            total: self.iters,
            burn_in: self.burn_in,
        }
    }

    fn load_feeder(&self) -> Result<FeederModel> {
        match &self.feeder {
            Some(path) => {
                FeederModel::from_file(path, self.slack_voltage, self.base_kv, self.base_mva)
            }
            None => Ok(FeederModel::ieee33()),
        }
    }

    fn zip_experiment(&self) -> ZipExperimentConfig {
        ZipExperimentConfig {
            target_bus: self.target_bus,
            true_params: ZipParams::new(self.true_alpha.0, self.true_alpha.1),
            n_experiments: self.n_experiments,
            load_factor_range: self.load_factor_range,
            noise_sigma: self.noise.unwrap_or(0.1),
        }
    }

    fn out_path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }

    fn require_data(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| Error::Config("this command needs --data <dataset.csv>".into()))
    }
}

/// Runs one parsed invocation; the binary maps the error to an exit code.
pub fn run(cli: &Cli) -> Result<()> {
    let settings = resolve(cli)?;
    match cli.cmd {
        Command::GenZip => gen_zip(&settings),
        Command::GenIm => gen_im(&settings),
        Command::FitZip => fit_zip(&settings),
        Command::FitIm => fit_im(&settings),
        Command::BenchZip => bench_zip(&settings),
        Command::BenchIm => bench_im(&settings),
    }
}

fn gen_zip(s: &Settings) -> Result<()> {
    let feeder = s.load_feeder()?;
    let cfg = s.zip_experiment();
    let mut rng = RngState::new(s.seed);
    let gen = generate_zip_dataset(&cfg, &feeder, &mut rng)?;
    let path = s.out_path("zip_data.csv")?;
    write_zip_dataset(&path, &gen.dataset, &s.meta())?;
    println!(
        "wrote {} experiments to {} (redraws {}, V0 {:.6} p.u., P0 {:.6} p.u.)",
        gen.dataset.n(),
        path.display(),
        gen.redraws,
        gen.v0,
        gen.p0_pu
    );
    Ok(())
}

fn im_inputs(s: &Settings) -> Vec<(f64, f64)> {
    let n = (s.im_horizon / s.im_dt).round() as usize + 1;
    step_dip_inputs(n, n / 2, s.im_dip)
}

fn gen_im(s: &Settings) -> Result<()> {
    let coeffs = derived_coeffs(&s.phys);
    let init = im_equilibrium(&coeffs, 1.0, 0.0)?;
    let traj = simulate_im(&s.phys, &im_inputs(s), s.im_dt, init)?;
    let mut rng = RngState::new(s.seed);
    let data = add_im_noise(&traj, s.noise.unwrap_or(0.05), &mut rng)?;
    let path = s.out_path("im_data.csv")?;
    write_im_dataset(&path, &data, &s.meta())?;
    println!(
        "wrote {} samples (dt {} s) to {}",
        data.n(),
        s.im_dt,
        path.display()
    );
    Ok(())
}

/// Summaries for every chain column plus any derived series, then chain /
/// summary / histogram exports.
fn export_fit(
    s: &Settings,
    prefix: &str,
    chain: &Chain,
    derived: &[(&str, Vec<f64>)],
) -> Result<Vec<(String, PosteriorSummary)>> {
    let mut rows: Vec<(String, PosteriorSummary)> = Vec::new();
    for (idx, name) in chain.param_names().iter().enumerate() {
        let summary = summarize_samples(&chain.post_burn_in(idx), s.level, s.bins)?;
        rows.push((name.clone(), summary));
    }
    for (name, series) in derived {
        rows.push((name.to_string(), summarize_samples(series, s.level, s.bins)?));
    }
    write_chain(&s.out_path(&format!("{prefix}_chain.csv"))?, chain)?;
    write_summaries(&s.out_path(&format!("{prefix}_summary.csv"))?, &rows, &s.meta())?;
    for (name, summary) in &rows {
        write_histogram(
            &s.out_path(&format!("{prefix}_hist_{name}.csv"))?,
            summary,
            &s.meta(),
        )?;
    }
    Ok(rows)
}

fn print_fit(rows: &[(String, PosteriorSummary)], level: f64) {
    println!(
        "{:<10} {:>14} {:>14} {:>14} {:>14}",
        "param",
        "mean",
        "std",
        format!("{:.0}% lo", level * 100.0),
        format!("{:.0}% hi", level * 100.0)
    );
    for (name, s) in rows {
        println!(
            "{:<10} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
            name, s.mean, s.std, s.ci_lo, s.ci_hi
        );
    }
}

fn report_burn_in(chain: &Chain) -> Result<()> {
    let window = (chain.kept() / 2).min(1000);
    if window == 0 {
        return Ok(());
    }
    let checks = burn_in_check(chain, window)?;
    let unstable: Vec<&str> = checks
        .iter()
        .filter(|c| !c.stable)
        .map(|c| c.param.as_str())
        .collect();
    if unstable.is_empty() {
        println!("burn-in check: stable (window {window})");
    } else {
        println!(
            "burn-in check: possible drift in {} (window {window}); consider a longer burn-in",
            unstable.join(", ")
        );
    }
    Ok(())
}

fn fit_zip(s: &Settings) -> Result<()> {
    let data = read_zip_dataset(s.require_data()?)?;
    let mut rng = RngState::new(s.seed);
    let chain = gibbs_zip(&data, &s.zip_priors, s.iters, s.burn_in, &mut rng)?;
    let a1 = chain.post_burn_in(0);
    let a2 = chain.post_burn_in(1);
    let alpha3: Vec<f64> = a1
        .iter()
        .zip(&a2)
        .map(|(x, y)| 1.0 - x - y)
        .collect();
    let rows = export_fit(s, "zip", &chain, &[("alpha3", alpha3)])?;
    println!(
        "fitted {} experiments with M={} m={} seed={}",
        data.n(),
        s.iters,
        s.burn_in,
        s.seed
    );
    print_fit(&rows, s.level);
    report_burn_in(&chain)
}

fn fit_im(s: &Settings) -> Result<()> {
    let data = read_im_dataset(s.require_data()?)?;
    let mut rng = RngState::new(s.seed);
    let chain = gibbs_im(&data, &s.im_priors, s.iters, s.burn_in, &mut rng)?;
    let rows = export_fit(s, "im", &chain, &[])?;
    println!(
        "fitted {} records with M={} m={} seed={}",
        data.n(),
        s.iters,
        s.burn_in,
        s.seed
    );
    print_fit(&rows, s.level);
    report_burn_in(&chain)
}

fn zip_posterior_means(chain: &Chain) -> ZipParams {
    ZipParams::new(chain.posterior_mean(0), chain.posterior_mean(1))
}

fn bench_zip(s: &Settings) -> Result<()> {
    let mut rng = RngState::new(s.seed);
    // external data: unknown truth, no reconstruction study
    let (data, truth, feeder) = match &s.data {
        Some(path) => (read_zip_dataset(path)?, None, None),
        None => {
            let feeder = s.load_feeder()?;
            let cfg = s.zip_experiment();
            let gen = generate_zip_dataset(&cfg, &feeder, &mut rng)?;
            (gen.dataset, Some(cfg.true_params), Some(feeder))
        }
    };

    let gibbs = {
        let mut fit_rng = RngState::new(s.seed);
        zip_posterior_means(&gibbs_zip(&data, &s.zip_priors, s.iters, s.burn_in, &mut fit_rng)?)
    };
    let ls = ls_zip(&data)?;
    let kf = kf_zip(&data, &s.kf)?;

    let mut rows = Vec::new();
    for (method, est) in [("gibbs", &gibbs), ("ls", &ls), ("kf", &kf)] {
        rows.push(BenchRow::new(method, "alpha1", est.alpha1, truth.map(|t| t.alpha1)));
        rows.push(BenchRow::new(method, "alpha2", est.alpha2, truth.map(|t| t.alpha2)));
        rows.push(BenchRow::new(method, "alpha3", est.alpha3(), truth.map(|t| t.alpha3())));
    }
    if let (Some(_), Some(feeder)) = (truth, &feeder) {
        let cfg = s.zip_experiment();
        for (method, est) in [("gibbs", &gibbs), ("ls", &ls), ("kf", &kf)] {
            let report =
                evaluate_zip_reconstruction(&cfg, est, feeder, s.n_eval, &mut rng)?;
            rows.push(BenchRow::new(method, "median_dV_pu", report.median_dv, None));
            rows.push(BenchRow::new(method, "median_dP_pu", report.median_dp, None));
        }
    }
    let path = s.out_path("bench_zip.csv")?;
    write_bench(&path, &rows, &s.meta())?;
    print_bench(&rows);
    println!("wrote {}", path.display());
    Ok(())
}

fn bench_im(s: &Settings) -> Result<()> {
    let mut rng = RngState::new(s.seed);
    let (data, truth) = match &s.data {
        Some(path) => (read_im_dataset(path)?, None),
        None => {
            let coeffs = derived_coeffs(&s.phys);
            let init = im_equilibrium(&coeffs, 1.0, 0.0)?;
            let traj = simulate_im(&s.phys, &im_inputs(s), s.im_dt, init)?;
            let data = add_im_noise(&traj, s.noise.unwrap_or(0.05), &mut rng)?;
            (data, Some(coeffs))
        }
    };

    let gibbs = {
        let mut fit_rng = RngState::new(s.seed);
        let chain = gibbs_im(&data, &s.im_priors, s.iters, s.burn_in, &mut fit_rng)?;
        ImCoeffs::new(
            chain.posterior_mean(0),
            chain.posterior_mean(1),
            chain.posterior_mean(2),
            chain.posterior_mean(3),
            chain.posterior_mean(4),
        )
    };
    let ls = ls_im(&data)?;
    let kf = kf_im(&data, &s.kf)?;

    const NAMES: [&str; 5] = ["beta1", "beta2", "beta3", "alpha_b", "alpha_c"];
    let mut rows = Vec::new();
    for (method, est) in [("gibbs", &gibbs), ("ls", &ls), ("kf", &kf)] {
        let coeffs = est.coefficients();
        for (k, name) in NAMES.iter().enumerate() {
            rows.push(BenchRow::new(
                method,
                name,
                coeffs[k],
                truth.as_ref().map(|t| t.coefficients()[k]),
            ));
        }
    }
    let path = s.out_path("bench_im.csv")?;
    write_bench(&path, &rows, &s.meta())?;
    print_bench(&rows);
    println!("wrote {}", path.display());
    Ok(())
}

fn print_bench(rows: &[BenchRow]) {
    println!(
        "{:<8} {:<14} {:>14} {:>14} {:>12}",
        "method", "param", "estimate", "truth", "error_pct"
    );
    for r in rows {
        let truth = r.truth.map_or(String::from("-"), |t| format!("{t:.6}"));
        let err = r.error_pct.map_or(String::from("-"), |e| format!("{e:.3}"));
        println!(
            "{:<8} {:<14} {:>14.6} {:>14} {:>12}",
            r.method, r.param, r.estimate, truth, err
        );
    }
}
