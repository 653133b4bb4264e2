//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RawConfig;
use crate::error::{Error, Result};
use crate::estimators::{build_y_path, drift_bandwidth, estimate_drift, estimate_multiplier, multiplier_bandwidth};
use crate::kernel::{make_kernel, KernelFamily};
use crate::path::TimeGrid;
use crate::report::{self, EstimateRow};
use crate::rng::stream_rng;
use crate::sde::{simulate_sde, SdeConfig};
use crate::study::{self, StudyConfig, StudyKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_ACCEPTANCE: i32 = 2;
pub const THREADS_VAR: &str = "STABLEDRIFT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "stabledrift", version, about = "Drift estimation for SDEs driven by small stable noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key of the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path of the SDE.
    Simulate {
        #[command(flatten)]
        common: StudyArgs,
        /// Also write the driving Levy path.
        #[arg(long)]
        noise_out: Option<PathBuf>,
    },
    /// Simulate one path and estimate along it.
    Estimate {
        #[command(flatten)]
        common: StudyArgs,
        /// Comma-separated evaluation times.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Print moments and alpha-integrals of a kernel.
    KernelInfo {
        #[arg(long)]
        family: KernelFamily,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error-versus-noise study with a log-log slope fit.
    RateStudy(StudyArgs),
    Consistency(StudyArgs),
    /// KS comparison of normalized errors with the limit law.
    DistCheck(StudyArgs),
    /// Check of the pathwise deviation bound.
    Gronwall(StudyArgs),
}

enum Outcome {
    Done,
    Failed(String),
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match result {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("acceptance failure: {msg}");
            EXIT_ACCEPTANCE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_VAR} = `{value}` is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

fn load(args: &StudyArgs) -> Result<RawConfig> {
    let mut raw = RawConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        raw.set("seed", seed.to_string());
    }
    Ok(raw)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load_study(args: &StudyArgs, implied: StudyKind, allowed: &[StudyKind]) -> Result<StudyConfig> {
    let cfg = StudyConfig::from_raw(&load(args)?, Some(implied))?;
    if !allowed.contains(&cfg.kind) {
        return Err(Error::Config(format!("study kind `{}` does not match this subcommand", cfg.kind.name())));
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Simulate { common, noise_out } => simulate(&common, noise_out.as_deref()),
        Command::Estimate { common, t } => estimate(&common, &t),
        Command::KernelInfo { family, order, alpha, out } => {
            let kernel = make_kernel(order, family)?;
            let ints = kernel.alpha_integrals(alpha)?;
            match out {
                Some(p) => {
                    let mut w = create(&p)?;
                    report::write_kernel_info(&mut w, &kernel, &ints)?;
                    w.flush()?;
                }
                None => report::write_kernel_info(io::stdout().lock(), &kernel, &ints)?,
            }
            Ok(Outcome::Done)
        }
        Command::RateStudy(args) => {
            let cfg = load_study(&args, StudyKind::DriftRate, &[StudyKind::DriftRate, StudyKind::MultiplierRate])?;
            let result = study::run_rate_study(&cfg)?;
            let mut w = create(&args.out)?;
            report::write_rate_study(&mut w, &result)?;
            w.flush()?;
            Ok(if result.passed() {
                Outcome::Done
            } else {
                Outcome::Failed(format!(
                    "slope {} vs target {} (tolerance {}), event failures vanish: {}",
                    result.slope,
                    result.target,
                    result.tolerance,
                    result.event_failures_vanish()
                ))
            })
        }
        Command::Consistency(args) => {
            let cfg = load_study(&args, StudyKind::Consistency, &[StudyKind::Consistency])?;
            let result = study::run_consistency_study(&cfg)?;
            let mut w = create(&args.out)?;
            report::write_consistency(&mut w, &result)?;
            w.flush()?;
            Ok(if result.passed() { Outcome::Done } else { Outcome::Failed("mean error does not decrease".into()) })
        }
        Command::DistCheck(args) => {
            let cfg = load_study(&args, StudyKind::LimitLaw, &[StudyKind::LimitLaw])?;
            let result = study::run_dist_check(&cfg)?;
            let mut w = create(&args.out)?;
            report::write_dist_check(&mut w, &result)?;
            w.flush()?;
            Ok(if result.passed() {
                Outcome::Done
            } else {
                Outcome::Failed("KS statistics do not decrease below the threshold".into())
            })
        }
        Command::Gronwall(args) => {
            let cfg = load_study(&args, StudyKind::Gronwall, &[StudyKind::Gronwall])?;
            let result = study::run_gronwall_study(&cfg)?;
            let mut w = create(&args.out)?;
            report::write_gronwall(&mut w, &result)?;
            w.flush()?;
            Ok(if result.passed() { Outcome::Done } else { Outcome::Failed("deviation bound violated".into()) })
        }
    }
}

fn sde_from(raw: &RawConfig) -> Result<SdeConfig> {
    let multiplier = raw.multiplier()?;
    let x0: f64 = raw.require("x0")?;
    let eps: f64 = raw.require("eps")?;
    let alpha: f64 = raw.require("alpha")?;
    let beta: f64 = raw.get_or("beta", 0.0)?;
    let horizon: f64 = raw.get_or("horizon", 2.0)?;
    let n_steps: usize = raw.get_or("n_steps", 20_000)?;
    SdeConfig::new(multiplier, x0, eps, alpha, beta, TimeGrid::new(horizon, n_steps)?)
}

fn simulate(args: &StudyArgs, noise_out: Option<&Path>) -> Result<Outcome> {
    let raw = load(args)?;
    let sde = sde_from(&raw)?;
    let seed: u64 = raw.get_or("seed", 0)?;
    raw.reject_unused()?;
    let (x, z) = simulate_sde(&sde, &mut stream_rng(seed, 0))?;
    let mut w = create(&args.out)?;
    x.write_csv(&mut w)?;
    w.flush()?;
    if let Some(p) = noise_out {
        let mut w = create(p)?;
        z.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(Outcome::Done)
}

fn estimate(args: &StudyArgs, times: &[f64]) -> Result<Outcome> {
    let raw = load(args)?;
    let sde = sde_from(&raw)?;
    let seed: u64 = raw.get_or("seed", 0)?;
    let estimator: String = raw.get_or("estimator", "drift".to_string())?;
    let family = raw.kernel_family(KernelFamily::Epanechnikov)?;
    let multiplier_mode = match estimator.as_str() {
        "drift" => false,
        "multiplier" => true,
        other => return Err(Error::Config(format!("unknown estimator `{other}`"))),
    };
    let k: usize = raw.get_or("k", if multiplier_mode { 1 } else { 0 })?;
    let explicit_phi: Option<f64> = raw.get("bandwidth")?;
    let rho: Option<f64> = raw.get("rho")?;
    let bound_l: f64 = raw.get_or("bound_l", sde.multiplier.bound())?;
    raw.reject_unused()?;

    let kernel = make_kernel(k, family)?;
    let phi = match explicit_phi {
        Some(phi) => phi,
        None if multiplier_mode => {
            let rho = rho.ok_or_else(|| Error::MissingKey("rho".into()))?;
            multiplier_bandwidth(sde.eps, sde.noise.alpha, rho)?
        }
        None => drift_bandwidth(sde.eps, k, sde.noise.alpha)?,
    };
    let (x, _) = simulate_sde(&sde, &mut stream_rng(seed, 0))?;
    let mut rows = Vec::with_capacity(times.len());
    if multiplier_mode {
        let tp = build_y_path(&x, sde.x0, bound_l)?;
        for &t in times {
            let est = estimate_multiplier(&tp.y, tp.event_holds, &kernel, phi, t)?;
            rows.push(EstimateRow { t, estimate: est.value, truth: sde.multiplier.eval(t), bandwidth: phi });
        }
    } else {
        for &t in times {
            let est = estimate_drift(&x, &kernel, phi, t)?;
            let truth = sde.multiplier.eval(t) * sde.x0 * sde.multiplier.integral(t).exp();
            rows.push(EstimateRow { t, estimate: est.value, truth, bandwidth: phi });
        }
    }
    let mut w = create(&args.out)?;
    report::write_estimates(&mut w, &rows)?;
    w.flush()?;
    Ok(Outcome::Done)
}
