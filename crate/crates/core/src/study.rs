//! Monte-Carlo studies of the estimators.
//!
//! Replicate `r` always draws its noise from stream `r` of the study seed, and
//! the same noise path is reused at every noise level of the ladder. Results
//! are gathered in replicate order, so outputs do not depend on how many
//! worker threads ran the replicates.

use std::str::FromStr;

use rayon::prelude::*;

use crate::asymptotics::{bias_constant, ks_two_sample, limit_law_sample, LimitLawSpec};
use crate::config::RawConfig;
use crate::error::{domain, Error, Result};
use crate::estimators::{
    build_y_path, drift_bandwidth, drift_rate_exponent, estimate_drift, estimate_multiplier, multiplier_bandwidth,
    multiplier_rate_exponent, MIN_WINDOW_POINTS,
};
use crate::kernel::{make_kernel, Kernel, KernelFamily};
use crate::multiplier::Multiplier;
use crate::path::{SamplePath, TimeGrid};
use crate::rng::stream_rng;
use crate::sde::{deterministic_solution, euler_path, gronwall_check, SdeConfig};
use crate::stable::simulate_levy_path;

pub const MIN_REPLICATES: usize = 100;
pub const MIN_SLOPE_POINTS: usize = 4;
const MIN_STEPS: usize = 1000;
const DEFAULT_GRONWALL_STEPS: usize = 20_000;
const DEFAULT_HORIZON: f64 = 2.0;
const DEFAULT_BAND: usize = 9;
/// Limit-law reference draws use streams from this offset on.
const REFERENCE_STREAM_OFFSET: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Consistency,
    DriftRate,
    LimitLaw,
    MultiplierRate,
    Gronwall,
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Consistency => "consistency",
            StudyKind::DriftRate => "drift-rate",
            StudyKind::LimitLaw => "limit-law",
            StudyKind::MultiplierRate => "multiplier-rate",
            StudyKind::Gronwall => "gronwall",
        }
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistency" => Ok(StudyKind::Consistency),
            "drift-rate" | "rate42" => Ok(StudyKind::DriftRate),
            "limit-law" | "dist43" => Ok(StudyKind::LimitLaw),
            "multiplier-rate" | "rate61" => Ok(StudyKind::MultiplierRate),
            "gronwall" => Ok(StudyKind::Gronwall),
            other => Err(Error::Config(format!("unknown study kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub multiplier: Multiplier,
    pub bound_l: f64,
    pub x0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kernel_family: KernelFamily,
    pub k: usize,
    pub rho: Option<f64>,
    pub bandwidth_exponent: Option<f64>,
    pub eps_list: Vec<f64>,
    pub n_reps: usize,
    pub horizon: f64,
    pub points_per_window: usize,
    pub n_steps: usize,
    pub t_eval: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
    pub ks_threshold: f64,
    pub limit_samples: usize,
    /// Non-fatal findings of validation, e.g. a bound `L` below `sup |theta|`.
    pub warnings: Vec<String>,
    kernel: Kernel,
}

impl StudyConfig {
    /// Reads and validates a study. `implied` is used when the file has no
    /// `study` key.
    pub fn from_raw(raw: &RawConfig, implied: Option<StudyKind>) -> Result<Self> {
        let kind = match raw.get::<String>("study")? {
            Some(name) => name.parse()?,
            None => implied.ok_or_else(|| Error::MissingKey("study".into()))?,
        };
        let multiplier = raw.multiplier()?;
        let x0: f64 = raw.require("x0")?;
        let alpha: f64 = raw.require("alpha")?;
        let beta: f64 = raw.get_or("beta", 0.0)?;
        let eps_list = raw.require_list("eps_list")?;
        let default_reps = if kind == StudyKind::LimitLaw { 5000 } else { 1000 };
        let n_reps: usize = raw.get_or("n_reps", default_reps)?;
        let horizon: f64 = raw.get_or("horizon", DEFAULT_HORIZON)?;
        let bound_l: f64 = raw.get_or("bound_l", multiplier.bound())?;
        let kernel_family = raw.kernel_family(KernelFamily::Epanechnikov)?;
        let default_k = if kind == StudyKind::MultiplierRate { 1 } else { 0 };
        let k: usize = raw.get_or("k", default_k)?;
        let rho: Option<f64> = raw.get("rho")?;
        let bandwidth_exponent: Option<f64> = raw.get("bandwidth_exponent")?;
        let points_per_window: usize = raw.get_or("points_per_window", MIN_WINDOW_POINTS)?;
        let explicit_steps: Option<usize> = raw.get("n_steps")?;
        let t_eval = raw.get_list("t_eval")?;
        let seed: u64 = raw.get_or("seed", 0)?;
        let default_tol = if kind == StudyKind::MultiplierRate { 0.2 } else { 0.15 };
        let tolerance: f64 = raw.get_or("tolerance", default_tol)?;
        let ks_threshold: f64 = raw.get_or("ks_threshold", 0.05)?;
        let limit_samples: usize = raw.get_or("limit_samples", n_reps)?;
        raw.reject_unused()?;

        crate::stable::check_driver_index(alpha, beta)?;
        let kernel = make_kernel(k, kernel_family)?;
        let mut warnings = Vec::new();
        if let Err(e) = multiplier.check_bound(bound_l, horizon) {
            warnings.push(e.to_string());
        }
        if n_reps < MIN_REPLICATES {
            return Err(Error::Config(format!("n_reps = {n_reps} is below the minimum {MIN_REPLICATES}")));
        }
        if eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::Config("every eps must be positive".into()));
        }
        if eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if points_per_window < MIN_WINDOW_POINTS {
            return Err(Error::Config(format!("points_per_window = {points_per_window} is below {MIN_WINDOW_POINTS}")));
        }
        if !(horizon > 0.0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        match kind {
            StudyKind::DriftRate | StudyKind::MultiplierRate if eps_list.len() < MIN_SLOPE_POINTS => {
                return Err(Error::Config(format!(
                    "slope fit needs at least {MIN_SLOPE_POINTS} noise levels, got {}",
                    eps_list.len()
                )))
            }
            StudyKind::Consistency => match bandwidth_exponent {
                None => return Err(Error::MissingKey("bandwidth_exponent".into())),
                Some(q) if !(q > 0.0 && q < 1.0) => {
                    return Err(Error::Config(format!(
                        "bandwidth_exponent q = {q}: need 0 < q < 1 so that phi -> 0 and eps/phi -> 0"
                    )))
                }
                _ => {}
            },
            StudyKind::MultiplierRate => {
                let rho = rho.ok_or_else(|| Error::MissingKey("rho".into()))?;
                multiplier_rate_exponent(alpha, rho)?;
                if !(x0 > 0.0) {
                    return Err(Error::NonPositiveInitial(x0));
                }
            }
            _ => {}
        }

        let mut cfg = StudyConfig {
            kind,
            multiplier,
            bound_l,
            x0,
            alpha,
            beta,
            kernel_family,
            k,
            rho,
            bandwidth_exponent,
            eps_list,
            n_reps,
            horizon,
            points_per_window,
            n_steps: 0,
            t_eval: Vec::new(),
            seed,
            tolerance,
            ks_threshold,
            limit_samples,
            warnings,
            kernel,
        };
        cfg.resolve_grid(explicit_steps)?;
        cfg.resolve_band(t_eval)?;
        Ok(cfg)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.horizon, self.n_steps).expect("validated grid")
    }

    fn uses_bandwidth(&self) -> bool {
        self.kind != StudyKind::Gronwall
    }

    /// Bandwidth rule of the study at noise level `eps`.
    pub fn bandwidth(&self, eps: f64) -> Result<f64> {
        match self.kind {
            StudyKind::Consistency => Ok(eps.powf(self.bandwidth_exponent.expect("validated exponent"))),
            StudyKind::DriftRate | StudyKind::LimitLaw => drift_bandwidth(eps, self.k, self.alpha),
            StudyKind::MultiplierRate => multiplier_bandwidth(eps, self.alpha, self.rho.expect("validated rho")),
            StudyKind::Gronwall => Err(domain("gronwall studies use no bandwidth")),
        }
    }

    /// Claimed decay exponent of the estimation error.
    pub fn target_exponent(&self) -> Result<f64> {
        match self.kind {
            StudyKind::DriftRate => drift_rate_exponent(self.k, self.alpha),
            StudyKind::MultiplierRate => multiplier_rate_exponent(self.alpha, self.rho.expect("validated rho")),
            _ => Err(domain(format!("{} studies have no rate exponent", self.kind.name()))),
        }
    }

    fn bandwidths(&self) -> Result<Vec<f64>> {
        self.eps_list.iter().map(|&e| self.bandwidth(e)).collect()
    }

    /// Grid fine enough that the narrowest window holds `points_per_window` points.
    fn resolve_grid(&mut self, explicit: Option<usize>) -> Result<()> {
        let required = if self.uses_bandwidth() {
            let phi_min = self.bandwidths()?.into_iter().fold(f64::INFINITY, f64::min);
            let (a, b) = self.kernel.support();
            let steps = (self.horizon * self.points_per_window as f64 / ((b - a) * phi_min)).ceil();
            if !steps.is_finite() || steps > 1e9 {
                return Err(Error::Config(format!("grid rule asks for {steps} steps")));
            }
            (steps as usize).max(MIN_STEPS)
        } else {
            2
        };
        self.n_steps = match explicit {
            Some(n) if n < required => {
                return Err(Error::Config(format!(
                    "n_steps = {n} is too coarse: the resolution rule needs at least {required}"
                )))
            }
            Some(n) => n,
            None if self.uses_bandwidth() => required,
            None => DEFAULT_GRONWALL_STEPS,
        };
        TimeGrid::new(self.horizon, self.n_steps)?;
        Ok(())
    }

    fn resolve_band(&mut self, t_eval: Option<Vec<f64>>) -> Result<()> {
        let t_eval = match t_eval {
            Some(ts) => ts,
            None if self.kind == StudyKind::LimitLaw => vec![0.5 * self.horizon],
            None => {
                let (c, d) = (0.2 * self.horizon, 0.8 * self.horizon);
                (0..DEFAULT_BAND).map(|i| c + (d - c) * i as f64 / (DEFAULT_BAND - 1) as f64).collect()
            }
        };
        if t_eval.is_empty() {
            return Err(Error::Config("t_eval is empty".into()));
        }
        if self.kind == StudyKind::LimitLaw && t_eval.len() != 1 {
            return Err(Error::Config("limit-law studies take exactly one t_eval point".into()));
        }
        if self.uses_bandwidth() {
            let phi_max = self.bandwidths()?.into_iter().fold(0.0, f64::max);
            let (a, b) = self.kernel.support();
            for &t in &t_eval {
                let (lo, hi) = match self.kind {
                    StudyKind::MultiplierRate => (t - b * phi_max, t - a * phi_max),
                    _ => (t + a * phi_max, t + b * phi_max),
                };
                if lo < 0.0 || hi > self.horizon {
                    return Err(Error::Config(format!(
                        "t = {t}: window [{lo}, {hi}] for the widest bandwidth {phi_max} leaves [0, {}]",
                        self.horizon
                    )));
                }
            }
        }
        self.t_eval = t_eval;
        Ok(())
    }

    fn sde(&self, eps: f64) -> Result<SdeConfig> {
        SdeConfig::new(self.multiplier, self.x0, eps, self.alpha, self.beta, self.grid())
    }

    fn noise_path(&self, replicate: u64) -> Result<SamplePath> {
        simulate_levy_path(self.alpha, self.beta, self.grid(), &mut stream_rng(self.seed, replicate))
    }

    /// `theta(t) x_t` with the exact noise-free solution.
    pub fn drift_truth(&self, t: f64) -> f64 {
        self.multiplier.eval(t) * self.x0 * self.multiplier.integral(t).exp()
    }

    /// Runs `per_replicate` over all replicates in parallel, in replicate order.
    fn replicates<T, F>(&self, per_replicate: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&SamplePath) -> Result<T> + Sync,
    {
        (0..self.n_reps as u64).into_par_iter().map(|r| per_replicate(&self.noise_path(r)?)).collect()
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn column<T: Copy>(table: &[Vec<T>], j: usize) -> Vec<T> {
    table.iter().map(|row| row[j]).collect()
}

/// Ordinary least squares slope of `y` on `x` and its standard error.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(domain("slope fit needs at least two paired points"));
    }
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok((slope, stderr))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub eps: f64,
    pub bandwidth: f64,
    pub median_abs_error: f64,
    pub mean_abs_error: f64,
    pub n_reps: usize,
    /// Frequency of the bad event `A^c`; multiplier studies only.
    pub event_failure_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyResult {
    pub kind: StudyKind,
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl RateStudyResult {
    pub fn slope_within_tolerance(&self) -> bool {
        (self.slope - self.target).abs() <= self.tolerance
    }

    /// Bad-event frequencies never increase as `eps` decreases and end below
    /// where they started (or are zero throughout).
    pub fn event_failures_vanish(&self) -> bool {
        let rates: Vec<f64> = self.rows.iter().filter_map(|r| r.event_failure_rate).collect();
        if rates.is_empty() {
            return true;
        }
        let nonincreasing = rates.windows(2).all(|w| w[1] <= w[0]);
        let first = rates[0];
        let last = rates[rates.len() - 1];
        nonincreasing && (last < first || (first == 0.0 && last == 0.0))
    }

    pub fn passed(&self) -> bool {
        self.slope_within_tolerance() && self.event_failures_vanish()
    }
}

/// Per-replicate error of one noise level: sup over the evaluation band of
/// the absolute estimation error, and whether the bad event occurred.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    error: f64,
    event_failed: bool,
}

fn drift_sup_error(cfg: &StudyConfig, x: &SamplePath, phi: f64) -> Result<f64> {
    cfg.t_eval.iter().try_fold(0.0_f64, |acc, &t| {
        let est = estimate_drift(x, cfg.kernel(), phi, t)?;
        Ok(acc.max((est.value - cfg.drift_truth(t)).abs()))
    })
}

fn multiplier_outcome(cfg: &StudyConfig, x: &SamplePath, phi: f64) -> Result<Outcome> {
    let tp = build_y_path(x, cfg.x0, cfg.bound_l)?;
    let error = cfg.t_eval.iter().try_fold(0.0_f64, |acc, &t| {
        let est = estimate_multiplier(&tp.y, tp.event_holds, cfg.kernel(), phi, t)?;
        Ok::<_, Error>(acc.max((est.value - cfg.multiplier.eval(t)).abs()))
    })?;
    Ok(Outcome { error, event_failed: !tp.event_holds })
}

fn ensure_kind(cfg: &StudyConfig, allowed: &[StudyKind]) -> Result<()> {
    if allowed.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(Error::Config(format!("study kind `{}` cannot run here", cfg.kind.name())))
    }
}

fn ladder_outcomes(cfg: &StudyConfig, bandwidths: &[f64]) -> Result<Vec<Vec<Outcome>>> {
    let sdes: Vec<SdeConfig> = cfg.eps_list.iter().map(|&e| cfg.sde(e)).collect::<Result<_>>()?;
    cfg.replicates(|z| {
        sdes.iter()
            .zip(bandwidths)
            .map(|(sde, &phi)| {
                let x = euler_path(sde, z)?;
                match cfg.kind {
                    StudyKind::MultiplierRate => multiplier_outcome(cfg, &x, phi),
                    _ => Ok(Outcome { error: drift_sup_error(cfg, &x, phi)?, event_failed: false }),
                }
            })
            .collect()
    })
}

/// Error-versus-noise study with a log-log slope fit of the median error.
pub fn run_rate_study(cfg: &StudyConfig) -> Result<RateStudyResult> {
    ensure_kind(cfg, &[StudyKind::DriftRate, StudyKind::MultiplierRate])?;
    let bandwidths = cfg.bandwidths()?;
    let outcomes = ladder_outcomes(cfg, &bandwidths)?;
    let multiplier_study = cfg.kind == StudyKind::MultiplierRate;
    let rows: Vec<RateRow> = cfg
        .eps_list
        .iter()
        .zip(&bandwidths)
        .enumerate()
        .map(|(j, (&eps, &phi))| {
            let col = column(&outcomes, j);
            let errors: Vec<f64> = col.iter().map(|o| o.error).collect();
            let failures = col.iter().filter(|o| o.event_failed).count();
            RateRow {
                eps,
                bandwidth: phi,
                median_abs_error: median(&errors),
                mean_abs_error: mean(&errors),
                n_reps: errors.len(),
                event_failure_rate: multiplier_study.then(|| failures as f64 / errors.len() as f64),
            }
        })
        .collect();
    let log_eps: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let log_err: Vec<f64> = rows.iter().map(|r| r.median_abs_error.ln()).collect();
    let (slope, slope_stderr) = fit_slope(&log_eps, &log_err)?;
    Ok(RateStudyResult {
        kind: cfg.kind,
        rows,
        slope,
        slope_stderr,
        target: cfg.target_exponent()?,
        tolerance: cfg.tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub eps: f64,
    pub bandwidth: f64,
    pub mean_abs_error: f64,
    pub median_abs_error: f64,
    pub n_reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// `None` for a single noise level.
    pub verdict: Option<bool>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.verdict.unwrap_or(true)
    }
}

/// Decreasing, except for at most one increase of at most `slack` (relative).
pub fn decreasing_with_one_inversion(values: &[f64], slack: f64) -> bool {
    let inversions: Vec<f64> = values.windows(2).filter(|w| w[1] >= w[0]).map(|w| w[1] / w[0] - 1.0).collect();
    inversions.len() <= 1 && inversions.iter().all(|&r| r <= slack)
}

pub fn run_consistency_study(cfg: &StudyConfig) -> Result<ConsistencyReport> {
    ensure_kind(cfg, &[StudyKind::Consistency])?;
    let bandwidths = cfg.bandwidths()?;
    let outcomes = ladder_outcomes(cfg, &bandwidths)?;
    let rows: Vec<ConsistencyRow> = cfg
        .eps_list
        .iter()
        .zip(&bandwidths)
        .enumerate()
        .map(|(j, (&eps, &phi))| {
            let errors: Vec<f64> = column(&outcomes, j).iter().map(|o| o.error).collect();
            ConsistencyRow {
                eps,
                bandwidth: phi,
                mean_abs_error: mean(&errors),
                median_abs_error: median(&errors),
                n_reps: errors.len(),
            }
        })
        .collect();
    let verdict = (rows.len() > 1).then(|| {
        let means: Vec<f64> = rows.iter().map(|r| r.mean_abs_error).collect();
        decreasing_with_one_inversion(&means, 0.10)
    });
    Ok(ConsistencyReport { rows, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistRow {
    pub eps: f64,
    pub bandwidth: f64,
    pub ks_statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistReport {
    pub rows: Vec<DistRow>,
    pub t: f64,
    pub shift: f64,
    pub limit: LimitLawSpec,
}

impl DistReport {
    pub fn decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ks_statistic < w[0].ks_statistic)
    }

    pub fn passed(&self) -> bool {
        self.decreasing() && self.rows.last().is_some_and(|r| r.pass)
    }
}

/// Compares the normalized errors `phi^{-(k+1)} (estimate - theta(t) x_t)`
/// with draws from the limit law, one KS statistic per noise level.
pub fn run_dist_check(cfg: &StudyConfig) -> Result<DistReport> {
    ensure_kind(cfg, &[StudyKind::LimitLaw])?;
    let t = cfg.t_eval[0];
    let shift = bias_constant(&cfg.multiplier, cfg.x0, cfg.kernel(), cfg.k, t)?;
    let limit = LimitLawSpec::from_kernel(cfg.kernel(), cfg.alpha, cfg.beta, shift)?;
    let reference: Vec<Vec<f64>> = (0..cfg.limit_samples as u64)
        .into_par_iter()
        .map(|r| limit_law_sample(&limit, 1, &mut stream_rng(cfg.seed, REFERENCE_STREAM_OFFSET + r)))
        .collect::<Result<_>>()?;
    let reference: Vec<f64> = reference.into_iter().flatten().collect();

    let bandwidths = cfg.bandwidths()?;
    let sdes: Vec<SdeConfig> = cfg.eps_list.iter().map(|&e| cfg.sde(e)).collect::<Result<_>>()?;
    let truth = cfg.drift_truth(t);
    let power = (cfg.k + 1) as i32;
    let normalized = cfg.replicates(|z| {
        sdes.iter()
            .zip(&bandwidths)
            .map(|(sde, &phi)| {
                let x = euler_path(sde, z)?;
                let est = estimate_drift(&x, cfg.kernel(), phi, t)?;
                Ok((est.value - truth) / phi.powi(power))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let rows = cfg
        .eps_list
        .iter()
        .zip(&bandwidths)
        .enumerate()
        .map(|(j, (&eps, &phi))| {
            let ks = ks_two_sample(&column(&normalized, j), &reference)?;
            Ok(DistRow {
                eps,
                bandwidth: phi,
                ks_statistic: ks,
                threshold: cfg.ks_threshold,
                pass: ks < cfg.ks_threshold,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DistReport { rows, t, shift, limit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallRow {
    pub eps: f64,
    pub n_reps: usize,
    pub violations: usize,
    pub worst_excess: f64,
    /// Mean over replicates of `sup_t |X_t - x_t|`.
    pub mean_sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallStudy {
    pub rows: Vec<GronwallRow>,
}

impl GronwallStudy {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.violations == 0)
    }
}

pub fn run_gronwall_study(cfg: &StudyConfig) -> Result<GronwallStudy> {
    ensure_kind(cfg, &[StudyKind::Gronwall])?;
    let limit = deterministic_solution(&cfg.multiplier, cfg.x0, cfg.grid());
    let sdes: Vec<SdeConfig> = cfg.eps_list.iter().map(|&e| cfg.sde(e)).collect::<Result<_>>()?;
    let per_rep = cfg.replicates(|z| {
        sdes.iter()
            .map(|sde| {
                let x = euler_path(sde, z)?;
                let report = gronwall_check(&x, &limit, z, cfg.bound_l, sde.eps)?;
                let sup = report.deviation.iter().copied().fold(0.0, f64::max);
                Ok((report.holds, report.worst_excess, sup))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = cfg
        .eps_list
        .iter()
        .enumerate()
        .map(|(j, &eps)| {
            let col = column(&per_rep, j);
            GronwallRow {
                eps,
                n_reps: col.len(),
                violations: col.iter().filter(|c| !c.0).count(),
                worst_excess: col.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max),
                mean_sup_deviation: mean(&col.iter().map(|c| c.2).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(GronwallStudy { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        RawConfig::parse(text).unwrap()
    }

    const BASE: &str = "multiplier = sine\nx0 = 1\nalpha = 1.5\nn_reps = 100\n";

    #[test]
    fn ols_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 0.75 * v).collect();
        let (s, se) = fit_slope(&x, &y).unwrap();
        assert!((s - 0.75).abs() < 1e-14);
        assert!(se < 1e-10);
    }

    #[test]
    fn single_noise_level_cannot_fit_slope() {
        let text = format!("{BASE}study = drift-rate\neps_list = 0.1\n");
        assert!(matches!(StudyConfig::from_raw(&raw(&text), None), Err(Error::Config(_))));
    }

    #[test]
    fn consistency_exponent_must_be_below_one() {
        let text = format!("{BASE}study = consistency\neps_list = 0.2,0.1\nbandwidth_exponent = 1\n");
        assert!(StudyConfig::from_raw(&raw(&text), None).is_err());
        let text = format!("{BASE}study = consistency\neps_list = 0.2,0.1\nbandwidth_exponent = 0.6\n");
        assert!(StudyConfig::from_raw(&raw(&text), None).is_ok());
    }

    #[test]
    fn eps_list_must_decrease() {
        let text = format!("{BASE}study = drift-rate\neps_list = 0.1,0.2,0.05,0.01\n");
        assert!(StudyConfig::from_raw(&raw(&text), None).is_err());
    }

    #[test]
    fn too_few_replicates() {
        let text = "multiplier = sine\nx0 = 1\nalpha = 1.5\nn_reps = 10\nstudy = gronwall\neps_list = 0.1\n";
        assert!(StudyConfig::from_raw(&raw(text), None).is_err());
    }

    #[test]
    fn missing_required_key() {
        let text = "multiplier = sine\nalpha = 1.5\nn_reps = 100\nstudy = gronwall\neps_list = 0.1\n";
        let err = StudyConfig::from_raw(&raw(text), None).unwrap_err();
        assert!(matches!(err, Error::MissingKey(ref k) if k == "x0"));
    }

    #[test]
    fn grid_rule_meets_resolution() {
        let text = format!("{BASE}study = drift-rate\neps_list = 0.2,0.1,0.05,0.025\n");
        let cfg = StudyConfig::from_raw(&raw(&text), None).unwrap();
        let phi = cfg.bandwidth(0.025).unwrap();
        assert!(cfg.grid().points_in(1.0 - phi, 1.0 + phi) >= MIN_WINDOW_POINTS);
        assert_eq!(cfg.t_eval.len(), 9);
        assert!((cfg.t_eval[0] - 0.4).abs() < 1e-15 && (cfg.t_eval[8] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn coarse_explicit_grid_rejected() {
        let text = format!("{BASE}study = drift-rate\neps_list = 0.2,0.1,0.05,0.025\nn_steps = 100\n");
        assert!(StudyConfig::from_raw(&raw(&text), None).is_err());
    }

    #[test]
    fn band_outside_valid_window_rejected() {
        // k = 1 at eps = 0.2 gives phi ~ 0.5, too wide for t = 0.4
        let text = format!("{BASE}study = drift-rate\nk = 1\neps_list = 0.2,0.1,0.05,0.025\n");
        assert!(StudyConfig::from_raw(&raw(&text), None).is_err());
    }

    #[test]
    fn bound_below_sup_warns() {
        let text = format!("{BASE}study = gronwall\neps_list = 0.1\nbound_l = 0.5\n");
        let cfg = StudyConfig::from_raw(&raw(&text), None).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
    }

    #[test]
    fn inversion_rule() {
        assert!(decreasing_with_one_inversion(&[4.0, 3.0, 2.0, 1.0], 0.1));
        assert!(decreasing_with_one_inversion(&[4.0, 3.0, 3.2, 1.0], 0.1));
        assert!(!decreasing_with_one_inversion(&[4.0, 3.0, 3.5, 1.0], 0.1));
        assert!(!decreasing_with_one_inversion(&[4.0, 4.1, 3.0, 3.1], 0.1));
    }

    #[test]
    fn small_rate_study_is_schedule_independent() {
        let text = format!("{BASE}study = drift-rate\neps_list = 0.2,0.1,0.05,0.025\nseed = 3\n");
        let cfg = StudyConfig::from_raw(&raw(&text), None).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_rate_study(&cfg)).unwrap();
        let b = four.install(|| run_rate_study(&cfg)).unwrap();
        assert_eq!(a, b);
    }
}
