//! Kernel estimators of the drift product `theta(t) x_t` and of the multiplier
//! `theta(t)` itself.
//!
//! Both are left-point Riemann-Stieltjes sums of a kernel weight against the
//! increments of an observed path, so the integrand is always evaluated at the
//! start of each increment.

use crate::error::{domain, Error, Result};
use crate::kernel::Kernel;
use crate::path::{SamplePath, TimeGrid};

/// Fewest grid points a kernel window may contain.
pub const MIN_WINDOW_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    pub t: f64,
    pub value: f64,
    pub bandwidth: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierEstimate {
    pub t: f64,
    pub value: f64,
    pub event_holds: bool,
    pub bandwidth: f64,
}

fn check_window(grid: &TimeGrid, t: f64, lo: f64, hi: f64) -> Result<()> {
    let horizon = grid.horizon();
    let slack = 1e-12 * (1.0 + horizon);
    if lo < 0.0 || hi > horizon + slack || !(lo <= hi) {
        return Err(Error::WindowOutOfRange { t, lo, hi, horizon });
    }
    let found = grid.points_in(lo, hi);
    if found < MIN_WINDOW_POINTS {
        return Err(Error::Resolution { found, required: MIN_WINDOW_POINTS });
    }
    Ok(())
}

fn check_bandwidth(phi: f64) -> Result<()> {
    if phi > 0.0 && phi.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("bandwidth must be positive, got {phi}")))
    }
}

/// `sum_i weight(t_i) (v_{i+1} - v_i)` over increments starting in `[lo, hi]`.
fn weighted_increments<F: Fn(f64) -> f64>(path: &SamplePath, lo: f64, hi: f64, weight: F) -> f64 {
    let grid = path.grid();
    let v = path.values();
    let (first, last) = grid.index_span(lo, hi);
    let last = last.min(grid.n_steps() - 1);
    (first..=last).map(|i| weight(grid.time(i)) * (v[i + 1] - v[i])).sum()
}

/// `(1/phi) int_0^T G((tau - t)/phi) dX_tau`, the estimate of `theta(t) x_t`.
pub fn estimate_drift(path: &SamplePath, kernel: &Kernel, phi: f64, t: f64) -> Result<DriftEstimate> {
    check_bandwidth(phi)?;
    let (a, b) = kernel.support();
    let (lo, hi) = (t + a * phi, t + b * phi);
    check_window(path.grid(), t, lo, hi)?;
    let sum = weighted_increments(path, lo, hi, |s| kernel.eval((s - t) / phi));
    Ok(DriftEstimate { t, value: sum / phi, bandwidth: phi, window: (lo, hi) })
}

fn check_exponent_inputs(eps: Option<f64>, alpha: f64) -> Result<()> {
    if let Some(eps) = eps {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("noise level must be positive, got {eps}")));
        }
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain(format!("stability index must lie in (1, 2], got {alpha}")));
    }
    Ok(())
}

/// Bandwidth `eps^{1/(k + 2 - 1/alpha)}` balancing bias against noise for an
/// order-`k` kernel.
pub fn drift_bandwidth(eps: f64, k: usize, alpha: f64) -> Result<f64> {
    check_exponent_inputs(Some(eps), alpha)?;
    Ok(eps.powf(1.0 / (k as f64 + 2.0 - 1.0 / alpha)))
}

/// Error decay exponent `(k + 1)/(k + 2 - 1/alpha)` of the drift estimator.
pub fn drift_rate_exponent(k: usize, alpha: f64) -> Result<f64> {
    check_exponent_inputs(None, alpha)?;
    Ok((k as f64 + 1.0) / (k as f64 + 2.0 - 1.0 / alpha))
}

fn check_smoothness(alpha: f64, rho: f64) -> Result<()> {
    if !(rho > alpha - 1.0 && rho.is_finite()) {
        return Err(domain(format!("smoothness rho = {rho} must exceed alpha - 1 = {}", alpha - 1.0)));
    }
    Ok(())
}

/// Bandwidth `eps^{alpha/rho}` of the multiplier estimator.
pub fn multiplier_bandwidth(eps: f64, alpha: f64, rho: f64) -> Result<f64> {
    check_exponent_inputs(Some(eps), alpha)?;
    check_smoothness(alpha, rho)?;
    Ok(eps.powf(alpha / rho))
}

/// Error decay exponent `(rho - alpha + 1)/rho` of the multiplier estimator.
pub fn multiplier_rate_exponent(alpha: f64, rho: f64) -> Result<f64> {
    check_exponent_inputs(None, alpha)?;
    check_smoothness(alpha, rho)?;
    Ok((rho - alpha + 1.0) / rho)
}

/// The transformed observation `dY = I(A_t) X_t^{-1} dX_t` together with the
/// good-event indicators `A_t = {inf_{s<=t} X_s >= x0 e^{-Lt} / 2}`.
#[derive(Debug, Clone)]
pub struct TransformedPath {
    pub y: SamplePath,
    pub indicator: Vec<bool>,
    /// `A = A_T`.
    pub event_holds: bool,
}

pub fn build_y_path(observed: &SamplePath, x0: f64, bound_l: f64) -> Result<TransformedPath> {
    if !(x0 > 0.0) {
        return Err(Error::NonPositiveInitial(x0));
    }
    if !(bound_l >= 0.0) {
        return Err(domain(format!("bound L must be nonnegative, got {bound_l}")));
    }
    let grid = *observed.grid();
    let x = observed.values();
    let mut running_min = f64::INFINITY;
    let indicator: Vec<bool> = grid
        .times()
        .zip(x)
        .map(|(t, &v)| {
            running_min = running_min.min(v);
            running_min >= 0.5 * x0 * (-bound_l * t).exp()
        })
        .collect();
    let mut y = Vec::with_capacity(grid.n_points());
    let mut acc = 0.0;
    y.push(acc);
    for i in 0..grid.n_steps() {
        if indicator[i] {
            acc += (x[i + 1] - x[i]) / x[i];
        }
        y.push(acc);
    }
    let event_holds = indicator[grid.n_steps()];
    Ok(TransformedPath { y: SamplePath::new(grid, y)?, indicator, event_holds })
}

/// `I(A) (1/phi) int_0^T G((t - s)/phi) dY_s`, the estimate of `theta(t)`.
pub fn estimate_multiplier(
    y: &SamplePath,
    event_holds: bool,
    kernel: &Kernel,
    phi: f64,
    t: f64,
) -> Result<MultiplierEstimate> {
    check_bandwidth(phi)?;
    let (a, b) = kernel.support();
    let (lo, hi) = (t - b * phi, t - a * phi);
    check_window(y.grid(), t, lo, hi)?;
    let value = if event_holds { weighted_increments(y, lo, hi, |s| kernel.eval((t - s) / phi)) / phi } else { 0.0 };
    Ok(MultiplierEstimate { t, value, event_holds, bandwidth: phi })
}
