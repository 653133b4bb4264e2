//! Limit laws of the drift estimator, its bias constant, the time-change
//! representation of kernel-weighted stable integrals, and two-sample
//! Kolmogorov-Smirnov testing.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernel::Kernel;
use crate::multiplier::Multiplier;
use crate::path::TimeGrid;
use crate::rng::stream_rng;
use crate::stable::{check_driver_index, sample_standard_stable, simulate_levy_path};

/// `m = J^{(k+1)}(t) / (k+1)! * int G(u) u^{k+1} du` with `J(s) = theta(s) x_s`.
///
/// Derivatives of `x` follow from `x' = theta x` by the Leibniz rule, so only
/// derivatives of `theta` up to order `k + 1` are needed.
pub fn bias_constant(multiplier: &Multiplier, x0: f64, kernel: &Kernel, k: usize, t: f64) -> Result<f64> {
    let order = k + 1;
    if order > multiplier.max_order() {
        return Err(Error::InsufficientSmoothness { required: order, available: multiplier.max_order() });
    }
    let theta: Vec<f64> = (0..=order).map(|j| multiplier.derivative(t, j)).collect::<Result<_>>()?;
    let mut x = vec![x0 * multiplier.integral(t).exp()];
    for n in 0..order {
        let next = (0..=n).map(|j| binomial(n, j) * theta[j] * x[n - j]).sum();
        x.push(next);
    }
    let j_deriv: f64 = (0..=order).map(|j| binomial(order, j) * theta[j] * x[order - j]).sum();
    Ok(j_deriv / factorial(order) * kernel.moment(order))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Law of `pos_weight U_1 - neg_weight U_2 + shift` with `U_1, U_2` i.i.d.
/// `S_alpha(1, beta, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLawSpec {
    pub pos_weight: f64,
    pub neg_weight: f64,
    pub shift: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LimitLawSpec {
    /// Weights `(int G_+^alpha)^{1/alpha}` and `(int G_-^alpha)^{1/alpha}` over
    /// the kernel support.
    pub fn from_kernel(kernel: &Kernel, alpha: f64, beta: f64, shift: f64) -> Result<Self> {
        check_driver_index(alpha, beta)?;
        let ai = kernel.alpha_integrals(alpha)?;
        Ok(Self { pos_weight: ai.pos.powf(1.0 / alpha), neg_weight: ai.neg.powf(1.0 / alpha), shift, alpha, beta })
    }
}

pub fn limit_law_sample<R: Rng + ?Sized>(spec: &LimitLawSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_driver_index(spec.alpha, spec.beta)?;
    if spec.pos_weight < 0.0 || spec.neg_weight < 0.0 {
        return Err(domain("limit-law weights must be nonnegative"));
    }
    (0..n)
        .map(|_| {
            let mut v = spec.shift;
            if spec.pos_weight > 0.0 {
                v += spec.pos_weight * sample_standard_stable(spec.alpha, spec.beta, rng)?;
            }
            if spec.neg_weight > 0.0 {
                v -= spec.neg_weight * sample_standard_stable(spec.alpha, spec.beta, rng)?;
            }
            Ok(v)
        })
        .collect()
}

/// `sup_x |F_a(x) - F_b(x)|` of the two empirical distribution functions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("two-sample KS statistic"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(domain("KS samples contain NaN"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `c(level) sqrt((n + m)/(n m))` of the two-sample
/// KS statistic, `c(level) = sqrt(-ln(level / 2) / 2)`.
pub fn ks_critical_value(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Stream ids at and above this offset feed reference (representation) draws.
const REFERENCE_STREAM_OFFSET: u64 = 1 << 63;

/// Compares the discretized integral `int_0^T G((tau - t)/phi) dZ_tau` with its
/// time-change representation.
///
/// The representation is `(int_0^T |G_phi|^alpha)^{1/alpha} U` for symmetric
/// noise and `(int_0^T G_phi,+^alpha)^{1/alpha} U_1 - (int_0^T G_phi,-^alpha)^{1/alpha} U_2`
/// otherwise, where `G_phi(tau) = G((tau - t)/phi)`. Stream `r` drives the
/// `r`-th noise path; reference draws use a disjoint range of streams.
#[allow(clippy::too_many_arguments)]
pub fn time_change_check(
    kernel: &Kernel,
    phi: f64,
    t: f64,
    grid: TimeGrid,
    alpha: f64,
    beta: f64,
    n_reps: usize,
    seed: u64,
    level: f64,
) -> Result<KsReport> {
    check_driver_index(alpha, beta)?;
    if !(phi > 0.0) {
        return Err(domain(format!("bandwidth must be positive, got {phi}")));
    }
    if n_reps == 0 {
        return Err(Error::EmptyInput("time-change replicates"));
    }
    let (a, b) = kernel.support();
    let lo = a.max(-t / phi);
    let hi = b.min((grid.horizon() - t) / phi);
    let (pos, neg, abs) = if lo < hi {
        let ai = kernel.alpha_integrals_on(alpha, lo, hi)?;
        (ai.pos * phi, ai.neg * phi, ai.abs * phi)
    } else {
        (0.0, 0.0, 0.0)
    };

    let (window_lo, window_hi) = (t + a * phi, t + b * phi);
    let integrals: Vec<f64> = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let z = simulate_levy_path(alpha, beta, grid, &mut stream_rng(seed, r))?;
            let v = z.values();
            let n = grid.n_steps();
            let (first, last) = grid.index_span(window_lo.max(0.0), window_hi.min(grid.horizon()));
            Ok((first..=last.min(n - 1)).map(|i| kernel.eval((grid.time(i) - t) / phi) * (v[i + 1] - v[i])).sum())
        })
        .collect::<Result<_>>()?;

    let reference: Vec<f64> = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let rng = &mut stream_rng(seed, REFERENCE_STREAM_OFFSET + r);
            if beta == 0.0 {
                Ok(abs.powf(1.0 / alpha) * sample_standard_stable(alpha, beta, rng)?)
            } else {
                let u1 = sample_standard_stable(alpha, beta, rng)?;
                let u2 = sample_standard_stable(alpha, beta, rng)?;
                Ok(pos.powf(1.0 / alpha) * u1 - neg.powf(1.0 / alpha) * u2)
            }
        })
        .collect::<Result<_>>()?;

    let statistic = ks_two_sample(&integrals, &reference)?;
    let threshold = ks_critical_value(n_reps, n_reps, level);
    Ok(KsReport { statistic, threshold, pass: statistic < threshold })
}
