//! Stable laws `S_alpha(sigma, beta, mu)` in the characteristic-function
//! parameterization
//!
//! ```text
//! phi(u) = exp{-sigma^a |u|^a (1 - i beta sgn(u) tan(pi a / 2)) + i mu u},   a != 1
//! phi(u) = exp{-sigma |u| (1 + i beta (2/pi) sgn(u) log|u|) + i mu u},       a == 1
//! ```
//!
//! Draws use the Chambers-Mallows-Stuck transform of a uniform angle and a unit
//! exponential, written for exactly this parameterization.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Error, Result};
use crate::path::{SamplePath, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64, mu: f64) -> Result<Self> {
        check_index(alpha, beta)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("scale must be positive, got {sigma}")));
        }
        if !mu.is_finite() {
            return Err(domain(format!("location must be finite, got {mu}")));
        }
        Ok(Self { alpha, beta, sigma, mu })
    }

    /// `S_alpha(1, beta, 0)`.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }
}

fn check_index(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(domain(format!("stability index must lie in (0, 2], got {alpha}")));
    }
    if !(-1.0..=1.0).contains(&beta) {
        return Err(domain(format!("skewness must lie in [-1, 1], got {beta}")));
    }
    Ok(())
}

/// Driver regime of the SDE: `1 < alpha <= 2`, with `alpha = 2` the Gaussian case.
pub(crate) fn check_driver_index(alpha: f64, beta: f64) -> Result<()> {
    check_index(alpha, beta)?;
    if alpha <= 1.0 {
        return Err(domain(format!("driving noise needs 1 < alpha <= 2, got {alpha}")));
    }
    Ok(())
}

/// One draw from `S_alpha(1, beta, 0)`.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    check_index(alpha, beta)?;
    Ok(standard_draw(alpha, beta, rng))
}

#[inline]
fn standard_draw<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let w: f64 = rng.sample(Exp1);
    cms_transform(alpha, beta, v, w)
}

/// Chambers-Mallows-Stuck map from an angle `v` in `(-pi/2, pi/2)` and a unit
/// exponential `w` to a standard stable variate.
#[inline]
fn cms_transform(alpha: f64, beta: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        let spread = FRAC_PI_2 + beta * v;
        (spread * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / spread).ln()) / FRAC_PI_2
    } else {
        let tan_term = beta * (PI * alpha / 2.0).tan();
        let shift = tan_term.atan() / alpha;
        let scale = (1.0 + tan_term * tan_term).powf(1.0 / (2.0 * alpha));
        let arg = alpha * (v + shift);
        scale * arg.sin() / v.cos().powf(1.0 / alpha) * ((v - arg).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// One draw from `S_alpha(sigma, beta, mu)`.
pub fn sample_stable<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> Result<f64> {
    let StableParams { alpha, beta, sigma, mu } = *params;
    check_index(alpha, beta)?;
    let z = standard_draw(alpha, beta, rng);
    Ok(if alpha == 1.0 { sigma * z + beta * sigma * sigma.ln() / FRAC_PI_2 + mu } else { sigma * z + mu })
}

/// Characteristic function `E exp(i u Z)`.
pub fn stable_cf(params: &StableParams, u: f64) -> Complex64 {
    let StableParams { alpha, beta, sigma, mu } = *params;
    if u == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let sgn = u.signum();
    let au = u.abs();
    let exponent = if alpha == 1.0 {
        -sigma * au * Complex64::new(1.0, beta * sgn * au.ln() / FRAC_PI_2)
    } else {
        -(sigma * au).powf(alpha) * Complex64::new(1.0, -beta * sgn * (PI * alpha / 2.0).tan())
    };
    (exponent + Complex64::new(0.0, mu * u)).exp()
}

/// `(1/n) sum_j exp(i u x_j)`.
pub fn empirical_cf(samples: &[f64], u: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical characteristic function"));
    }
    let (re, im) = samples.iter().fold((0.0, 0.0), |(re, im), &x| {
        let (s, c) = (u * x).sin_cos();
        (re + c, im + s)
    });
    let n = samples.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// Path of the stable Levy motion with `Z_1 ~ S_alpha(1, beta, 0)`: starts at
/// zero, increments over a step `dt` are i.i.d. `S_alpha(dt^{1/alpha}, beta, 0)`.
pub fn simulate_levy_path<R: Rng + ?Sized>(alpha: f64, beta: f64, grid: TimeGrid, rng: &mut R) -> Result<SamplePath> {
    check_driver_index(alpha, beta)?;
    let scale = grid.step().powf(1.0 / alpha);
    let mut values = Vec::with_capacity(grid.n_points());
    let mut z = 0.0;
    values.push(z);
    for _ in 0..grid.n_steps() {
        z += scale * standard_draw(alpha, beta, rng);
        values.push(z);
    }
    SamplePath::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn cf_at_zero_is_one() {
        for &(a, b) in &[(1.5, 0.3), (1.0, 1.0), (2.0, 0.0), (0.7, -0.4)] {
            let p = StableParams::new(a, b, 1.3, 0.4).unwrap();
            assert_eq!(stable_cf(&p, 0.0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn cf_symmetric_is_real() {
        let p = StableParams::standard(1.5, 0.0).unwrap();
        let v = stable_cf(&p, 1.0);
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn cf_cauchy_branch() {
        let p = StableParams::standard(1.0, 1.0).unwrap();
        let phase = 2.0 * (2.0 / PI) * 2f64.ln();
        let expected = Complex64::new((-2.0f64).exp() * phase.cos(), -(-2.0f64).exp() * phase.sin());
        assert!(close(stable_cf(&p, 2.0), expected, 1e-15));
    }

    #[test]
    fn parameter_validation() {
        assert!(StableParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 1.2, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 0.0, 0.0).is_err());
        let mut rng = stream_rng(1, 0);
        assert!(sample_standard_stable(2.5, 0.0, &mut rng).is_err());
        assert!(sample_standard_stable(1.5, -1.5, &mut rng).is_err());
    }

    #[test]
    fn empirical_cf_trivial_cases() {
        assert!(empirical_cf(&[], 1.0).is_err());
        assert_eq!(empirical_cf(&[0.0], 3.7).unwrap(), Complex64::new(1.0, 0.0));
        let v = empirical_cf(&[0.8, -0.8], 1.3).unwrap();
        assert!((v.re - (1.3f64 * 0.8).cos()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn unit_scale_zero_location_reproduces_standard_stream() {
        let p = StableParams::standard(1.5, 0.0).unwrap();
        let mut r1 = stream_rng(11, 2);
        let mut r2 = stream_rng(11, 2);
        for _ in 0..1000 {
            let a = sample_stable(&p, &mut r1).unwrap();
            let b = sample_standard_stable(1.5, 0.0, &mut r2).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn gaussian_case_has_variance_two() {
        let mut rng = stream_rng(3, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_standard_stable(2.0, 0.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 2.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn location_shift() {
        let p = StableParams::new(2.0, 0.0, 1.0, 3.0).unwrap();
        let mut rng = stream_rng(5, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_stable(&p, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 0.02);
    }

    #[test]
    fn cauchy_draws_match_cf() {
        let mut rng = stream_rng(9, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_standard_stable(1.0, 0.0, &mut rng).unwrap()).collect();
        for &u in &[0.5, 1.0, 2.0] {
            let e = empirical_cf(&draws, u).unwrap();
            assert!(close(e, Complex64::new((-u).exp(), 0.0), 0.01), "u={u}: {e}");
        }
    }

    #[test]
    fn skewed_cauchy_with_scale_matches_cf() {
        let p = StableParams::new(1.0, 1.0, 2.0, 0.5).unwrap();
        let mut rng = stream_rng(10, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_stable(&p, &mut rng).unwrap()).collect();
        for &u in &[-1.0, -0.5, 0.5, 1.0] {
            let e = empirical_cf(&draws, u).unwrap();
            assert!(close(e, stable_cf(&p, u), 0.015), "u={u}: {e} vs {}", stable_cf(&p, u));
        }
    }

    #[test]
    fn scaled_draws_match_cf() {
        let p = StableParams::new(1.5, 0.0, 2.0, 0.0).unwrap();
        let mut rng = stream_rng(12, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_stable(&p, &mut rng).unwrap()).collect();
        for &u in &[-0.5, -0.25, 0.25, 0.5] {
            let e = empirical_cf(&draws, u).unwrap();
            let oracle = (-(2f64.powf(1.5)) * u.abs().powf(1.5)).exp();
            assert!(close(e, Complex64::new(oracle, 0.0), 0.015));
        }
    }

    #[test]
    fn levy_path_starts_at_zero_and_is_deterministic() {
        let grid = TimeGrid::new(1.0, 500).unwrap();
        let a = simulate_levy_path(1.5, 0.3, grid, &mut stream_rng(4, 9)).unwrap();
        let b = simulate_levy_path(1.5, 0.3, grid, &mut stream_rng(4, 9)).unwrap();
        assert_eq!(a.initial(), 0.0);
        assert_eq!(a.values().len(), 501);
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn levy_path_rejects_non_driver_index() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert!(simulate_levy_path(1.0, 0.0, grid, &mut stream_rng(0, 0)).is_err());
        assert!(simulate_levy_path(0.8, 0.0, grid, &mut stream_rng(0, 0)).is_err());
    }

    #[test]
    fn gaussian_levy_endpoint_variance() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let n = 20_000;
        let ends: Vec<f64> =
            (0..n).map(|i| simulate_levy_path(2.0, 0.0, grid, &mut stream_rng(21, i)).unwrap().terminal()).collect();
        let var = ends.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 2.0).abs() < 0.08, "variance {var}");
    }
}
