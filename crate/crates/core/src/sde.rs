//! The observed process `dX_t = theta(t) X_t dt + eps dZ_t`, its noise-free
//! limit `x_t = x_0 exp(int_0^t theta)`, and the pathwise Gronwall bound
//! `|X_t - x_t| <= e^{Lt} eps sup_{s<=t} |Z_s|`.

use rand::Rng;

use crate::error::{domain, Result};
use crate::multiplier::Multiplier;
use crate::path::{SamplePath, TimeGrid};
use crate::stable::{check_driver_index, simulate_levy_path, StableParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub multiplier: Multiplier,
    pub x0: f64,
    pub eps: f64,
    pub noise: StableParams,
    pub grid: TimeGrid,
}

impl SdeConfig {
    /// The driving noise is standard (`sigma = 1`, `mu = 0`).
    pub fn new(multiplier: Multiplier, x0: f64, eps: f64, alpha: f64, beta: f64, grid: TimeGrid) -> Result<Self> {
        check_driver_index(alpha, beta)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(domain(format!("noise level must be nonnegative, got {eps}")));
        }
        if !x0.is_finite() {
            return Err(domain(format!("initial value must be finite, got {x0}")));
        }
        let noise = StableParams::standard(alpha, beta)?;
        Ok(Self { multiplier, x0, eps, noise, grid })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.multiplier, self.x0, eps, self.noise.alpha, self.noise.beta, self.grid)
    }
}

/// Simulates `(X, Z)` on one noise realization.
pub fn simulate_sde<R: Rng + ?Sized>(cfg: &SdeConfig, rng: &mut R) -> Result<(SamplePath, SamplePath)> {
    let z = simulate_levy_path(cfg.noise.alpha, cfg.noise.beta, cfg.grid, rng)?;
    let x = euler_path(cfg, &z)?;
    Ok((x, z))
}

/// Euler scheme `X_{i+1} = X_i + theta(t_i) X_i dt + eps (Z_{i+1} - Z_i)` driven
/// by a given noise path.
pub fn euler_path(cfg: &SdeConfig, noise: &SamplePath) -> Result<SamplePath> {
    if *noise.grid() != cfg.grid {
        return Err(crate::error::Error::GridMismatch);
    }
    let grid = cfg.grid;
    let dt = grid.step();
    let z = noise.values();
    let mut values = Vec::with_capacity(grid.n_points());
    let mut x = cfg.x0;
    values.push(x);
    for i in 0..grid.n_steps() {
        x += cfg.multiplier.eval(grid.time(i)) * x * dt + cfg.eps * (z[i + 1] - z[i]);
        values.push(x);
    }
    SamplePath::new(grid, values)
}

/// `x0 exp(int_0^{t_i} theta)` with the integral accumulated by Simpson's rule
/// on each grid cell.
pub fn deterministic_solution(multiplier: &Multiplier, x0: f64, grid: TimeGrid) -> SamplePath {
    let dt = grid.step();
    let mut values = Vec::with_capacity(grid.n_points());
    let mut integral = 0.0;
    values.push(x0);
    let mut left = multiplier.eval(0.0);
    for i in 0..grid.n_steps() {
        let (a, b) = (grid.time(i), grid.time(i + 1));
        let right = multiplier.eval(b);
        integral += dt / 6.0 * (left + 4.0 * multiplier.eval(0.5 * (a + b)) + right);
        left = right;
        values.push(x0 * integral.exp());
    }
    SamplePath::new(grid, values).expect("grid-sized path")
}

#[derive(Debug, Clone)]
pub struct GronwallReport {
    /// `|X_t - x_t|` per grid point.
    pub deviation: Vec<f64>,
    /// `e^{Lt} eps sup_{s<=t} |Z_s|` per grid point.
    pub bound: Vec<f64>,
    pub holds: bool,
    /// Largest `deviation - bound - tolerance` over the grid; nonpositive when the bound holds.
    pub worst_excess: f64,
}

/// Relative slack granted to the Euler path, `1e-6 (1 + |X_t|)`.
pub const EULER_TOLERANCE: f64 = 1e-6;

pub fn gronwall_check(
    observed: &SamplePath,
    limit: &SamplePath,
    noise: &SamplePath,
    bound_l: f64,
    eps: f64,
) -> Result<GronwallReport> {
    observed.ensure_same_grid(limit)?;
    observed.ensure_same_grid(noise)?;
    let grid = observed.grid();
    let sup_z = noise.running_abs_max();
    let mut holds = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut deviation = Vec::with_capacity(grid.n_points());
    let mut bound = Vec::with_capacity(grid.n_points());
    for (i, t) in grid.times().enumerate() {
        let x = observed.values()[i];
        let d = (x - limit.values()[i]).abs();
        let b = (bound_l * t).exp() * eps * sup_z[i];
        let excess = d - b - EULER_TOLERANCE * (1.0 + x.abs());
        holds &= excess <= 0.0;
        worst_excess = worst_excess.max(excess);
        deviation.push(d);
        bound.push(b);
    }
    Ok(GronwallReport { deviation, bound, holds, worst_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn noise_free_constant_growth() {
        let cfg = SdeConfig::new(Multiplier::constant(1.0), 2.0, 0.0, 1.5, 0.0, grid(100_000)).unwrap();
        let (x, _) = simulate_sde(&cfg, &mut stream_rng(0, 0)).unwrap();
        let exact = 2.0 * 1f64.exp();
        assert!((x.terminal() - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn drift_free_path_is_scaled_noise() {
        let cfg = SdeConfig::new(Multiplier::constant(0.0), 1.5, 0.3, 1.5, 0.2, grid(1000)).unwrap();
        let (x, z) = simulate_sde(&cfg, &mut stream_rng(1, 0)).unwrap();
        for (xi, zi) in x.values().iter().zip(z.values()) {
            assert!((xi - (1.5 + 0.3 * zi)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_solution() {
        let cfg = SdeConfig::new(Multiplier::sine(1.0, 1.0), 0.0, 0.0, 1.5, 0.0, grid(100)).unwrap();
        let (x, _) = simulate_sde(&cfg, &mut stream_rng(2, 0)).unwrap();
        assert!(x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_rejects_unit_index_and_negative_noise() {
        assert!(SdeConfig::new(Multiplier::constant(0.0), 1.0, 0.1, 1.0, 0.0, grid(10)).is_err());
        assert!(SdeConfig::new(Multiplier::constant(0.0), 1.0, -0.1, 1.5, 0.0, grid(10)).is_err());
    }

    #[test]
    fn deterministic_solution_closed_forms() {
        let g = TimeGrid::new(std::f64::consts::PI, 1000).unwrap();
        let flat = deterministic_solution(&Multiplier::constant(0.0), 3.0, g);
        assert!(flat.values().iter().all(|&v| v == 3.0));
        let grow = deterministic_solution(&Multiplier::constant(0.4), 1.0, g);
        for (t, v) in g.times().zip(grow.values()) {
            assert!((v - (0.4 * t).exp()).abs() < 1e-12 * v);
        }
        let sine = deterministic_solution(&Multiplier::sine(1.0, 1.0), 1.0, g);
        assert!((sine.terminal() - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn deterministic_solution_matches_exact_integral() {
        let m = Multiplier::rational(1.7);
        let g = TimeGrid::new(2.0, 200).unwrap();
        let x = deterministic_solution(&m, 0.5, g);
        for (t, v) in g.times().zip(x.values()) {
            let exact = 0.5 * m.integral(t).exp();
            assert!((v - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn euler_is_first_order_without_noise() {
        let m = Multiplier::sine(1.0, 1.0);
        let err = |n: usize| {
            let g = TimeGrid::new(2.0, n).unwrap();
            let cfg = SdeConfig::new(m, 1.0, 0.0, 1.5, 0.0, g).unwrap();
            let z = SamplePath::constant(g, 0.0);
            let x = euler_path(&cfg, &z).unwrap();
            let exact = deterministic_solution(&m, 1.0, g);
            x.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = err(1000) / err(2000);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn noise_enters_linearly() {
        let g = grid(2000);
        let m = Multiplier::constant(0.0);
        let lim = deterministic_solution(&m, 1.0, g);
        let one = simulate_sde(&SdeConfig::new(m, 1.0, 0.1, 1.5, 0.0, g).unwrap(), &mut stream_rng(4, 1)).unwrap().0;
        let two = simulate_sde(&SdeConfig::new(m, 1.0, 0.2, 1.5, 0.0, g).unwrap(), &mut stream_rng(4, 1)).unwrap().0;
        for i in 0..g.n_points() {
            let a = one.values()[i] - lim.values()[i];
            let b = two.values()[i] - lim.values()[i];
            assert!((b - 2.0 * a).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn gronwall_drift_free_is_tight_at_running_max() {
        let g = grid(1000);
        let m = Multiplier::constant(0.0);
        let cfg = SdeConfig::new(m, 1.0, 0.1, 1.5, 0.0, g).unwrap();
        let (x, z) = simulate_sde(&cfg, &mut stream_rng(6, 0)).unwrap();
        let lim = deterministic_solution(&m, 1.0, g);
        let report = gronwall_check(&x, &lim, &z, 0.0, 0.1).unwrap();
        assert!(report.holds);
        let sup = z.running_abs_max();
        for (i, (&zi, &si)) in z.values().iter().zip(&sup).enumerate() {
            assert!((report.deviation[i] - 0.1 * zi.abs()).abs() < 1e-12);
            if zi.abs() == si {
                assert!((report.deviation[i] - report.bound[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gronwall_without_noise_is_zero() {
        let g = grid(500);
        let m = Multiplier::constant(0.5);
        let cfg = SdeConfig::new(m, 1.0, 0.0, 1.5, 0.0, g).unwrap();
        let (x, z) = simulate_sde(&cfg, &mut stream_rng(7, 0)).unwrap();
        let report = gronwall_check(&x, &x, &z, 0.5, 0.0).unwrap();
        assert!(report.deviation.iter().chain(&report.bound).all(|&v| v == 0.0));
        assert!(report.holds);
    }

    #[test]
    fn gronwall_grid_mismatch() {
        let a = SamplePath::constant(grid(10), 0.0);
        let b = SamplePath::constant(grid(20), 0.0);
        assert!(gronwall_check(&a, &b, &a, 1.0, 0.1).is_err());
    }
}
