//! Built-in linear multipliers `theta(t)` with closed-form derivatives.

use crate::error::{domain, Error, Result};

/// Highest derivative order every built-in multiplier provides analytically.
pub const MAX_DERIVATIVE_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier {
    /// `theta(t) = c`
    Constant { value: f64 },
    /// `theta(t) = a sin(b t)`
    Sine { amplitude: f64, frequency: f64 },
    /// `theta(t) = a / (1 + t^2)`
    Rational { amplitude: f64 },
}

impl Multiplier {
    pub fn constant(value: f64) -> Self {
        Multiplier::Constant { value }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Multiplier::Sine { amplitude, frequency }
    }

    pub fn rational(amplitude: f64) -> Self {
        Multiplier::Rational { amplitude }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Multiplier::Constant { .. } => "constant",
            Multiplier::Sine { .. } => "sine",
            Multiplier::Rational { .. } => "rational",
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Multiplier::Constant { value } => value,
            Multiplier::Sine { amplitude, frequency } => amplitude * (frequency * t).sin(),
            Multiplier::Rational { amplitude } => amplitude / (1.0 + t * t),
        }
    }

    pub fn max_order(&self) -> usize {
        MAX_DERIVATIVE_ORDER
    }

    /// `theta^{(order)}(t)`; order 0 is the function itself.
    pub fn derivative(&self, t: f64, order: usize) -> Result<f64> {
        if order > self.max_order() {
            return Err(Error::InsufficientSmoothness { required: order, available: self.max_order() });
        }
        if order == 0 {
            return Ok(self.eval(t));
        }
        Ok(match *self {
            Multiplier::Constant { .. } => 0.0,
            Multiplier::Sine { amplitude, frequency } => {
                let phase = frequency * t + order as f64 * std::f64::consts::FRAC_PI_2;
                amplitude * frequency.powi(order as i32) * phase.sin()
            }
            Multiplier::Rational { amplitude } => {
                let q = 1.0 + t * t;
                amplitude
                    * match order {
                        1 => -2.0 * t / (q * q),
                        2 => (6.0 * t * t - 2.0) / q.powi(3),
                        _ => 24.0 * t * (1.0 - t * t) / q.powi(4),
                    }
            }
        })
    }

    /// `int_0^t theta(s) ds` in closed form.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            Multiplier::Constant { value } => value * t,
            Multiplier::Sine { amplitude, frequency } => {
                if frequency == 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - (frequency * t).cos()) / frequency
                }
            }
            Multiplier::Rational { amplitude } => amplitude * t.atan(),
        }
    }

    /// Global bound `sup_t |theta(t)|`.
    pub fn bound(&self) -> f64 {
        match *self {
            Multiplier::Constant { value } => value.abs(),
            Multiplier::Sine { amplitude, .. } => amplitude.abs(),
            Multiplier::Rational { amplitude } => amplitude.abs(),
        }
    }

    /// Largest `|theta|` seen on a dense sampling of `[0, horizon]`.
    pub fn sampled_sup(&self, horizon: f64) -> f64 {
        const SAMPLES: usize = 10_000;
        (0..=SAMPLES).map(|i| self.eval(horizon * i as f64 / SAMPLES as f64).abs()).fold(0.0, f64::max)
    }

    /// Checks that `bound` dominates `|theta|` on `[0, horizon]`.
    pub fn check_bound(&self, bound: f64, horizon: f64) -> Result<()> {
        let sup = self.sampled_sup(horizon);
        if sup > bound * (1.0 + 1e-12) {
            return Err(domain(format!(
                "{} multiplier reaches |theta| = {sup} on [0, {horizon}], above the bound L = {bound}",
                self.name()
            )));
        }
        Ok(())
    }
}
