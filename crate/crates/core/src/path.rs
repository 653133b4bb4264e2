use std::io::Write;

use crate::error::{domain, Error, Result};

/// Uniform observation grid `t_i = i T / n` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive, got {horizon}")));
        }
        if n_steps < 2 {
            return Err(domain(format!("need at least 2 steps, got {n_steps}")));
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            self.horizon * i as f64 / self.n_steps as f64
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |i| self.time(i))
    }

    /// Index range of grid points that can fall inside `[lo, hi]`, padded by
    /// one point on each side and clamped to the grid.
    pub(crate) fn index_span(&self, lo: f64, hi: f64) -> (usize, usize) {
        let dt = self.step();
        let first = ((lo / dt).floor() as i64 - 1).max(0) as usize;
        let last = ((hi / dt).ceil() as i64 + 1).clamp(0, self.n_steps as i64) as usize;
        (first, last)
    }

    /// Number of grid points lying in the closed interval `[lo, hi]`.
    pub fn points_in(&self, lo: f64, hi: f64) -> usize {
        let (first, last) = self.index_span(lo, hi);
        (first..=last)
            .filter(|&i| {
                let t = self.time(i);
                t >= lo && t <= hi
            })
            .count()
    }
}

/// A process observed at every point of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(domain(format!("path has {} values, grid has {} points", values.len(), grid.n_points())));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.n_points()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.grid.n_steps]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Running maximum of `|value|`.
    pub fn running_abs_max(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0_f64, |m, v| {
                *m = m.max(v.abs());
                Some(*m)
            })
            .collect()
    }

    pub(crate) fn ensure_same_grid(&self, other: &SamplePath) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Writes `t,value` rows under the versioned CSV header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", crate::report::CSV_VERSION_LINE)?;
        writeln!(out, "t,value")?;
        for (t, v) in self.grid.times().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}
