//! Compactly supported kernels `G` on `[A, B]` with `int G = 1` and vanishing
//! moments `int u^j G(u) du = 0` for `j = 1..=k`.
//!
//! Every built-in kernel is a polynomial on its support, so moments are exact
//! under Gauss-Legendre quadrature of sufficient degree. Integrals of
//! `|G|^alpha` are not smooth at the zeros of `G`; those are computed
//! piecewise between the isolated roots.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_legendre, integrate_adaptive};

/// Tolerance used to certify the moment conditions.
pub const MOMENT_TOLERANCE: f64 = 1e-10;
const ALPHA_QUAD_TOL: f64 = 1e-14;
const ROOT_SCAN_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Uniform,
    Epanechnikov,
    /// Degree-`k` polynomial on `[-1, 1]` solved from the moment conditions.
    Polynomial,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Uniform => "uniform",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(KernelFamily::Uniform),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "polynomial" | "polynomial_order_k" => Ok(KernelFamily::Polynomial),
            other => Err(Error::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// `int (G_+)^alpha`, `int (G_-)^alpha` and `int |G|^alpha` over the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaIntegrals {
    pub alpha: f64,
    pub abs: f64,
    pub pos: f64,
    pub neg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    order: usize,
    lower: f64,
    upper: f64,
    /// Power-basis coefficients on the support, lowest degree first.
    coeffs: Vec<f64>,
    /// `M_j` for `j = 0..=order + 1`.
    moments: Vec<f64>,
    abs_next_moment: f64,
    roots: Vec<f64>,
}

/// Builds and certifies a kernel of order `k` on `[-1, 1]`.
pub fn make_kernel(k: usize, family: KernelFamily) -> Result<Kernel> {
    let coeffs = match family {
        KernelFamily::Uniform if k <= 1 => vec![0.5],
        KernelFamily::Epanechnikov if k <= 1 => vec![0.75, 0.0, -0.75],
        KernelFamily::Uniform | KernelFamily::Epanechnikov => {
            return Err(Error::InfeasibleOrder { family: family.name(), order: k })
        }
        KernelFamily::Polynomial => solve_moment_system(k)?,
    };
    Kernel::from_polynomial(family, k, -1.0, 1.0, coeffs)
}

/// Coefficients of the degree-`k` polynomial on `[-1, 1]` with `M_0 = 1` and
/// `M_1 = .. = M_k = 0`.
fn solve_moment_system(k: usize) -> Result<Vec<f64>> {
    let n = k + 1;
    let hankel = DMatrix::from_fn(n, n, |j, l| {
        let p = j + l;
        if p % 2 == 0 {
            2.0 / (p + 1) as f64
        } else {
            0.0
        }
    });
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    let sol = hankel.lu().solve(&rhs).ok_or(Error::SingularSystem(k))?;
    if sol.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularSystem(k));
    }
    Ok(sol.iter().copied().collect())
}

impl Kernel {
    /// Wraps a polynomial kernel on `[lower, upper]` and certifies that it has
    /// order `order`.
    pub fn from_polynomial(
        family: KernelFamily,
        order: usize,
        lower: f64,
        upper: f64,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if !(lower < 0.0 && 0.0 < upper) {
            return Err(domain(format!("support [{lower}, {upper}] must contain 0 in its interior")));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain("kernel coefficients must be finite and nonempty"));
        }
        let mut kernel = Kernel {
            family,
            order,
            lower,
            upper,
            coeffs,
            moments: Vec::new(),
            abs_next_moment: 0.0,
            roots: Vec::new(),
        };
        kernel.moments = (0..=order + 1).map(|j| kernel.moment(j)).collect();
        kernel.roots = kernel.isolate_roots()?;
        let next = order + 1;
        let abs_next = kernel.piecewise_integral(lower, upper, |u| (kernel.eval(u) * u.powi(next as i32)).abs())?;
        kernel.abs_next_moment = abs_next;
        kernel.certify()?;
        Ok(kernel)
    }

    fn certify(&self) -> Result<()> {
        let m0 = self.moments[0];
        if (m0 - 1.0).abs() >= MOMENT_TOLERANCE {
            return Err(Error::Certification(format!("M_0 = {m0}, expected 1")));
        }
        for j in 1..=self.order {
            let mj = self.moments[j];
            if mj.abs() >= MOMENT_TOLERANCE {
                return Err(Error::Certification(format!("M_{j} = {mj}, expected 0")));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Support endpoints `(A, B)`.
    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Zeros of `G` strictly inside the support.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u < self.lower || u > self.upper {
            0.0
        } else {
            self.poly(u)
        }
    }

    #[inline]
    fn poly(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `int_A^B u^j G(u) du` by a Gauss-Legendre rule exact for the integrand.
    pub fn moment(&self, j: usize) -> f64 {
        let nodes = (j + self.degree()) / 2 + 2;
        gauss_legendre(self.lower, self.upper, nodes, |u| u.powi(j as i32) * self.poly(u))
    }

    /// Cached `M_0 ..= M_{k+1}`.
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// `int u^{k+1} G(u) du`, the moment driving the leading bias term.
    pub fn next_moment(&self) -> f64 {
        self.moments[self.order + 1]
    }

    /// `int |G(u) u^{k+1}| du`.
    pub fn abs_next_moment(&self) -> f64 {
        self.abs_next_moment
    }

    /// Smallest value of `G` on a dense scan of the support.
    pub fn min_value(&self) -> f64 {
        let mut min = self.poly(self.lower).min(self.poly(self.upper));
        for &r in &self.roots {
            min = min.min(self.poly(r));
        }
        for i in 0..=ROOT_SCAN_POINTS {
            min = min.min(self.poly(self.scan_point(i)));
        }
        min
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= 0.0
    }

    fn scan_point(&self, i: usize) -> f64 {
        self.lower + (self.upper - self.lower) * i as f64 / ROOT_SCAN_POINTS as f64
    }

    fn isolate_roots(&self) -> Result<Vec<f64>> {
        let mut roots = Vec::new();
        let mut prev_u = self.lower;
        let mut prev = self.poly(prev_u);
        for i in 1..=ROOT_SCAN_POINTS {
            let u = self.scan_point(i);
            let g = self.poly(u);
            if !g.is_finite() {
                return Err(Error::RootIsolation(format!("kernel is not finite at u = {u}")));
            }
            if g == 0.0 && i < ROOT_SCAN_POINTS {
                roots.push(u);
            } else if prev != 0.0 && g != 0.0 && prev.signum() != g.signum() {
                roots.push(self.bisect(prev_u, u)?);
            }
            prev_u = u;
            prev = g;
        }
        Ok(roots)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let sign_lo = self.poly(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            let g = self.poly(mid);
            if g == 0.0 {
                return Ok(mid);
            }
            if g.signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::RootIsolation(format!("bisection did not converge in [{lo}, {hi}]")))
    }

    /// Integral over `[lo, hi]` split at the support endpoints and at the roots of `G`.
    fn piecewise_integral<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> Result<f64> {
        let mut cuts: Vec<f64> = std::iter::once(lo)
            .chain([self.lower, self.upper])
            .chain(self.roots.iter().copied())
            .chain(std::iter::once(hi))
            .filter(|&c| c >= lo && c <= hi)
            .collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        cuts.windows(2).map(|w| integrate_adaptive(w[0], w[1], ALPHA_QUAD_TOL, &f)).sum()
    }

    /// `int (G_+)^alpha`, `int (G_-)^alpha`, `int |G|^alpha` for `1 < alpha <= 2`.
    pub fn alpha_integrals(&self, alpha: f64) -> Result<AlphaIntegrals> {
        self.alpha_integrals_on(alpha, self.lower, self.upper)
    }

    /// The same integrals taken over an arbitrary interval `[lo, hi]`.
    pub fn alpha_integrals_on(&self, alpha: f64, lo: f64, hi: f64) -> Result<AlphaIntegrals> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(domain(format!("alpha-integrals need 1 < alpha <= 2, got {alpha}")));
        }
        if !(lo < hi) {
            return Err(domain(format!("empty interval [{lo}, {hi}]")));
        }
        let pos = self.piecewise_integral(lo, hi, |u| self.eval(u).max(0.0).powf(alpha))?;
        let neg = self.piecewise_integral(lo, hi, |u| (-self.eval(u)).max(0.0).powf(alpha))?;
        let abs = self.piecewise_integral(lo, hi, |u| self.eval(u).abs().powf(alpha))?;
        Ok(AlphaIntegrals { alpha, abs, pos, neg })
    }
}
