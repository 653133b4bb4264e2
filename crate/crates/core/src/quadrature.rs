//! Gauss-Legendre rules and an adaptive bisection driver on top of them.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const PANEL_NODES: usize = 15;
const MAX_DEPTH: u32 = 60;
/// Panel tolerances stop halving at this fraction of the requested tolerance.
const TOL_FLOOR: f64 = 1.0 / (1u64 << 24) as f64;

fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(PANEL_NODES).unwrap()))
}

/// Fixed `nodes`-point Gauss-Legendre rule on `[a, b]`; exact for polynomials
/// of degree below `2 * nodes`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, nodes: usize, f: F) -> f64 {
    let nodes = NonZeroUsize::new(nodes.max(1)).unwrap();
    GaussLegendre::new(nodes).integrate(a, b, f)
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each panel is compared with the sum over its two halves; panels that
/// disagree by more than their share of the tolerance are split again.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: F) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = panel_rule();
    let whole = rule.integrate(a, b, &f);
    refine(rule, &f, a, b, whole, tol, tol * TOL_FLOOR, 0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let split = left + right;
    if (split - whole).abs() <= tol {
        return Ok(split);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { lo: a, hi: b });
    }
    let tol = (0.5 * tol).max(floor);
    Ok(refine(rule, f, a, mid, left, tol, floor, depth + 1)? + refine(rule, f, mid, b, right, tol, floor, depth + 1)?)
}
