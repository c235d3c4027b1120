use std::f64::consts::{FRAC_PI_2, PI};

use super::fit::equispaced_grid;
use super::TrigPoly;
use crate::error::{contract, Result};

/// Constant used for the arcsin-√ degree bound; the bound holds for this value
/// when combined with Bernstein's inequality on `t - ½`.
pub const DEGREE_BOUND_CONSTANT: f64 = 2.0 / (3.0 * PI);

/// Sup-norm sampling resolution: grid points per unit of degree.
pub const POINTS_PER_DEGREE: usize = 64;

/// Minimum sup-norm grid.
pub const MIN_GRID: usize = 256;

/// Grid size required by [`bernstein_margin`] for a given degree.
pub fn required_grid(degree: usize) -> usize {
    (POINTS_PER_DEGREE * degree).max(MIN_GRID)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinMargin {
    /// Grid maximum of `|t'|`.
    pub max_deriv: f64,
    /// `deg t` times the grid maximum of `|t|`.
    pub bound: f64,
}

impl BernsteinMargin {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.max_deriv <= self.bound * (1.0 + rel_slack)
    }
}

/// Both sides of Bernstein's inequality sampled on an equispaced grid.
pub fn bernstein_margin(t: &TrigPoly, grid_size: usize) -> Result<BernsteinMargin> {
    let deriv = t.derivative()?;
    let need = required_grid(t.degree());
    if grid_size < need {
        return Err(contract(format!(
            "grid of {grid_size} points is below the {need} needed for degree {}",
            t.degree()
        )));
    }
    let (mut max_t, mut max_d): (f64, f64) = (0.0, 0.0);
    for theta in equispaced_grid(grid_size) {
        max_t = max_t.max(t.eval1(theta).norm());
        max_d = max_d.max(deriv.eval1(theta).norm());
    }
    Ok(BernsteinMargin {
        max_deriv: max_d,
        bound: t.degree() as f64 * max_t,
    })
}

/// `c (√(1/|Δ|) + √(m(1-m)) / |Δ|)` with `m ∈ {x, x+Δ}` farthest from ½.
pub fn degree_lower_bound(x: f64, delta: f64, c: f64) -> Result<f64> {
    let y = x + delta;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(contract(format!(
            "x = {x} and x + Δ = {y} must lie in [0, 1]"
        )));
    }
    if delta == 0.0 {
        return Err(contract("Δ must be nonzero"));
    }
    let m = if (x - 0.5).abs() >= (y - 0.5).abs() {
        x
    } else {
        y
    };
    let d = delta.abs();
    Ok(c * ((1.0 / d).sqrt() + (m * (1.0 - m)).sqrt() / d))
}

/// `(2/π)|φ - ψ| <= √(2|sin²φ - sin²ψ|)`, with absolute slack `1e-12`.
pub fn sin_sq_gap_check(phi: f64, psi: f64) -> Result<bool> {
    for a in [phi, psi] {
        if !(0.0..=FRAC_PI_2).contains(&a) {
            return Err(contract(format!("angle {a} outside [0, π/2]")));
        }
    }
    let lhs = 2.0 / PI * (phi - psi).abs();
    let rhs = (2.0 * (phi.sin().powi(2) - psi.sin().powi(2)).abs()).sqrt();
    Ok(lhs <= rhs + 1e-12)
}
