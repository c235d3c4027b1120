//! Trigonometric polynomials in one or more angle variables, fitting from
//! samples, and the Bernstein-type bounds used for query lower bounds.

mod amplitude;
mod bounds;
mod fit;
mod poly;

pub use amplitude::{
    amplitude_polynomials, success_polynomial, FitReport, AMPLITUDE_FIT_TOL, HOLDOUT_POINTS,
};
pub use bounds::{
    bernstein_margin, degree_lower_bound, required_grid, sin_sq_gap_check, BernsteinMargin,
    DEGREE_BOUND_CONSTANT, MIN_GRID, POINTS_PER_DEGREE,
};
pub use fit::{equispaced_grid, fit_equispaced, fit_equispaced_2d, fit_univariate, Fit};
pub use poly::TrigPoly;
