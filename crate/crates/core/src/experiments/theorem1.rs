use serde::Serialize;

use super::algorithm::AlgorithmSpec;
use crate::error::{contract, Result};
use crate::linalg::MeasurementProjection;
use crate::trigpoly::{amplitude_polynomials, degree_lower_bound, success_polynomial};

/// Outcome of checking the lower-bound ingredients on one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub epsilon: f64,
    pub queries: usize,
    /// `T(arcsin √½)`.
    pub t_at_f1: f64,
    /// `T(arcsin √(½ - 2ε))`.
    pub t_at_f2: f64,
    pub fit_residual: f64,
    /// Effective degree of the fitted success polynomial.
    pub success_degree: usize,
    /// `T(θ₁) >= ¾` and `T(θ₂) <= ¼`.
    pub premise_met: bool,
    /// Degree bound, only evaluated when the premise holds.
    pub bound: Option<f64>,
}

impl Theorem1Report {
    /// `2 n_q >= bound`, or `None` when the premise is unmet.
    pub fn bound_satisfied(&self) -> Option<bool> {
        self.bound.map(|b| (2 * self.queries) as f64 >= b)
    }
}

/// Tolerance applied to the ¾ and ¼ thresholds.
const PREMISE_TOL: f64 = 1e-9;

/// Fit the success polynomial `T(θ)` of `spec` for the set of outcomes within
/// `ε` of ½, check that it separates `f₁(0) = ½` from `f₂(0) = ½ - 2ε`, and
/// evaluate the degree bound with constant `c`.
pub fn theorem1_ingredient_check(spec: &AlgorithmSpec, eps: f64, c: f64) -> Result<Theorem1Report> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(contract(format!("ε = {eps} outside (0, ¼)")));
    }
    if spec.phase_index_dim()? != 1 {
        return Err(contract(
            "evaluation check needs a one-point index register",
        ));
    }
    let queries = spec.query_count();
    let grid = (2 * queries + 1).next_power_of_two().max(16) * 2;
    let report = amplitude_polynomials(spec, 1, queries, grid)?;
    let kept = MeasurementProjection::from_predicate(spec.dim(), |k| {
        (spec.solution()[k] - 0.5).abs() < eps
    });
    let t = success_polynomial(&report, &kept)?;
    let theta1 = 0.5f64.sqrt().asin();
    let theta2 = (0.5 - 2.0 * eps).sqrt().asin();
    let t_at_f1 = t.eval1(theta1).re;
    let t_at_f2 = t.eval1(theta2).re;
    let premise_met = t_at_f1 >= 0.75 - PREMISE_TOL && t_at_f2 <= 0.25 + PREMISE_TOL;
    let bound = if premise_met {
        Some(degree_lower_bound(0.5 - 2.0 * eps, 2.0 * eps, c)?)
    } else {
        None
    };
    Ok(Theorem1Report {
        epsilon: eps,
        queries,
        t_at_f1,
        t_at_f2,
        fit_residual: report.fit_residual.max(report.holdout_residual),
        success_degree: t.effective_degree(1e-9),
        premise_met,
        bound,
    })
}

/// Phase queries forced by the degree bound at precision `ε`:
/// `(c/2)(√(1/(2ε)) + √(¼ - 4ε²)/(2ε))`.
pub fn phase_queries_needed(eps: f64, c: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(contract(format!("ε = {eps} outside (0, ¼)")));
    }
    Ok(c / 2.0 * ((1.0 / (2.0 * eps)).sqrt() + (0.25 - 4.0 * eps * eps).sqrt() / (2.0 * eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{evaluation_phase_algorithm, sequential_phase_algorithm};
    use crate::trigpoly::DEGREE_BOUND_CONSTANT;

    #[test]
    fn estimator_meets_premise_at_t4() {
        let spec = evaluation_phase_algorithm(4).unwrap();
        let r = theorem1_ingredient_check(&spec, 0.0625, DEGREE_BOUND_CONSTANT).unwrap();
        assert!(r.premise_met, "{r:?}");
        assert!(r.t_at_f1 > 0.99);
        assert!((r.t_at_f2 - 0.2).abs() < 0.02, "{}", r.t_at_f2);
        assert_eq!(r.bound_satisfied(), Some(true));
        assert!(r.success_degree <= 2 * r.queries);
        assert!(r.fit_residual < 1e-9);
    }

    #[test]
    fn no_queries_cannot_separate() {
        let spec = sequential_phase_algorithm(0).unwrap();
        for eps in [0.01, 0.1, 0.2] {
            let r = theorem1_ingredient_check(&spec, eps, DEGREE_BOUND_CONSTANT).unwrap();
            assert!(!r.premise_met);
            assert_eq!(r.bound_satisfied(), None);
        }
    }

    #[test]
    fn bound_arithmetic_at_eps_fifth() {
        // m = 0.1: c (√(1/0.4) + √0.09 / 0.4) = c (1.5811... + 0.75).
        let b = degree_lower_bound(0.1, 0.4, DEGREE_BOUND_CONSTANT).unwrap();
        let want = DEGREE_BOUND_CONSTANT * (2.5f64.sqrt() + 0.75);
        assert!((b - want).abs() < 1e-14);
        assert!(
            (phase_queries_needed(0.2, DEGREE_BOUND_CONSTANT).unwrap() - want / 2.0).abs() < 1e-14
        );
    }
}
