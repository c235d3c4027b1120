use std::f64::consts::TAU;

use num_complex::Complex64;

use super::fit::{equispaced_grid, fit_equispaced, fit_equispaced_2d};
use super::TrigPoly;
use crate::error::{contract, Error, Result};
use crate::experiments::{run_with_angles, AlgorithmSpec};
use crate::linalg::MeasurementProjection;

/// Residual above which a fit at degree `>= n_q` is reported as a failure.
pub const AMPLITUDE_FIT_TOL: f64 = 1e-6;

/// Off-grid points used to cross-check a fit.
pub const HOLDOUT_POINTS: usize = 16;

/// Polynomials fitted to every output amplitude of a phase-query algorithm.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// One polynomial per basis outcome.
    pub polys: Vec<TrigPoly>,
    /// Worst per-outcome RMS residual on the fitting grid.
    pub fit_residual: f64,
    /// Worst absolute error at the holdout points.
    pub holdout_residual: f64,
    pub degree_used: usize,
    pub n_vars: usize,
    pub queries: usize,
}

fn holdout_angle(h: usize, salt: f64) -> f64 {
    // Golden-ratio sequence; never lands on a dyadic grid point.
    let g = 0.618_033_988_749_894_9_f64;
    TAU * (salt + h as f64 * g).fract()
}

fn amplitudes(spec: &AlgorithmSpec, angles: &[f64]) -> Result<Vec<Complex64>> {
    Ok(run_with_angles(spec, angles)?.into_amplitudes())
}

/// Sample the output amplitudes of `spec` as functions of the phase-query
/// angles and fit trigonometric polynomials of the given degree.
///
/// `n_vars` is the number of query angles (1 or 2) and must equal the size
/// of the queried index register. Sampling uses `grid_points` per axis.
pub fn amplitude_polynomials(
    spec: &AlgorithmSpec,
    n_vars: usize,
    degree: usize,
    grid_points: usize,
) -> Result<FitReport> {
    let index_dim = spec.phase_index_dim()?;
    if index_dim != n_vars {
        return Err(contract(format!(
            "{n_vars} variables for an index register of dimension {index_dim}"
        )));
    }
    let grid = equispaced_grid(grid_points);
    let dim = spec.dim();
    let (polys, fit_residual) = match n_vars {
        1 => {
            let mut samples = vec![Vec::with_capacity(grid_points); dim];
            for &t in &grid {
                for (k, a) in amplitudes(spec, &[t])?.into_iter().enumerate() {
                    samples[k].push(a);
                }
            }
            collect_fits(samples.iter().map(|s| fit_equispaced(s, degree)))?
        }
        2 => {
            let mut samples = vec![Vec::with_capacity(grid_points * grid_points); dim];
            for &t0 in &grid {
                for &t1 in &grid {
                    for (k, a) in amplitudes(spec, &[t0, t1])?.into_iter().enumerate() {
                        samples[k].push(a);
                    }
                }
            }
            collect_fits(
                samples
                    .iter()
                    .map(|s| fit_equispaced_2d(s, grid_points, degree)),
            )?
        }
        _ => {
            return Err(contract(format!(
                "{n_vars} variables; only 1 or 2 are supported"
            )))
        }
    };

    let mut holdout_residual: f64 = 0.0;
    for h in 0..HOLDOUT_POINTS {
        let point: Vec<f64> = (0..n_vars)
            .map(|v| holdout_angle(h, 0.137 + 0.291 * v as f64))
            .collect();
        let exact = amplitudes(spec, &point)?;
        for (p, a) in polys.iter().zip(exact) {
            holdout_residual = holdout_residual.max((p.evaluate(&point)? - a).norm());
        }
    }

    let queries = spec.query_count();
    if degree >= queries && fit_residual.max(holdout_residual) > AMPLITUDE_FIT_TOL {
        return Err(Error::DegreeBoundViolation {
            degree,
            queries,
            residual: fit_residual.max(holdout_residual),
        });
    }
    Ok(FitReport {
        polys,
        fit_residual,
        holdout_residual,
        degree_used: degree,
        n_vars,
        queries,
    })
}

fn collect_fits(fits: impl Iterator<Item = Result<super::Fit>>) -> Result<(Vec<TrigPoly>, f64)> {
    let mut polys = Vec::new();
    let mut worst: f64 = 0.0;
    for fit in fits {
        let fit = fit?;
        worst = worst.max(fit.residual);
        polys.push(fit.poly);
    }
    Ok((polys, worst))
}

/// `Σ_{k ∈ kept} |T_k|²`, the probability of landing in `kept`.
pub fn success_polynomial(report: &FitReport, kept: &MeasurementProjection) -> Result<TrigPoly> {
    let mut acc = TrigPoly::zero(report.n_vars);
    for &k in kept.kept() {
        let p = report.polys.get(k).ok_or_else(|| {
            contract(format!(
                "outcome {k} outside {} amplitudes",
                report.polys.len()
            ))
        })?;
        acc = acc.add(&p.norm_sqr())?;
    }
    Ok(acc)
}
