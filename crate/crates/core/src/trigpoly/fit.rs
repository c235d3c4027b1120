use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::TrigPoly;
use crate::error::{contract, Error, Result};

/// A fitted polynomial with its root-mean-square residual on the samples.
#[derive(Debug, Clone)]
pub struct Fit {
    pub poly: TrigPoly,
    pub residual: f64,
}

/// `2π i / points` for `i = 0..points`.
pub fn equispaced_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| TAU * i as f64 / points as f64)
        .collect()
}

fn rms(residuals: impl Iterator<Item = f64>, count: usize) -> f64 {
    if count == 0 {
        return 0.0;
    }
    (residuals.map(|r| r * r).sum::<f64>() / count as f64).sqrt()
}

/// Least-squares fit over the frequencies `-degree..=degree` for arbitrary sample angles.
pub fn fit_univariate(samples: &[(f64, Complex64)], degree: usize) -> Result<Fit> {
    let width = 2 * degree + 1;
    if samples.len() < width {
        return Err(contract(format!(
            "{} samples cannot determine {width} coefficients",
            samples.len()
        )));
    }
    let mut reduced: Vec<f64> = samples.iter().map(|(t, _)| t.rem_euclid(TAU)).collect();
    reduced.sort_by(f64::total_cmp);
    for pair in reduced.windows(2) {
        if pair[1] - pair[0] < 1e-12 {
            return Err(Error::RankDeficient(format!(
                "angles coincide modulo 2π near θ = {:.6}",
                pair[0]
            )));
        }
    }
    if reduced.len() > 1 && reduced[0] + TAU - reduced[reduced.len() - 1] < 1e-12 {
        return Err(Error::RankDeficient(format!(
            "angles coincide modulo 2π near θ = {:.6}",
            reduced[0]
        )));
    }

    let d = degree as i64;
    let a = DMatrix::from_fn(samples.len(), width, |i, j| {
        Complex64::from_polar(1.0, (j as i64 - d) as f64 * samples[i].0)
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax.max(f64::MIN_POSITIVE) {
        return Err(Error::RankDeficient(format!(
            "condition {:.3e} for {} angles in [{}, {}]",
            smax / smin,
            samples.len(),
            reduced[0],
            reduced[reduced.len() - 1]
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let fitted = &a * &coef;
    let residual = rms(
        fitted.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()),
        samples.len(),
    );
    let poly = TrigPoly::univariate(coef.iter().enumerate().map(|(j, &c)| (c, j as i64 - d)));
    Ok(Fit { poly, residual })
}

/// Fit samples taken on [`equispaced_grid`]`(values.len())` by discrete Fourier analysis.
///
/// With at least `2 degree + 1` points the exponentials are orthogonal on the
/// grid, so the projection is the least-squares solution.
pub fn fit_equispaced(values: &[Complex64], degree: usize) -> Result<Fit> {
    let g = values.len();
    if g < 2 * degree + 1 {
        return Err(contract(format!(
            "{g} grid points cannot resolve degree {degree}"
        )));
    }
    let grid = equispaced_grid(g);
    let d = degree as i64;
    let poly = TrigPoly::univariate((-d..=d).map(|k| {
        let c: Complex64 = values
            .iter()
            .zip(&grid)
            .map(|(&v, &t)| v * Complex64::from_polar(1.0, -(k as f64) * t))
            .sum();
        (c / g as f64, k)
    }));
    let residual = rms(
        values
            .iter()
            .zip(&grid)
            .map(|(&v, &t)| (poly.eval1(t) - v).norm()),
        g,
    );
    Ok(Fit { poly, residual })
}

/// Bivariate fit on the tensor grid `(θ_i, θ_j)`, row-major in `i`, over
/// frequencies with `|k0| + |k1| <= degree`.
pub fn fit_equispaced_2d(values: &[Complex64], points: usize, degree: usize) -> Result<Fit> {
    if values.len() != points * points {
        return Err(contract(format!(
            "{} samples for a {points}x{points} grid",
            values.len()
        )));
    }
    if points < 2 * degree + 1 {
        return Err(contract(format!(
            "{points} grid points cannot resolve degree {degree}"
        )));
    }
    let grid = equispaced_grid(points);
    let d = degree as i64;
    let mut terms = Vec::new();
    for k0 in -d..=d {
        let rem = d - k0.abs();
        for k1 in -rem..=rem {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &t0) in grid.iter().enumerate() {
                for (j, &t1) in grid.iter().enumerate() {
                    let phase = -(k0 as f64) * t0 - (k1 as f64) * t1;
                    acc += values[i * points + j] * Complex64::from_polar(1.0, phase);
                }
            }
            terms.push((acc / (points * points) as f64, vec![k0, k1]));
        }
    }
    let poly = TrigPoly::new(2, terms)?;
    let mut sq = Vec::with_capacity(values.len());
    for (i, &t0) in grid.iter().enumerate() {
        for (j, &t1) in grid.iter().enumerate() {
            sq.push((poly.evaluate(&[t0, t1])? - values[i * points + j]).norm());
        }
    }
    let residual = rms(sq.into_iter(), values.len());
    Ok(Fit { poly, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cosine_from_three_points() {
        let samples: Vec<_> = equispaced_grid(3)
            .into_iter()
            .map(|t| (t, c(t.cos())))
            .collect();
        let fit = fit_univariate(&samples, 1).unwrap();
        assert!(fit.residual <= 1e-12);
        assert!((fit.poly.coefficient(&[1]) - c(0.5)).norm() < 1e-12);
        assert!((fit.poly.coefficient(&[-1]) - c(0.5)).norm() < 1e-12);
        assert!(fit.poly.coefficient(&[0]).norm() < 1e-12);

        let values: Vec<_> = equispaced_grid(3).into_iter().map(|t| c(t.cos())).collect();
        let fast = fit_equispaced(&values, 1).unwrap();
        assert!((fast.poly.coefficient(&[1]) - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn second_harmonic_is_orthogonal_to_degree_one() {
        // e^{2iθ} projects to zero on span{e^{-iθ}, 1, e^{iθ}}: the residual is its full RMS, 1.
        let samples: Vec<_> = equispaced_grid(16)
            .into_iter()
            .map(|t| (t, Complex64::from_polar(1.0, 2.0 * t)))
            .collect();
        let fit = fit_univariate(&samples, 1).unwrap();
        assert!(fit.residual > 0.1);
        assert!((fit.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_samples_fit_zero() {
        let samples: Vec<_> = equispaced_grid(5)
            .into_iter()
            .map(|t| (t, c(0.0)))
            .collect();
        let fit = fit_univariate(&samples, 2).unwrap();
        assert_eq!(fit.residual, 0.0);
        assert!(fit.poly.pruned(0.0).is_zero());
    }

    #[test]
    fn duplicate_angles_are_rank_deficient() {
        let samples = vec![(0.1, c(1.0)), (0.1 + TAU, c(1.0)), (2.0, c(0.0))];
        match fit_univariate(&samples, 1) {
            Err(Error::RankDeficient(msg)) => assert!(msg.contains("0.1")),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        assert!(fit_univariate(&samples[..2], 1).is_err());
    }

    #[test]
    fn irregular_angles_fit_exactly() {
        let poly =
            TrigPoly::univariate([(Complex64::new(0.2, 0.1), -2), (c(1.0), 1), (c(-0.3), 2)]);
        let samples: Vec<_> = [0.0, 0.3, 1.1, 1.7, 2.9, 3.3, 4.0, 5.5]
            .iter()
            .map(|&t| (t, poly.eval1(t)))
            .collect();
        let fit = fit_univariate(&samples, 2).unwrap();
        assert!(fit.residual < 1e-12);
        assert!((fit.poly.coefficient(&[-2]) - Complex64::new(0.2, 0.1)).norm() < 1e-10);
    }

    #[test]
    fn bivariate_total_degree() {
        let poly = TrigPoly::new(2, [(c(1.0), vec![1, -1]), (c(0.5), vec![0, 0])]).unwrap();
        let g = 5;
        let grid = equispaced_grid(g);
        let mut values = Vec::new();
        for &a in &grid {
            for &b in &grid {
                values.push(poly.evaluate(&[a, b]).unwrap());
            }
        }
        assert!(fit_equispaced_2d(&values, g, 2).unwrap().residual < 1e-12);
        // Total degree 1 excludes the (1, -1) term.
        assert!(fit_equispaced_2d(&values, g, 1).unwrap().residual > 0.5);
    }
}
