use nalgebra::DMatrix;
use num_complex::Complex64;

use super::maps::{apply_raw, to_dense, LinearMap, MAX_DENSE_DIM};
use super::state::inner;
use super::StateVector;
use crate::error::{contract, Error, Result};

/// Default absolute tolerance for orthonormality and normalization checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 20_000;

/// Largest singular value of a dense matrix.
///
/// Tall matrices are first reduced to their triangular QR factor, which has
/// the same singular values.
pub fn largest_singular_value(m: DMatrix<Complex64>) -> Result<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let m = if rows > cols { m.qr().r() } else { m };
    let svd = m
        .try_svd(false, false, SVD_EPS, SVD_MAX_ITER)
        .ok_or(Error::NoConvergence {
            iterations: SVD_MAX_ITER,
            rows,
            cols,
        })?;
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

/// Operator norm of a map of dimension at most [`MAX_DENSE_DIM`].
pub fn spectral_norm(a: &dyn LinearMap) -> Result<f64> {
    largest_singular_value(to_dense(a)?)
}

/// `‖U†U − I‖`.
pub fn unitarity_defect(u: &dyn LinearMap) -> Result<f64> {
    let m = to_dense(u)?;
    let gram = m.adjoint() * &m;
    let n = gram.nrows();
    largest_singular_value(gram - DMatrix::identity(n, n))
}

/// Matrix whose columns are `(a - b) v` for each domain vector.
fn difference_images<'a>(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    domain: impl ExactSizeIterator<Item = &'a [Complex64]>,
) -> Result<DMatrix<Complex64>> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(contract("maps being compared have different shapes"));
    }
    let cols = domain.len();
    if cols > MAX_DENSE_DIM {
        return Err(Error::Resource {
            what: "restricted domain dimension",
            requested: cols as u128,
            budget: MAX_DENSE_DIM as u128,
        });
    }
    let mut m = DMatrix::zeros(a.dim_out(), cols);
    for (j, v) in domain.enumerate() {
        let av = apply_raw(a, v)?;
        let bv = apply_raw(b, v)?;
        for (i, (x, y)) in av.into_iter().zip(bv).enumerate() {
            m[(i, j)] = x - y;
        }
    }
    Ok(m)
}

/// Operator norm of `a - b` restricted to the span of an orthonormal basis.
pub fn restricted_difference_norm(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    domain_basis: &[StateVector],
) -> Result<f64> {
    restricted_difference_norm_with_tol(a, b, domain_basis, DEFAULT_TOL)
}

pub fn restricted_difference_norm_with_tol(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    domain_basis: &[StateVector],
    tol: f64,
) -> Result<f64> {
    check_orthonormal(domain_basis, tol)?;
    let m = difference_images(a, b, domain_basis.iter().map(|v| v.amplitudes()))?;
    largest_singular_value(m)
}

/// Same as [`restricted_difference_norm`] for a set of computational basis states.
pub fn restricted_difference_norm_on_indices(
    a: &dyn LinearMap,
    b: &dyn LinearMap,
    indices: &[usize],
) -> Result<f64> {
    let vectors = basis_columns(a.dim_in(), indices)?;
    let m = difference_images(a, b, vectors.iter().map(Vec::as_slice))?;
    largest_singular_value(m)
}

/// `‖(UV)†(UV) − I‖` where `V` embeds the given basis states: how far `u` is
/// from an isometry on their span.
pub fn restricted_unitarity_defect(u: &dyn LinearMap, indices: &[usize]) -> Result<f64> {
    let vectors = basis_columns(u.dim_in(), indices)?;
    let images = vectors
        .iter()
        .map(|v| apply_raw(u, v))
        .collect::<Result<Vec<_>>>()?;
    let k = images.len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        let g = inner(&images[i], &images[j]);
        if i == j {
            g - Complex64::new(1.0, 0.0)
        } else {
            g
        }
    });
    largest_singular_value(gram)
}

fn basis_columns(dim: usize, indices: &[usize]) -> Result<Vec<Vec<Complex64>>> {
    let mut seen = std::collections::HashSet::new();
    indices
        .iter()
        .map(|&i| {
            if i >= dim {
                return Err(contract(format!("basis index {i} out of range {dim}")));
            }
            if !seen.insert(i) {
                return Err(contract(format!("basis index {i} repeated")));
            }
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] = Complex64::new(1.0, 0.0);
            Ok(v)
        })
        .collect()
}

fn check_orthonormal(basis: &[StateVector], tol: f64) -> Result<()> {
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().skip(i) {
            let g = u.inner(v)?;
            let want = if i == j { 1.0 } else { 0.0 };
            if (g - Complex64::new(want, 0.0)).norm() > tol {
                return Err(contract(format!(
                    "domain basis not orthonormal: <v{i}|v{j}> = {g}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::linalg::{
        DenseMap, IdentityMap, Layout, Operator, PermutationMap, QubitRotationMap,
    };

    fn rot(theta: f64) -> Operator {
        Arc::new(QubitRotationMap::from_fn(2, 0, move |_| theta).unwrap())
    }

    #[test]
    fn identity_has_unit_norm() {
        assert!((spectral_norm(&IdentityMap::new(8)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_map_has_zero_norm() {
        let z = DenseMap::new(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(spectral_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn permutation_is_exactly_unitary() {
        let p = PermutationMap::new(vec![3, 0, 2, 1, 5, 4, 7, 6]).unwrap();
        assert!(unitarity_defect(&p).unwrap() <= 1e-12);
    }

    #[test]
    fn doubled_identity_has_defect_three() {
        let m = DMatrix::identity(4, 4) * Complex64::new(2.0, 0.0);
        let d = unitarity_defect(&DenseMap::new(m).unwrap()).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equal_maps_have_zero_distance() {
        let layout = Layout::flat(1).unwrap();
        let basis = vec![
            StateVector::basis(layout.clone(), 0).unwrap(),
            StateVector::basis(layout, 1).unwrap(),
        ];
        let r = rot(0.4);
        assert_eq!(
            restricted_difference_norm(r.as_ref(), r.as_ref(), &basis).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_vector_restriction_is_vector_norm() {
        let a = rot(0.9);
        let b = rot(0.1);
        let v =
            StateVector::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])
                .unwrap();
        let av = apply_raw(a.as_ref(), v.amplitudes()).unwrap();
        let bv = apply_raw(b.as_ref(), v.amplitudes()).unwrap();
        let direct: f64 = av
            .iter()
            .zip(&bv)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let r = restricted_difference_norm(a.as_ref(), b.as_ref(), &[v]).unwrap();
        assert!((r - direct).abs() < 1e-14);
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let layout = Layout::flat(1).unwrap();
        let basis = vec![
            StateVector::basis(layout, 0).unwrap(),
            StateVector::from_amplitudes(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)])
                .unwrap(),
        ];
        let r = rot(0.3);
        assert!(matches!(
            restricted_difference_norm(r.as_ref(), r.as_ref(), &basis),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn restricted_indices_reject_duplicates() {
        let r = rot(0.3);
        assert!(restricted_difference_norm_on_indices(r.as_ref(), r.as_ref(), &[0, 0]).is_err());
        assert!(restricted_difference_norm_on_indices(r.as_ref(), r.as_ref(), &[2]).is_err());
    }
}
