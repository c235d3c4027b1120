use std::collections::BTreeSet;

use num_complex::Complex64;

use super::Layout;
use crate::error::{contract, Error, Result};

/// Complex amplitude vector over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: Layout,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, layout })
    }

    /// Wrap raw amplitudes in a single flat register. The length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(contract(format!(
                "state length {len} is not a power of two"
            )));
        }
        let layout = Layout::flat(len.trailing_zeros())?;
        Self::new(amplitudes, layout)
    }

    /// Computational basis state `|index>`.
    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(contract(format!("basis index {index} out of range {dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, layout })
    }

    /// Basis state given per-register values.
    pub fn from_registers(layout: Layout, values: &[usize]) -> Result<Self> {
        let index = layout.join(values)?;
        Self::basis(layout, index)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Same amplitudes, different register split of the same dimension.
    pub fn with_layout(self, layout: Layout) -> Result<Self> {
        Self::new(self.amplitudes, layout)
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthogonal projection onto the span of a set of computational basis states.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeasurementProjection {
    kept: BTreeSet<usize>,
}

impl MeasurementProjection {
    pub fn new(kept: impl IntoIterator<Item = usize>) -> Self {
        Self {
            kept: kept.into_iter().collect(),
        }
    }

    /// Keep every basis index in `0..dim` accepted by `predicate`.
    pub fn from_predicate(dim: usize, predicate: impl Fn(usize) -> bool) -> Self {
        Self::new((0..dim).filter(|&k| predicate(k)))
    }

    pub fn kept(&self) -> &BTreeSet<usize> {
        &self.kept
    }

    pub fn contains(&self, index: usize) -> bool {
        self.kept.contains(&index)
    }

    pub fn project(&self, psi: &StateVector) -> StateVector {
        let amplitudes = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if self.contains(k) {
                    a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        StateVector {
            amplitudes,
            layout: psi.layout().clone(),
        }
    }

    /// Probability of a measurement landing in the kept set.
    pub fn probability(&self, psi: &StateVector) -> f64 {
        self.kept
            .iter()
            .filter_map(|&k| psi.amplitudes().get(k))
            .map(|a| a.norm_sqr())
            .sum()
    }
}
