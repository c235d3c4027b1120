use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Largest state dimension the library will allocate (2^24 amplitudes).
pub const MAX_DIM_BITS: u32 = 24;

/// Ordered register widths (in qubits) of a tensor-product register file.
///
/// Register 0 owns the most significant bits of a basis index, so a layout
/// `[a, b]` places basis state `|x>|y>` at index `x * 2^b + y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    widths: Vec<u32>,
}

impl Layout {
    pub fn new(widths: impl Into<Vec<u32>>) -> Result<Self> {
        let widths = widths.into();
        let total: u64 = widths.iter().map(|&w| u64::from(w)).sum();
        if total > u64::from(MAX_DIM_BITS) {
            return Err(Error::Resource {
                what: "register layout qubits",
                requested: u128::from(total),
                budget: u128::from(MAX_DIM_BITS),
            });
        }
        Ok(Self { widths })
    }

    /// Single register holding `qubits` qubits.
    pub fn flat(qubits: u32) -> Result<Self> {
        Self::new(vec![qubits])
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn num_registers(&self) -> usize {
        self.widths.len()
    }

    pub fn num_qubits(&self) -> u32 {
        self.widths.iter().sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits()
    }

    pub fn width(&self, register: usize) -> Result<u32> {
        self.widths.get(register).copied().ok_or_else(|| {
            contract(format!(
                "register {register} not in layout {:?}",
                self.widths
            ))
        })
    }

    pub fn register_dim(&self, register: usize) -> Result<usize> {
        Ok(1usize << self.width(register)?)
    }

    /// Bit offset of a register's least significant bit within a basis index.
    pub fn shift(&self, register: usize) -> Result<u32> {
        self.width(register)?;
        Ok(self.widths[register + 1..].iter().sum())
    }

    /// Value held by `register` in basis state `index`.
    pub fn extract(&self, index: usize, register: usize) -> Result<usize> {
        let shift = self.shift(register)?;
        let mask = self.register_dim(register)? - 1;
        Ok((index >> shift) & mask)
    }

    /// Replace the value of `register` in `index`.
    pub fn replace(&self, index: usize, register: usize, value: usize) -> Result<usize> {
        let shift = self.shift(register)?;
        let dim = self.register_dim(register)?;
        if value >= dim {
            return Err(contract(format!(
                "value {value} does not fit register {register} of dimension {dim}"
            )));
        }
        Ok((index & !((dim - 1) << shift)) | (value << shift))
    }

    /// Decompose a basis index into per-register values.
    pub fn split(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        let mut out = vec![0; self.widths.len()];
        for (slot, &w) in out.iter_mut().zip(&self.widths).rev() {
            *slot = rest & ((1usize << w) - 1);
            rest >>= w;
        }
        out
    }

    /// Inverse of [`Layout::split`].
    pub fn join(&self, values: &[usize]) -> Result<usize> {
        if values.len() != self.widths.len() {
            return Err(Error::DimensionMismatch {
                expected: self.widths.len(),
                actual: values.len(),
            });
        }
        let mut index = 0usize;
        for (r, (&v, &w)) in values.iter().zip(&self.widths).enumerate() {
            if v >> w != 0 {
                return Err(contract(format!(
                    "value {v} overflows register {r} ({w} qubits)"
                )));
            }
            index = (index << w) | v;
        }
        Ok(index)
    }
}
