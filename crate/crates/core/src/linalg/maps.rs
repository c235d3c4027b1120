use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::MAX_DIM_BITS;
use super::{Layout, StateVector};
use crate::error::{contract, Error, Result};

/// Largest dimension for which a map may be materialized as a dense matrix.
pub const MAX_DENSE_DIM: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A matrix-free linear operator `C^dim_in -> C^dim_out`.
pub trait LinearMap: fmt::Debug + Send + Sync {
    fn dim_in(&self) -> usize;

    fn dim_out(&self) -> usize;

    /// Writes `self * input` into `output`. Callers guarantee the slice lengths.
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]);

    /// Whether the map is unitary by construction.
    fn is_unitary(&self) -> bool {
        false
    }
}

/// Shared handle to an immutable operator.
pub type Operator = Arc<dyn LinearMap>;

/// Apply `u` to a raw amplitude slice.
pub fn apply_raw(u: &dyn LinearMap, input: &[Complex64]) -> Result<Vec<Complex64>> {
    if input.len() != u.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: u.dim_in(),
            actual: input.len(),
        });
    }
    let mut out = vec![ZERO; u.dim_out()];
    u.apply_into(input, &mut out);
    Ok(out)
}

/// Apply `u` to a state. The layout is kept when the dimension is unchanged.
pub fn apply(u: &dyn LinearMap, psi: &StateVector) -> Result<StateVector> {
    let out = apply_raw(u, psi.amplitudes())?;
    if out.len() == psi.dim() {
        StateVector::new(out, psi.layout().clone())
    } else {
        StateVector::from_amplitudes(out)
    }
}

/// Dense matrix of `u`, built column by column.
pub fn to_dense(u: &dyn LinearMap) -> Result<DMatrix<Complex64>> {
    let (rows, cols) = (u.dim_out(), u.dim_in());
    if rows > MAX_DENSE_DIM || cols > MAX_DENSE_DIM {
        return Err(Error::Resource {
            what: "dense materialization",
            requested: rows.max(cols) as u128,
            budget: MAX_DENSE_DIM as u128,
        });
    }
    let mut m = DMatrix::zeros(rows, cols);
    let mut e = vec![ZERO; cols];
    let mut col = vec![ZERO; rows];
    for j in 0..cols {
        e[j] = Complex64::new(1.0, 0.0);
        u.apply_into(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = ZERO;
    }
    Ok(m)
}

fn check_dim_budget(what: &'static str, dim: u128) -> Result<()> {
    let budget = 1u128 << MAX_DIM_BITS;
    if dim > budget {
        return Err(Error::Resource {
            what,
            requested: dim,
            budget,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct IdentityMap {
    dim: usize,
}

impl IdentityMap {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LinearMap for IdentityMap {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        output.copy_from_slice(input);
    }
    fn is_unitary(&self) -> bool {
        true
    }
}

/// Explicit matrix, limited to [`MAX_DENSE_DIM`].
#[derive(Debug, Clone)]
pub struct DenseMap {
    matrix: DMatrix<Complex64>,
    unitary: bool,
}

impl DenseMap {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::build(matrix, false)
    }

    /// Dense map flagged unitary. The flag is verified against `tol`.
    pub fn unitary(matrix: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let map = Self::build(matrix, true)?;
        let defect = super::norm::unitarity_defect(&map)?;
        if defect > tol {
            return Err(contract(format!(
                "matrix flagged unitary has defect {defect:e}"
            )));
        }
        Ok(map)
    }

    fn build(matrix: DMatrix<Complex64>, unitary: bool) -> Result<Self> {
        let big = matrix.nrows().max(matrix.ncols());
        if big > MAX_DENSE_DIM {
            return Err(Error::Resource {
                what: "dense matrix",
                requested: big as u128,
                budget: MAX_DENSE_DIM as u128,
            });
        }
        if unitary && matrix.nrows() != matrix.ncols() {
            return Err(contract("unitary matrix must be square"));
        }
        Ok(Self { matrix, unitary })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

impl LinearMap for DenseMap {
    fn dim_in(&self) -> usize {
        self.matrix.ncols()
    }
    fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        output.fill(ZERO);
        for (j, &x) in input.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (o, &m) in output.iter_mut().zip(self.matrix.column(j).iter()) {
                *o += m * x;
            }
        }
    }
    fn is_unitary(&self) -> bool {
        self.unitary
    }
}

/// Basis permutation `|i> -> |images[i]>`.
#[derive(Debug, Clone)]
pub struct PermutationMap {
    images: Vec<usize>,
}

impl PermutationMap {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for (i, &t) in images.iter().enumerate() {
            if t >= images.len() || std::mem::replace(&mut seen[t], true) {
                return Err(contract(format!(
                    "image {t} of index {i} breaks bijectivity"
                )));
            }
        }
        Ok(Self { images })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new((0..dim).map(f).collect())
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

impl LinearMap for PermutationMap {
    fn dim_in(&self) -> usize {
        self.images.len()
    }
    fn dim_out(&self) -> usize {
        self.images.len()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        for (&t, &x) in self.images.iter().zip(input) {
            output[t] = x;
        }
    }
    fn is_unitary(&self) -> bool {
        true
    }
}

/// Diagonal operator.
#[derive(Debug, Clone)]
pub struct DiagonalMap {
    diag: Vec<Complex64>,
}

impl DiagonalMap {
    pub fn new(diag: Vec<Complex64>) -> Self {
        Self { diag }
    }

    /// Real sign pattern, `+1` where `negate(i)` is false.
    pub fn signs(dim: usize, negate: impl Fn(usize) -> bool) -> Self {
        Self::new(
            (0..dim)
                .map(|i| Complex64::new(if negate(i) { -1.0 } else { 1.0 }, 0.0))
                .collect(),
        )
    }
}

impl LinearMap for DiagonalMap {
    fn dim_in(&self) -> usize {
        self.diag.len()
    }
    fn dim_out(&self) -> usize {
        self.diag.len()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        for ((o, &x), &d) in output.iter_mut().zip(input).zip(&self.diag) {
            *o = d * x;
        }
    }
    fn is_unitary(&self) -> bool {
        self.diag.iter().all(|d| (d.norm() - 1.0).abs() <= 1e-12)
    }
}

/// Real rotation of one qubit whose angle depends on the rest of the basis index.
///
/// For each index `i0` with the target bit clear and `i1 = i0 | bit`, the pair
/// `(|i0>, |i1>)` is mapped by `[[cos, -sin], [sin, cos]]`.
#[derive(Debug, Clone)]
pub struct QubitRotationMap {
    dim: usize,
    bit: u32,
    cos_sin: Vec<(f64, f64)>,
}

impl QubitRotationMap {
    /// `angle` receives the pair's base index (target bit clear).
    pub fn from_fn(dim: usize, bit: u32, angle: impl Fn(usize) -> f64) -> Result<Self> {
        if !dim.is_power_of_two() || bit >= usize::BITS || (1usize << bit) >= dim {
            return Err(contract(format!(
                "bit {bit} is not a qubit of a dimension-{dim} space"
            )));
        }
        let stride = 1usize << bit;
        let cos_sin = (0..dim / 2)
            .map(|p| {
                let i0 = ((p >> bit) << (bit + 1)) | (p & (stride - 1));
                let a = angle(i0);
                (a.cos(), a.sin())
            })
            .collect();
        Ok(Self { dim, bit, cos_sin })
    }
}

impl LinearMap for QubitRotationMap {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        let stride = 1usize << self.bit;
        for (p, &(c, s)) in self.cos_sin.iter().enumerate() {
            let i0 = ((p >> self.bit) << (self.bit + 1)) | (p & (stride - 1));
            let i1 = i0 | stride;
            let (a0, a1) = (input[i0], input[i1]);
            output[i0] = a0 * c - a1 * s;
            output[i1] = a0 * s + a1 * c;
        }
    }
    fn is_unitary(&self) -> bool {
        true
    }
}

/// Kronecker product `a ⊗ b`, `a` on the most significant index bits.
#[derive(Debug, Clone)]
pub struct TensorMap {
    a: Operator,
    b: Operator,
}

impl LinearMap for TensorMap {
    fn dim_in(&self) -> usize {
        self.a.dim_in() * self.b.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.a.dim_out() * self.b.dim_out()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        let (a_in, a_out) = (self.a.dim_in(), self.a.dim_out());
        let (b_in, b_out) = (self.b.dim_in(), self.b.dim_out());
        let mut mid = vec![ZERO; a_in * b_out];
        for (block_in, block_out) in input.chunks(b_in).zip(mid.chunks_mut(b_out)) {
            self.b.apply_into(block_in, block_out);
        }
        let mut col_in = vec![ZERO; a_in];
        let mut col_out = vec![ZERO; a_out];
        for jb in 0..b_out {
            for (ia, c) in col_in.iter_mut().enumerate() {
                *c = mid[ia * b_out + jb];
            }
            self.a.apply_into(&col_in, &mut col_out);
            for (ja, &c) in col_out.iter().enumerate() {
                output[ja * b_out + jb] = c;
            }
        }
    }
    fn is_unitary(&self) -> bool {
        self.a.is_unitary() && self.b.is_unitary()
    }
}

/// `a ⊗ b` as a matrix-free operator.
pub fn tensor_product(a: Operator, b: Operator) -> Result<Operator> {
    let din = a.dim_in() as u128 * b.dim_in() as u128;
    let dout = a.dim_out() as u128 * b.dim_out() as u128;
    check_dim_budget("tensor product dimension", din.max(dout))?;
    Ok(Arc::new(TensorMap { a, b }))
}

/// Stages applied first to last.
#[derive(Debug, Clone)]
pub struct ComposedMap {
    stages: Vec<Operator>,
}

impl ComposedMap {
    pub fn new(stages: Vec<Operator>) -> Result<Self> {
        if stages.is_empty() {
            return Err(contract("composition needs at least one stage"));
        }
        for (k, pair) in stages.windows(2).enumerate() {
            if pair[0].dim_out() != pair[1].dim_in() {
                return Err(contract(format!(
                    "stage {k} outputs dimension {} but stage {} expects {}",
                    pair[0].dim_out(),
                    k + 1,
                    pair[1].dim_in()
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Operator] {
        &self.stages
    }
}

impl LinearMap for ComposedMap {
    fn dim_in(&self) -> usize {
        self.stages[0].dim_in()
    }
    fn dim_out(&self) -> usize {
        self.stages[self.stages.len() - 1].dim_out()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for stage in &self.stages {
            next.clear();
            next.resize(stage.dim_out(), ZERO);
            stage.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        output.copy_from_slice(&cur);
    }
    fn is_unitary(&self) -> bool {
        self.stages.iter().all(|s| s.is_unitary())
    }
}

/// Compose stages applied in order (`stages[0]` first).
pub fn compose(stages: Vec<Operator>) -> Result<Operator> {
    Ok(Arc::new(ComposedMap::new(stages)?))
}

/// `a - b`.
#[derive(Debug, Clone)]
pub struct DifferenceMap {
    a: Operator,
    b: Operator,
}

impl DifferenceMap {
    pub fn new(a: Operator, b: Operator) -> Result<Self> {
        if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
            return Err(contract(format!(
                "cannot subtract a {}x{} map from a {}x{} map",
                b.dim_out(),
                b.dim_in(),
                a.dim_out(),
                a.dim_in()
            )));
        }
        Ok(Self { a, b })
    }
}

impl LinearMap for DifferenceMap {
    fn dim_in(&self) -> usize {
        self.a.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.a.dim_out()
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        let mut tmp = vec![ZERO; output.len()];
        self.a.apply_into(input, output);
        self.b.apply_into(input, &mut tmp);
        for (o, t) in output.iter_mut().zip(tmp) {
            *o -= t;
        }
    }
}

/// An operator acting on selected registers of a layout, identity elsewhere.
///
/// The inner map sees the selected registers concatenated in the listed order,
/// first register most significant.
#[derive(Debug, Clone)]
pub struct EmbeddedMap {
    dim: usize,
    inner: Operator,
    sub_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl EmbeddedMap {
    pub fn new(layout: &Layout, registers: &[usize], inner: Operator) -> Result<Self> {
        let mut chosen = vec![false; layout.num_registers()];
        for &r in registers {
            layout.width(r)?;
            if std::mem::replace(&mut chosen[r], true) {
                return Err(contract(format!("register {r} listed twice")));
            }
        }
        let rest: Vec<usize> = (0..layout.num_registers())
            .filter(|&r| !chosen[r])
            .collect();
        let sub_offsets = scatter_table(layout, registers)?;
        let rest_offsets = scatter_table(layout, &rest)?;
        if inner.dim_in() != sub_offsets.len() || inner.dim_out() != sub_offsets.len() {
            return Err(contract(format!(
                "embedded map is {}x{} but the selected registers span dimension {}",
                inner.dim_out(),
                inner.dim_in(),
                sub_offsets.len()
            )));
        }
        Ok(Self {
            dim: layout.dim(),
            inner,
            sub_offsets,
            rest_offsets,
        })
    }
}

/// Full-index contribution of every joint value of `registers`.
fn scatter_table(layout: &Layout, registers: &[usize]) -> Result<Vec<usize>> {
    let mut table = vec![0usize];
    for &r in registers {
        let shift = layout.shift(r)?;
        let dim = layout.register_dim(r)?;
        table = table
            .iter()
            .flat_map(|&base| (0..dim).map(move |v| base | (v << shift)))
            .collect();
    }
    Ok(table)
}

impl LinearMap for EmbeddedMap {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        let sub = self.sub_offsets.len();
        let mut buf_in = vec![ZERO; sub];
        let mut buf_out = vec![ZERO; sub];
        for &base in &self.rest_offsets {
            for (b, &off) in buf_in.iter_mut().zip(&self.sub_offsets) {
                *b = input[base | off];
            }
            self.inner.apply_into(&buf_in, &mut buf_out);
            for (&b, &off) in buf_out.iter().zip(&self.sub_offsets) {
                output[base | off] = b;
            }
        }
    }
    fn is_unitary(&self) -> bool {
        self.inner.is_unitary()
    }
}

/// Embed `inner` on `registers` of `layout`.
pub fn embed(layout: &Layout, registers: &[usize], inner: Operator) -> Result<Operator> {
    Ok(Arc::new(EmbeddedMap::new(layout, registers, inner)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli_x() -> Operator {
        Arc::new(PermutationMap::new(vec![1, 0]).unwrap())
    }

    #[test]
    fn identity_tensor_identity_is_identity() {
        let i2: Operator = Arc::new(IdentityMap::new(2));
        let t = tensor_product(i2.clone(), i2).unwrap();
        let d = to_dense(t.as_ref()).unwrap();
        assert_eq!(d, DMatrix::identity(4, 4));
    }

    #[test]
    fn x_tensor_identity_flips_high_bit() {
        let t = tensor_product(pauli_x(), Arc::new(IdentityMap::new(2))).unwrap();
        let out = apply_raw(t.as_ref(), &[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(out, vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn tensor_dimensions_multiply() {
        let a: Operator = Arc::new(IdentityMap::new(4));
        let b: Operator = Arc::new(IdentityMap::new(8));
        assert_eq!(tensor_product(a, b).unwrap().dim_in(), 32);
    }

    #[test]
    fn tensor_budget() {
        let a: Operator = Arc::new(IdentityMap::new(1 << 13));
        let b: Operator = Arc::new(IdentityMap::new(1 << 12));
        assert!(matches!(tensor_product(a, b), Err(Error::Resource { .. })));
    }

    #[test]
    fn quarter_turn_rotation() {
        let r = QubitRotationMap::from_fn(2, 0, |_| std::f64::consts::FRAC_PI_2).unwrap();
        let out = apply_raw(&r, &[c(1.0), c(0.0)]).unwrap();
        assert!((out[0] - c(0.0)).norm() < 1e-15);
        assert!((out[1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_checks_dimension() {
        let id = IdentityMap::new(4);
        assert!(matches!(
            apply_raw(&id, &[c(1.0); 2]),
            Err(Error::DimensionMismatch {
                expected: 4,
                actual: 2
            })
        ));
    }

    #[test]
    fn permutation_must_be_bijective() {
        assert!(PermutationMap::new(vec![0, 0]).is_err());
        assert!(PermutationMap::new(vec![0, 2]).is_err());
    }

    #[test]
    fn embedded_matches_tensor_layout() {
        // X on the middle register of [1, 1, 1] equals I ⊗ X ⊗ I.
        let layout = Layout::new(vec![1, 1, 1]).unwrap();
        let e = embed(&layout, &[1], pauli_x()).unwrap();
        let t = tensor_product(
            Arc::new(IdentityMap::new(2)),
            tensor_product(pauli_x(), Arc::new(IdentityMap::new(2))).unwrap(),
        )
        .unwrap();
        assert_eq!(to_dense(e.as_ref()).unwrap(), to_dense(t.as_ref()).unwrap());
    }

    #[test]
    fn embedded_register_order_is_respected() {
        // A swap-sensitive inner map: |a,b> -> |a, a xor b> on registers listed [2, 0].
        let layout = Layout::new(vec![1, 1, 1]).unwrap();
        let cnot: Operator = Arc::new(PermutationMap::new(vec![0, 1, 3, 2]).unwrap());
        let e = embed(&layout, &[2, 0], cnot).unwrap();
        // |0,0,1> : control (register 2) = 1, target register 0 flips -> |1,0,1>.
        let mut v = vec![c(0.0); 8];
        v[0b001] = c(1.0);
        let out = apply_raw(e.as_ref(), &v).unwrap();
        assert_eq!(out[0b101], c(1.0));
    }

    #[test]
    fn composition_applies_in_order() {
        let x = pauli_x();
        let z: Operator = Arc::new(DiagonalMap::signs(2, |i| i == 1));
        // Z after X on |0>: X|0> = |1>, Z|1> = -|1>.
        let zx = compose(vec![x.clone(), z.clone()]).unwrap();
        let out = apply_raw(zx.as_ref(), &[c(1.0), c(0.0)]).unwrap();
        assert_eq!(out, vec![c(0.0), c(-1.0)]);
        assert!(compose(vec![x, Arc::new(IdentityMap::new(4))]).is_err());
    }
}
