//! Approximating a phase query with exactly two bit queries.
//!
//! The circuit works on the layout `[index n, target 1, copy n, value m]`,
//! starting from `|j>|b>|0>|0>`:
//!
//! 1. copy the index into the copy register by modular addition,
//! 2. bit query on `(copy, value)`, writing `β(f(τ(j)))`,
//! 3. rotate the target by `arcsin √β_phase(decode(x))`, controlled on the value `x`,
//! 4. negate the value register and bit query again, clearing it,
//! 5. negate the copy register and copy-add again, clearing it.
//!
//! The ancillas return to `|0>|0>` exactly, and the net effect on
//! `|j>|b>` is the phase query of `decode ∘ encode ∘ f`.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::linalg::{
    apply_raw, compose, embed, restricted_difference_norm_on_indices, tensor_product, Complex64,
    IdentityMap, Layout, Operator, PermutationMap, QubitRotationMap, StateVector, DEFAULT_TOL,
};
use crate::oracles::{
    build_bit_query, build_phase_query, BitEncoding, OracleFunction, PhaseEncoding,
};

pub const INDEX: usize = 0;
pub const TARGET: usize = 1;
pub const COPY: usize = 2;
pub const VALUE: usize = 3;

/// `[index n, target 1, copy n, value m]`.
pub fn circuit_layout(n: u32, m: u32) -> Result<Layout> {
    Layout::new(vec![n, 1, n, m])
}

/// `|j>|b>|k>|x> -> |j>|b>|(k + j) mod 2^n>|x>`.
pub fn build_copy_add(n: u32, m: u32) -> Result<Operator> {
    let layout = circuit_layout(n, m)?;
    let mask = (1usize << n) - 1;
    let map = PermutationMap::from_fn(layout.dim(), |i| {
        let v = layout.split(i);
        let k = (v[COPY] + v[INDEX]) & mask;
        layout.replace(i, COPY, k).expect("value fits register")
    })?;
    Ok(Arc::new(map))
}

/// Negate one register modulo its dimension, identity elsewhere.
pub fn build_negate(layout: &Layout, register: usize) -> Result<Operator> {
    let dim = layout.register_dim(register)?;
    let map = PermutationMap::from_fn(layout.dim(), |i| {
        let x = layout.extract(i, register).expect("register checked");
        layout
            .replace(i, register, (dim - x) % dim)
            .expect("value fits register")
    })?;
    Ok(Arc::new(map))
}

/// The f-independent rotation of the target qubit controlled on the value register.
pub fn build_key_transform(
    enc: &BitEncoding,
    beta_phase: PhaseEncoding,
    n: u32,
    m: u32,
) -> Result<Operator> {
    if enc.bits() != m {
        return Err(contract(format!(
            "encoding has {} bits, value register {m}",
            enc.bits()
        )));
    }
    let layout = circuit_layout(n, m)?;
    let angles = (0..1usize << m)
        .map(|x| Ok(beta_phase.angle(enc.decode(x)?)))
        .collect::<Result<Vec<f64>>>()?;
    let bit = layout.shift(TARGET)?;
    let mask = (1usize << m) - 1;
    let map = QubitRotationMap::from_fn(layout.dim(), bit, move |i0| angles[i0 & mask])?;
    Ok(Arc::new(map))
}

/// One step of the simulation circuit.
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub map: Operator,
    /// True for the bit-query stages, the only ones built from `f`.
    pub queries_f: bool,
}

/// The two-query circuit for one oracle.
#[derive(Debug, Clone)]
pub struct SimulationCircuit {
    n: u32,
    m: u32,
    enc: BitEncoding,
    beta_phase: PhaseEncoding,
    stages: Vec<Stage>,
}

impl SimulationCircuit {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn encoding(&self) -> &BitEncoding {
        &self.enc
    }

    pub fn phase_encoding(&self) -> PhaseEncoding {
        self.beta_phase
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn layout(&self) -> Layout {
        circuit_layout(self.n, self.m).expect("validated at assembly")
    }

    /// Number of f-dependent stages.
    pub fn query_count(&self) -> usize {
        self.stages.iter().filter(|s| s.queries_f).count()
    }

    /// All stages as one operator.
    pub fn composed(&self) -> Result<Operator> {
        compose(self.stages.iter().map(|s| s.map.clone()).collect())
    }

    /// Basis indices of `|j>|b>|0>|0>`.
    pub fn start_indices(&self) -> Vec<usize> {
        start_indices(self.n, self.m)
    }

    /// Run the circuit on `|ψ>|0>|0>` and return the `[index, target]` state,
    /// checking that the ancillas came back clean.
    pub fn run(&self, psi: &StateVector) -> Result<StateVector> {
        let small = Layout::new(vec![self.n, 1])?;
        if psi.dim() != small.dim() {
            return Err(contract(format!(
                "input has dimension {}, expected {}",
                psi.dim(),
                small.dim()
            )));
        }
        let ancilla_bits = self.n + self.m;
        let mut wide = vec![Complex64::new(0.0, 0.0); self.layout().dim()];
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            wide[i << ancilla_bits] = a;
        }
        let out = apply_raw(self.composed()?.as_ref(), &wide)?;
        let out = StateVector::new(out, self.layout())?;
        discard_ancillas(&out, self.n, self.m, DEFAULT_TOL)
    }
}

fn start_indices(n: u32, m: u32) -> Vec<usize> {
    (0..2usize << n).map(|jb| jb << (n + m)).collect()
}

/// Mass of a circuit-layout state outside the ancilla-zero subspace.
pub fn ancilla_leakage(state: &StateVector, n: u32, m: u32) -> f64 {
    let mask = (1usize << (n + m)) - 1;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Drop the copy and value registers, which must hold `|0>|0>` up to `tol` in mass.
pub fn discard_ancillas(state: &StateVector, n: u32, m: u32, tol: f64) -> Result<StateVector> {
    let layout = circuit_layout(n, m)?;
    if state.dim() != layout.dim() {
        return Err(contract(format!(
            "state has dimension {}, circuit layout {}",
            state.dim(),
            layout.dim()
        )));
    }
    let leak = ancilla_leakage(state, n, m);
    if leak > tol {
        return Err(contract(format!(
            "ancillas not restored: leaked mass {leak:e}"
        )));
    }
    let amps = (0..2usize << n)
        .map(|jb| state.amplitudes()[jb << (n + m)])
        .collect();
    StateVector::new(amps, Layout::new(vec![n, 1])?)
}

/// Build the circuit for `f` on `n` index qubits and `m` value qubits.
pub fn assemble_simulation(
    f: &OracleFunction,
    n: u32,
    m: u32,
    enc: &BitEncoding,
    beta_phase: PhaseEncoding,
) -> Result<SimulationCircuit> {
    if f.len() != 1usize << n {
        return Err(contract(format!(
            "oracle has {} entries, expected 2^{n}",
            f.len()
        )));
    }
    let layout = circuit_layout(n, m)?;
    let query = embed(&layout, &[COPY, VALUE], build_bit_query(f, enc)?)?;
    let copy_add = build_copy_add(n, m)?;
    let stages = vec![
        Stage {
            name: "copy-add",
            map: copy_add.clone(),
            queries_f: false,
        },
        Stage {
            name: "bit-query",
            map: query.clone(),
            queries_f: true,
        },
        Stage {
            name: "key-transform",
            map: build_key_transform(enc, beta_phase, n, m)?,
            queries_f: false,
        },
        Stage {
            name: "negate-value",
            map: build_negate(&layout, VALUE)?,
            queries_f: false,
        },
        Stage {
            name: "bit-query",
            map: query,
            queries_f: true,
        },
        Stage {
            name: "negate-copy",
            map: build_negate(&layout, COPY)?,
            queries_f: false,
        },
        Stage {
            name: "copy-add",
            map: copy_add,
            queries_f: false,
        },
    ];
    Ok(SimulationCircuit {
        n,
        m,
        enc: enc.clone(),
        beta_phase,
        stages,
    })
}

/// `decode ∘ encode ∘ f`, the oracle the circuit realizes exactly.
pub fn effective_oracle(f: &OracleFunction, enc: &BitEncoding) -> Result<OracleFunction> {
    let quantized = f
        .values()
        .iter()
        .map(|&v| enc.quantize(v))
        .collect::<Result<Vec<_>>>()?;
    OracleFunction::new(quantized)?.with_tau(f.tau().to_vec())
}

/// `target ⊗ I` on the circuit layout, for comparisons on the start subspace.
pub fn extend_with_ancillas(target: Operator, n: u32, m: u32) -> Result<Operator> {
    tensor_product(target, Arc::new(IdentityMap::new(1usize << (n + m))))
}

/// Measured and analytic error of the two-query simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationError {
    /// Operator norm of circuit minus `Q_f ⊗ I` on `span{|j>|b>|0>|0>}`.
    pub measured: f64,
    /// `max_j 2|sin((θ_j - θ'_j)/2)|` with `θ'` taken from the quantized oracle.
    pub analytic_reference: f64,
    /// `2^(-m/2)`, stated only for the identity phase encoding.
    pub bound: Option<f64>,
    /// Worst ancilla mass left outside `|0>|0>` over the start basis.
    pub ancilla_leakage: f64,
}

impl SimulationError {
    pub fn within_bound(&self) -> bool {
        self.bound.is_none_or(|b| self.measured <= b)
    }
}

/// Compare the circuit against the exact phase query on the start subspace.
pub fn simulation_error(
    f: &OracleFunction,
    n: u32,
    m: u32,
    enc: &BitEncoding,
    beta_phase: PhaseEncoding,
) -> Result<SimulationError> {
    let circuit = assemble_simulation(f, n, m, enc, beta_phase)?;
    let composed = circuit.composed()?;
    let target = extend_with_ancillas(build_phase_query(f, beta_phase)?, n, m)?;
    let starts = circuit.start_indices();
    let measured =
        restricted_difference_norm_on_indices(composed.as_ref(), target.as_ref(), &starts)?;

    let layout = circuit.layout();
    let mut leak: f64 = 0.0;
    for &s in &starts {
        let out = apply_raw(
            composed.as_ref(),
            StateVector::basis(layout.clone(), s)?.amplitudes(),
        )?;
        leak = leak.max(ancilla_leakage(
            &StateVector::new(out, layout.clone())?,
            n,
            m,
        ));
    }

    let mut analytic: f64 = 0.0;
    for j in 0..f.len() {
        let y = f.queried(j);
        let exact = beta_phase.angle(y);
        let approx = beta_phase.angle(enc.quantize(y)?);
        analytic = analytic.max(2.0 * ((exact - approx) / 2.0).sin().abs());
    }

    let bound = (beta_phase == PhaseEncoding::Identity).then(|| (-(m as f64) / 2.0).exp2());
    Ok(SimulationError {
        measured,
        analytic_reference: analytic,
        bound,
        ancilla_leakage: leak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply_raw, restricted_unitarity_defect, to_dense, unitarity_defect};

    fn basis_vec(dim: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn copy_add_fills_clean_register() {
        let (n, m) = (2, 1);
        let layout = circuit_layout(n, m).unwrap();
        let op = build_copy_add(n, m).unwrap();
        for j in 0..4 {
            for b in 0..2 {
                let i = layout.join(&[j, b, 0, 1]).unwrap();
                let out = apply_raw(op.as_ref(), &basis_vec(layout.dim(), i)).unwrap();
                let want = layout.join(&[j, b, j, 1]).unwrap();
                assert_eq!(out[want], Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn copy_add_wraps() {
        let layout = circuit_layout(1, 1).unwrap();
        let op = build_copy_add(1, 1).unwrap();
        let i = layout.join(&[1, 0, 1, 0]).unwrap();
        let out = apply_raw(op.as_ref(), &basis_vec(layout.dim(), i)).unwrap();
        assert_eq!(
            out[layout.join(&[1, 0, 0, 0]).unwrap()],
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn copy_add_is_permutation() {
        for n in 0..=3 {
            assert!(unitarity_defect(build_copy_add(n, 1).unwrap().as_ref()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn negate_examples() {
        let layout = Layout::new(vec![3]).unwrap();
        let neg = build_negate(&layout, 0).unwrap();
        assert_eq!(
            apply_raw(neg.as_ref(), &basis_vec(8, 0)).unwrap(),
            basis_vec(8, 0)
        );
        assert_eq!(
            apply_raw(neg.as_ref(), &basis_vec(8, 3)).unwrap(),
            basis_vec(8, 5)
        );
        for x in 0..8 {
            let twice = apply_raw(
                neg.as_ref(),
                &apply_raw(neg.as_ref(), &basis_vec(8, x)).unwrap(),
            )
            .unwrap();
            assert_eq!(twice, basis_vec(8, x));
        }
        assert!(build_negate(&layout, 1).is_err());
    }

    #[test]
    fn key_transform_first_column() {
        // m = 1, identity β, decode(0) = ¼: |j>|0>|j>|0> -> √¾|j>|0>|j>|0> + √¼|j>|1>|j>|0>.
        let (n, m) = (1, 1);
        let enc = BitEncoding::floor_midpoint(m).unwrap();
        let u = build_key_transform(&enc, PhaseEncoding::Identity, n, m).unwrap();
        let layout = circuit_layout(n, m).unwrap();
        for j in 0..2 {
            let i = layout.join(&[j, 0, j, 0]).unwrap();
            let out = apply_raw(u.as_ref(), &basis_vec(layout.dim(), i)).unwrap();
            assert!((out[i].re - 0.75f64.sqrt()).abs() < 1e-15);
            let flipped = layout.join(&[j, 1, j, 0]).unwrap();
            assert!((out[flipped].re - 0.5).abs() < 1e-15);
        }
        assert!(unitarity_defect(u.as_ref()).unwrap() <= 1e-10);
    }

    #[test]
    fn key_transform_is_identity_where_angle_vanishes() {
        let enc = BitEncoding::custom(1, |x| usize::from(x > 0.5), |v| v as f64).unwrap();
        let u = build_key_transform(&enc, PhaseEncoding::Identity, 1, 1).unwrap();
        let layout = circuit_layout(1, 1).unwrap();
        for b in 0..2 {
            let i = layout.join(&[1, b, 0, 0]).unwrap();
            assert_eq!(
                apply_raw(u.as_ref(), &basis_vec(layout.dim(), i)).unwrap(),
                basis_vec(layout.dim(), i)
            );
        }
    }

    #[test]
    fn two_queries_and_unitary() {
        let f = OracleFunction::new(vec![0.3, 0.7]).unwrap();
        let enc = BitEncoding::floor_midpoint(2).unwrap();
        let c = assemble_simulation(&f, 1, 2, &enc, PhaseEncoding::Identity).unwrap();
        assert_eq!(c.query_count(), 2);
        assert!(unitarity_defect(c.composed().unwrap().as_ref()).unwrap() <= 1e-10);
        assert!(
            restricted_unitarity_defect(c.composed().unwrap().as_ref(), &c.start_indices())
                .unwrap()
                <= 1e-12
        );
    }

    #[test]
    fn non_query_stages_do_not_depend_on_f() {
        let enc = BitEncoding::floor_midpoint(2).unwrap();
        let f = OracleFunction::new(vec![0.1, 0.9]).unwrap();
        let g = OracleFunction::new(vec![0.6, 0.2]).unwrap();
        let a = assemble_simulation(&f, 1, 2, &enc, PhaseEncoding::Identity).unwrap();
        let b = assemble_simulation(&g, 1, 2, &enc, PhaseEncoding::Identity).unwrap();
        for (sa, sb) in a.stages().iter().zip(b.stages()) {
            let same = to_dense(sa.map.as_ref()).unwrap() == to_dense(sb.map.as_ref()).unwrap();
            assert_eq!(same, !sa.queries_f, "stage {}", sa.name);
        }
    }

    #[test]
    fn aligned_oracle_is_simulated_exactly() {
        let enc = BitEncoding::floor_midpoint(3).unwrap();
        let f =
            OracleFunction::new((0..4).map(|v| enc.decode(2 * v + 1).unwrap()).collect()).unwrap();
        let e = simulation_error(&f, 2, 3, &enc, PhaseEncoding::Identity).unwrap();
        assert!(e.measured <= 1e-10, "{e:?}");
    }

    #[test]
    fn zero_oracle_realizes_midpoint_oracle() {
        for n in 0..=2 {
            for m in 1..=4 {
                let enc = BitEncoding::floor_midpoint(m).unwrap();
                let f = OracleFunction::constant(n, 0.0).unwrap();
                let g = OracleFunction::constant(n, (-(m as f64) - 1.0).exp2()).unwrap();
                let c = assemble_simulation(&f, n, m, &enc, PhaseEncoding::Identity).unwrap();
                let target = extend_with_ancillas(
                    build_phase_query(&g, PhaseEncoding::Identity).unwrap(),
                    n,
                    m,
                )
                .unwrap();
                let d = restricted_difference_norm_on_indices(
                    c.composed().unwrap().as_ref(),
                    target.as_ref(),
                    &c.start_indices(),
                )
                .unwrap();
                assert!(d <= 1e-12, "n={n} m={m} d={d}");
            }
        }
    }

    #[test]
    fn run_returns_query_output() {
        let enc = BitEncoding::floor_midpoint(4).unwrap();
        let f = OracleFunction::new(vec![0.40, 0.85]).unwrap();
        let c = assemble_simulation(&f, 1, 4, &enc, PhaseEncoding::Identity).unwrap();
        let g = effective_oracle(&f, &enc).unwrap();
        let q = build_phase_query(&g, PhaseEncoding::Identity).unwrap();
        let psi = StateVector::from_amplitudes(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ])
        .unwrap();
        let got = c.run(&psi).unwrap();
        let want = apply_raw(q.as_ref(), psi.amplitudes()).unwrap();
        for (a, b) in got.amplitudes().iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn discard_rejects_dirty_ancillas() {
        let layout = circuit_layout(1, 1).unwrap();
        let s = StateVector::basis(layout, 1).unwrap();
        assert!(discard_ancillas(&s, 1, 1, 1e-10).is_err());
    }

    #[test]
    fn oracle_size_must_match() {
        let enc = BitEncoding::floor_midpoint(2).unwrap();
        let f = OracleFunction::new(vec![0.3, 0.7]).unwrap();
        assert!(assemble_simulation(&f, 2, 2, &enc, PhaseEncoding::Identity).is_err());
        assert!(build_key_transform(&enc, PhaseEncoding::Identity, 1, 3).is_err());
    }
}
