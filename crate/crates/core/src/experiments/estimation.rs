use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;

use super::algorithm::{
    precision_at_threshold, run_algorithm, AlgorithmBuilder, AlgorithmSpec, QueryConfig, QuerySlot,
    SolutionOperator,
};
use crate::error::{contract, Result};
use crate::linalg::{
    embed, to_dense, Complex64, DenseMap, DiagonalMap, Layout, Operator, StateVector,
};
use crate::oracles::{bit_decode, build_phase_query, OracleFunction, PhaseEncoding};

const CONTROL: usize = 0;
const INDEX: usize = 1;
const TARGET: usize = 2;

/// Largest number of precision qubits accepted by the estimation builders.
pub const MAX_PRECISION_BITS: u32 = 10;

/// One bit query on `[index 0, value m]` from `|0>|0>`, decoded with the
/// floor/midpoint rule.
pub fn evaluation_bit_algorithm(m: u32) -> Result<AlgorithmSpec> {
    let layout = Layout::new(vec![0, m])?;
    let solution = (0..1usize << m)
        .map(|v| bit_decode(v, m))
        .collect::<Result<Vec<_>>>()?;
    AlgorithmBuilder::new(layout.clone())
        .query(QuerySlot::bit(0, 1))
        .build(StateVector::basis(layout, 0)?, solution)
}

fn hadamard_n(n: u32) -> Result<Operator> {
    let dim = 1usize << n;
    let s = (dim as f64).sqrt().recip();
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        Complex64::new(sign * s, 0.0)
    });
    Ok(Arc::new(DenseMap::unitary(h, 1e-10)?))
}

/// `|y> -> M^{-1/2} Σ_z e^{-2πi yz/M} |z>`.
pub fn inverse_qft(t: u32) -> Result<Operator> {
    let m = 1usize << t;
    let s = (m as f64).sqrt().recip();
    let f = DMatrix::from_fn(m, m, |z, y| {
        Complex64::from_polar(s, -TAU * ((y * z) % m) as f64 / m as f64)
    });
    Ok(Arc::new(DenseMap::unitary(f, 1e-10)?))
}

/// `sin²(π y / 2^t)` for every outcome of a `[control t, index n, target 1]` register file.
fn estimation_solution(layout: &Layout, t: u32) -> Result<Vec<f64>> {
    let m = (1usize << t) as f64;
    (0..layout.dim())
        .map(|i| Ok((PI * layout.extract(i, CONTROL)? as f64 / m).sin().powi(2)))
        .collect()
}

/// Amplitude estimation of the mean of `sin² θ_j` over `N = 2^n` indices.
///
/// Layout is `[control t, index n, target 1]` from `|0>`. State preparation is
/// `A = Q (H^n ⊗ I)` and the Grover iterate is `A (2|0><0| - I) A† S`, where `S`
/// flips the sign of the marked (`target = 1`) states and `A† = (H^n ⊗ I) Z Q Z`.
/// Control qubit `k` governs `2^k` iterates; each iterate makes two queries,
/// so `n_q = 2^{t+1} - 1` counting the preparation.
pub fn mean_estimation_algorithm(n: u32, t: u32) -> Result<AlgorithmSpec> {
    if t == 0 || t > MAX_PRECISION_BITS {
        return Err(contract(format!(
            "precision qubits t = {t} outside 1..={MAX_PRECISION_BITS}"
        )));
    }
    let layout = Layout::new(vec![t, n, 1])?;
    let dim = layout.dim();
    let control_of = {
        let l = layout.clone();
        move |i: usize| l.extract(i, CONTROL).expect("register exists")
    };
    let index_of = {
        let l = layout.clone();
        move |i: usize| l.extract(i, INDEX).expect("register exists")
    };
    let target_of = {
        let l = layout.clone();
        move |i: usize| l.extract(i, TARGET).expect("register exists")
    };

    let mut b = AlgorithmBuilder::new(layout.clone()).unitary_on(&[CONTROL], hadamard_n(t)?)?;
    if n > 0 {
        b = b.unitary_on(&[INDEX], hadamard_n(n)?)?;
    }
    b = b.query(QuerySlot::phase(INDEX, TARGET));

    let z: Operator = Arc::new(DiagonalMap::signs(dim, {
        let tgt = target_of.clone();
        move |i| tgt(i) == 1
    }));
    let h_index = if n > 0 { Some(hadamard_n(n)?) } else { None };
    for k in 0..t {
        let mark: Operator = Arc::new(DiagonalMap::signs(dim, {
            let (ctl, tgt) = (control_of.clone(), target_of.clone());
            move |i| (ctl(i) >> k) & 1 == 1 && tgt(i) == 1
        }));
        let reflect: Operator = Arc::new(DiagonalMap::signs(dim, {
            let (ctl, idx, tgt) = (control_of.clone(), index_of.clone(), target_of.clone());
            move |i| (ctl(i) >> k) & 1 == 1 && !(idx(i) == 0 && tgt(i) == 0)
        }));
        for _ in 0..1usize << k {
            b = b.unitary(mark.clone()).unitary(z.clone());
            b = b.query(QuerySlot::phase(INDEX, TARGET)).unitary(z.clone());
            if let Some(h) = &h_index {
                b = b.unitary_on(&[INDEX], h.clone())?;
            }
            b = b.unitary(reflect.clone());
            if let Some(h) = &h_index {
                b = b.unitary_on(&[INDEX], h.clone())?;
            }
            b = b.query(QuerySlot::phase(INDEX, TARGET));
        }
    }
    b = b.unitary_on(&[CONTROL], inverse_qft(t)?)?;
    let solution = estimation_solution(&layout, t)?;
    b.build(StateVector::basis(layout, 0)?, solution)
}

/// [`mean_estimation_algorithm`] on a one-point domain.
pub fn evaluation_phase_algorithm(t: u32) -> Result<AlgorithmSpec> {
    mean_estimation_algorithm(0, t)
}

/// Phase queries used by the estimation builders for `t` precision qubits.
pub fn estimation_query_count(t: u32) -> usize {
    (1usize << (t + 1)) - 1
}

/// `2π √(a(1-a)) / M + π² / M²` with `M = 2^t`.
pub fn amplitude_estimation_bound(a: f64, t: u32) -> f64 {
    let m = (1u64 << t) as f64;
    TAU * (a * (1.0 - a)).max(0.0).sqrt() / m + PI * PI / (m * m)
}

/// `2π / M + π² / M²`, the bound at its worst case over `a`.
pub fn amplitude_estimation_bound_uniform(t: u32) -> f64 {
    let m = (1u64 << t) as f64;
    TAU / m + PI * PI / (m * m)
}

/// Error of an estimation run on one oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationOutcome {
    /// Error level reached with the success threshold of probability.
    pub precision: f64,
    /// Probability of landing within [`amplitude_estimation_bound`].
    pub within_bound: f64,
    /// The bound itself, for the oracle's mean.
    pub bound: f64,
}

/// Run an estimation spec and summarize the outcome distribution against `S f`.
pub fn estimation_outcome(
    spec: &AlgorithmSpec,
    f: &OracleFunction,
    t: u32,
    solution: SolutionOperator,
) -> Result<EstimationOutcome> {
    let state = run_algorithm(spec, f, &QueryConfig::default())?;
    let target = solution.solve(f);
    let bound = amplitude_estimation_bound(target, t);
    let within_bound = state
        .amplitudes()
        .iter()
        .zip(spec.solution())
        .filter(|(_, &phi)| (phi - target).abs() <= bound + 1e-12)
        .map(|(a, _)| a.norm_sqr())
        .sum();
    Ok(EstimationOutcome {
        precision: precision_at_threshold(&state, spec.solution(), target),
        within_bound,
        bound,
    })
}

/// Error-times-queries for evaluation by amplitude estimation at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessRow {
    pub t: u32,
    pub queries: usize,
    /// `(f(0), precision)` per oracle.
    pub per_oracle: Vec<(f64, f64)>,
    /// Worst precision over the oracle set.
    pub class_error: f64,
}

impl TightnessRow {
    pub fn class_product(&self) -> f64 {
        self.class_error * self.queries as f64
    }

    pub fn max_product(&self) -> f64 {
        self.per_oracle.iter().map(|p| p.1).fold(0.0, f64::max) * self.queries as f64
    }
}

/// Evaluate `f(0)` for every listed value with the `t`-qubit estimator.
pub fn evaluation_tightness(t: u32, values: &[f64]) -> Result<TightnessRow> {
    let spec = evaluation_phase_algorithm(t)?;
    let mut per_oracle = Vec::with_capacity(values.len());
    for &v in values {
        let f = OracleFunction::new(vec![v])?;
        let out = estimation_outcome(&spec, &f, t, SolutionOperator::Evaluation)?;
        per_oracle.push((v, out.precision));
    }
    let class_error = per_oracle.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(TightnessRow {
        t,
        queries: spec.query_count(),
        per_oracle,
        class_error,
    })
}

/// Grover iterate `(2|ψ><ψ| - I) S` on `[index n, target 1]` with `|ψ> = Q (H^n ⊗ I)|0>`,
/// assembled from dense factors. Used to cross-check the estimation circuit.
pub fn grover_iterate_dense(f: &OracleFunction) -> Result<DMatrix<Complex64>> {
    let n = f.index_bits();
    let layout = Layout::new(vec![n, 1])?;
    let dim = layout.dim();
    let q = to_dense(build_phase_query(f, PhaseEncoding::Identity)?.as_ref())?;
    let h = if n > 0 {
        let inner = hadamard_n(n)?;
        to_dense(embed(&layout, &[0], inner)?.as_ref())?
    } else {
        DMatrix::identity(dim, dim)
    };
    let a = &q * &h;
    let psi = a.column(0).clone_owned();
    let reflect =
        &psi * psi.adjoint() * Complex64::new(2.0, 0.0) - DMatrix::<Complex64>::identity(dim, dim);
    let s = DMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i & 1 == 1 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    Ok(reflect * s)
}
