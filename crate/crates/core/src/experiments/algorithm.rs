use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::linalg::{
    apply_raw, compose, embed, random_unitary, IdentityMap, Layout, Operator, StateVector,
    DEFAULT_TOL,
};
use crate::oracles::{
    build_bit_query, build_boolean_query, build_phase_query, build_phase_query_from_angles,
    BitEncoding, OracleFunction, PhaseEncoding,
};

/// Success threshold for solving a problem.
pub const SUCCESS_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryModel {
    Bit,
    Phase,
    Boolean,
}

/// Where a query acts: the index register and the target (phase, Boolean)
/// or value (bit) register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuerySlot {
    pub model: QueryModel,
    pub index_register: usize,
    pub target_register: usize,
}

impl QuerySlot {
    pub fn phase(index_register: usize, target_register: usize) -> Self {
        Self {
            model: QueryModel::Phase,
            index_register,
            target_register,
        }
    }

    pub fn bit(index_register: usize, target_register: usize) -> Self {
        Self {
            model: QueryModel::Bit,
            index_register,
            target_register,
        }
    }

    pub fn boolean(index_register: usize, target_register: usize) -> Self {
        Self {
            model: QueryModel::Boolean,
            index_register,
            target_register,
        }
    }
}

/// Encodings used when turning an oracle into query unitaries.
#[derive(Debug, Clone)]
pub struct QueryConfig {
    pub bit: Option<BitEncoding>,
    pub phase: PhaseEncoding,
}

impl QueryConfig {
    pub fn phase(phase: PhaseEncoding) -> Self {
        Self { bit: None, phase }
    }

    pub fn bit(enc: BitEncoding) -> Self {
        Self {
            bit: Some(enc),
            phase: PhaseEncoding::Identity,
        }
    }
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self::phase(PhaseEncoding::Identity)
    }
}

/// `U_nq Q U_{nq-1} ... U_1 Q U_0 |ψ>` followed by a classical map `φ` on outcomes.
#[derive(Debug, Clone)]
pub struct AlgorithmSpec {
    layout: Layout,
    start: StateVector,
    unitaries: Vec<Operator>,
    slots: Vec<QuerySlot>,
    solution: Vec<f64>,
}

impl AlgorithmSpec {
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn start(&self) -> &StateVector {
        &self.start
    }

    /// `U_0 .. U_nq`.
    pub fn unitaries(&self) -> &[Operator] {
        &self.unitaries
    }

    pub fn slots(&self) -> &[QuerySlot] {
        &self.slots
    }

    /// `φ(k)` for every basis outcome `k`.
    pub fn solution(&self) -> &[f64] {
        &self.solution
    }

    pub fn query_count(&self) -> usize {
        self.slots.len()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Same algorithm with a different outcome map.
    pub fn with_solution(mut self, solution: Vec<f64>) -> Result<Self> {
        if solution.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: solution.len(),
            });
        }
        self.solution = solution;
        Ok(self)
    }

    /// Dimension of the index register shared by every phase slot, if the
    /// algorithm only makes phase queries.
    pub fn phase_index_dim(&self) -> Result<usize> {
        let mut dim = None;
        for slot in &self.slots {
            if slot.model != QueryModel::Phase {
                return Err(contract("algorithm makes non-phase queries"));
            }
            let d = self.layout.register_dim(slot.index_register)?;
            if dim.is_some_and(|x| x != d) {
                return Err(contract(
                    "phase slots use index registers of different sizes",
                ));
            }
            dim = Some(d);
        }
        Ok(dim.unwrap_or(1))
    }

    fn run_with(
        &self,
        mut query: impl FnMut(&QuerySlot) -> Result<Operator>,
    ) -> Result<StateVector> {
        let mut cache: Vec<(QuerySlot, Operator)> = Vec::new();
        let mut state = apply_raw(self.unitaries[0].as_ref(), self.start.amplitudes())?;
        for (slot, u) in self.slots.iter().zip(&self.unitaries[1..]) {
            let q = match cache.iter().find(|(s, _)| s == slot) {
                Some((_, q)) => q.clone(),
                None => {
                    let inner = query(slot)?;
                    let q = embed(
                        &self.layout,
                        &[slot.index_register, slot.target_register],
                        inner,
                    )?;
                    cache.push((*slot, q.clone()));
                    q
                }
            };
            state = apply_raw(q.as_ref(), &state)?;
            state = apply_raw(u.as_ref(), &state)?;
        }
        StateVector::new(state, self.layout.clone())
    }
}

/// Incremental construction of an [`AlgorithmSpec`]. Unitaries added between
/// two queries are composed into a single `U_k`.
#[derive(Debug)]
pub struct AlgorithmBuilder {
    layout: Layout,
    pending: Vec<Operator>,
    unitaries: Vec<Operator>,
    slots: Vec<QuerySlot>,
}

impl AlgorithmBuilder {
    pub fn new(layout: Layout) -> Self {
        Self {
            layout,
            pending: Vec::new(),
            unitaries: Vec::new(),
            slots: Vec::new(),
        }
    }

    /// Append an f-independent unitary on the full layout.
    pub fn unitary(mut self, op: Operator) -> Self {
        self.pending.push(op);
        self
    }

    /// Append a unitary acting on some registers only.
    pub fn unitary_on(self, registers: &[usize], op: Operator) -> Result<Self> {
        let wide = embed(&self.layout, registers, op)?;
        Ok(self.unitary(wide))
    }

    pub fn query(mut self, slot: QuerySlot) -> Self {
        self.flush();
        self.slots.push(slot);
        self
    }

    fn flush(&mut self) {
        let stages = std::mem::take(&mut self.pending);
        let u: Operator = match stages.len() {
            0 => Arc::new(IdentityMap::new(self.layout.dim())),
            1 => stages.into_iter().next().expect("one stage"),
            _ => match compose(stages.clone()) {
                Ok(c) => c,
                // Shape errors surface in `build`.
                Err(_) => stages.into_iter().next().expect("nonempty"),
            },
        };
        self.unitaries.push(u);
    }

    pub fn build(mut self, start: StateVector, solution: Vec<f64>) -> Result<AlgorithmSpec> {
        self.flush();
        let dim = self.layout.dim();
        for (k, u) in self.unitaries.iter().enumerate() {
            if u.dim_in() != dim || u.dim_out() != dim {
                return Err(contract(format!(
                    "U_{k} is {}x{}, layout dimension {dim}",
                    u.dim_out(),
                    u.dim_in()
                )));
            }
        }
        for slot in &self.slots {
            if slot.index_register == slot.target_register {
                return Err(contract("query index and target registers coincide"));
            }
            self.layout.width(slot.index_register)?;
            let w = self.layout.width(slot.target_register)?;
            if matches!(slot.model, QueryModel::Phase | QueryModel::Boolean) && w != 1 {
                return Err(contract(format!(
                    "{:?} query needs a one-qubit target, got {w}",
                    slot.model
                )));
            }
        }
        if start.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: start.dim(),
            });
        }
        if !start.is_normalized(DEFAULT_TOL) {
            return Err(contract("start state is not normalized"));
        }
        if solution.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: solution.len(),
            });
        }
        let start = start.with_layout(self.layout.clone())?;
        Ok(AlgorithmSpec {
            layout: self.layout,
            start,
            unitaries: self.unitaries,
            slots: self.slots,
            solution,
        })
    }
}

/// Final pre-measurement state of `spec` on oracle `f`.
pub fn run_algorithm(
    spec: &AlgorithmSpec,
    f: &OracleFunction,
    config: &QueryConfig,
) -> Result<StateVector> {
    spec.run_with(|slot| {
        let n = spec.layout.width(slot.index_register)?;
        if f.len() != 1usize << n {
            return Err(contract(format!(
                "oracle has {} entries but the index register holds {n} qubits",
                f.len()
            )));
        }
        match slot.model {
            QueryModel::Phase => build_phase_query(f, config.phase),
            QueryModel::Boolean => build_boolean_query(f),
            QueryModel::Bit => {
                let enc = config
                    .bit
                    .as_ref()
                    .ok_or_else(|| contract("bit query slot without a bit encoding"))?;
                let m = spec.layout.width(slot.target_register)?;
                if enc.bits() != m {
                    return Err(contract(format!(
                        "encoding has {} bits, value register {m}",
                        enc.bits()
                    )));
                }
                build_bit_query(f, enc)
            }
        }
    })
}

/// Final state with every phase query given directly by its rotation angles.
pub fn run_with_angles(spec: &AlgorithmSpec, angles: &[f64]) -> Result<StateVector> {
    let expected = spec.phase_index_dim()?;
    if angles.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: angles.len(),
        });
    }
    let q = build_phase_query_from_angles(angles)?;
    spec.run_with(|_| Ok(q.clone()))
}

/// The map `f -> S f` being approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionOperator {
    /// `S f = f(0)`.
    Evaluation,
    /// `S f = (1/N) Σ f(j)`.
    Mean,
}

impl SolutionOperator {
    pub fn solve(self, f: &OracleFunction) -> f64 {
        match self {
            SolutionOperator::Evaluation => f.values()[0],
            SolutionOperator::Mean => f.values().iter().sum::<f64>() / f.len() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemInstance {
    pub solution: SolutionOperator,
    pub epsilon: f64,
}

impl ProblemInstance {
    pub fn evaluation(epsilon: f64) -> Self {
        Self {
            solution: SolutionOperator::Evaluation,
            epsilon,
        }
    }

    pub fn mean(epsilon: f64) -> Self {
        Self {
            solution: SolutionOperator::Mean,
            epsilon,
        }
    }
}

/// Probability mass on outcomes `k` with `|φ(k) - target| < ε`.
pub fn mass_within(state: &StateVector, solution: &[f64], target: f64, epsilon: f64) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(solution)
        .filter(|(_, &phi)| (phi - target).abs() < epsilon)
        .map(|(a, _)| a.norm_sqr())
        .sum()
}

/// Probability that the measured answer is within `ε` of `S f`.
pub fn success_probability(
    spec: &AlgorithmSpec,
    f: &OracleFunction,
    config: &QueryConfig,
    problem: &ProblemInstance,
) -> Result<f64> {
    let state = run_algorithm(spec, f, config)?;
    Ok(mass_within(
        &state,
        spec.solution(),
        problem.solution.solve(f),
        problem.epsilon,
    ))
}

/// Smallest error level `e` such that outcomes with `|φ(k) - target| <= e`
/// carry at least the success threshold of probability.
pub fn precision_at_threshold(state: &StateVector, solution: &[f64], target: f64) -> f64 {
    let mut outcomes: Vec<(f64, f64)> = state
        .amplitudes()
        .iter()
        .zip(solution)
        .map(|(a, &phi)| ((phi - target).abs(), a.norm_sqr()))
        .collect();
    outcomes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut mass = 0.0;
    for (err, p) in &outcomes {
        mass += p;
        if mass >= SUCCESS_THRESHOLD - 1e-12 {
            return *err;
        }
    }
    outcomes.last().map_or(0.0, |o| o.0)
}

/// [`precision_at_threshold`] after running `spec` on `f`.
pub fn achieved_precision(
    spec: &AlgorithmSpec,
    f: &OracleFunction,
    config: &QueryConfig,
    solution: SolutionOperator,
) -> Result<f64> {
    let state = run_algorithm(spec, f, config)?;
    Ok(precision_at_threshold(
        &state,
        spec.solution(),
        solution.solve(f),
    ))
}

/// Plain composition of all unitaries with the given oracle's queries, as one operator.
pub fn algorithm_operator(
    spec: &AlgorithmSpec,
    f: &OracleFunction,
    config: &QueryConfig,
) -> Result<Operator> {
    let mut stages: Vec<Operator> = vec![spec.unitaries[0].clone()];
    for (slot, u) in spec.slots.iter().zip(&spec.unitaries[1..]) {
        let inner: Operator = match slot.model {
            QueryModel::Phase => build_phase_query(f, config.phase)?,
            QueryModel::Boolean => build_boolean_query(f)?,
            QueryModel::Bit => build_bit_query(
                f,
                config
                    .bit
                    .as_ref()
                    .ok_or_else(|| contract("bit query slot without a bit encoding"))?,
            )?,
        };
        stages.push(embed(
            &spec.layout,
            &[slot.index_register, slot.target_register],
            inner,
        )?);
        stages.push(u.clone());
    }
    compose(stages)
}

/// `n_q` consecutive phase queries on `[index 0, target 1]` with nothing in
/// between; its amplitudes are `cos(n_q θ)` and `sin(n_q θ)`.
pub fn sequential_phase_algorithm(n_q: usize) -> Result<AlgorithmSpec> {
    let layout = Layout::new(vec![0, 1])?;
    let mut b = AlgorithmBuilder::new(layout.clone());
    for _ in 0..n_q {
        b = b.query(QuerySlot::phase(0, 1));
    }
    b.build(StateVector::basis(layout, 0)?, vec![0.0, 1.0])
}

/// Phase-query algorithm on `[index, target 1, work]` with Haar-random `U_k`
/// and start state `|0>`.
pub fn random_phase_algorithm<R: Rng + ?Sized>(
    rng: &mut R,
    index_bits: u32,
    work_bits: u32,
    n_q: usize,
) -> Result<AlgorithmSpec> {
    let layout = Layout::new(vec![index_bits, 1, work_bits])?;
    let dim = layout.dim();
    let mut b = AlgorithmBuilder::new(layout.clone());
    for _ in 0..n_q {
        b = b
            .unitary(Arc::new(random_unitary(dim, rng)?))
            .query(QuerySlot::phase(0, 1));
    }
    b = b.unitary(Arc::new(random_unitary(dim, rng)?));
    b.build(StateVector::basis(layout, 0)?, vec![0.0; dim])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Complex64, DenseMap};
    use nalgebra::DMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> Operator {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Arc::new(DenseMap::unitary(DMatrix::from_row_slice(2, 2, &[s, s, s, -s]), 1e-12).unwrap())
    }

    #[test]
    fn no_queries_returns_start() {
        let layout = Layout::new(vec![0, 1]).unwrap();
        let start = StateVector::basis(layout.clone(), 1).unwrap();
        let spec = AlgorithmBuilder::new(layout)
            .build(start.clone(), vec![0.0; 2])
            .unwrap();
        let f = OracleFunction::new(vec![0.4]).unwrap();
        assert_eq!(
            run_algorithm(&spec, &f, &QueryConfig::default()).unwrap(),
            start
        );
    }

    #[test]
    fn hadamard_then_phase_query() {
        // Layout [index 1, target 1]; H on the index, then Q with f(0) = 1, f(1) = 0.
        // |00> -> (|00> + |10>)/√2 -> (|01> + |10>)/√2.
        let layout = Layout::new(vec![1, 1]).unwrap();
        let spec = AlgorithmBuilder::new(layout.clone())
            .unitary_on(&[0], hadamard())
            .unwrap()
            .query(QuerySlot::phase(0, 1))
            .build(StateVector::basis(layout, 0).unwrap(), vec![0.0; 4])
            .unwrap();
        let f = OracleFunction::new(vec![1.0, 0.0]).unwrap();
        let out = run_algorithm(&spec, &f, &QueryConfig::default()).unwrap();
        let want = [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
        for (a, w) in out.amplitudes().iter().zip(want) {
            assert!((a - Complex64::new(w, 0.0)).norm() < 1e-15);
        }
        assert!(out.is_normalized(1e-10));
    }

    #[test]
    fn zero_oracle_is_a_no_op() {
        let layout = Layout::new(vec![1, 1]).unwrap();
        let spec = AlgorithmBuilder::new(layout.clone())
            .unitary_on(&[0], hadamard())
            .unwrap()
            .query(QuerySlot::phase(0, 1))
            .unitary_on(&[1], hadamard())
            .unwrap()
            .query(QuerySlot::phase(0, 1))
            .build(StateVector::basis(layout.clone(), 0).unwrap(), vec![0.0; 4])
            .unwrap();
        let no_queries = AlgorithmBuilder::new(layout.clone())
            .unitary_on(&[0], hadamard())
            .unwrap()
            .unitary_on(&[1], hadamard())
            .unwrap()
            .build(StateVector::basis(layout, 0).unwrap(), vec![0.0; 4])
            .unwrap();
        let f = OracleFunction::constant(1, 0.0).unwrap();
        let a = run_algorithm(&spec, &f, &QueryConfig::default()).unwrap();
        let b = run_algorithm(&no_queries, &f, &QueryConfig::default()).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn success_probability_extremes() {
        let layout = Layout::new(vec![0, 1]).unwrap();
        let f = OracleFunction::new(vec![0.3]).unwrap();
        let spec = AlgorithmBuilder::new(layout.clone())
            .query(QuerySlot::phase(0, 1))
            .build(StateVector::basis(layout, 0).unwrap(), vec![0.3, 0.3])
            .unwrap();
        let cfg = QueryConfig::default();
        let p = success_probability(&spec, &f, &cfg, &ProblemInstance::evaluation(0.01)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let far = spec.with_solution(vec![0.9, 0.9]).unwrap();
        assert_eq!(
            success_probability(&far, &f, &cfg, &ProblemInstance::evaluation(0.01)).unwrap(),
            0.0
        );
    }

    #[test]
    fn builder_rejects_bad_shapes() {
        let layout = Layout::new(vec![1, 2]).unwrap();
        let start = StateVector::basis(layout.clone(), 0).unwrap();
        assert!(AlgorithmBuilder::new(layout.clone())
            .query(QuerySlot::phase(0, 1))
            .build(start.clone(), vec![0.0; 8])
            .is_err());
        assert!(AlgorithmBuilder::new(layout.clone())
            .build(start.clone(), vec![0.0; 3])
            .is_err());
        assert!(AlgorithmBuilder::new(layout)
            .unitary(Arc::new(IdentityMap::new(4)))
            .build(start, vec![0.0; 8])
            .is_err());
    }

    #[test]
    fn oracle_size_must_match_index_register() {
        let layout = Layout::new(vec![1, 1]).unwrap();
        let spec = AlgorithmBuilder::new(layout.clone())
            .query(QuerySlot::phase(0, 1))
            .build(StateVector::basis(layout, 0).unwrap(), vec![0.0; 4])
            .unwrap();
        let f = OracleFunction::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(run_algorithm(&spec, &f, &QueryConfig::default()).is_err());
    }
}
