use super::algorithm::{run_algorithm, AlgorithmSpec, QueryConfig, QueryModel};
use crate::error::{contract, Result};
use crate::linalg::{
    apply, compose, spectral_norm, DifferenceMap, MeasurementProjection, Operator, StateVector,
};
use crate::oracles::{build_bit_query, build_boolean_query, build_phase_query, OracleFunction};

/// Operator-norm distance between two oracles' queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryDifference {
    /// Spectral norm of `Q_{f1} - Q_{f2}`.
    pub norm: f64,
    /// `max_j 2|sin((θ¹_j - θ²_j)/2)|`, phase model only.
    pub block_formula: Option<f64>,
}

fn query_for(f: &OracleFunction, model: QueryModel, config: &QueryConfig) -> Result<Operator> {
    match model {
        QueryModel::Phase => build_phase_query(f, config.phase),
        QueryModel::Boolean => build_boolean_query(f),
        QueryModel::Bit => build_bit_query(
            f,
            config
                .bit
                .as_ref()
                .ok_or_else(|| contract("bit model needs a bit encoding"))?,
        ),
    }
}

pub fn query_difference_norm(
    f1: &OracleFunction,
    f2: &OracleFunction,
    model: QueryModel,
    config: &QueryConfig,
) -> Result<QueryDifference> {
    if f1.len() != f2.len() {
        return Err(contract(format!(
            "oracles of size {} and {}",
            f1.len(),
            f2.len()
        )));
    }
    let diff = DifferenceMap::new(query_for(f1, model, config)?, query_for(f2, model, config)?)?;
    let norm = spectral_norm(&diff)?;
    let block_formula = (model == QueryModel::Phase).then(|| {
        (0..f1.len())
            .map(|j| {
                let d = config.phase.angle(f1.queried(j)) - config.phase.angle(f2.queried(j));
                2.0 * (d / 2.0).sin().abs()
            })
            .fold(0.0, f64::max)
    });
    Ok(QueryDifference {
        norm,
        block_formula,
    })
}

/// `‖R(θ₁) - R(θ₂)‖` for `sin²θ₁ = ½`, `sin²θ₂ = ½ - 2ε`:
/// `√(2 - √(1+4ε) - √(1-4ε))`.
pub fn phase_pair_closed_form(eps: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&eps) {
        return Err(contract(format!("ε = {eps} outside [0, ¼]")));
    }
    Ok((2.0 - (1.0 + 4.0 * eps).sqrt() - (1.0 - 4.0 * eps).sqrt())
        .max(0.0)
        .sqrt())
}

/// Oracle pair `f₁(0) = ½`, `f₂(0) = ½ - 2ε` on a one-point domain.
pub fn theorem_pair(eps: f64) -> Result<(OracleFunction, OracleFunction)> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(contract(format!("ε = {eps} outside (0, ¼)")));
    }
    Ok((
        OracleFunction::new(vec![0.5])?,
        OracleFunction::new(vec![0.5 - 2.0 * eps])?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationCheck {
    /// `|p₁ - p₂|`.
    pub lhs: f64,
    /// `‖ψ₁ - ψ₂‖` of the final states.
    pub state_distance: f64,
    /// `2 n_q ‖Q_{f1} - Q_{f2}‖`.
    pub rhs: f64,
    pub query_norm: f64,
}

impl PerturbationCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// Compare the change in success probability with the query-difference budget.
pub fn probability_perturbation_check(
    spec: &AlgorithmSpec,
    f1: &OracleFunction,
    f2: &OracleFunction,
    kept: &MeasurementProjection,
    config: &QueryConfig,
) -> Result<PerturbationCheck> {
    if spec.slots().iter().any(|s| s.model != QueryModel::Phase) {
        return Err(contract(
            "perturbation check needs phase queries in every slot",
        ));
    }
    let s1 = run_algorithm(spec, f1, config)?;
    let s2 = run_algorithm(spec, f2, config)?;
    let lhs = (kept.probability(&s1) - kept.probability(&s2)).abs();
    let state_distance = s1
        .amplitudes()
        .iter()
        .zip(s2.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let query_norm = query_difference_norm(f1, f2, QueryModel::Phase, config)?.norm;
    Ok(PerturbationCheck {
        lhs,
        state_distance,
        rhs: 2.0 * spec.query_count() as f64 * query_norm,
        query_norm,
    })
}

/// `(|p_U - p_V|, 2‖U - V‖)` for the probability of landing in `kept` after
/// applying `U` or `V` to `psi`.
pub fn projection_probability_gap(
    u: Operator,
    v: Operator,
    psi: &StateVector,
    kept: &MeasurementProjection,
) -> Result<(f64, f64)> {
    let pu = kept.probability(&apply(u.as_ref(), psi)?);
    let pv = kept.probability(&apply(v.as_ref(), psi)?);
    let norm = spectral_norm(&DifferenceMap::new(u, v)?)?;
    Ok(((pu - pv).abs(), 2.0 * norm))
}

/// `(‖AB - CD‖, ‖A - C‖ + ‖B - D‖)`.
pub fn product_difference_check(
    a: Operator,
    b: Operator,
    c: Operator,
    d: Operator,
) -> Result<(f64, f64)> {
    let ab: Operator = compose(vec![b.clone(), a.clone()])?;
    let cd: Operator = compose(vec![d.clone(), c.clone()])?;
    let lhs = spectral_norm(&DifferenceMap::new(ab, cd)?)?;
    let rhs =
        spectral_norm(&DifferenceMap::new(a, c)?)? + spectral_norm(&DifferenceMap::new(b, d)?)?;
    Ok((lhs, rhs))
}
