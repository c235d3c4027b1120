//! Algorithms built from queries, the success criterion, estimation of
//! `f(0)` and of the mean, and the perturbation and lower-bound checks.

mod algorithm;
mod estimation;
mod perturbation;
mod theorem1;

pub use algorithm::{
    achieved_precision, algorithm_operator, mass_within, precision_at_threshold,
    random_phase_algorithm, run_algorithm, run_with_angles, sequential_phase_algorithm,
    success_probability, AlgorithmBuilder, AlgorithmSpec, ProblemInstance, QueryConfig, QueryModel,
    QuerySlot, SolutionOperator, SUCCESS_THRESHOLD,
};
pub use estimation::{
    amplitude_estimation_bound, amplitude_estimation_bound_uniform, estimation_outcome,
    estimation_query_count, evaluation_bit_algorithm, evaluation_phase_algorithm,
    evaluation_tightness, grover_iterate_dense, inverse_qft, mean_estimation_algorithm,
    EstimationOutcome, TightnessRow, MAX_PRECISION_BITS,
};
pub use perturbation::{
    phase_pair_closed_form, probability_perturbation_check, product_difference_check,
    projection_probability_gap, query_difference_norm, theorem_pair, PerturbationCheck,
    QueryDifference,
};
pub use theorem1::{phase_queries_needed, theorem1_ingredient_check, Theorem1Report};
