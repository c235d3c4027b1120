//! Complex state vectors, matrix-free operators and spectral norms.
//!
//! Operators never materialize unless asked to: [`to_dense`] is gated at
//! [`MAX_DENSE_DIM`], and norms of differences between large maps are taken
//! over a small domain basis instead of the whole space.

mod layout;
mod maps;
mod norm;
mod random;
mod state;

pub use layout::{Layout, MAX_DIM_BITS};
pub use maps::{
    apply, apply_raw, compose, embed, tensor_product, to_dense, ComposedMap, DenseMap, DiagonalMap,
    DifferenceMap, EmbeddedMap, IdentityMap, LinearMap, Operator, PermutationMap, QubitRotationMap,
    TensorMap, MAX_DENSE_DIM,
};
pub use norm::{
    largest_singular_value, restricted_difference_norm, restricted_difference_norm_on_indices,
    restricted_difference_norm_with_tol, restricted_unitarity_defect, spectral_norm,
    unitarity_defect, DEFAULT_TOL,
};
pub use random::{random_state, random_unitary};
pub use state::{MeasurementProjection, StateVector};

pub use num_complex::Complex64;
