//! Simulation of quantum queries to real-valued functions.
//!
//! The crate models the three standard query types (bit, phase and Boolean)
//! as explicit linear maps on small register files, builds the two-query
//! circuit that turns a bit query into a phase query, and provides the
//! numerical tools for checking query-complexity bounds: operator norms,
//! trigonometric-polynomial fits of output amplitudes, amplitude estimation
//! and perturbation estimates.
//!
//! Dimensions are deliberately small. Every state vector is held densely and
//! operator norms are computed from explicit matrices.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod oracles;
pub mod phase_from_bit;
pub mod trigpoly;

pub use error::{Error, Result};
pub use linalg::{Complex64, Layout, LinearMap, Operator, StateVector};
pub use oracles::{BitEncoding, OracleFunction, PhaseEncoding};
