//! Tsallis-q entanglement of multi-qubit states and its monogamy relations.
//!
//! - [`linalg`]: dense complex matrices, Jacobi eigensolver, partial trace.
//! - [`states`]: GHZ/W families, seeded Haar and Ginibre sampling, state files.
//! - [`measures`]: concurrence, Tsallis entropy, `g_q`, `f_q` and derivatives.
//! - [`monogamy`]: CKW, squared-Tsallis and mu-power residuals, three-tangle.
//! - [`numerics`]: root finding, critical curves, convex-roof optimizer.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod measures;
pub mod monogamy;
pub mod numerics;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition};
pub use measures::{BipartitionSpec, QParam, QRegime};
pub use states::{DensityMatrix, QuantumState, SeededSampler, StateFile, StateVector};
