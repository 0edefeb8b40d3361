use thiserror::Error;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimension {0} exceeds the supported maximum")]
    TooLarge(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("eigenvalue {0:e} is below the negative clamping threshold")]
    NegativeEigenvalue(f64),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate qubit index {0}")]
    DuplicateIndex(usize),

    #[error("unsupported number of qubits: {0}")]
    UnsupportedSize(usize),

    #[error("value {value} outside the allowed range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("rank {rank} invalid for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid bipartition: {0}")]
    BadPartition(String),

    #[error("expected a two-qubit state, got {0} qubits")]
    NotTwoQubits(usize),

    #[error("invalid Tsallis order q = {0}")]
    InvalidQ(f64),

    #[error("q = {0} lies outside the analytic range [(5-sqrt13)/2, (5+sqrt13)/2]")]
    QOutsideAnalyticRange(f64),

    #[error("q = 1 is singular for this expression")]
    QIsOne,

    #[error("x = {0} is an endpoint where the expression is singular")]
    Endpoint(f64),

    #[error("three-tangle {0:e} is negative beyond tolerance")]
    NegativeBeyondTolerance(f64),

    #[error("pairwise entanglement {value:e} is zero for non-positive power mu = {mu}")]
    ZeroBaseNonpositivePower { value: f64, mu: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
