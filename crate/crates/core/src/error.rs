//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by topology construction, the simulation engines and the
/// estimators.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("node {node} is the root and has no predecessor")]
    NoPredecessor { node: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("state of {qubits} qubits exceeds the dense-engine cap of {max}")]
    QubitCapacity { qubits: usize, max: usize },

    #[error("state is not diagonal in the requested basis (residual {residual:.3e})")]
    NotDiagonal { residual: f64 },

    #[error("record from scheme {got} cannot be used here (expected {expected})")]
    WrongScheme { expected: String, got: String },

    #[error("uninformative pair: |a_jk| = {a:.3e} below threshold")]
    UninformativePair { a: f64 },

    #[error("inconsistent statistics: discriminant {discriminant:.3e} below tolerance")]
    InconsistentStatistics { discriminant: f64 },

    #[error("theta_0 estimate {theta0} is too close to 1/2; the scheme cannot resolve the remaining parameters")]
    SingularParameter { theta0: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("model is singular at the requested point: {0}")]
    SingularModel(String),
}
