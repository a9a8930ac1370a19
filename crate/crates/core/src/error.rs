use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("{what} must be square, got {rows}x{cols}")]
    NotSquare { what: String, rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator basis `{0}` is not orthogonal")]
    NonOrthogonalBasis(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("detuning too small: |Δω| = {detuning:.4e} rad/s must be at least {ratio}·|S| = {limit:.4e} rad/s")]
    DetuningTooSmall { detuning: f64, ratio: f64, limit: f64 },

    #[error("decoherence model `{model}` cannot be combined with gate `{gate}`")]
    IncompatibleModel { model: String, gate: String },

    #[error("operation not supported for gate `{gate}`: {reason}")]
    UnsupportedGate { gate: String, reason: String },

    #[error("quantity undefined: {0}")]
    Undefined(String),

    #[error("output state {index}: {reason}")]
    InvalidState { index: usize, reason: String },

    #[error("process data inconsistent: {0}")]
    Inconsistent(String),

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: String, found: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: String, name: String },

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }

    /// Whether the error stems from a physicality or data-consistency check
    /// rather than from malformed input.
    pub fn is_consistency_failure(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::InvalidState { .. }
                | Error::Inconsistent(_)
                | Error::Undefined(_)
                | Error::Singular
                | Error::NonFinite
        )
    }
}
