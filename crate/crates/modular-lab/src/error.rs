//! Error type shared by every module of the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the toolkit.
///
/// Mathematical *verdicts* (a family fails to commute, a channel does not
/// exist) are ordinary return values, never errors. Errors are precondition
/// violations, malformed inputs, or internal consistency breaches.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry residual {residual:.3e}")]
    NonHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("algebra is not abelian: maximum commutator norm {residual:.3e}")]
    NotAbelian { residual: f64 },

    #[error("no sufficiently generic element found after {attempts} seeded attempts")]
    DegenerateGeneric { attempts: usize },

    #[error("state '{name}' is not faithful")]
    NotFaithful { name: String },

    #[error("operator does not lie in the algebra: projection residual {residual:.3e}")]
    NotInAlgebra { residual: f64 },

    #[error("operator does not commute with the reference density: residual {residual:.3e}")]
    NotCentralized { residual: f64 },

    #[error("density is not normalized: trace {trace:.6}")]
    NotNormalized { trace: f64 },

    #[error("states do not commute pairwise: residual {residual:.3e}")]
    NotCommuting { residual: f64 },

    #[error("state family does not commute jointly: residual {residual:.3e}")]
    NotJointlyCommuting { residual: f64 },

    #[error("state family contains no faithful state; a commuting-family verdict requires a faithful member")]
    NoFaithfulState,

    #[error("states live on different algebras")]
    AlgebraMismatch,

    #[error("equivalent conditions disagree (tolerance pathology or internal bug): {details}")]
    EquivalenceViolation { details: String },

    #[error("ambient dimension {dim} exceeds the supported maximum {max} for this operation")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("invalid algebra: {reason}")]
    InvalidAlgebra { reason: String },

    #[error("unknown state name '{name}'")]
    UnknownState { name: String },

    #[error("invalid problem file: {reason}")]
    InvalidProblem { reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code contract: 2 for input/usage problems, 3 for internal
    /// consistency violations. Negative verdicts (exit 1) are not errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EquivalenceViolation { .. } => 3,
            _ => 2,
        }
    }
}
