use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`Error::is_numeric`] failures to exit code 3 and everything
/// else to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter of dimension {got} given to a family with {expected} parameters")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    #[error("divergence undefined: blended precision has eigenvalue {eigenvalue:e} <= 0")]
    DivergenceUndefined { eigenvalue: f64 },

    #[error("quadrature did not converge after {panels} panels (last two estimates {previous:e}, {current:e})")]
    QuadratureNonConvergence {
        panels: usize,
        previous: f64,
        current: f64,
    },

    #[error("non-finite log-derivative at observation {observation}")]
    NonFiniteDerivative { observation: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("enumeration of 2^{generators} combinations exceeds the cap of 2^{cap}")]
    EnumerationCap { generators: usize, cap: usize },

    #[error("estimation impossible: all {reps} replicates produced infinite divergence")]
    EstimationImpossible { reps: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateEstimate(_)
                | Error::DivergenceUndefined { .. }
                | Error::QuadratureNonConvergence { .. }
                | Error::NonFiniteDerivative { .. }
                | Error::Numeric(_)
                | Error::EstimationImpossible { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
