use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("exponent group mismatch")]
    GroupMismatch,
    #[error("unsupported integrand{}: {reason}", layer.map(|l| format!(" at layer {l}")).unwrap_or_default())]
    UnsupportedIntegrand { layer: Option<usize>, reason: String },
    #[error("nonlinear factor required: {0}")]
    NonlinearFactorRequired(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("set is not R-bounded")]
    NotRBounded,
    #[error("map is not monotone: {0}")]
    NotMonotone(String),
    #[error("coefficient extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("no real instantiation available: {0}")]
    OracleUnavailable(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn unsupported(reason: impl Into<String>) -> Self {
        Error::UnsupportedIntegrand { layer: None, reason: reason.into() }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precision(msg: impl Into<String>) -> Self {
        Error::PrecisionExhausted(msg.into())
    }

    pub fn at_layer(self, layer: usize) -> Self {
        match self {
            Error::UnsupportedIntegrand { layer: None, reason } => {
                Error::UnsupportedIntegrand { layer: Some(layer), reason }
            }
            other => other,
        }
    }
}
