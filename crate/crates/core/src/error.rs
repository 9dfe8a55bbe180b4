use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a bounded-semigroup generator: spectral abscissa {abscissa:e} > 0")]
    NotBoundedGenerator { abscissa: f64 },

    #[error("singular system: condition estimate {condition:e} exceeds {threshold:e}")]
    Singular { condition: f64, threshold: f64 },

    #[error("generator is not injective (0 is an eigenvalue)")]
    NonInjective,

    #[error("spectral oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("function undefined at eigenvalue {re}{im:+}i")]
    Domain { re: f64, im: f64 },

    #[error("divergent tail: {0}")]
    DivergentTail(String),

    #[error("divergent at the origin: {0}")]
    DivergentOrigin(String),

    #[error(
        "non-convergent integral: error estimate {error_estimate:e} above target {target:e} \
         after {panels} panels (T* = {t_star})"
    )]
    NonConvergent {
        error_estimate: f64,
        target: f64,
        panels: usize,
        t_star: f64,
    },

    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for the errors that mean "x is not in the numerical domain of g(A)":
    /// a tail that cannot be bounded or a quadrature that did not converge.
    pub fn is_non_convergent(&self) -> bool {
        matches!(self, Error::DivergentTail(_) | Error::DivergentOrigin(_) | Error::NonConvergent { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
