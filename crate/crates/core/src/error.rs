use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("value out of floating range at p={p}, x={x}, t={t}")]
    Range { p: f64, x: f64, t: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change found: {0}")]
    NoSignChange(String),

    #[error("boundary invariant violated: a={a} must exceed c*sqrt(b)={bound} (c={c}, b={b})")]
    Boundary { c: f64, a: f64, b: f64, bound: f64 },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("state space cap exceeded: {states} states > {cap}")]
    StateSpace { states: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite(_) => "non_finite",
            Error::Quadrature { .. } => "quadrature",
            Error::Range { .. } => "range",
            Error::Domain(_) => "domain",
            Error::NoSignChange(_) => "no_sign_change",
            Error::Boundary { .. } => "boundary",
            Error::Distribution(_) => "distribution",
            Error::StateSpace { .. } => "state_space",
            Error::Invalid(_) => "invalid",
            Error::SearchExhausted(_) => "search_exhausted",
            Error::Io(_) => "io",
        }
    }
}
