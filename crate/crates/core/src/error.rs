use thiserror::Error;

/// Errors raised anywhere in the shooting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step controller underflow at y = {y}")]
    StepFailure { y: f64 },
    #[error("orbit cannot be classified: {0}")]
    Unclassifiable(String),
    #[error("missing event {0}")]
    MissingEvent(&'static str),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("bracket invalid: classify({lo}) = {lo_case}, classify({hi}) = {hi_case}")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        lo_case: String,
        hi_case: String,
    },
    #[error("no sign change on [{p_lo}, {p_hi}]: residuals {r_lo:.6e} and {r_hi:.6e}")]
    NoSignChange {
        p_lo: f64,
        p_hi: f64,
        r_lo: f64,
        r_hi: f64,
    },
    #[error("insufficient samples near the pole: found {found}, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True when the failure came from the integrator rather than from inputs.
    pub fn is_integrator_failure(&self) -> bool {
        matches!(
            self,
            Error::StepFailure { .. } | Error::Domain(_) | Error::Unclassifiable(_)
        )
    }
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
