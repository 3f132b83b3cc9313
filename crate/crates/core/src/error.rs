use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("no cooling lasers configured: `rabi` is empty")]
    NoCoolingModes,

    #[error("cavity coupling y is zero; {0} is undefined")]
    ZeroCavityCoupling(&'static str),

    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hilbert-space dimension {dim} exceeds the limit of {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("density-matrix invariant `{invariant}` violated at t = {t}: {value:e}")]
    InvariantViolation { invariant: &'static str, t: f64, value: f64 },

    #[error("top Fock level of the {mode} mode holds population {population:e} at t = {t}; raise cutoff")]
    CutoffExceeded { mode: &'static str, t: f64, population: f64 },

    #[error("imaginary residue {residue:e} in extracted moment `{moment}` exceeds 1e-10")]
    ImaginaryResidue { moment: &'static str, residue: f64 },

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}
