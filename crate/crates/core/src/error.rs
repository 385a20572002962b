use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Validation failures raised while building or reading an [`crate::Atom`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AtomError {
    #[error("malformed atom document: {0}")]
    Malformed(String),
    #[error("shell {label}: mean radius must be positive and finite, got {value} m")]
    InvalidRadius { label: String, value: f64 },
    #[error("shell {label}: occupancy must be at least 1")]
    EmptyShell { label: String },
    #[error("shell {label}: occupancy {occupancy} exceeds subshell capacity {capacity}")]
    OverfilledShell { label: String, occupancy: u32, capacity: u32 },
    #[error("shell {label}: alpha override must be positive and finite, got {value}")]
    InvalidAlphaOverride { label: String, value: f64 },
    #[error("duplicate shell label {0}")]
    DuplicateShell(String),
    #[error("atom {symbol} is flagged neutral but has {electrons} electrons for Z = {protons}")]
    OccupancyMismatch { symbol: String, protons: u32, electrons: u32 },
    #[error("atom has no shells")]
    NoShells,
    #[error("atomic number must be at least 1")]
    NoProtons,
    #[error("unknown builtin atom {0:?}")]
    UnknownSymbol(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("photon energy must be positive, got {0} keV")]
    NonPositiveEnergy(f64),
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter { name: &'static str, requirement: &'static str, value: f64 },
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error("quadrature did not converge: estimated relative error {achieved:e} above requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("model {model} cannot be evaluated with {given} parameters")]
    ModelMismatch { model: &'static str, given: &'static str },
    #[error("invalid energy grid: {0}")]
    InvalidGrid(String),
    #[error("spectra are not comparable: {0}")]
    GridMismatch(String),
    #[error("spectrum is already normalized")]
    AlreadyNormalized,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("correlation-length update returned a non-finite or non-positive value at iteration {iteration}")]
    NonFiniteUpdate { iteration: usize, trace: Vec<crate::inference::IterationRecord> },
    #[error("invalid file contents: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::InvalidParameter { name, requirement, value }
    }
}

/// `value` must be finite and strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, "positive and finite", value))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, "non-negative and finite", value))
    }
}
