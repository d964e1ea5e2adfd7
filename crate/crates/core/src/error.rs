use thiserror::Error;

/// Errors produced by profile handling and model evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid profile: {}", .0.join("; "))]
    InvalidProfile(Vec<String>),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("{what} = {value} is not a power of two")]
    NotPowerOfTwo { what: &'static str, value: u64 },

    #[error("c = {c} does not divide p = {p}")]
    LayersDoNotDivide { c: u64, p: u64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("insufficient samples: distance {distance} has {found} distinct process counts, degree {degree} needs {needed}")]
    InsufficientSamples {
        distance: u64,
        found: usize,
        degree: usize,
        needed: usize,
    },

    #[error("target not beyond sampled range: p_target = {target}, largest sampled p = {max_sampled}")]
    TargetNotBeyondSamples { target: u64, max_sampled: u64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidProfile(_) => "invalid-profile",
            Error::UnknownKernel(_) => "unknown-kernel",
            Error::NotPowerOfTwo { .. } => "not-power-of-two",
            Error::LayersDoNotDivide { .. } => "layers-do-not-divide",
            Error::InvalidScenario(_) => "invalid-scenario",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::TargetNotBeyondSamples { .. } => "target-not-beyond-samples",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
