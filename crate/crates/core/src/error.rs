use thiserror::Error;

use crate::geometry::ApId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown access point {0}")]
    UnknownAp(ApId),

    #[error("degenerate area: {width} x {height}")]
    DegenerateArea { width: f64, height: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("trace too short: {len} samples, need at least {needed}")]
    TraceTooShort { len: usize, needed: usize },

    #[error("step frequency {0} Hz outside supported range")]
    FrequencyOutOfRange(f64),

    #[error("sample rate {sample_rate} Hz does not exceed twice the step frequency {step_frequency} Hz")]
    Aliasing { sample_rate: f64, step_frequency: f64 },

    #[error("coincident points")]
    CoincidentPoints,

    #[error("fusion pool has {0} recorded iterations, need at least two")]
    TooFewIterations(usize),

    #[error("unknown floor component {0}")]
    UnknownComponent(u64),

    #[error("floor component {0} is locked")]
    ComponentLocked(u64),

    #[error("session is closed")]
    SessionClosed,

    #[error("malformed command: {0}")]
    MalformedCommand(String),

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { found: String, expected: String },

    #[error("corrupt input: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
