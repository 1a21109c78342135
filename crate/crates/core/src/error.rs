use thiserror::Error;

/// Errors raised by the simulator and optimisers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("missing link between {from} and {to}")]
    MissingLink { from: String, to: String },

    #[error("negative transmit power {power} W for BS {bs}, UE {ue}")]
    NegativePower { bs: usize, ue: usize, power: f64 },

    #[error("power budget exceeded at BS {bs}: {total} W > {p_max} W")]
    PowerBudget { bs: usize, total: f64, p_max: f64 },

    #[error("the macro base station cannot sleep")]
    MacroSleep,

    #[error("energy denominator must be positive, got {0}")]
    ZeroEnergy(f64),

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("support mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("time budget exceeded: {0}")]
    Timeout(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
