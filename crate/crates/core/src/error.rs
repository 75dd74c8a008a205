use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} index {index} out of range (must be < {bound})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: state has (N={found_sites}, b={found_bits}), expected (N={sites}, b={bits})")]
    ShapeMismatch {
        sites: usize,
        bits: u32,
        found_sites: usize,
        found_bits: u32,
    },

    #[error("dense oracle limited to N·b <= {limit} qubits, requested {requested}")]
    OracleTooLarge { requested: usize, limit: usize },

    #[error("state of {requested} qubits exceeds the capacity ceiling of {limit} qubits")]
    Capacity { requested: usize, limit: usize },

    #[error("time {t} is not an integer multiple of dt = {dt}")]
    NotOnTimeGrid { t: f64, dt: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
