use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for {size} elements")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("set of width {got} used with a poset of {expected} elements")]
    SizeMismatch { expected: usize, got: usize },

    #[error("resource limit exceeded: {what} (limit {limit}) while building level {level}; nodes per level so far {partial:?}")]
    ResourceLimit {
        what: String,
        limit: u64,
        level: usize,
        partial: Vec<usize>,
    },

    #[error("operands live in different ambient models")]
    AmbientMismatch,

    #[error("depth {have} is insufficient, need at least {need}")]
    DepthInsufficient { have: usize, need: usize },

    #[error("variable p{index} out of range for n = {n}")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("model is not reduced: {0}")]
    NotReduced(String),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("not decidable for this descriptor: {0}")]
    Undecidable(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("cap of {0} elements exceeded")]
    CapExceeded(usize),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. } | Error::CapExceeded(_))
    }
}
