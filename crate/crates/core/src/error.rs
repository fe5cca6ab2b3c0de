use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target vertex set is empty")]
    EmptyTargetSet,

    #[error("inner window holds {found} giant-component vertices, need at least {needed}")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("theorem hypotheses not satisfied: {0}")]
    ConditionViolated(String),

    #[error("vertex {0} is not reached from the source")]
    Unreached(usize),

    #[error("sampled point {0} coincides with a lattice vertex; re-seed")]
    LatticeCollision(usize),

    #[error("hop budget {0} is smaller than 1")]
    BudgetTooSmall(u64),

    #[error("invalid schedule parameters: {0}")]
    InvalidSchedule(String),

    #[error("integer overflow in group arithmetic")]
    IntegerOverflow,

    #[error("element outside the enumerated ball of radius {0}")]
    BudgetExceeded(u32),

    #[error("invalid experiment spec: {0}")]
    SpecInvalid(String),

    #[error("format version mismatch: file has {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SpecInvalid(_) | Error::InvalidConfig(_) | Error::InvalidSchedule(_) | Error::WindowTooSmall { .. } => 2,
            Error::ConditionViolated(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
