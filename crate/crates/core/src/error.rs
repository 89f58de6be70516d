use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Instance document failed to parse or validate. `path` names the
    /// offending field, e.g. `rewards[2][3]`.
    #[error("{path}: {message}")]
    InvalidInstance { path: String, message: String },

    #[error("optimal arm not unique: arms {0:?} share the largest mean")]
    OptimalArmNotUnique(Vec<usize>),

    #[error("reward {0} is not binary")]
    NonBinaryReward(u8),

    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no positive gap: threshold condition can never hold")]
    NoPositiveGap,

    #[error("missing divergence for strictly competitive arm {0}")]
    MissingDivergence(usize),

    #[error("cannot estimate regret from an empty set of traces")]
    EmptyTraces,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn instance(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            path: path.into(),
            message: message.into(),
        }
    }
}
