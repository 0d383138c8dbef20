use crate::net_model::ValidationReport;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("unknown component id `{0}`")]
    UnknownComponent(String),
    #[error("invalid removal: {0}")]
    InvalidRemoval(String),
    #[error("variant network disconnects the terminals")]
    VariantDisconnected,
    #[error("the all-working graph is disconnected")]
    Disconnected,
    #[error("network is invalid: {0}")]
    Invalid(ValidationReport),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("no lifetime distribution for class {0}")]
    MissingDistribution(usize),
    #[error("operation requires {expected:?} failure mode")]
    FailureModeMismatch {
        expected: crate::net_model::FailureMode,
    },
    #[error("exact enumeration over {components} components exceeds the limit of {limit}")]
    ExactIntractable { components: usize, limit: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("conflicting labels for a repeated state vector")]
    ConflictingLabel,
    #[error("sample pool too small: need {need}, have {have}")]
    PoolTooSmall { need: usize, have: usize },
    #[error("grids differ between curves")]
    GridMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file does not match network: {0}")]
    ModelMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::UnknownNode(_) => "unknown_node",
            Error::UnknownComponent(_) => "unknown_component",
            Error::InvalidRemoval(_) => "invalid_removal",
            Error::VariantDisconnected => "variant_disconnected",
            Error::Disconnected => "disconnected",
            Error::Invalid(_) => "invalid_network",
            Error::NegativeTime(_) => "negative_time",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::MissingDistribution(_) => "missing_distribution",
            Error::FailureModeMismatch { .. } => "failure_mode_mismatch",
            Error::ExactIntractable { .. } => "exact_intractable",
            Error::EmptyTrainingSet => "empty_training_set",
            Error::ConflictingLabel => "conflicting_label",
            Error::PoolTooSmall { .. } => "pool_too_small",
            Error::GridMismatch => "grid_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
            Error::ModelMismatch(_) => "model_mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status: 2 invalid network, 3 intractable exact run, 4 I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::ModelMismatch(_) => 2,
            Error::ExactIntractable { .. } => 3,
            Error::Io(_) => 4,
            _ => 1,
        }
    }
}
