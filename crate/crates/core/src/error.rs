use thiserror::Error;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial samples must be distinct")]
    IdenticalInitSamples,
    #[error("operation needs at least {needed} neurons, network has {have}")]
    TooFewNeurons { needed: usize, have: usize },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("activity {0} outside (0, 1]")]
    InvalidActivity(f64),
    #[error("neuron {0} has no associations")]
    NoAssociation(usize),
    #[error("association table does not match network `{0}`")]
    StaleTable(alloc::string::String),
    #[error("joint {joint} angle {angle} outside limits [{min}, {max}]")]
    JointOutOfLimits { joint: usize, angle: f64, min: f64, max: f64 },
    #[error("invalid kinematic model: {0}")]
    InvalidModel(&'static str),
    #[error("target is not in view")]
    NotInView,
    #[error("missing model: {0}")]
    MissingModel(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
