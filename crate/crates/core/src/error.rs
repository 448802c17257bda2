use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum QlbmError {
    #[error("unsupported lattice model: {0}")]
    UnsupportedModel(String),

    #[error("grid side {0} is not a power of two >= 2")]
    BadGridSide(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field has zero L2 norm")]
    ZeroNormField,

    #[error("negative collision weight k[{direction}] = {value} at site {site}; velocity too large")]
    NegativeWeight {
        site: usize,
        direction: usize,
        value: f64,
    },

    #[error("weight vector is invalid: {0}")]
    BadWeights(String),

    #[error("register layout needs {0} qubits, exceeding the dense-simulation bound of 30")]
    TooManyQubits(usize),

    #[error("register layout must contain at least one qubit")]
    EmptyLayout,

    #[error("gate touches qubit {qubit} but the state has only {total} qubits")]
    QubitOutOfRange { qubit: usize, total: usize },

    #[error("custom gate matrix is not unitary (max deviation {0:.3e})")]
    NonUnitaryGate(f64),

    #[error("post-selection impossible: outcome probability {0:.3e} below threshold")]
    PostSelectionImpossible(f64),

    #[error("noise parameter out of range: {0}")]
    BadNoiseParameter(String),

    #[error("stochastic consistency violated: sum of incoming weights deviates by {deviation:.3e} at site {site}")]
    NotStochastic { site: usize, deviation: f64 },

    #[error("circuit synthesis not supported: {0}")]
    UnsupportedSynthesis(String),

    #[error("circuit carries no collision-tagged segments")]
    UntaggedCircuit,

    #[error("empty measurement data")]
    EmptyCounts,

    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,

    #[error("background offset {0} clips the entire distribution")]
    BackgroundTooLarge(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QlbmError>;
