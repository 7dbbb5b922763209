use thiserror::Error;

/// Errors raised by the construction, channel, decoding and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("projection direction has zero norm")]
    ZeroDirection,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("minimum projective distance {min_proj_dist} exceeds sphere diameter {}", 2.0 * radius)]
    Infeasible { radius: f64, min_proj_dist: f64 },

    #[error("placed {placed} of {requested} points before exhausting {max_attempts} attempts")]
    PlacementExhausted {
        placed: usize,
        requested: usize,
        max_attempts: usize,
    },

    #[error("point {index} lies at distance {found} from the center, expected {expected}")]
    RadiusMismatch {
        index: usize,
        found: f64,
        expected: f64,
    },

    #[error("{layers} layers need at least {} dimensions, got n = {n}", layers + 1)]
    DimensionUnderflow { layers: usize, n: usize },

    #[error("codeword id {0} does not exist in this codebook")]
    UnknownId(String),

    #[error("need at least two codewords, have {0}")]
    TooFewWords(usize),

    #[error("coordinate {index} = {value} lies outside the input box [{lo}, {hi}]")]
    InputOutOfBox {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("codebook has no usable codewords")]
    EmptyCodebook,

    #[error("false-identification pair must use two distinct ids, got {0} twice")]
    SameIdPair(String),

    #[error("error exponent {exponent} is outside the admissible regime (must be < {limit})")]
    RegimeViolation { exponent: f64, limit: f64 },

    #[error("trial count must be positive")]
    NoTrials,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed codebook document: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
