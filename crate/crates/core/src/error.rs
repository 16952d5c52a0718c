use thiserror::Error;

/// Errors produced by model construction, oracles, and samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain needs at least 2 sites, got {0}")]
    ChainTooSmall(usize),

    #[error("grid needs side length at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("expected {expected} couplings, got {got}")]
    CouplingCount { expected: usize, got: usize },

    #[error("configuration has {got} bits but the model has {expected} sites")]
    ConfigurationLength { expected: usize, got: usize },

    #[error("face assignment has {got} bits but the dual model has {expected} faces")]
    FaceCount { expected: usize, got: usize },

    #[error("dual configuration has {got} bits but the dual model has {expected} edges")]
    EdgeCount { expected: usize, got: usize },

    #[error("empty coupling interval: lo = {lo} must be strictly below hi = {hi}")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("operation requires a free-boundary grid model")]
    NotAGrid,

    #[error("operation requires a chain model")]
    NotAChain,

    #[error("dual-domain sampling requires J > 0 on every edge; edge {edge} has J = {j}")]
    NonPositiveCoupling { edge: usize, j: f64 },

    #[error("enumeration guard: {got} sites exceeds the limit of {limit}")]
    TooManySites { got: usize, limit: usize },

    #[error("enumeration guard: {got} faces exceeds the limit of {limit}")]
    TooManyFaces { got: usize, limit: usize },

    #[error("transfer guard: grid side {got} exceeds the limit of {limit}")]
    GridTooLarge { got: usize, limit: usize },

    #[error("dual configuration violates the parity constraint at site {site}")]
    ParityViolation { site: usize },

    #[error("invalid chain spec: {0}")]
    InvalidChainSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
