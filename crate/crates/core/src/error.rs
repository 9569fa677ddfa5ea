use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice configuration: {0}")]
    InvalidLattice(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields live on different lattices")]
    ConfigMismatch,
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("cannot cut a bare leaf")]
    CutLeaf,
    #[error("attach needs exactly {expected} children, got {got}")]
    WrongChildCount { expected: usize, got: usize },
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("cumulant order must be at least 1")]
    ZeroCumulantOrder,
    #[error("invalid time step {0}")]
    InvalidTimeStep(f64),
    #[error("insufficient noise horizon: need time {needed}, realization covers {available}")]
    NoiseHorizon { needed: f64, available: f64 },
    #[error("graph has an initial-condition leaf; equilibrium rules do not apply")]
    InitialLeafInEquilibrium,
    #[error("graph is not connected")]
    Disconnected,
    #[error("order {requested} exceeds configured cap {cap}")]
    OrderCap { requested: usize, cap: usize },
    #[error("explicit scheme unstable: dt*(4d/delta^2 + m^2) = {0} >= 0.5")]
    Unstable(f64),
    #[error("field blew up at step {step}")]
    BlowUp { step: usize },
    #[error("too few samples for batching: {samples} samples, {batches} batches")]
    TooFewSamples { samples: usize, batches: usize },
    #[error("degenerate least-squares design: det = {0:e}")]
    DegenerateDesign(f64),
    #[error("lag grids differ between inputs")]
    LagMismatch,
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
