use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ball configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("dimension {found} exceeds the enumeration budget (max {max})")]
    DimensionTooLarge { found: usize, max: usize },

    #[error("gap vector {0:?} is interior (no zero coordinate)")]
    InteriorPoint(Vec<i64>),

    #[error("empty time window [{0}, {1}]")]
    EmptyWindow(f64, f64),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("no active set solves the complementarity problem at z = {0:?}")]
    NoFeasibleActiveSet(Vec<f64>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
