use thiserror::Error;

use crate::raster::EllipseSpec;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid grid: {0}")]
    InvalidMeta(String),
    #[error("grid metadata mismatch")]
    MetaMismatch,
    #[error("expected {expected} cells, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scalar field contains non-finite values")]
    NonFinite,
    #[error("kernel size must be odd and positive, got {0}")]
    InvalidKernel(usize),
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("invalid ellipse {0:?}")]
    InvalidEllipse(EllipseSpec),
}

#[derive(Debug, Error)]
pub enum SetCoverError {
    #[error("probability p[{row}][{col}] = {value} is outside [0, 1)")]
    InvalidProbability { row: usize, col: usize, value: f64 },
    #[error("target probability q = {0} is outside (0, 1)")]
    InvalidTarget(f64),
    #[error("conflict ({0}, {1}) references a missing candidate")]
    InvalidConflict(usize, usize),
    #[error("brute force refuses {0} candidates (limit 20)")]
    TooLarge(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("requested {requested} garments from a library of {available}")]
    NotEnoughGarments { requested: usize, available: usize },
    #[error("duplicate garment id {0}")]
    DuplicateId(u32),
    #[error("cannot place {0} non-overlapping garments")]
    PlacementFailed(usize),
    #[error("scene file: {0}")]
    Format(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    SetCover(#[from] SetCoverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown policy '{0}'")]
    UnknownPolicy(String),
    #[error("{0}")]
    Precondition(String),
}
