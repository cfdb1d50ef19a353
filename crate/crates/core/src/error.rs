use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ellipse: {0}")]
    InvalidEllipse(String),
    #[error("phantom has no components")]
    EmptyPhantom,
    #[error("invalid sinogram grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("quadrature step must be positive and at most the detector spacing {max}, got {step}")]
    InvalidStep { step: f64, max: f64 },
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("zero covector has no direction")]
    ZeroCovector,
    #[error("covector has vanishing ds-component and is not on the canonical relation")]
    NotOnCanonicalRelation,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("line phi={phi}, s={s} does not meet the image square")]
    LineMissesImage { phi: f64, s: f64 },
    #[error("image size {0} is too small")]
    ImageTooSmall(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
