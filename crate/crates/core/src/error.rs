use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KerrError {
    #[error("extremal or superextremal parameters: |a| = {a} >= M = {m}")]
    Extremality { m: f64, a: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("charts do not overlap at this point: {0}")]
    Overlap(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("point too close to the rotation axis (sin theta = {0:e})")]
    AxisProximity(f64),
    #[error("chart and tetrad scaling do not match: {0}")]
    ScalingMismatch(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("spectral truncation overflow: {0}")]
    Truncation(String),
    #[error("ambiguous eigenvalue labelling: gap {0:e}")]
    Labelling(f64),
    #[error("Frobenius resonance: indicial exponents differ by an integer ({0})")]
    Resonance(String),
    #[error("integration failure at r = {r}: {msg}")]
    Integration { r: f64, msg: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("inequality violated: {0}")]
    BoundViolation(String),
    #[error("support violation: {0}")]
    Support(String),
}

pub type Result<T> = std::result::Result<T, KerrError>;
