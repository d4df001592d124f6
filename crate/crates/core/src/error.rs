use thiserror::Error;

/// Errors raised by the solver and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("multiplier m vanishes at included frequency xi = {xi}")]
    DegenerateFrequency { xi: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("operator order j = {j} exceeds j_max = {j_max}")]
    OrderTooLarge { j: usize, j_max: usize },
    #[error("input violates the spectral band limit: mode |k| = {mode} > {limit}")]
    BandLimit { mode: usize, limit: usize },
    #[error("spectral backend capacity exceeded for j = {j}: predicted relative cancellation loss {loss:e}")]
    BackendCapacity { j: usize, loss: f64 },
    #[error("curve self-intersection detected between nodes {i} and {j}")]
    Geometry { i: usize, j: usize },
    #[error("series diverges: B0 norm {norm} >= 1")]
    SeriesDivergence { norm: f64 },
    #[error("unstable propagation: {0}")]
    Stability(String),
    #[error("tail estimate {tail:e} exceeds tolerance {tol:e}; increase t_max")]
    TailTolerance { tail: f64, tol: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input field is not mean-zero (zero mode {0:e})")]
    NonzeroMean(f64),
    #[error("dominating measure mass {0} must be < 1")]
    MeasureTooLarge(f64),
    #[error("Picard iteration diverged: contraction ratios {ratios:?}")]
    Divergence { ratios: Vec<f64> },
    #[error("Picard iteration did not converge in {iterations} iterations (last difference {last:e})")]
    NotConverged { iterations: usize, last: f64 },
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Violations(Vec<String>),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
