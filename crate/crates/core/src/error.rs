//! Error type shared by every layer of the crate.

/// Everything that can go wrong between sampling a seed and diagonalising a metric.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { got: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at x = {x}")]
    NonFiniteSample { x: f64 },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("seed vanishes or blows up near x = {x}")]
    PoleDetected { x: f64 },

    #[error("phase derivative misses its asymptote: max |omega' - b| = {deviation:e} > {tolerance:e}")]
    TailMismatch { deviation: f64, tolerance: f64 },

    #[error("unknown catalogue entry `{0}`")]
    UnknownEntry(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("h0 potential is not real: max |Im| = {max_imag:e} at x = {x}")]
    NotReal { max_imag: f64, x: f64 },

    #[error("closed-form states exist only for the constant entry, got `{0}`")]
    WrongEntry(String),

    #[error("Darboux map undefined for a zero mode (lambda = {lambda:e})")]
    ZeroMode { lambda: f64 },

    #[error("potential does not settle in the tail: spread {spread:e}")]
    NoDecay { spread: f64 },

    #[error("boundary matching failed: {0}")]
    MatchFailure(String),

    #[error("operator carries a first-order term; use the phase map instead")]
    DriftUnsupported,

    #[error("metric matrix has a near kernel: lambda_min / lambda_max = {ratio:e}")]
    KernelDetected { ratio: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("alpha = {alpha_re} + {alpha_im}i sits on the h0 spectrum (distance {distance:e})")]
    AlphaOnSpectrum {
        alpha_re: f64,
        alpha_im: f64,
        distance: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
