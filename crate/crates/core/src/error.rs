use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("state is truncation-unsafe: top Fock population {population:.3e} exceeds {tolerance:.1e}")]
    TruncationUnsafe { population: f64, tolerance: f64 },

    #[error("gain exceeds loss (masing regime): reservoir rate {gamma_r:.6e} rad/s is not positive")]
    GainExceedsLoss { gamma_r: f64 },

    #[error("unstable generator: rate_down {rate_down:.6e} must exceed rate_up {rate_up:.6e} >= 0")]
    UnstableGenerator { rate_up: f64, rate_down: f64 },

    #[error("steady state is not unique (degenerate null space)")]
    DegenerateSteadyState,

    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("g2 undefined: mean photon number is zero")]
    UndefinedG2,

    #[error("temperature undefined for n_th = {0}")]
    UndefinedTemperature(f64),

    #[error("negative-work regime: n_sr = {n_sr} < n_th = {n_th}")]
    NegativeWorkRegime { n_th: f64, n_sr: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("too few events: {0}")]
    TooFewEvents(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
