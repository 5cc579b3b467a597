use thiserror::Error;

/// Errors surfaced by the solver and diagnostics layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("wavenumber k must be nonzero for this operation")]
    ZeroWavenumber,

    #[error("negative time step dt = {0}")]
    NegativeDt(f64),

    #[error("time step dt = {dt:.3e} exceeds advective stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("boundary compatibility violated: reconstructed trace |f({side:+})| = {value:.3e}")]
    BoundaryTrace { side: i8, value: f64 },

    #[error("operator for k = {0} was not assembled")]
    MissingOperator(i64),

    #[error("non-square matrix: {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("samples are not uniformly spaced in time")]
    NonUniformSamples,

    #[error("fit window contains nonpositive values")]
    NonpositiveFit(f64),

    #[error("fit window too short: {0} samples (need at least 10)")]
    ShortWindow(usize),

    #[error("state mismatch: {0}")]
    Mismatch(String),

    #[error("field is in representation {got:?}, expected {expected:?}")]
    WrongRepr {
        expected: crate::field::YRepr,
        got: crate::field::YRepr,
    },

    #[error("checkpoint i/o: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
