use thiserror::Error;

/// Errors raised by estimators, calibration and band construction.
#[derive(Debug, Error)]
pub enum ScbError {
    #[error("not a valid kernel: {0}")]
    NotAKernel(String),

    #[error("no data supplied")]
    EmptyData,

    #[error("empty kernel window at {count} grid point(s), first at x = {first}")]
    EmptyWindow { count: usize, first: f64 },

    #[error("singular local polynomial fit at {count} grid point(s), first at x = {first}")]
    SingularFit { count: usize, first: f64 },

    #[error("density estimate {value:.3e} at x = {x} is below the floor {floor:.3e}")]
    DensityTooSmall { x: f64, value: f64, floor: f64 },

    #[error("bandwidth too large: normalized bandwidth {bbar} leaves log log(1/bbar) <= 0")]
    BandwidthTooLarge { bbar: f64 },

    #[error("argument outside its domain: {0}")]
    DomainError(String),

    #[error("invalid replicate count {0} (at least 100 required)")]
    InvalidReps(usize),

    #[error("process diverged at step {step} (|value| = {value:.3e})")]
    Diverged { step: usize, value: f64 },

    #[error("series too short: {0} value(s), need at least 2")]
    SeriesTooShort(usize),

    #[error("curves are defined on different grids")]
    GridMismatch,

    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("column `{0}` not found")]
    ColumnNotFound(String),

    #[error("no valid numeric rows in column `{0}`")]
    AllRowsInvalid(String),

    #[error("too many failed replicates: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Carries the inner message itself, so it is not exposed as a source.
    #[error("{stage}: {inner}")]
    Stage { stage: String, inner: Box<ScbError> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, used by the command line for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numeric,
    Internal,
}

impl ScbError {
    pub fn class(&self) -> ErrorClass {
        use ScbError::*;
        match self {
            NotAKernel(_) | EmptyData | DomainError(_) | InvalidReps(_) | SeriesTooShort(_)
            | FileNotFound(_) | ColumnNotFound(_) | AllRowsInvalid(_) | Config(_) | Io(_)
            | Csv(_) | Json(_) => ErrorClass::Input,
            EmptyWindow { .. }
            | SingularFit { .. }
            | DensityTooSmall { .. }
            | BandwidthTooLarge { .. }
            | Diverged { .. }
            | TooManyFailures { .. } => ErrorClass::Numeric,
            GridMismatch | Invariant(_) => ErrorClass::Internal,
            Stage { inner, .. } => inner.class(),
        }
    }
}

impl ScbError {
    /// Wrap with the name of the pipeline stage that failed.
    pub fn at_stage(self, stage: &str) -> Self {
        ScbError::Stage {
            stage: stage.to_string(),
            inner: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, ScbError>;
