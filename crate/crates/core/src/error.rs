use thiserror::Error;

/// Errors produced anywhere in the calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation angle is within 1e-6 rad of pi; logarithm is not unique")]
    AngleAtPi,

    #[error("point is behind the camera (z = {z:e})")]
    BehindCamera { z: f64 },

    #[error("bad board dimensions: {0}")]
    BadDimensions(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every candidate pose was rejected by the visibility check")]
    EmptyCandidateSet,

    #[error("only {visible} markers remain in view (need at least 4)")]
    MarkerOutOfView { visible: usize },

    #[error("marker id {0} does not exist on the board")]
    UnknownMarker(usize),

    #[error("normal equations could not be solved even at maximum damping")]
    SingularSystem,

    #[error("optimizer hit the iteration cap ({iterations}) before converging")]
    NoConvergence { iterations: usize },

    #[error("degenerate robot motion: {0}")]
    DegenerateMotion(String),

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("information matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularInformation { condition: f64 },

    #[error("candidate {index} has only {visible} predicted-visible markers")]
    CandidateInvisible { index: usize, visible: usize },

    #[error("no candidate could be evaluated")]
    NoEvaluableCandidates,

    #[error("every candidate has already been visited")]
    Exhausted,

    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
