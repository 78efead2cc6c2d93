use thiserror::Error;

/// Errors raised anywhere in the integration pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e} at column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mass matrix is singular at q = {q:?}")]
    SingularMassMatrix { q: Vec<f64> },

    #[error("state outside model domain ({model}): {reason}")]
    Domain { model: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported stage count {stages} for {family}")]
    UnsupportedStageCount { family: &'static str, stages: usize },

    #[error("conjugate tableau undefined: weight b[{index}] is zero")]
    ZeroWeight { index: usize },

    #[error("unknown method id '{0}'")]
    UnknownMethod(String),

    #[error("unknown model id '{0}'")]
    UnknownModel(String),

    #[error("invalid step size h = {0}")]
    InvalidStep(f64),

    #[error("inconsistent state: |p - alpha(q)| = {violation:e} exceeds bound {bound:e}")]
    InconsistentState { violation: f64, bound: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations \
         (residual {residual:e}, W condition {w_condition:?})"
    )]
    NewtonDivergence {
        iterations: usize,
        residual: f64,
        w_condition: Option<f64>,
    },

    #[error("stage Jacobian is singular (iteration {iteration})")]
    SingularStageJacobian { iteration: usize },

    #[error("operation requires a system with linear alpha: {0}")]
    UnsupportedSystem(String),

    #[error("order fit needs at least two points, got {0}")]
    FewerThanTwoPoints(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
