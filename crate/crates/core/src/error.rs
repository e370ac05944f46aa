use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh size {nx}x{ny}: both counts must be at least 1")]
    InvalidMeshSize { nx: usize, ny: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("element {elem} is degenerate (signed area {area:e})")]
    DegenerateElement { elem: usize, area: f64 },

    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),

    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),

    #[error("grid tangled: element {elem} has Jacobian {jacobian:e} at t = {t}")]
    TangledGrid { elem: usize, jacobian: f64, t: f64 },

    #[error("element {elem} has nonpositive Jacobian {jacobian:e}")]
    NonPositiveJacobian { elem: usize, jacobian: f64 },

    #[error("field length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("scheme {scheme} needs {needed} history levels, have {available}")]
    InsufficientHistory {
        scheme: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rate estimate needs at least 3 points with positive values: {0}")]
    InvalidRateData(String),

    #[error("step {step} (t = {t}): {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}
