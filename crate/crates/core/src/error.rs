use thiserror::Error;

/// Errors raised by the ranking and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("arc ({0}, {1}) is listed in more than one class")]
    ArcConflict(usize, usize),

    #[error("node index {index} out of range for a graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self link ({0}, {0}) on a controlled page")]
    SelfLoop(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("left vector is degenerate: v^T M u = {0:.3e}")]
    DegenerateLeftVector(f64),

    #[error("eigenvalue {0} is not simple")]
    NotSimple(f64),

    #[error("singular system: {0}")]
    Singular(&'static str),

    #[error("dense routine limited to n <= {cap}, got n = {n}")]
    SizeCap { n: usize, cap: usize },

    #[error("graph has no arcs")]
    NoArcs,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("auxiliary vector iteration diverged in every mode: {0}")]
    SpectralObstruction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
