use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("cell {0} is not a leaf of this mesh")]
    UnknownCell(usize),
    #[error("block {block} is not symmetric positive definite")]
    NotSpd { block: usize },
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("eigenvalue estimate failed: {0}")]
    Eigen(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("failed at adaptive iteration {iteration}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for invalid input, 2 for solver or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension(_) => 1,
            Error::AtIteration { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
