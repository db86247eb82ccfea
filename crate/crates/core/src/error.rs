use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the reduction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (zero pivot at step {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("all columns are numerically zero")]
    ZeroMatrix,

    #[error("pencil is singular: det(A - lambda B) vanishes identically")]
    SingularPencil,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("(sE - A) is singular at s = {re} + {im}i")]
    SingularAtPoint { re: f64, im: f64 },

    #[error("mass matrix is singular")]
    SingularMass,

    #[error("recurrence coefficient {name}_{index} is undefined for {family}")]
    UndefinedCoefficient {
        family: String,
        name: &'static str,
        index: usize,
    },

    #[error("small coefficient matrix is singular for {family} at r = {r}")]
    SingularSmallMatrix { family: String, r: usize },

    #[error("shift {re} + {im}i coincides with a pencil eigenvalue")]
    ShiftHitsSpectrum { re: f64, im: f64 },

    #[error("Kronecker system is singular")]
    SingularSystem,

    #[error("Sylvester solve did not reach the residual target ({residual:e})")]
    SylvesterResidual { residual: f64 },

    #[error("pencil is not stable: eigenvalue with real part {max_real:e}")]
    UnstablePencil { max_real: f64 },

    #[error("projected pencil W^T E V is numerically singular (condition {condition:e})")]
    ProjectedPencilSingular { condition: f64 },

    #[error("IRKA failed after {restarts} restarts: {reason}")]
    IrkaFailed { restarts: usize, reason: String },

    #[error("implicit Euler step matrix (E - tau A) is singular")]
    StepMatrixSingular,

    #[error("trajectories live on different time grids")]
    GridMismatch,

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: unsupported Matrix Market header `{header}`")]
    HeaderMismatch { path: PathBuf, header: String },

    #[error("{path}: line {line}: index ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange {
        path: PathBuf,
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("plot failed: {0}")]
    Plot(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
