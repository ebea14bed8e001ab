use thiserror::Error;

/// Broad classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Mesh,
    Solver,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Mesh => 3,
            ErrorClass::Solver => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("expression domain error: {0}")]
    Domain(String),

    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate tangent vectors at ({x1}, {x2}): |a1 x a2| = {norm:e}")]
    DegenerateTangents { x1: f64, x2: f64, norm: f64 },

    #[error("point ({x1}, {x2}) lies outside the chart domain")]
    OutOfDomain { x1: f64, x2: f64 },

    #[error("mesh parse error (line {line}): {message}")]
    MeshParse { line: usize, message: String },

    #[error("nonconforming mesh: {0}")]
    Nonconforming(String),

    #[error("mesh orientation error: {0}")]
    Orientation(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("local moment system is ill conditioned on element {element} (condition {cond:e})")]
    IllConditioned { element: usize, cond: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("solve residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("penalty probe failed: A(1) not positive definite after {doublings} doublings (last C = {penalty:e})")]
    PenaltyProbe { doublings: usize, penalty: f64 },

    #[error("regime verdict is inconclusive; refine the mesh or adjust the thresholds")]
    Inconclusive,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Domain(_)
            | Error::Config { .. }
            | Error::InvalidParameter(_)
            | Error::Io(_) => ErrorClass::Config,
            Error::DegenerateTangents { .. }
            | Error::OutOfDomain { .. }
            | Error::MeshParse { .. }
            | Error::Nonconforming(_)
            | Error::Orientation(_)
            | Error::Unsupported(_) => ErrorClass::Mesh,
            Error::IllConditioned { .. }
            | Error::Factorization(_)
            | Error::Residual { .. }
            | Error::PenaltyProbe { .. }
            | Error::Inconclusive => ErrorClass::Solver,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
