use thiserror::Error;

use crate::linalg::CMatrix;
use crate::manifolds::ManifoldKind;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("{0}: decomposition did not converge")]
    Convergence(&'static str, Box<CMatrix>),

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },

    #[error("no unique projection: center of mass is (near) rank deficient")]
    NoUniqueProjection,

    #[error("invalid manifold parameters: {0}")]
    InvalidManifold(String),

    #[error("representative is not semi-unitary (residual {residual:.3e})")]
    NotOnManifold { residual: f64 },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("points live on different manifolds")]
    ManifoldMismatch,

    #[error("operation not supported on the {0} manifold")]
    Unsupported(ManifoldKind),

    #[error("a code needs at least two codewords, got {0}")]
    TooFewCodewords(usize),

    #[error("duplicate codewords {0} and {1}")]
    DuplicateCodewords(usize, usize),

    #[error("invalid volume model: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("code file: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
