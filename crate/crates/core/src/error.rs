use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^*| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("operator is not an effect (eigenvalue {eigenvalue} outside [0, 1])")]
    NotAnEffect { eigenvalue: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (max |U^*U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("basis columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} is not supported here (need {min} <= dim <= {max})")]
    UnsupportedDimension { dim: usize, min: usize, max: usize },

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no restart produced a feasible certificate (best residual {best_residual:e})")]
    Infeasible { best_residual: f64 },

    #[error("not a symmetry: {probe} (deviation {deviation:e})")]
    NotASymmetry { probe: String, deviation: f64 },

    #[error("pure-state map is missing the image of {probe}")]
    IncompleteMap { probe: String },

    #[error("pure-state map has duplicate inputs at pairs {first} and {second}")]
    DuplicateInput { first: usize, second: usize },

    #[error("state is outside the domain of the transform")]
    OutsideDomain,
}

impl Error {
    /// Input failed a structural or numerical validity check.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Infeasible { .. }
                | Error::NotASymmetry { .. }
                | Error::IncompleteMap { .. }
                | Error::OutsideDomain
        )
    }
}
