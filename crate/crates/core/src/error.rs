use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mask entry at ({row},{col}) is {value}, expected 0 or 1")]
    NonBinaryMask { row: usize, col: usize, value: f64 },

    #[error("zero matrix has no distinguished leading eigenvector")]
    ZeroMatrix,

    #[error("power iteration broke down: iterate collapsed to zero")]
    IterationBreakdown,

    #[error("entry {index} has modulus {modulus}, expected unit modulus")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("alignment undefined: orthogonal estimate")]
    OrthogonalAlignment,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {name}={value} outside domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("grid search would enumerate {size:.3e} tuples, guard is {guard:.1e}")]
    GridTooLarge { size: f64, guard: f64 },

    #[error("dense eigendecomposition limited to n <= {guard}, got {n}")]
    DenseGuard { n: usize, guard: usize },

    #[error("Jacobi sweeps did not converge within {sweeps} sweeps")]
    JacobiNoConvergence { sweeps: usize },

    #[error("could not reach target corruption level after {attempts} rescale attempts")]
    CorruptionUnreachable { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
