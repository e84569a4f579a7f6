use thiserror::Error;

use crate::lattice::LatticeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gapless spectrum: smallest |eigenvalue| is {min_abs:e}")]
    Gapless { min_abs: f64 },

    #[error("decay fit needs at least 3 usable distances, found {usable}")]
    Fit { usable: usize },

    #[error("{modes} Majorana modes exceed the dense Fock cap of {cap}")]
    DimensionOverflow { modes: usize, cap: usize },

    #[error("identity `{identity}` violated: residual {residual:e} exceeds {tol:e}")]
    IdentityViolation { identity: &'static str, residual: f64, tol: f64 },

    #[error("eigenvalues {index} and {} coincide within {splitting:e}", index + 1)]
    DegeneracyAmbiguous { index: usize, splitting: f64 },

    #[error("spectral gap {gap} is below the filter requirement {required}")]
    GapTooSmall { gap: f64, required: f64 },

    #[error("operator is not bosonic (odd-parity component of norm {odd_norm:e})")]
    Fermionic { odd_norm: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not antisymmetric (deviation {deviation:e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("generator does not exponentiate to the orthogonal matrix (residual {residual:e})")]
    GeneratorMismatch { residual: f64 },

    #[error("odd number of Majorana modes ({0}); Fock space needs pairs")]
    OddModeCount(usize),

    #[error("Dirac pairs need an even number of Majoranas per site, lattice has {0}")]
    UnpairedSite(usize),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Lattice(#[from] LatticeError),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
