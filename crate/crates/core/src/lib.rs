//! Free-fermion stability laboratory.
//!
//! Quadratic Majorana Hamiltonians `H = Σ γ_j A_jk γ_k` on cubic lattices,
//! their doubling and spectral flattening, exact Fock-space Gaussian
//! unitaries, operator localization maps, the spectral block-diagonalization
//! filter, and a harness for gap-stability sweeps.

pub mod decay;
pub mod doubling;
pub mod error;
pub mod filter;
pub mod fock;
pub mod io;
pub mod lab;
pub mod lattice;
pub mod linalg;
pub mod locality;
pub mod models;
pub mod quadratic;
pub mod scalar;

pub use decay::DecayProfile;
pub use doubling::{EmptyBand, FlatteningMap};
pub use error::{Error, Result};
pub use filter::{BumpFilter, FilterFrame, FilterReport, Rewrite, RewriteOptions};
pub use fock::{FockOperator, FockSpace, GaussianUnitary, MajoranaPolynomial, Parity};
pub use lab::{ExperimentConfig, SweepConfig, SweepResult, SweepRow, Target};
pub use lattice::{Boundary, Cube, Lattice, LatticeError, Site};
pub use locality::{LocalDecomposition, PerturbationKind, PerturbationSpec, SymbolicPerturbation};
pub use models::ModelSpec;
pub use quadratic::{Flattening, MajoranaQuadratic};
pub use scalar::{CMatrix, Real};

/// Double-precision quadratic Hamiltonian.
pub type Quadratic64 = MajoranaQuadratic<f64>;
/// Single-precision quadratic Hamiltonian.
pub type Quadratic32 = MajoranaQuadratic<f32>;
/// Double-precision Fock-space operator.
pub type FockOperator64 = FockOperator<f64>;
/// Single-precision Fock-space operator.
pub type FockOperator32 = FockOperator<f32>;
/// Double-precision local decomposition.
pub type LocalDecomposition64 = LocalDecomposition<f64>;
