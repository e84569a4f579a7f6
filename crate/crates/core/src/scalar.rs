//! Scalar abstraction.
//!
//! All single-particle and Fock-space math is written against [`Real`], which
//! gathers the numeric traits the algorithms need plus the two LAPACK entry
//! points (Hermitian eigendecomposition with and without vectors). Operators
//! are stored as `Array2<Complex<T>>`.

use std::fmt::{Debug, Display};

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Dense complex matrix over the real scalar `T`.
pub type CMatrix<T> = Array2<Complex<T>>;

/// Floating point scalar usable by every module: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Eigenvalues below this magnitude count as zero modes.
    const ZERO_EIGENVALUE_TOL: f64;
    /// Residual allowed for identities that hold exactly in exact arithmetic.
    const IDENTITY_TOL: f64;

    /// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
    fn eigh(m: &CMatrix<Self>) -> Result<(Array1<Self>, CMatrix<Self>)>;

    /// Eigenvalues (ascending) of a Hermitian matrix.
    fn eigvalsh(m: &CMatrix<Self>) -> Result<Array1<Self>>;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

/// Column-major copy. ndarray-linalg hands row-major complex input to LAPACK
/// as its transpose, which for a Hermitian matrix is the complex conjugate:
/// eigenvalues survive but eigenvectors come back conjugated.
fn column_major<T: Clone + num_traits::Zero>(m: &Array2<T>) -> Array2<T> {
    let mut out = Array2::zeros(m.raw_dim().f());
    out.assign(m);
    out
}

macro_rules! impl_real {
    ($t:ty, $zero:expr, $ident:expr) => {
        impl Real for $t {
            const ZERO_EIGENVALUE_TOL: f64 = $zero;
            const IDENTITY_TOL: f64 = $ident;

            fn eigh(m: &CMatrix<Self>) -> Result<(Array1<Self>, CMatrix<Self>)> {
                if m.is_empty() {
                    return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
                }
                column_major(m).eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))
            }

            fn eigvalsh(m: &CMatrix<Self>) -> Result<Array1<Self>> {
                if m.is_empty() {
                    return Ok(Array1::zeros(0));
                }
                column_major(m).eigvalsh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))
            }
        }
    };
}

impl_real!(f64, 1e-10, 1e-12);
impl_real!(f32, 1e-4, 1e-5);

#[cfg(test)]
pub(crate) fn ci<T: Real>(im: f64) -> Complex<T> {
    Complex::new(T::zero(), T::of(im))
}
