//! Dense complex matrix helpers shared by the single-particle and Fock layers.

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

/// Spectral decomposition `m = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    pub values: Array1<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn of(m: &CMatrix<T>) -> Result<Self> {
        let (values, vectors) = T::eigh(m)?;
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply<F>(&self, f: F) -> CMatrix<T>
    where
        F: Fn(T) -> Complex<T>,
    {
        let mut scaled = self.vectors.clone();
        for (mut col, &lam) in scaled.columns_mut().into_iter().zip(self.values.iter()) {
            let w = f(lam);
            col.mapv_inplace(|z| z * w);
        }
        scaled.dot(&dagger(&self.vectors))
    }

    /// Express `op` in the eigenbasis: `V† op V`.
    pub fn to_eigenbasis(&self, op: &CMatrix<T>) -> CMatrix<T> {
        dagger(&self.vectors).dot(op).dot(&self.vectors)
    }

    /// Inverse of [`Eigen::to_eigenbasis`].
    pub fn from_eigenbasis(&self, op: &CMatrix<T>) -> CMatrix<T> {
        self.vectors.dot(op).dot(&dagger(&self.vectors))
    }
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    Array2::from_diag_elem(n, Complex::one())
}

pub fn dagger<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.t().mapv(|z| z.conj())
}

pub fn to_complex<T: Real>(m: &Array2<T>) -> CMatrix<T> {
    m.mapv(|x| Complex::new(x, T::zero()))
}

pub fn scale<T: Real>(m: &CMatrix<T>, s: Complex<T>) -> CMatrix<T> {
    m.mapv(|z| z * s)
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.dot(b) + b.dot(a)
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
}

/// Largest entry of `m - m†` in magnitude.
pub fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let mut dev = T::zero();
    Zip::from(m).and(m.t()).for_each(|a, b| dev = dev.max((*a - b.conj()).norm()));
    dev
}

/// Largest entry of `m + mᵀ` in magnitude.
pub fn antisymmetric_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let mut dev = T::zero();
    Zip::from(m).and(m.t()).for_each(|a, b| dev = dev.max((*a + *b).norm()));
    dev
}

/// Spectral norm (largest singular value).
pub fn op_norm<T: Real>(m: &CMatrix<T>) -> Result<T> {
    if m.is_empty() {
        return Ok(T::zero());
    }
    let scale = max_abs(m);
    if scale.is_zero() {
        return Ok(T::zero());
    }
    if hermitian_deviation(m) <= scale * T::epsilon() * T::of(16.0) {
        let ev = T::eigvalsh(m)?;
        return Ok(ev.iter().fold(T::zero(), |acc, x| acc.max(x.abs())));
    }
    let gram = dagger(m).dot(m);
    let ev = T::eigvalsh(&gram)?;
    Ok(ev.iter().fold(T::zero(), |acc, x| acc.max(*x)).max(T::zero()).sqrt())
}

/// Spectral norm of a matrix known to be Hermitian up to rounding.
pub fn herm_norm<T: Real>(m: &CMatrix<T>) -> Result<T> {
    if m.is_empty() {
        return Ok(T::zero());
    }
    let sym = hermitian_part(m);
    let ev = T::eigvalsh(&sym)?;
    Ok(ev.iter().fold(T::zero(), |acc, x| acc.max(x.abs())))
}

/// `(m + m†) / 2`.
pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::of(0.5);
    let mut out = m.clone();
    Zip::from(&mut out).and(m.t()).for_each(|a, b| *a = (*a + b.conj()) * half);
    out
}

/// `exp(g)` for anti-Hermitian `g`, via the eigendecomposition of `i g`.
pub fn expm_antihermitian<T: Real>(g: &CMatrix<T>) -> Result<CMatrix<T>> {
    let ig = hermitian_part(&g.mapv(|z| z * Complex::i()));
    let eig = Eigen::of(&ig)?;
    // g = -i (i g), so exp(g) = V exp(-i λ) V†.
    Ok(eig.apply(|lam| Complex::new(lam.cos(), -lam.sin())))
}

/// `exp(m)` for real antisymmetric `m`; the result is real orthogonal.
pub fn expm_real_antisymmetric<T: Real>(m: &Array2<T>) -> Result<Array2<T>> {
    let u = expm_antihermitian(&to_complex(m))?;
    Ok(u.mapv(|z| z.re))
}

pub(crate) fn check_square<T>(m: &Array2<T>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Shape { expected: format!("{n}x{n}"), actual: format!("{}x{}", m.nrows(), m.ncols()) });
    }
    Ok(())
}

pub(crate) fn zeros<T: Real>(n: usize) -> CMatrix<T> {
    Array2::from_elem((n, n), Complex::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn op_norm_matches_singular_value() {
        let m: CMatrix<f64> =
            array![[Complex::new(0.0, 0.0), Complex::new(3.0, 0.0)], [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)]];
        assert!((op_norm(&m).unwrap() - 3.0).abs() < 1e-12);
        let h: CMatrix<f64> =
            array![[Complex::new(1.0, 0.0), Complex::new(0.0, -2.0)], [Complex::new(0.0, 2.0), Complex::new(1.0, 0.0)]];
        assert!((op_norm(&h).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_of_rotation_generator() {
        let theta = 0.3_f64;
        let m = array![[0.0, theta], [-theta, 0.0]];
        let o = expm_real_antisymmetric(&m).unwrap();
        assert!((o[[0, 0]] - theta.cos()).abs() < 1e-14);
        assert!((o[[0, 1]] - theta.sin()).abs() < 1e-14);
        assert!((o[[1, 0]] + theta.sin()).abs() < 1e-14);
    }
}
