//! Single-particle layer: the coupling matrix `A` of `H = Σ γ_j A_jk γ_k`,
//! its spectral flattening and absolute value, and decay certification.

use ndarray::{s, Array1, Array2};
use num_complex::Complex;
use num_traits::Zero;

use crate::decay::{self, DecayProfile};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{self, Eigen};
use crate::scalar::{CMatrix, Real};

/// Quadratic Majorana Hamiltonian. `A` is Hermitian and antisymmetric, hence
/// purely imaginary.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaQuadratic<T: Real> {
    lattice: Lattice,
    a: CMatrix<T>,
}

/// Spectral data of `A`: eigenvalues, `σ(A)` and `|A|`.
#[derive(Debug, Clone)]
pub struct Flattening<T: Real> {
    pub eigenvalues: Array1<T>,
    pub sign: CMatrix<T>,
    pub abs: CMatrix<T>,
}

impl<T: Real> Flattening<T> {
    pub fn min_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().fold(T::infinity(), |m, x| m.min(x.abs()))
    }

    /// Many-body gap `4 · min |λ|`.
    pub fn gap(&self) -> T {
        T::of(4.0) * self.min_abs_eigenvalue()
    }
}

impl<T: Real> MajoranaQuadratic<T> {
    /// Validates shape, Hermiticity and antisymmetry (tolerance scaled by the
    /// largest entry).
    pub fn new(lattice: Lattice, a: CMatrix<T>) -> Result<Self> {
        linalg::check_square(&a, lattice.num_modes())?;
        let tol = T::of(T::IDENTITY_TOL) * linalg::max_abs(&a).max(T::one());
        let herm = linalg::hermitian_deviation(&a);
        if herm > tol {
            return Err(Error::NotHermitian { deviation: herm.as_f64() });
        }
        let anti = linalg::antisymmetric_deviation(&a);
        if anti > tol {
            return Err(Error::NotAntisymmetric { deviation: anti.as_f64() });
        }
        Ok(Self { lattice, a: purify_imaginary_antisymmetric(&a) })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.a
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.a
    }

    pub fn num_modes(&self) -> usize {
        self.a.nrows()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { lattice: self.lattice.clone(), a: self.a.mapv(|z| z * factor) }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-T::one())
    }

    /// Eigenvalues of `A`, ascending.
    pub fn spectrum(&self) -> Result<Array1<T>> {
        T::eigvalsh(&self.a)
    }

    /// One eigendecomposition giving `σ(A)` and `|A|`. The outputs are
    /// projected onto their exact structure: `σ(A)` purely imaginary
    /// antisymmetric, `|A|` real symmetric.
    pub fn flatten(&self) -> Result<Flattening<T>> {
        let eig = Eigen::of(&self.a)?;
        let min_abs = eig.values.iter().fold(T::infinity(), |m, x| m.min(x.abs()));
        if self.num_modes() == 0 || min_abs < T::of(T::ZERO_EIGENVALUE_TOL) {
            return Err(Error::Gapless { min_abs: if self.num_modes() == 0 { 0.0 } else { min_abs.as_f64() } });
        }
        let sign = eig.apply(|lam| Complex::new(lam.signum(), T::zero()));
        let abs = eig.apply(|lam| Complex::new(lam.abs(), T::zero()));
        Ok(Flattening {
            eigenvalues: eig.values,
            sign: purify_imaginary_antisymmetric(&sign),
            abs: purify_real_symmetric(&abs),
        })
    }

    /// `Δ = 4 · min |eig(A)|`.
    pub fn single_particle_gap(&self) -> Result<T> {
        let ev = self.spectrum()?;
        let min_abs = ev.iter().fold(T::infinity(), |m, x| m.min(x.abs()));
        if ev.is_empty() || min_abs < T::of(T::ZERO_EIGENVALUE_TOL) {
            return Err(Error::Gapless { min_abs: if ev.is_empty() { 0.0 } else { min_abs.as_f64() } });
        }
        Ok(T::of(4.0) * min_abs)
    }

    pub fn sign_matrix(&self) -> Result<CMatrix<T>> {
        Ok(self.flatten()?.sign)
    }

    pub fn abs_matrix(&self) -> Result<CMatrix<T>> {
        Ok(self.flatten()?.abs)
    }
}

fn purify_imaginary_antisymmetric<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::of(0.5);
    Array2::from_shape_fn(m.raw_dim(), |(i, j)| Complex::new(T::zero(), (m[[i, j]].im - m[[j, i]].im) * half))
}

fn purify_real_symmetric<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::of(0.5);
    Array2::from_shape_fn(m.raw_dim(), |(i, j)| Complex::new((m[[i, j]].re + m[[j, i]].re) * half, T::zero()))
}

/// Operator norm of the `(site j rows) x (site k columns)` block of `b`.
pub fn site_block_norm<T: Real>(b: &CMatrix<T>, lat: &Lattice, j: usize, k: usize) -> Result<f64> {
    let n = lat.modes_per_site();
    if n == 1 {
        return Ok(b[[j, k]].norm().as_f64());
    }
    let rows: Vec<usize> = lat.modes_of_site(j).collect();
    let cols: Vec<usize> = lat.modes_of_site(k).collect();
    let block = Array2::from_shape_fn((n, n), |(x, y)| b[[rows[x], cols[y]]]);
    Ok(linalg::op_norm(&block)?.as_f64())
}

/// All site-pair block norms, indexed `[j, k]`.
pub fn site_block_norms<T: Real>(b: &CMatrix<T>, lat: &Lattice) -> Result<Array2<f64>> {
    linalg::check_square(b, lat.num_modes())?;
    let ns = lat.num_sites();
    let mut out = Array2::zeros((ns, ns));
    for j in 0..ns {
        for k in 0..ns {
            out[[j, k]] = site_block_norm(b, lat, j, k)?;
        }
    }
    Ok(out)
}

/// `m(d)`: the largest site-block norm at each Manhattan distance `d`.
pub fn distance_maxima<T: Real>(b: &CMatrix<T>, lat: &Lattice) -> Result<Vec<(f64, f64)>> {
    let norms = site_block_norms(b, lat)?;
    let mut m = vec![0.0f64; lat.diameter() + 1];
    for ((j, k), &v) in norms.indexed_iter() {
        let d = lat.site_dist(j, k);
        m[d] = m[d].max(v);
    }
    Ok(m.into_iter().enumerate().map(|(d, v)| (d as f64, v)).collect())
}

/// Fit a `[K, ν]` envelope to the site-block norms of `b`.
pub fn fit_decay<T: Real>(b: &CMatrix<T>, lat: &Lattice) -> Result<DecayProfile> {
    decay::fit_envelope(&distance_maxima(b, lat)?)
}

/// `[K, ν]` envelope at a prescribed `ν`; useful for finite-range matrices
/// where a log-linear fit has too few points.
pub fn envelope_at_rate<T: Real>(b: &CMatrix<T>, lat: &Lattice, rate: f64) -> Result<DecayProfile> {
    Ok(decay::envelope_with_rate(&distance_maxima(b, lat)?, rate))
}

/// Largest violation `norm - bound` of an envelope over all site pairs.
/// Non-positive means the envelope holds.
pub fn envelope_violation<T: Real>(b: &CMatrix<T>, lat: &Lattice, profile: &DecayProfile) -> Result<f64> {
    let norms = site_block_norms(b, lat)?;
    Ok(norms
        .indexed_iter()
        .map(|((j, k), &v)| v - profile.bound(lat.site_dist(j, k) as f64))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `Σ_l outer(d(j,l)) · inner(d(l,k))` for every site pair: the bound on a
/// product of two matrices with the given envelopes.
pub fn convolved_envelope(lat: &Lattice, outer: &DecayProfile, inner: &DecayProfile) -> Array2<f64> {
    let ns = lat.num_sites();
    Array2::from_shape_fn((ns, ns), |(j, k)| {
        (0..ns).map(|l| outer.bound(lat.site_dist(j, l) as f64) * inner.bound(lat.site_dist(l, k) as f64)).sum()
    })
}

/// Block matrix `diag(blocks...)`.
pub(crate) fn block_diag<T: Real>(blocks: &[&CMatrix<T>]) -> CMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Array2::from_elem((n, n), Complex::zero());
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.slice_mut(s![off..off + k, off..off + k]).assign(b);
        off += k;
    }
    out
}
