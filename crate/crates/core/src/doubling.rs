//! Two opposite-sign copies `diag(A, -A)`, the orthogonal map that carries
//! them onto the flattened off-diagonal form, and the empty-band reduction.
//!
//! Copy index is the slow index: all copy-1 modes come first, then copy 2.
//! With `X = iσ(A)` (real antisymmetric, `X² = -I`) the map is
//! `O = (I + M)/√2 = exp((π/4) M)` with `M = [[0, X], [X, 0]]`, `M² = -I`.

use ndarray::{s, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadratic::{block_diag, MajoranaQuadratic};
use crate::scalar::{CMatrix, Real};

/// `diag(A, -A)` on the lattice with doubled modes per site.
pub fn double<T: Real>(h: &MajoranaQuadratic<T>) -> MajoranaQuadratic<T> {
    let neg = h.matrix().mapv(|z| -z);
    let a = block_diag(&[h.matrix(), &neg]);
    MajoranaQuadratic::new(h.lattice().doubled(), a).expect("doubling preserves Hermitian antisymmetry")
}

/// The orthogonal map on the doubled modes together with the generator it
/// exponentiates from.
#[derive(Debug, Clone)]
pub struct FlatteningMap<T: Real> {
    /// `X = iσ(A)`.
    pub x: Array2<T>,
    /// `O = (1/√2)[[I, X], [X, I]]`.
    pub orthogonal: Array2<T>,
    /// `(π/4)[[0, X], [X, 0]]`, with `exp(generator) = orthogonal`.
    pub generator: Array2<T>,
}

pub fn flattening_map<T: Real>(h: &MajoranaQuadratic<T>) -> Result<FlatteningMap<T>> {
    let sigma = h.sign_matrix()?;
    Ok(flattening_map_from_sign(&sigma))
}

pub(crate) fn flattening_map_from_sign<T: Real>(sigma: &CMatrix<T>) -> FlatteningMap<T> {
    let n = sigma.nrows();
    // σ is purely imaginary, so iσ is real: (i·(i y)) = -y.
    let x = sigma.mapv(|z| -z.im);
    let inv_sqrt2 = T::one() / T::of(2.0).sqrt();
    let quarter_pi = T::FRAC_PI_4();
    let mut orthogonal = Array2::zeros((2 * n, 2 * n));
    let mut generator = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        orthogonal[[i, i]] = inv_sqrt2;
        orthogonal[[n + i, n + i]] = inv_sqrt2;
    }
    orthogonal.slice_mut(s![..n, n..]).assign(&x.mapv(|v| v * inv_sqrt2));
    orthogonal.slice_mut(s![n.., ..n]).assign(&x.mapv(|v| v * inv_sqrt2));
    generator.slice_mut(s![..n, n..]).assign(&x.mapv(|v| v * quarter_pi));
    generator.slice_mut(s![n.., ..n]).assign(&x.mapv(|v| v * quarter_pi));
    FlatteningMap { x, orthogonal, generator }
}

/// `O_FF = (1/√2)[[I, iσ(A)], [iσ(A), I]]`.
pub fn build_o_ff<T: Real>(h: &MajoranaQuadratic<T>) -> Result<Array2<T>> {
    Ok(flattening_map(h)?.orthogonal)
}

/// Both sides of `Oᵀ diag(A, -A) O = [[0, i|A|], [-i|A|, 0]]`, after checking
/// they agree to the scalar's identity tolerance (scaled by `max|A|`).
pub fn flatten_conjugate<T: Real>(h: &MajoranaQuadratic<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let flat = h.flatten()?;
    let map = flattening_map_from_sign(&flat.sign);
    let n = h.num_modes();
    let o = linalg::to_complex(&map.orthogonal);
    let lhs = o.t().dot(double(h).matrix()).dot(&o);
    let mut rhs = linalg::zeros(2 * n);
    let i = Complex::<T>::i();
    rhs.slice_mut(s![..n, n..]).assign(&flat.abs.mapv(|z| z * i));
    rhs.slice_mut(s![n.., ..n]).assign(&flat.abs.mapv(|z| -z * i));
    let residual = linalg::max_abs(&(&lhs - &rhs));
    let tol = T::of(T::IDENTITY_TOL) * linalg::max_abs(h.matrix()).max(T::one());
    if residual > tol {
        return Err(Error::IdentityViolation {
            identity: "flattened conjugation",
            residual: residual.as_f64(),
            tol: tol.as_f64(),
        });
    }
    Ok((lhs, rhs))
}

/// Empty-band data: `T = 4|A|` and the constant `2 tr|A|` with
/// `U† H_doub U = Σ ψ† T ψ - 2 tr|A|`.
#[derive(Debug, Clone)]
pub struct EmptyBand<T: Real> {
    pub t: CMatrix<T>,
    pub constant: T,
}

pub fn empty_band<T: Real>(h: &MajoranaQuadratic<T>) -> Result<EmptyBand<T>> {
    let abs = h.abs_matrix()?;
    let constant = T::of(2.0) * abs.diag().iter().fold(T::zero(), |acc, z| acc + z.re);
    Ok(EmptyBand { t: abs.mapv(|z| z * T::of(4.0)), constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Lattice};
    use crate::scalar::ci;
    use ndarray::array;

    fn two_mode() -> MajoranaQuadratic<f64> {
        let lat = Lattice::chain(2, Boundary::Open, 1).unwrap();
        MajoranaQuadratic::new(lat, array![[ci(0.0), ci(0.25)], [ci(-0.25), ci(0.0)]]).unwrap()
    }

    #[test]
    fn doubled_two_mode_spectrum() {
        let d = double(&two_mode());
        assert_eq!(d.lattice().modes_per_site(), 2);
        let ev = d.spectrum().unwrap();
        let want = [-0.25, -0.25, 0.25, 0.25];
        for (x, y) in ev.iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn two_mode_orthogonal_map() {
        let o = build_o_ff(&two_mode()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // X = iσ(A) = [[0, -1], [1, 0]].
        let want = array![[r, 0.0, 0.0, -r], [0.0, r, r, 0.0], [0.0, -r, r, 0.0], [r, 0.0, 0.0, r]];
        assert!((&o - &want).iter().all(|v| v.abs() < 1e-15));
        let gram = o.t().dot(&o);
        assert!((&gram - &Array2::<f64>::eye(4)).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn generator_exponentiates_to_map() {
        let map = flattening_map(&two_mode()).unwrap();
        let e = linalg::expm_real_antisymmetric(&map.generator).unwrap();
        assert!((&e - &map.orthogonal).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn two_mode_empty_band() {
        let eb = empty_band(&two_mode()).unwrap();
        assert!((eb.constant - 1.0).abs() < 1e-14);
        assert!((&eb.t - &linalg::identity::<f64>(2)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn flatten_conjugate_scales_linearly() {
        let h = two_mode();
        let (l1, _) = flatten_conjugate(&h).unwrap();
        let (l2, r2) = flatten_conjugate(&h.scaled(2.0)).unwrap();
        assert!(linalg::max_abs(&(&l1.mapv(|z| z * 2.0) - &l2)) < 1e-14);
        assert!(linalg::max_abs(&(&l2 - &r2)) < 1e-14);
    }
}
