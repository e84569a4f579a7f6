//! Spectral filtering in the eigenbasis and the per-site rewrite of a
//! perturbed Hamiltonian into terms that commute with its ground projector.
//!
//! Filtering `O` against `H` multiplies matrix elements in the eigenbasis of
//! `H` by `g̃(E_m - E_n)`, the frequency-domain form of
//! `∫ dt g(t) e^{iHt} O e^{-iHt}`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockOperator, Parity};
use crate::linalg::{self, Eigen};
use crate::scalar::{CMatrix, Real};

/// Eigenvalues closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Smooth bump `g̃(ω) = exp(1 - 1/(1 - (ω/w)²))` for `|ω| < w`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFilter {
    pub half_width: f64,
}

impl Default for BumpFilter {
    fn default() -> Self {
        Self { half_width: 0.5 }
    }
}

impl BumpFilter {
    pub fn new(half_width: f64) -> Result<Self> {
        if half_width.is_nan() || half_width <= 0.0 {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self { half_width })
    }

    pub fn value(&self, omega: f64) -> f64 {
        let x = omega / self.half_width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }
}

/// Ground space of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct GroundData<T: Real> {
    pub projector: CMatrix<T>,
    pub degeneracy: usize,
    pub e_min: T,
    pub e_max: T,
    /// Distance from the top of the ground band to the next eigenvalue.
    pub gap: T,
    pub eigen: Eigen<T>,
}

/// Projector onto the `g` lowest eigenstates of `h`.
pub fn ground_data<T: Real>(h: &FockOperator<T>, g: usize) -> Result<GroundData<T>> {
    let eigen = Eigen::of(&linalg::hermitian_part(h.matrix()))?;
    ground_from_eigen(eigen, g)
}

fn ground_from_eigen<T: Real>(eigen: Eigen<T>, g: usize) -> Result<GroundData<T>> {
    let d = eigen.dim();
    if g == 0 || g >= d {
        return Err(Error::InvalidArgument(format!("degeneracy {g} must lie in 1..{d}")));
    }
    let gap = eigen.values[g] - eigen.values[g - 1];
    if gap < T::of(DEGENERACY_TOL) {
        return Err(Error::DegeneracyAmbiguous { index: g - 1, splitting: gap.as_f64() });
    }
    let v = eigen.vectors.slice(ndarray::s![.., ..g]).to_owned();
    let projector = v.dot(&linalg::dagger(&v));
    Ok(GroundData { projector, degeneracy: g, e_min: eigen.values[0], e_max: eigen.values[g - 1], gap, eigen })
}

/// `V (g̃(E_m - E_n) (V† O V)_mn) V†`, evaluated as
/// `O - V ((1 - g̃) ⊙ V† O V) V†` so the parts the filter keeps never pass
/// through the eigenbasis round trip.
pub fn filter_in_eigenbasis<T: Real>(eigen: &Eigen<T>, o: &CMatrix<T>, f: &BumpFilter) -> CMatrix<T> {
    let mut removed = eigen.to_eigenbasis(o);
    let e = &eigen.values;
    for ((m, n), z) in removed.indexed_iter_mut() {
        let w = 1.0 - f.value((e[m] - e[n]).as_f64());
        *z = *z * T::of(w);
    }
    o - &eigen.from_eigenbasis(&removed)
}

/// Filters `o` against the Hermitian operator `h`.
pub fn spectral_filter<T: Real>(h: &FockOperator<T>, o: &FockOperator<T>, f: &BumpFilter) -> Result<FockOperator<T>> {
    let eigen = Eigen::of(&linalg::hermitian_part(h.matrix()))?;
    let parity = if h.parity() == Parity::Bosonic { o.parity() } else { Parity::Mixed };
    Ok(FockOperator::graded(filter_in_eigenbasis(&eigen, o.matrix(), f), parity))
}

/// Frame in which the perturbed Hamiltonian is filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFrame {
    /// Rotate `H_s` by the direct rotation `R` carrying `P₀` onto `P`, so the
    /// frame Hamiltonian `R† H_s R` has ground projector `P₀` and every `X_u`
    /// commutes with it.
    #[default]
    Aligned,
    /// Filter `H_s` itself. `M_u` commutes with `P₀` but not with the perturbed
    /// `P`, so `[X_u, P]` is generically of order `J`; the residuals are
    /// reported, not enforced.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewriteOptions {
    pub filter: BumpFilter,
    pub degeneracy: usize,
    pub frame: FilterFrame,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        Self { filter: BumpFilter::default(), degeneracy: 1, frame: FilterFrame::Aligned }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteReport {
    pub site: usize,
    pub x_norm: f64,
    /// `‖[X_u, P]‖` against the frame projector.
    pub x_commutator: f64,
    /// `‖[M_u, P₀]‖`.
    pub m_commutator: f64,
}

/// Norms and identity residuals of a rewrite, all in operator norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub frame: FilterFrame,
    pub s: f64,
    pub half_width: f64,
    pub degeneracy: usize,
    pub gap_h0: f64,
    pub gap_hs: f64,
    /// `‖R - 1‖` for the aligned frame, 0 for the direct one.
    pub rotation: f64,
    /// `‖Σ_u M_u - H₀‖`.
    pub resummation_h0: f64,
    /// `‖Σ_u (H̃_{0,u} + Ṽ_u) - H'‖` with `H'` the frame Hamiltonian.
    pub resummation_hs: f64,
    pub sites: Vec<SiteReport>,
}

impl FilterReport {
    pub fn max_x_norm(&self) -> f64 {
        self.sites.iter().map(|s| s.x_norm).fold(0.0, f64::max)
    }

    pub fn max_x_commutator(&self) -> f64 {
        self.sites.iter().map(|s| s.x_commutator).fold(0.0, f64::max)
    }

    pub fn max_m_commutator(&self) -> f64 {
        self.sites.iter().map(|s| s.m_commutator).fold(0.0, f64::max)
    }

    /// Fails on the first identity whose residual exceeds `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let checks = [
            ("sum of M_u equals H0", self.resummation_h0),
            ("sum of filtered terms equals the frame Hamiltonian", self.resummation_hs),
            ("[X_u, P] = 0", self.max_x_commutator()),
            ("[M_u, P0] = 0", self.max_m_commutator()),
        ];
        for (identity, residual) in checks {
            if residual.is_nan() || residual > tol {
                return Err(Error::IdentityViolation { identity, residual, tol });
            }
        }
        Ok(())
    }
}

/// Filtered per-site operators together with their report.
#[derive(Debug, Clone)]
pub struct Rewrite<T: Real> {
    pub x: BTreeMap<usize, CMatrix<T>>,
    pub m: BTreeMap<usize, CMatrix<T>>,
    pub report: FilterReport,
}

fn sum_of<T: Real>(dim: usize, ops: &BTreeMap<usize, FockOperator<T>>) -> CMatrix<T> {
    let mut total = linalg::zeros(dim);
    for op in ops.values() {
        total = total + op.matrix();
    }
    total
}

fn norm<T: Real>(m: &CMatrix<T>) -> Result<f64> {
    Ok(linalg::op_norm(m)?.as_f64())
}

/// Direct rotation `R = [P P₀ + (1-P)(1-P₀)] (1 - (P - P₀)²)^{-1/2}`: the
/// unitary closest to the identity with `R P₀ R† = P`.
pub fn direct_rotation<T: Real>(p0: &CMatrix<T>, p: &CMatrix<T>) -> Result<CMatrix<T>> {
    let d = p0.nrows();
    let id = linalg::identity::<T>(d);
    let diff = linalg::hermitian_part(&(p - p0));
    let eig = Eigen::of(&diff)?;
    let worst = eig.values.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if worst >= T::one() - T::of(1e-8) {
        return Err(Error::InvalidArgument("perturbed ground space is orthogonal to the unperturbed one".into()));
    }
    let inv_sqrt = eig.apply(|lam| Complex::new(T::one() / (T::one() - lam * lam).sqrt(), T::zero()));
    let q = &id - p;
    let q0 = &id - p0;
    Ok((p.dot(p0) + q.dot(&q0)).dot(&inv_sqrt))
}

/// Rewrites `H_s = H₀ + sV` as `H' = H₀ + Σ_u X_u` with
/// `X_u = Ṽ_u + (H̃_{0,u} - M_u)`: `Ṽ_u`, `H̃_{0,u}` filter the site pieces
/// against `H'` and `M_u` filters `H_{0,u}` against `H₀`.
///
/// Both `H₀` and `H_s` must have their ground band separated by at least
/// the filter half width; otherwise [`Error::GapTooSmall`].
pub fn rewrite_decomposition<T: Real>(
    h0: &BTreeMap<usize, FockOperator<T>>,
    v: &BTreeMap<usize, FockOperator<T>>,
    s: T,
    opts: &RewriteOptions,
) -> Result<Rewrite<T>> {
    let dim = h0
        .values()
        .chain(v.values())
        .map(FockOperator::dim)
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty Hamiltonian".into()))?;
    let g = opts.degeneracy;
    let hw = opts.filter.half_width;
    let h0_total = sum_of(dim, h0);
    let v_total = sum_of(dim, v);
    let hs = &h0_total + &v_total.mapv(|z| z * s);

    let ground0 = ground_from_eigen(Eigen::of(&linalg::hermitian_part(&h0_total))?, g)?;
    let ground_s = ground_from_eigen(Eigen::of(&linalg::hermitian_part(&hs))?, g)?;
    for gap in [ground0.gap, ground_s.gap] {
        if gap.as_f64() < hw {
            return Err(Error::GapTooSmall { gap: gap.as_f64(), required: hw });
        }
    }

    let (frame_h, frame_eigen, frame_p, rotation) = match opts.frame {
        FilterFrame::Aligned => {
            let r = direct_rotation(&ground0.projector, &ground_s.projector)?;
            let rd = linalg::dagger(&r);
            let frame_h = rd.dot(&hs).dot(&r);
            let eigen = Eigen { values: ground_s.eigen.values.clone(), vectors: rd.dot(&ground_s.eigen.vectors) };
            let rotation = norm(&(&r - &linalg::identity::<T>(dim)))?;
            (frame_h, eigen, ground0.projector.clone(), Some((r, rd, rotation)))
        }
        FilterFrame::Direct => (hs.clone(), ground_s.eigen.clone(), ground_s.projector.clone(), None),
    };
    let to_frame = |m: &CMatrix<T>| match &rotation {
        Some((r, rd, _)) => rd.dot(m).dot(r),
        None => m.clone(),
    };

    let sites: BTreeSet<usize> = h0.keys().chain(v.keys()).copied().collect();
    let zero = linalg::zeros::<T>(dim);
    let mut x = BTreeMap::new();
    let mut m_ops = BTreeMap::new();
    let mut sum_m = linalg::zeros::<T>(dim);
    let mut sum_filtered = linalg::zeros::<T>(dim);
    let mut reports = Vec::with_capacity(sites.len());
    for &u in &sites {
        let h0u = h0.get(&u).map_or(&zero, FockOperator::matrix);
        let vu = v.get(&u).map_or(zero.clone(), |op| op.matrix().mapv(|z| z * s));
        let v_tilde = filter_in_eigenbasis(&frame_eigen, &to_frame(&vu), &opts.filter);
        let h0_tilde = filter_in_eigenbasis(&frame_eigen, &to_frame(h0u), &opts.filter);
        let m_u = filter_in_eigenbasis(&ground0.eigen, h0u, &opts.filter);
        let x_u = &v_tilde + &h0_tilde - &m_u;
        sum_m = sum_m + &m_u;
        sum_filtered = sum_filtered + &v_tilde + &h0_tilde;
        reports.push(SiteReport {
            site: u,
            x_norm: norm(&x_u)?,
            x_commutator: norm(&linalg::commutator(&x_u, &frame_p))?,
            m_commutator: norm(&linalg::commutator(&m_u, &ground0.projector))?,
        });
        x.insert(u, x_u);
        m_ops.insert(u, m_u);
    }
    let report = FilterReport {
        frame: opts.frame,
        s: s.as_f64(),
        half_width: hw,
        degeneracy: g,
        gap_h0: ground0.gap.as_f64(),
        gap_hs: ground_s.gap.as_f64(),
        rotation: rotation.as_ref().map_or(0.0, |r| r.2),
        resummation_h0: norm(&(&sum_m - &h0_total))?,
        resummation_hs: norm(&(&sum_filtered - &frame_h))?,
        sites: reports,
    };
    Ok(Rewrite { x, m: m_ops, report })
}
