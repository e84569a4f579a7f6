//! Many-body layer: Majorana operators as dense matrices on Fock space,
//! promotion of quadratic Hamiltonians, Dirac pairs, and Gaussian unitaries.
//!
//! Representation: Jordan-Wigner position `2q` acts as `X` on qubit `q` and
//! position `2q + 1` as `Y`, both dressed with `Z` on every lower qubit. Qubit
//! `q` is bit `q` of the basis index. Lattice modes map to positions site by
//! site; with an even number of modes per site, local mode `l < n/2` shares a
//! qubit with its partner `l + n/2`, so the Dirac mode
//! `ψ = (γ_l + iγ_{l+n/2}) / 2` is that qubit's lowering operator and the
//! empty state is `|0…0⟩`.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::doubling::{self, flattening_map_from_sign};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice};
use crate::linalg;
use crate::quadratic::MajoranaQuadratic;
use crate::scalar::{CMatrix, Real};

/// Largest number of Majorana modes with a dense Fock representation.
pub const MAX_FOCK_MODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Bosonic,
    Fermionic,
    Mixed,
}

/// Dense operator on Fock space with its parity grade.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T: Real> {
    matrix: CMatrix<T>,
    parity: Parity,
}

impl<T: Real> FockOperator<T> {
    /// Wraps a matrix, measuring its parity grade. The dimension must be a
    /// power of two.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || !d.is_power_of_two() {
            return Err(Error::Shape {
                expected: "square with power-of-two dimension".into(),
                actual: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let (even, odd) = parity_parts(&matrix);
        let tol = T::of(T::IDENTITY_TOL) * even.max(odd).max(T::one());
        let parity = match (odd <= tol, even <= tol) {
            (true, _) => Parity::Bosonic,
            (false, true) => Parity::Fermionic,
            (false, false) => Parity::Mixed,
        };
        Ok(Self { matrix, parity })
    }

    pub(crate) fn graded(matrix: CMatrix<T>, parity: Parity) -> Self {
        Self { matrix, parity }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim), parity: Parity::Bosonic }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: linalg::zeros(dim), parity: Parity::Bosonic }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_bosonic(&self) -> bool {
        self.parity == Parity::Bosonic
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norms of the parity-even and parity-odd blocks.
    pub fn parity_parts(&self) -> (T, T) {
        parity_parts(&self.matrix)
    }

    pub fn hermitian_deviation(&self) -> T {
        linalg::hermitian_deviation(&self.matrix)
    }

    /// Operator norm.
    pub fn norm(&self) -> Result<T> {
        linalg::op_norm(&self.matrix)
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: linalg::dagger(&self.matrix), parity: self.parity }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self { matrix: linalg::scale(&self.matrix, s), parity: self.parity }
    }

    pub fn dot(&self, other: &Self) -> Self {
        let parity = match (self.parity, other.parity) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Bosonic,
            _ => Parity::Fermionic,
        };
        Self { matrix: self.matrix.dot(&other.matrix), parity }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix, parity: join_parity(self.parity, other.parity) }
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix - &other.matrix, parity: join_parity(self.parity, other.parity) }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.matrix.zip_mut_with(&other.matrix, |a, b| *a = *a + *b);
        self.parity = join_parity(self.parity, other.parity);
    }

    /// Eigenvalues, ascending. The operator is taken to be Hermitian.
    /// Parity-even operators are diagonalized one parity sector at a time.
    pub fn spectrum(&self) -> Result<Array1<T>> {
        let herm = linalg::hermitian_part(&self.matrix);
        if self.parity != Parity::Bosonic || self.dim() < 4 {
            return T::eigvalsh(&herm);
        }
        let mut all = Vec::with_capacity(self.dim());
        for odd in [false, true] {
            let idx: Vec<usize> = (0..self.dim()).filter(|&x| is_odd(x) == odd).collect();
            let block = herm.select(Axis(0), &idx).select(Axis(1), &idx);
            all.extend(T::eigvalsh(&block)?);
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Array1::from(all))
    }

    /// Difference between the two lowest eigenvalues.
    pub fn gap(&self) -> Result<T> {
        let ev = self.spectrum()?;
        if ev.len() < 2 {
            return Err(Error::InvalidArgument("gap needs at least two levels".into()));
        }
        Ok(ev[1] - ev[0])
    }
}

fn join_parity(a: Parity, b: Parity) -> Parity {
    if a == b {
        a
    } else {
        Parity::Mixed
    }
}

fn is_odd(x: usize) -> bool {
    x.count_ones() % 2 == 1
}

fn parity_parts<T: Real>(m: &CMatrix<T>) -> (T, T) {
    let (mut even, mut odd) = (T::zero(), T::zero());
    for ((y, x), z) in m.indexed_iter() {
        if is_odd(x ^ y) {
            odd = odd + z.norm_sqr();
        } else {
            even = even + z.norm_sqr();
        }
    }
    (even.sqrt(), odd.sqrt())
}

/// Action of one Majorana on basis states: `γ|x⟩ = phase(x) |x ^ bit⟩`,
/// with `phase(x)` one of `±1, ±i`.
#[derive(Debug, Clone, Copy)]
struct Gamma {
    bit: usize,
    y: bool,
}

impl Gamma {
    fn act<T: Real>(self, x: usize) -> (usize, Complex<T>) {
        let string = if is_odd(x & (self.bit - 1)) { -T::one() } else { T::one() };
        let phase = match (self.y, x & self.bit == 0) {
            (false, _) => Complex::new(string, T::zero()),
            (true, true) => Complex::new(T::zero(), string),
            (true, false) => Complex::new(T::zero(), -string),
        };
        (x ^ self.bit, phase)
    }
}

/// Term `coef · γ_{m_1} γ_{m_2} …` of a Majorana polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T: Real> {
    pub coef: Complex<T>,
    pub modes: Vec<usize>,
}

/// Symbolic sum of Majorana monomials over lattice modes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MajoranaPolynomial<T: Real> {
    pub terms: Vec<Monomial<T>>,
}

impl<T: Real> MajoranaPolynomial<T> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn push(&mut self, coef: Complex<T>, modes: Vec<usize>) {
        self.terms.push(Monomial { coef, modes });
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: T) -> Self {
        let terms = self.terms.iter().map(|t| Monomial { coef: t.coef * s, modes: t.modes.clone() }).collect();
        Self { terms }
    }

    /// Relabels every mode, e.g. to embed a polynomial into a larger system.
    pub fn map_modes(&self, f: impl Fn(usize) -> usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial { coef: t.coef, modes: t.modes.iter().map(|&m| f(m)).collect() })
            .collect();
        Self { terms }
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.modes.len() % 2 == 0)
    }
}

/// Fock space of the Majorana modes of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    lattice: Lattice,
    positions: Vec<usize>,
}

impl FockSpace {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let n = lattice.num_modes();
        if n % 2 == 1 {
            return Err(Error::OddModeCount(n));
        }
        if n > MAX_FOCK_MODES {
            return Err(Error::DimensionOverflow { modes: n, cap: MAX_FOCK_MODES });
        }
        let per = lattice.modes_per_site();
        let positions = (0..n)
            .map(|m| {
                let (site, local) = (lattice.site_of_mode(m), lattice.local_of_mode(m));
                let slot = if per.is_multiple_of(2) {
                    if local < per / 2 {
                        2 * local
                    } else {
                        2 * (local - per / 2) + 1
                    }
                } else {
                    local
                };
                site * per + slot
            })
            .collect();
        Ok(Self { lattice: lattice.clone(), positions })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn num_modes(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        1 << (self.num_modes() / 2)
    }

    /// Jordan-Wigner position of a lattice mode.
    pub fn position(&self, mode: usize) -> usize {
        self.positions[mode]
    }

    fn gamma(&self, mode: usize) -> Gamma {
        let p = self.positions[mode];
        Gamma { bit: 1 << (p / 2), y: p % 2 == 1 }
    }

    pub fn majorana<T: Real>(&self, mode: usize) -> Result<FockOperator<T>> {
        if mode >= self.num_modes() {
            return Err(Error::InvalidArgument(format!("mode {mode} out of range for {} modes", self.num_modes())));
        }
        let mut p = MajoranaPolynomial::new();
        p.push(Complex::one(), vec![mode]);
        Ok(FockOperator::graded(self.materialize(&p), Parity::Fermionic))
    }

    /// Total parity `(-1)^{number of occupied qubits}`.
    pub fn parity_operator<T: Real>(&self) -> FockOperator<T> {
        let d = self.dim();
        let diag = Array1::from_shape_fn(d, |x| Complex::new(if is_odd(x) { -T::one() } else { T::one() }, T::zero()));
        FockOperator::graded(Array2::from_diag(&diag), Parity::Bosonic)
    }

    /// All-empty basis state `|0…0⟩`.
    pub fn empty_state<T: Real>(&self) -> Array1<Complex<T>> {
        let mut v = Array1::from_elem(self.dim(), Complex::zero());
        v[0] = Complex::one();
        v
    }

    fn materialize<T: Real>(&self, poly: &MajoranaPolynomial<T>) -> CMatrix<T> {
        let d = self.dim();
        let mut m = linalg::zeros(d);
        for term in &poly.terms {
            if term.coef.is_zero() {
                continue;
            }
            let gammas: Vec<Gamma> = term.modes.iter().rev().map(|&k| self.gamma(k)).collect();
            for x in 0..d {
                let (mut y, mut phase) = (x, term.coef);
                for g in &gammas {
                    let (next, ph) = g.act::<T>(y);
                    y = next;
                    phase = phase * ph;
                }
                m[[y, x]] = m[[y, x]] + phase;
            }
        }
        m
    }

    /// Dense operator of a Majorana polynomial.
    pub fn polynomial<T: Real>(&self, poly: &MajoranaPolynomial<T>) -> Result<FockOperator<T>> {
        if let Some(&bad) = poly.terms.iter().flat_map(|t| t.modes.iter()).find(|&&m| m >= self.num_modes()) {
            return Err(Error::InvalidArgument(format!("mode {bad} out of range for {} modes", self.num_modes())));
        }
        let parity = if poly.is_even() {
            Parity::Bosonic
        } else if poly.terms.iter().all(|t| t.modes.len() % 2 == 1) {
            Parity::Fermionic
        } else {
            Parity::Mixed
        };
        Ok(FockOperator::graded(self.materialize(poly), parity))
    }

    /// `Σ_{jk} γ_j A_jk γ_k`.
    pub fn quadratic<T: Real>(&self, h: &MajoranaQuadratic<T>) -> Result<FockOperator<T>> {
        if h.lattice() != &self.lattice {
            return Err(Error::InvalidArgument("quadratic lives on a different lattice".into()));
        }
        self.polynomial(&quadratic_polynomial(h.matrix()))
    }

    /// Number of Dirac modes `ψ_p = (γ_p + iγ_{p+N/2}) / 2`.
    pub fn num_pairs(&self) -> usize {
        self.num_modes() / 2
    }

    fn check_paired(&self) -> Result<()> {
        let per = self.lattice.modes_per_site();
        if per % 2 == 1 {
            return Err(Error::UnpairedSite(per));
        }
        Ok(())
    }

    /// `(ψ†_p, ψ_p)` with `ψ†_p = (γ_p - iγ_{p+N/2}) / 2`. Pair `p` sits on
    /// site `p % num_sites`.
    pub fn dirac_pair<T: Real>(&self, pair: usize) -> Result<(FockOperator<T>, FockOperator<T>)> {
        self.check_paired()?;
        if pair >= self.num_pairs() {
            return Err(Error::InvalidArgument(format!("pair {pair} out of range for {} pairs", self.num_pairs())));
        }
        let half = T::of(0.5);
        let partner = pair + self.num_pairs();
        let mut create = MajoranaPolynomial::new();
        create.push(Complex::new(half, T::zero()), vec![pair]);
        create.push(Complex::new(T::zero(), -half), vec![partner]);
        let annihilate = MajoranaPolynomial {
            terms: create.terms.iter().map(|t| Monomial { coef: t.coef.conj(), modes: t.modes.clone() }).collect(),
        };
        Ok((self.polynomial(&create)?, self.polynomial(&annihilate)?))
    }

    /// `Σ_{pq} ψ†_p T_pq ψ_q` for Hermitian `T` indexed by pair.
    pub fn empty_band<T: Real>(&self, t: &CMatrix<T>) -> Result<FockOperator<T>> {
        self.polynomial(&self.empty_band_polynomial(t)?)
    }

    /// Majorana polynomial of `Σ_{pq} ψ†_p T_pq ψ_q`.
    pub fn empty_band_polynomial<T: Real>(&self, t: &CMatrix<T>) -> Result<MajoranaPolynomial<T>> {
        self.check_paired()?;
        let n = self.num_pairs();
        linalg::check_square(t, n)?;
        let dev = linalg::hermitian_deviation(t);
        if dev > T::of(T::IDENTITY_TOL) * linalg::max_abs(t).max(T::one()) {
            return Err(Error::NotHermitian { deviation: dev.as_f64() });
        }
        let quarter = T::of(0.25);
        let i = Complex::<T>::i();
        let mut poly = MajoranaPolynomial::new();
        for p in 0..n {
            for q in 0..n {
                let c = t[[p, q]] * quarter;
                if c.is_zero() {
                    continue;
                }
                let (pp, qq) = (p + n, q + n);
                // (γ_p - iγ_p')(γ_q + iγ_q') / 4
                poly.push(c, vec![p, q]);
                poly.push(c * i, vec![p, qq]);
                poly.push(-c * i, vec![pp, q]);
                poly.push(c, vec![pp, qq]);
            }
        }
        Ok(poly)
    }

    /// `γ_m W γ_m`, in `O(dim²)` without matrix products.
    pub fn conjugate_by_majorana<T: Real>(&self, w: &CMatrix<T>, mode: usize) -> CMatrix<T> {
        let g = self.gamma(mode);
        let d = self.dim();
        let phase: Vec<Complex<T>> = (0..d).map(|x| g.act::<T>(x).1).collect();
        Array2::from_shape_fn((d, d), |(y, x)| phase[y].conj() * w[[y ^ g.bit, x ^ g.bit]] * phase[x])
    }

    /// Gaussian unitary `U = exp(¼ Σ m_jk γ_j γ_k)` realizing the orthogonal
    /// map `O = exp(m)`: `U† γ_l U = Σ_k O_lk γ_k`.
    pub fn lift_orthogonal<T: Real>(
        &self,
        orthogonal: &Array2<T>,
        generator: &Array2<T>,
    ) -> Result<GaussianUnitary<T>> {
        let n = self.num_modes();
        linalg::check_square(orthogonal, n)?;
        linalg::check_square(generator, n)?;
        let exp = linalg::expm_real_antisymmetric(generator)?;
        let residual = exp.iter().zip(orthogonal.iter()).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
        let tol = T::of(1e-10).max(T::of(T::IDENTITY_TOL) * T::of(10.0));
        if residual > tol {
            return Err(Error::GeneratorMismatch { residual: residual.as_f64() });
        }
        let mut poly = MajoranaPolynomial::new();
        let half = T::of(0.5);
        for j in 0..n {
            for k in j + 1..n {
                let mjk = (generator[[j, k]] - generator[[k, j]]) * half;
                if mjk != T::zero() {
                    poly.push(Complex::new(mjk * half, T::zero()), vec![j, k]);
                }
            }
        }
        let g = self.materialize(&poly);
        let u = linalg::expm_antihermitian(&g)?;
        Ok(GaussianUnitary {
            orthogonal: orthogonal.clone(),
            generator: generator.clone(),
            fock: FockOperator::graded(u, Parity::Bosonic),
        })
    }
}

/// Polynomial `Σ_{j<k} 2A_jk γ_j γ_k` equal to `Σ_{jk} γ_j A_jk γ_k`.
pub fn quadratic_polynomial<T: Real>(a: &CMatrix<T>) -> MajoranaPolynomial<T> {
    let mut poly = MajoranaPolynomial::new();
    let two = T::of(2.0);
    for j in 0..a.nrows() {
        for k in j + 1..a.ncols() {
            if !a[[j, k]].is_zero() {
                poly.push(a[[j, k]] * two, vec![j, k]);
            }
        }
    }
    poly
}

/// Fock unitary together with the orthogonal mode map it implements.
#[derive(Debug, Clone)]
pub struct GaussianUnitary<T: Real> {
    pub orthogonal: Array2<T>,
    pub generator: Array2<T>,
    pub fock: FockOperator<T>,
}

impl<T: Real> GaussianUnitary<T> {
    /// `U† W U`.
    pub fn conjugate(&self, w: &CMatrix<T>) -> CMatrix<T> {
        let u = self.fock.matrix();
        linalg::dagger(u).dot(w).dot(u)
    }

    /// Largest entry of `U† γ_l U - Σ_k O_lk γ_k` over all modes `l`.
    pub fn conjugation_residual(&self, space: &FockSpace) -> Result<T> {
        let n = space.num_modes();
        let gammas: Vec<CMatrix<T>> =
            (0..n).map(|m| space.majorana(m).map(FockOperator::into_matrix)).collect::<Result<_>>()?;
        let mut worst = T::zero();
        for l in 0..n {
            let lhs = self.conjugate(&gammas[l]);
            let mut rhs = linalg::zeros(space.dim());
            for (k, g) in gammas.iter().enumerate() {
                let o = self.orthogonal[[l, k]];
                if o != T::zero() {
                    rhs.scaled_add(Complex::new(o, T::zero()), g);
                }
            }
            worst = worst.max(linalg::max_abs(&(&lhs - &rhs)));
        }
        Ok(worst)
    }
}

/// `γ_mode` among `n` Majoranas, one per site of an open chain.
pub fn majorana<T: Real>(mode: usize, n: usize) -> Result<FockOperator<T>> {
    if n % 2 == 1 {
        return Err(Error::OddModeCount(n));
    }
    let lat = Lattice::chain(n.max(1), Boundary::Open, 1)?;
    FockSpace::new(&lat)?.majorana(mode)
}

/// Dense many-body operator of a quadratic Hamiltonian.
pub fn quadratic_to_fock<T: Real>(h: &MajoranaQuadratic<T>) -> Result<FockOperator<T>> {
    FockSpace::new(h.lattice())?.quadratic(h)
}

/// Residual of `U† H_doub U = Σ ψ† (4|A|) ψ - 2 tr|A|` in operator norm, with
/// `U` the lift of the flattening map through its `π/4` generator.
pub fn verify_hdsub<T: Real>(h: &MajoranaQuadratic<T>) -> Result<T> {
    let flat = h.flatten()?;
    let doubled = doubling::double(h);
    let space = FockSpace::new(doubled.lattice())?;
    let hd = space.quadratic(&doubled)?;
    let map = flattening_map_from_sign(&flat.sign);
    let u = space.lift_orthogonal(&map.orthogonal, &map.generator)?;
    let eb = doubling::empty_band(h)?;
    let target = space.empty_band(&eb.t)?;
    let mut diff = u.conjugate(hd.matrix()) - target.matrix();
    for i in 0..space.dim() {
        diff[[i, i]] = diff[[i, i]] + Complex::new(eb.constant, T::zero());
    }
    linalg::herm_norm(&diff)
}
