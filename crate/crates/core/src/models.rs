//! Gapped model builders.
//!
//! Every builder emits `A` with `H = Σ γ_j A_jk γ_k` equal to the textbook
//! Hamiltonian up to an additive constant. A term `coef · γ_m γ_n` (m ≠ n)
//! contributes `A_mn = coef / 2`, `A_nm = -coef / 2`.
//!
//! Two Majoranas per site are combined as `c_j = (a_j + i b_j) / 2`, with
//! `a_j = mode(j, 0)` and `b_j = mode(j, 1)`.

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice};
use crate::quadratic::MajoranaQuadratic;
use crate::scalar::{CMatrix, Real};

/// Accumulates `coef · γ_m γ_n` terms into an antisymmetric coupling matrix.
struct Couplings<T: Real> {
    a: CMatrix<T>,
}

impl<T: Real> Couplings<T> {
    fn new(n: usize) -> Self {
        Self { a: Array2::from_elem((n, n), Complex::zero()) }
    }

    fn add(&mut self, m: usize, n: usize, coef: Complex<T>) {
        let half = coef * T::of(0.5);
        self.a[[m, n]] = self.a[[m, n]] + half;
        self.a[[n, m]] = self.a[[n, m]] - half;
    }
}

/// p-wave (Kitaev) chain
/// `H = -μ Σ c†c - t Σ (c†_j c_{j+1} + h.c.) + Δp Σ (c_j c_{j+1} + h.c.)`,
/// in Majorana form
/// `H = (i/2) Σ [(Δp - t) a_j b_{j+1} + (Δp + t) b_j a_{j+1} - μ a_j b_j]`.
///
/// For a periodic chain the eigenvalues of `A` are `±E(k)/4` with
/// `E(k) = √((2t cos k + μ)² + 4Δp² sin²k)`, so the gap is `min_k E(k)`:
/// `|μ - 2|` at `t = Δp = 1` for even `L`, and `|μ|` at `t = Δp = 0`.
pub fn kitaev_chain<T: Real>(
    size: usize,
    t: f64,
    pairing: f64,
    mu: f64,
    boundary: Boundary,
) -> Result<MajoranaQuadratic<T>> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("chain needs at least 2 sites, got {size}")));
    }
    let lat = Lattice::chain(size, boundary, 2)?;
    let mut c = Couplings::new(lat.num_modes());
    let i_half = |x: f64| Complex::new(T::zero(), T::of(0.5 * x));
    for j in 0..size {
        c.add(lat.mode(j, 0), lat.mode(j, 1), i_half(-mu));
        let bonded = j + 1 < size || boundary == Boundary::Periodic;
        if bonded {
            let k = (j + 1) % size;
            c.add(lat.mode(j, 0), lat.mode(k, 1), i_half(pairing - t));
            c.add(lat.mode(j, 1), lat.mode(k, 0), i_half(pairing + t));
        }
    }
    MajoranaQuadratic::new(lat, c.a)
}

/// Single-particle energy `E(k)` of the periodic chain.
pub fn kitaev_dispersion(k: f64, t: f64, pairing: f64, mu: f64) -> f64 {
    ((2.0 * t * k.cos() + mu).powi(2) + 4.0 * pairing.powi(2) * k.sin().powi(2)).sqrt()
}

/// Decoupled sites `H = -(i/2) μ Σ a_j b_j` on any lattice with two modes per
/// site. Gap `|μ|`; `σ(A)` is strictly on-site.
pub fn atomic<T: Real>(dims: usize, size: usize, mu: f64, boundary: Boundary) -> Result<MajoranaQuadratic<T>> {
    let lat = Lattice::new(dims, size, boundary, 2)?;
    let mut c = Couplings::new(lat.num_modes());
    for j in 0..lat.num_sites() {
        c.add(lat.mode(j, 0), lat.mode(j, 1), Complex::new(T::zero(), T::of(-0.5 * mu)));
    }
    MajoranaQuadratic::new(lat, c.a)
}

/// Majorana form of the Bogoliubov-de Gennes Hamiltonian
/// `H = Σ h_ij c†_i c_j + ½ Σ (Δ_ij c†_i c†_j + h.c.)`
/// on a lattice with two modes per site. `h` is Hermitian and `Δ`
/// antisymmetric, both indexed by site. The constant `tr(h)/2` is dropped.
pub fn from_bdg<T: Real>(lat: Lattice, h: &CMatrix<T>, delta: &CMatrix<T>) -> Result<MajoranaQuadratic<T>> {
    if lat.modes_per_site() != 2 {
        return Err(Error::InvalidArgument(format!(
            "BdG conversion needs two Majoranas per site, lattice has {}",
            lat.modes_per_site()
        )));
    }
    let ns = lat.num_sites();
    crate::linalg::check_square(h, ns)?;
    crate::linalg::check_square(delta, ns)?;
    let i = Complex::<T>::i();
    let quarter = T::of(0.25);
    let eighth = T::of(0.125);
    // Q with H = Σ γ_m Q_mn γ_n + const, in (a, b) blocks.
    let mut q: CMatrix<T> = Array2::from_elem((2 * ns, 2 * ns), Complex::zero());
    for x in 0..ns {
        for y in 0..ns {
            let hxy = h[[x, y]] * quarter;
            let d = delta[[x, y]] * eighth;
            let dd = delta[[y, x]].conj() * eighth;
            let (ax, bx, ay, by) = (lat.mode(x, 0), lat.mode(x, 1), lat.mode(y, 0), lat.mode(y, 1));
            q[[ax, ay]] = q[[ax, ay]] + hxy + d + dd;
            q[[ax, by]] = q[[ax, by]] + i * hxy - i * d + i * dd;
            q[[bx, ay]] = q[[bx, ay]] - i * hxy - i * d + i * dd;
            q[[bx, by]] = q[[bx, by]] + hxy - d - dd;
        }
    }
    let half = T::of(0.5);
    let a = Array2::from_shape_fn(q.raw_dim(), |(m, n)| (q[[m, n]] - q[[n, m]]) * half);
    MajoranaQuadratic::new(lat, a)
}

/// Spinless `p + ip` superconductor on an `L x L` lattice:
/// on-site `-μ`, hopping `-t`, pairing `Δp c_r c_{r+x} + iΔp c_r c_{r+y} + h.c.`.
/// Periodic bands `E(k) = √((2t(cos kx + cos ky) + μ)² + 4Δp²(sin²kx + sin²ky))`.
pub fn p_ip_2d<T: Real>(
    size: usize,
    t: f64,
    pairing: f64,
    mu: f64,
    boundary: Boundary,
) -> Result<MajoranaQuadratic<T>> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("lattice needs at least 2 sites per axis, got {size}")));
    }
    let lat = Lattice::new(2, size, boundary, 2)?;
    let ns = lat.num_sites();
    let mut h = Array2::from_elem((ns, ns), Complex::<T>::zero());
    let mut delta = h.clone();
    for r in 0..ns {
        h[[r, r]] = h[[r, r]] + Complex::new(T::of(-mu), T::zero());
        let xy = lat.coords(r);
        for (axis, pair) in [(0usize, Complex::new(pairing, 0.0)), (1, Complex::new(0.0, pairing))] {
            if xy[axis] + 1 == size && boundary == Boundary::Open {
                continue;
            }
            let mut nb = xy.clone();
            nb[axis] = (nb[axis] + 1) % size;
            let s = lat.index(&nb.into())?;
            let hop = Complex::new(T::of(-t), T::zero());
            h[[r, s]] = h[[r, s]] + hop;
            h[[s, r]] = h[[s, r]] + hop;
            // Δ c_r c_s + h.c. is Δ* c†_s c†_r + h.c.
            let conj = Complex::new(T::of(pair.re), T::of(-pair.im));
            delta[[s, r]] = delta[[s, r]] + conj;
            delta[[r, s]] = delta[[r, s]] - conj;
        }
    }
    from_bdg(lat, &h, &delta)
}

/// Band energy of the periodic `p + ip` model.
pub fn p_ip_dispersion(kx: f64, ky: f64, t: f64, pairing: f64, mu: f64) -> f64 {
    let xi = 2.0 * t * (kx.cos() + ky.cos()) + mu;
    (xi * xi + 4.0 * pairing * pairing * (kx.sin().powi(2) + ky.sin().powi(2))).sqrt()
}

/// Random couplings with `|A_mn| ≤ (K / n_max) e^{-ν d}`, so every site block
/// has operator norm at most `K e^{-ν d}`. Entries are purely imaginary with
/// uniform magnitude and random sign. No gap is guaranteed.
pub fn random_local<T: Real>(lat: Lattice, amplitude: f64, rate: f64, seed: u64) -> Result<MajoranaQuadratic<T>> {
    if !(amplitude > 0.0 && rate > 0.0) {
        return Err(Error::InvalidArgument(format!("K and nu must be positive, got {amplitude}, {rate}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lat.num_modes();
    let scale = amplitude / lat.modes_per_site() as f64;
    let mut a = Array2::from_elem((n, n), Complex::<T>::zero());
    for m in 0..n {
        for k in m + 1..n {
            let env = scale * (-rate * lat.mode_dist(m, k) as f64).exp();
            let u: f64 = rng.gen();
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let x = T::of(sign * u * env);
            a[[m, k]] = Complex::new(T::zero(), x);
            a[[k, m]] = Complex::new(T::zero(), -x);
        }
    }
    MajoranaQuadratic::new(lat, a)
}

fn one() -> f64 {
    1.0
}

fn open() -> Boundary {
    Boundary::Open
}

/// Serializable description of any builder in this module, used by sweep
/// configs and the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Kitaev {
        #[serde(rename = "L")]
        size: usize,
        #[serde(default = "one")]
        t: f64,
        #[serde(default = "one")]
        delta: f64,
        mu: f64,
        #[serde(default = "open")]
        bc: Boundary,
    },
    Pip2d {
        #[serde(rename = "L")]
        size: usize,
        #[serde(default = "one")]
        t: f64,
        #[serde(default = "one")]
        delta: f64,
        mu: f64,
        #[serde(default = "open")]
        bc: Boundary,
    },
    Atomic {
        #[serde(default = "one_dim")]
        dims: usize,
        #[serde(rename = "L")]
        size: usize,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "open")]
        bc: Boundary,
    },
    Random {
        #[serde(default = "one_dim")]
        dims: usize,
        #[serde(rename = "L")]
        size: usize,
        #[serde(default = "two_modes")]
        modes: usize,
        #[serde(rename = "K", default = "one")]
        amplitude: f64,
        #[serde(rename = "nu", default = "one")]
        rate: f64,
        seed: u64,
        #[serde(default = "open")]
        bc: Boundary,
    },
}

fn one_dim() -> usize {
    1
}

fn two_modes() -> usize {
    2
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kitaev { .. } => "kitaev",
            Self::Pip2d { .. } => "pip2d",
            Self::Atomic { .. } => "atomic",
            Self::Random { .. } => "random",
        }
    }

    pub fn build<T: Real>(&self) -> Result<MajoranaQuadratic<T>> {
        match *self {
            Self::Kitaev { size, t, delta, mu, bc } => kitaev_chain(size, t, delta, mu, bc),
            Self::Pip2d { size, t, delta, mu, bc } => p_ip_2d(size, t, delta, mu, bc),
            Self::Atomic { dims, size, mu, bc } => atomic(dims, size, mu, bc),
            Self::Random { dims, size, modes, amplitude, rate, seed, bc } => {
                random_local(Lattice::new(dims, size, bc, modes)?, amplitude, rate, seed)
            }
        }
    }
}
