#![allow(dead_code)]

use fermistab::fock::{FockOperator, FockSpace};
use fermistab::{Boundary, CMatrix, Lattice, Quadratic64};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A = iR` with `R` real antisymmetric, entries uniform in `[-1, 1]`,
/// redrawn until `min|eig A| ≥ floor`.
pub fn random_gapped(lat: &Lattice, floor: f64, seed: u64) -> Quadratic64 {
    let mut r = rng(seed);
    let n = lat.num_modes();
    loop {
        let mut a = Array2::zeros((n, n));
        for j in 0..n {
            for k in j + 1..n {
                let x: f64 = r.gen_range(-1.0..1.0);
                a[[j, k]] = Complex64::new(0.0, x);
                a[[k, j]] = Complex64::new(0.0, -x);
            }
        }
        let h = Quadratic64::new(lat.clone(), a).unwrap();
        if h.spectrum().unwrap().iter().all(|l| l.abs() >= floor) {
            return h;
        }
    }
}

pub fn chain(sites: usize, modes: usize) -> Lattice {
    Lattice::chain(sites, Boundary::Open, modes).unwrap()
}

/// Many-body spectrum from the positive single-particle eigenvalues `λ`:
/// every `Σ ±2λ`, sorted.
pub fn sign_sums(single: &[f64]) -> Vec<f64> {
    let pos: Vec<f64> = single.iter().copied().filter(|&x| x > 0.0).collect();
    let mut out: Vec<f64> = (0..1usize << pos.len())
        .map(|mask| pos.iter().enumerate().map(|(i, l)| if mask >> i & 1 == 1 { 2.0 * l } else { -2.0 * l }).sum())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn random_hermitian(dim: usize, r: &mut ChaCha8Rng) -> CMatrix<f64> {
    let m = Array2::from_shape_fn((dim, dim), |_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    let h = &m + &m.t().mapv(|z| z.conj());
    h.mapv(|z| z * 0.5)
}

/// Random Hermitian operator with only the parity-even part kept.
pub fn random_bosonic(space: &FockSpace, r: &mut ChaCha8Rng) -> FockOperator<f64> {
    let m = random_hermitian(space.dim(), r);
    let p = space.parity_operator::<f64>().into_matrix();
    let even = (&m + &p.dot(&m).dot(&p)).mapv(|z| z * 0.5);
    FockOperator::from_matrix(even).unwrap()
}

pub fn max_abs(m: &CMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Random real antisymmetric generator with entries in `[-scale, scale]`.
pub fn random_generator(n: usize, scale: f64, r: &mut ChaCha8Rng) -> Array2<f64> {
    let mut g = Array2::zeros((n, n));
    for j in 0..n {
        for k in j + 1..n {
            let x = r.gen_range(-scale..scale);
            g[[j, k]] = x;
            g[[k, j]] = -x;
        }
    }
    g
}
