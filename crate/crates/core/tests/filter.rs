mod common;

use common::{max_abs, random_hermitian, rng};
use fermistab::filter::{ground_data, spectral_filter, BumpFilter};
use fermistab::fock::FockOperator;
use fermistab::linalg::{dagger, herm_norm, identity};
use fermistab::CMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Hermitian `H = Q diag(E) Q†` with a random unitary `Q`, ground level 0 and
/// the rest in `[gap, gap + 3]`.
fn gapped_hamiltonian(dim: usize, gap: f64, seed: u64) -> FockOperator<f64> {
    let mut r = rng(seed);
    let q = fermistab::linalg::Eigen::of(&random_hermitian(dim, &mut r)).unwrap().vectors;
    let mut d = Array2::zeros((dim, dim));
    for i in 1..dim {
        d[[i, i]] = Complex64::new(gap + r.gen_range(0.0..3.0), 0.0);
    }
    FockOperator::from_matrix(q.dot(&d).dot(&dagger(&q))).unwrap()
}

fn unit_norm(m: CMatrix<f64>) -> FockOperator<f64> {
    let n = herm_norm(&m).unwrap();
    FockOperator::from_matrix(m.mapv(|z| z / n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filtered_operator_is_block_diagonal(seed in any::<u64>(), gap in 1.0f64..3.0) {
        let h = gapped_hamiltonian(16, gap, seed);
        let o = unit_norm(random_hermitian(16, &mut rng(seed ^ 0x5eed)));
        let f = BumpFilter::default();
        let filtered = spectral_filter(&h, &o, &f).unwrap();
        let p = ground_data(&h, 1).unwrap().projector;
        let q = &identity::<f64>(16) - &p;
        prop_assert!(max_abs(&q.dot(filtered.matrix()).dot(&p)) < 1e-10);
        prop_assert!(herm_norm(filtered.matrix()).unwrap() <= 1.0 + 1e-10);
    }

    #[test]
    fn hamiltonian_filters_to_itself(seed in any::<u64>()) {
        let h = gapped_hamiltonian(16, 1.0, seed);
        let f = BumpFilter::default();
        let filtered = spectral_filter(&h, &h, &f).unwrap();
        prop_assert!(max_abs(&(filtered.matrix() - h.matrix())) < 1e-12);
    }
}

#[test]
fn narrow_gap_leaks_between_blocks() {
    // With the gap inside the filter window the ground/excited block survives.
    let h = gapped_hamiltonian(8, 0.1, 3);
    let o = unit_norm(random_hermitian(8, &mut rng(4)));
    let filtered = spectral_filter(&h, &o, &BumpFilter::default()).unwrap();
    let p = ground_data(&h, 1).unwrap().projector;
    let q = &identity::<f64>(8) - &p;
    assert!(max_abs(&q.dot(filtered.matrix()).dot(&p)) > 1e-6);
}
