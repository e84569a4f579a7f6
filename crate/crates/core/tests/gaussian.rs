mod common;

use common::{chain, max_abs, random_gapped, random_generator, rng};
use fermistab::doubling::{self, flatten_conjugate};
use fermistab::fock::{verify_hdsub, FockSpace, GaussianUnitary};
use fermistab::linalg::expm_real_antisymmetric;
use fermistab::{models, Boundary};
use ndarray::Array2;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lifted_unitary_implements_its_orthogonal_map(seed in any::<u64>(), sites in 1usize..=4) {
        let lat = chain(sites, 2);
        let space = FockSpace::new(&lat).unwrap();
        let g = random_generator(lat.num_modes(), 1.0, &mut rng(seed));
        let o = expm_real_antisymmetric(&g).unwrap();
        let u = space.lift_orthogonal(&o, &g).unwrap();
        prop_assert!(u.conjugation_residual(&space).unwrap() < 1e-10);
    }

    #[test]
    fn lifts_compose(seed in any::<u64>()) {
        let lat = chain(3, 2);
        let space = FockSpace::new(&lat).unwrap();
        let mut r = rng(seed);
        let (g1, g2) = (random_generator(6, 0.8, &mut r), random_generator(6, 0.8, &mut r));
        let (o1, o2) = (expm_real_antisymmetric(&g1).unwrap(), expm_real_antisymmetric(&g2).unwrap());
        let u1 = space.lift_orthogonal(&o1, &g1).unwrap();
        let u2 = space.lift_orthogonal(&o2, &g2).unwrap();
        // (U1 U2)† γ_l (U1 U2) = Σ (O1 O2)_lm γ_m.
        let product = GaussianUnitary {
            orthogonal: o1.dot(&o2),
            generator: Array2::zeros((6, 6)),
            fock: u1.fock.dot(&u2.fock),
        };
        prop_assert!(product.conjugation_residual(&space).unwrap() < 1e-10);
    }

    #[test]
    fn flattening_identity_on_random_quadratics(seed in any::<u64>(), sites in 1usize..=20) {
        let h = random_gapped(&chain(sites, 2), 1e-3, seed);
        let (lhs, rhs) = flatten_conjugate(&h).unwrap();
        prop_assert!(max_abs(&(&lhs - &rhs)) < 1e-12 * h.num_modes() as f64);
    }
}

#[test]
fn doubled_fock_conjugation_on_kitaev_chains() {
    for size in [2, 3] {
        let h = models::kitaev_chain::<f64>(size, 1.0, 1.0, 3.5, Boundary::Open).unwrap();
        assert!(verify_hdsub(&h).unwrap() < 1e-8);
    }
}

#[test]
fn doubled_ground_state_maps_to_empty_state() {
    let h = random_gapped(&chain(2, 2), 0.05, 21);
    let d = doubling::double(&h);
    let space = FockSpace::new(d.lattice()).unwrap();
    let map = doubling::flattening_map(&h).unwrap();
    let u = space.lift_orthogonal(&map.orthogonal, &map.generator).unwrap();
    let hd = space.quadratic(&d).unwrap();
    let conj = u.conjugate(hd.matrix());
    let empty = space.empty_state::<f64>();
    // ⟨0|U† H_doub U|0⟩ = -2 tr|A|, the doubled ground energy.
    let energy = empty.mapv(|z| z.conj()).dot(&conj.dot(&empty)).re;
    let eb = doubling::empty_band(&h).unwrap();
    assert!((energy + eb.constant).abs() < 1e-10);
    assert!((hd.spectrum().unwrap()[0] - energy).abs() < 1e-10);
}

#[test]
fn empty_band_spectrum_is_shifted_doubled_spectrum() {
    let h = random_gapped(&chain(2, 2), 0.05, 8);
    let d = doubling::double(&h);
    let space = FockSpace::new(d.lattice()).unwrap();
    let eb = doubling::empty_band(&h).unwrap();
    let empty = space.empty_band(&eb.t).unwrap().spectrum().unwrap();
    let doubled = space.quadratic(&d).unwrap().spectrum().unwrap();
    assert!(empty[0].abs() < 1e-10);
    for (a, b) in empty.iter().zip(doubled.iter()) {
        assert!((a - eb.constant - b).abs() < 1e-10);
    }
}
