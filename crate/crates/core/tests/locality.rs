mod common;

use common::{chain, max_abs, random_bosonic, random_generator, rng};
use fermistab::fock::FockSpace;
use fermistab::linalg::{commutator, expm_real_antisymmetric, herm_norm};
use fermistab::locality::{
    certify_strength, conjugate_decomposition, generate_perturbation, localize_telescope, project_out,
    PerturbationKind, PerturbationSpec,
};
use fermistab::{Boundary, Cube, Lattice, Site};
use proptest::prelude::*;

fn space(sites: usize) -> FockSpace {
    FockSpace::new(&chain(sites, 2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn averaging_is_idempotent_and_contractive(seed in any::<u64>(), site in 0usize..3) {
        let sp = space(3);
        let w = random_bosonic(&sp, &mut rng(seed));
        let once = project_out(&sp, &w, &[site]).unwrap();
        let twice = project_out(&sp, &once, &[site]).unwrap();
        prop_assert!(max_abs(&(twice.matrix() - once.matrix())) < 1e-12);
        prop_assert!(herm_norm(once.matrix()).unwrap() <= herm_norm(w.matrix()).unwrap() + 1e-12);
    }

    #[test]
    fn averaging_order_does_not_matter(seed in any::<u64>()) {
        let sp = space(3);
        let w = random_bosonic(&sp, &mut rng(seed));
        let a = project_out(&sp, &project_out(&sp, &w, &[0]).unwrap(), &[2]).unwrap();
        let b = project_out(&sp, &project_out(&sp, &w, &[2]).unwrap(), &[0]).unwrap();
        let c = project_out(&sp, &w, &[2, 0]).unwrap();
        prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
        prop_assert!(max_abs(&(a.matrix() - c.matrix())) < 1e-12);
    }

    #[test]
    fn averaged_operator_commutes_with_removed_modes(seed in any::<u64>()) {
        let sp = space(3);
        let w = random_bosonic(&sp, &mut rng(seed));
        let out = project_out(&sp, &w, &[1, 2]).unwrap();
        for site in [1, 2] {
            for m in sp.lattice().modes_of_site(site) {
                let g = sp.majorana::<f64>(m).unwrap();
                prop_assert!(max_abs(&commutator(out.matrix(), g.matrix())) < 1e-12);
            }
        }
    }

    #[test]
    fn telescope_sums_to_conjugated_operator(seed in any::<u64>()) {
        let sp = space(4);
        let mut r = rng(seed);
        let w = random_bosonic(&sp, &mut r);
        let g = random_generator(8, 0.5, &mut r);
        let u = sp.lift_orthogonal(&expm_real_antisymmetric(&g).unwrap(), &g).unwrap();
        let cube = Cube { corner: Site(vec![1]), size: 1 };
        let shells = localize_telescope(&sp, &w, &cube, &u, 3).unwrap();
        let mut total = shells[0].clone();
        for s in &shells[1..] {
            total.add_assign(s);
        }
        prop_assert!(max_abs(&(total.matrix() - &u.conjugate(w.matrix()))) < 1e-12);
    }
}

#[test]
fn fully_averaged_operator_is_scalar() {
    let sp = space(2);
    let w = random_bosonic(&sp, &mut rng(3));
    let out = project_out(&sp, &w, &[0, 1]).unwrap();
    let trace = w.matrix().diag().iter().map(|z| z.re).sum::<f64>() / sp.dim() as f64;
    let id = fermistab::linalg::identity::<f64>(sp.dim()).mapv(|z| z * trace);
    assert!(max_abs(&(out.matrix() - &id)) < 1e-12);
}

#[test]
fn fermionic_operators_are_rejected() {
    let sp = space(2);
    let g = sp.majorana::<f64>(0).unwrap();
    assert!(matches!(project_out(&sp, &g, &[1]), Err(fermistab::Error::Fermionic { .. })));
}

#[test]
fn generated_perturbation_meets_its_envelope() {
    let lat = Lattice::chain(4, Boundary::Periodic, 2).unwrap();
    let sp = FockSpace::new(&lat).unwrap();
    for kind in [PerturbationKind::Quadratic, PerturbationKind::Quartic, PerturbationKind::Mixed] {
        let spec = PerturbationSpec { strength: 0.3, rate: 0.8, kind, seed: 17 };
        let dec = generate_perturbation::<f64>(&spec, &lat).unwrap().to_decomposition(&sp).unwrap();
        for (r, norm) in dec.size_maxima().unwrap() {
            let bound = 0.3 * (-0.8 * r as f64).exp();
            assert!((norm - bound).abs() < 1e-10 * bound.max(1.0), "{kind} r={r}: {norm} vs {bound}");
        }
        assert!(dec.support_residual(&sp).unwrap() < 1e-12);
        let profile = certify_strength(&dec).unwrap();
        assert!((profile.rate - 0.8).abs() < 1e-8);
        assert!((profile.amplitude - 0.3).abs() < 1e-8);
    }
}

#[test]
fn conjugated_decomposition_resums() {
    let lat = Lattice::chain(3, Boundary::Open, 2).unwrap();
    let sp = FockSpace::new(&lat).unwrap();
    let spec = PerturbationSpec { strength: 1.0, rate: 1.0, kind: PerturbationKind::Mixed, seed: 2 };
    let v = generate_perturbation::<f64>(&spec, &lat).unwrap().to_decomposition(&sp).unwrap();
    let g = random_generator(6, 0.7, &mut rng(5));
    let u = sp.lift_orthogonal(&expm_real_antisymmetric(&g).unwrap(), &g).unwrap();
    let out = conjugate_decomposition(&sp, &v, &u, None).unwrap();
    let want = u.conjugate(v.total().matrix());
    assert!(max_abs(&(out.total().matrix() - &want)) < 1e-12);
    assert!(out.support_residual(&sp).unwrap() < 1e-12);
}
