//! Local operator decompositions over cubes, the averaging maps
//! `ℰ_{j,a}(W) = ½(W + γ_{j,a} W γ_{j,a})`, and the shell telescope that
//! re-localizes a conjugated local operator.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decay::{self, DecayProfile};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace, GaussianUnitary, MajoranaPolynomial, Parity};
use crate::lattice::{Cube, Lattice};
use crate::linalg;
use crate::scalar::{CMatrix, Real};

/// Terms `W_{r,C}` keyed by `(r, C)`; each is Hermitian, bosonic and
/// supported on the sites of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDecomposition<T: Real> {
    dim: usize,
    terms: BTreeMap<(usize, Cube), FockOperator<T>>,
}

impl<T: Real> LocalDecomposition<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `op` to the term on `cube`, creating it if absent.
    pub fn add(&mut self, cube: Cube, op: FockOperator<T>) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::Shape { expected: format!("{0}x{0}", self.dim), actual: format!("{0}x{0}", op.dim()) });
        }
        match self.terms.entry((cube.size, cube)) {
            std::collections::btree_map::Entry::Occupied(mut e) => e.get_mut().add_assign(&op),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(op);
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Cube, &FockOperator<T>)> {
        self.terms.iter().map(|((_, c), op)| (c, op))
    }

    pub fn scaled(&self, s: T) -> Self {
        let c = Complex::new(s, T::zero());
        Self { dim: self.dim, terms: self.terms.iter().map(|(k, op)| (k.clone(), op.scaled(c))).collect() }
    }

    /// `Σ_{r,C} W_{r,C}`.
    pub fn total(&self) -> FockOperator<T> {
        let mut sum = FockOperator::zero(self.dim);
        for op in self.terms.values() {
            sum.add_assign(op);
        }
        sum
    }

    /// `(r, max_C ‖W_{r,C}‖)` for every populated cube size, ascending.
    pub fn size_maxima(&self) -> Result<Vec<(usize, f64)>> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for ((r, _), op) in &self.terms {
            let n = linalg::herm_norm(op.matrix())?.as_f64();
            let e = out.entry(*r).or_insert(0.0);
            *e = e.max(n);
        }
        Ok(out.into_iter().collect())
    }

    /// Largest `‖[W_{r,C}, γ_m]‖` (entrywise) over terms and modes off `C`.
    pub fn support_residual(&self, space: &FockSpace) -> Result<f64> {
        let lat = space.lattice();
        let mut worst = 0.0f64;
        for ((_, cube), op) in &self.terms {
            let inside: BTreeSet<usize> = lat.cube_sites(cube).into_iter().collect();
            for m in 0..space.num_modes() {
                if inside.contains(&lat.site_of_mode(m)) {
                    continue;
                }
                // [W, γ] = (W - γWγ) γ, and γ is unitary.
                let conj = space.conjugate_by_majorana(op.matrix(), m);
                worst = worst.max(linalg::max_abs(&(op.matrix() - &conj)).as_f64());
            }
        }
        Ok(worst)
    }
}

/// `(J, μ)` envelope of the per-size maxima `max_C ‖W_{r,C}‖`.
pub fn certify_strength<T: Real>(dec: &LocalDecomposition<T>) -> Result<DecayProfile> {
    let maxima = dec.size_maxima()?;
    let (Some(&(lo, _)), Some(&(hi, _))) = (maxima.first(), maxima.last()) else {
        return Err(Error::Fit { usable: 0 });
    };
    let points: Vec<(f64, f64)> =
        (lo..=hi).map(|r| (r as f64, maxima.iter().find(|p| p.0 == r).map_or(0.0, |p| p.1))).collect();
    decay::fit_envelope(&points)
}

fn check_bosonic<T: Real>(w: &CMatrix<T>) -> Result<()> {
    let op = FockOperator::from_matrix(w.clone())?;
    if op.parity() != Parity::Bosonic {
        return Err(Error::Fermionic { odd_norm: op.parity_parts().1.as_f64() });
    }
    Ok(())
}

/// `ℰ_{m}(W) = ½(W + γ_m W γ_m)` for a single mode.
pub fn epsilon_mode<T: Real>(space: &FockSpace, w: &CMatrix<T>, mode: usize) -> CMatrix<T> {
    let half = T::of(0.5);
    let conj = space.conjugate_by_majorana(w, mode);
    (w + &conj).mapv(|z| z * half)
}

fn epsilon_sites<T: Real>(space: &FockSpace, w: &CMatrix<T>, sites: &[usize]) -> CMatrix<T> {
    let lat = space.lattice();
    let mut out = w.clone();
    for &site in sites {
        for m in lat.modes_of_site(site) {
            out = epsilon_mode(space, &out, m);
        }
    }
    out
}

/// `ℰ_S(W)`: averages out every Majorana on the sites `S`, visited in
/// ascending flat index. The result commutes with every `γ` on `S`.
pub fn project_out<T: Real>(space: &FockSpace, w: &FockOperator<T>, sites: &[usize]) -> Result<FockOperator<T>> {
    check_bosonic(w.matrix())?;
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&s| s >= space.lattice().num_sites()) {
        return Err(Error::InvalidArgument(format!("site {bad} out of range")));
    }
    Ok(FockOperator::graded(epsilon_sites(space, w.matrix(), &sorted), Parity::Bosonic))
}

/// Shells `κ(W_C, l) = W^{(l)} - W^{(l-1)}` for `l = 0..=l_max`, with
/// `W^{(l)} = ℰ_{Λ∖b_l(C)}(U† W_C U)` and `W^{(-1)} = 0`. The last shell
/// absorbs any remainder so the shells always sum to `U† W_C U`.
pub fn localize_telescope<T: Real>(
    space: &FockSpace,
    w: &FockOperator<T>,
    cube: &Cube,
    u: &GaussianUnitary<T>,
    l_max: usize,
) -> Result<Vec<FockOperator<T>>> {
    check_bosonic(w.matrix())?;
    let lat = space.lattice();
    let conj = u.conjugate(w.matrix());
    // W^{(l)} for l = l_max down to 0, each from the next by averaging out
    // one more shell: ℰ_{Λ∖b_l} = ℰ_{b_{l+1}∖b_l} ∘ ℰ_{Λ∖b_{l+1}}.
    let balls: Vec<BTreeSet<usize>> = (0..=l_max).map(|l| lat.ball(cube, l)).collect();
    let outside: Vec<usize> = (0..lat.num_sites()).filter(|s| !balls[l_max].contains(s)).collect();
    let mut levels = vec![epsilon_sites(space, &conj, &outside)];
    for l in (0..l_max).rev() {
        let shell: Vec<usize> = balls[l + 1].difference(&balls[l]).copied().collect();
        let next = epsilon_sites(space, levels.last().expect("nonempty"), &shell);
        levels.push(next);
    }
    levels.reverse();
    let mut shells = Vec::with_capacity(l_max + 1);
    let mut prev = linalg::zeros::<T>(space.dim());
    for level in &levels {
        shells.push(level - &prev);
        prev = level.clone();
    }
    if let Some(last) = shells.last_mut() {
        *last = &*last + &(&conj - &prev);
    }
    Ok(shells.into_iter().map(|m| FockOperator::graded(m, Parity::Bosonic)).collect())
}

/// `U† V U` as a local decomposition: every term is telescoped and shell `l`
/// is filed under the smallest cube enclosing `b_l(C)`. `l_max` defaults to
/// the lattice diameter.
pub fn conjugate_decomposition<T: Real>(
    space: &FockSpace,
    v: &LocalDecomposition<T>,
    u: &GaussianUnitary<T>,
    l_max: Option<usize>,
) -> Result<LocalDecomposition<T>> {
    let lat = space.lattice();
    let l_max = l_max.unwrap_or_else(|| lat.diameter());
    let mut out = LocalDecomposition::new(v.dim());
    for (cube, w) in v.terms() {
        let shells = localize_telescope(space, w, cube, u, l_max)?;
        for (l, kappa) in shells.into_iter().enumerate() {
            if linalg::max_abs(kappa.matrix()) == T::zero() {
                continue;
            }
            let ball: Vec<usize> = lat.ball(cube, l).into_iter().collect();
            out.add(lat.enclosing_cube(&ball)?, kappa)?;
        }
    }
    Ok(out)
}

/// `B(l) = 2‖W_C‖ Σ_{j ∉ b_l(C)} Σ_a √(Σ_{k∈C} (K₀ e^{-ν₀ d(j,k)})²)`: bound on
/// `‖U†W_C U - W^{(l)}‖` from the `[K₀, ν₀]` envelope of the orthogonal map.
/// Shell norms then obey `‖κ(W_C, l)‖ ≤ B(l) + B(l-1)`.
pub fn shell_bound(lat: &Lattice, cube: &Cube, w_norm: f64, orthogonal: &DecayProfile, l: usize) -> f64 {
    let inside = lat.cube_sites(cube);
    let ball = lat.ball(cube, l);
    let per_site: f64 = (0..lat.num_sites())
        .filter(|j| !ball.contains(j))
        .map(|j| inside.iter().map(|&k| orthogonal.bound(lat.site_dist(j, k) as f64).powi(2)).sum::<f64>().sqrt())
        .sum();
    2.0 * w_norm * lat.modes_per_site() as f64 * per_site
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Quadratic,
    Quartic,
    Mixed,
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "quartic" => Ok(Self::Quartic),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::InvalidArgument(format!("unknown perturbation kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Quadratic => "quadratic",
            Self::Quartic => "quartic",
            Self::Mixed => "mixed",
        })
    }
}

/// Random perturbation with `max_C ‖V_{r,C}‖ = J e^{-μ r}` for every `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    #[serde(rename = "J")]
    pub strength: f64,
    #[serde(rename = "mu")]
    pub rate: f64,
    pub kind: PerturbationKind,
    pub seed: u64,
}

/// Perturbation kept as Majorana polynomials per cube, so it can be
/// rescaled or embedded into a larger system before being made dense.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicPerturbation<T: Real> {
    pub lattice: Lattice,
    pub terms: Vec<(Cube, MajoranaPolynomial<T>)>,
}

impl<T: Real> SymbolicPerturbation<T> {
    pub fn scaled(&self, s: T) -> Self {
        Self {
            lattice: self.lattice.clone(),
            terms: self.terms.iter().map(|(c, p)| (c.clone(), p.scaled(s))).collect(),
        }
    }

    /// Dense decomposition on `space`, whose lattice must have the same
    /// geometry and at least as many modes per site. Mode indices are kept,
    /// so with the copy-slow layout the perturbation acts on the first
    /// `modes_per_site` modes of every site (copy 1 of a doubled system).
    pub fn to_decomposition(&self, space: &FockSpace) -> Result<LocalDecomposition<T>> {
        let target = space.lattice();
        let same_geometry = target.dims() == self.lattice.dims()
            && target.size() == self.lattice.size()
            && target.boundary() == self.lattice.boundary()
            && target.modes_per_site() >= self.lattice.modes_per_site();
        if !same_geometry {
            return Err(Error::InvalidArgument("perturbation lattice does not embed into the Fock space".into()));
        }
        let mut dec = LocalDecomposition::new(space.dim());
        for (cube, poly) in &self.terms {
            dec.add(cube.clone(), space.polynomial(poly)?)?;
        }
        Ok(dec)
    }
}

fn cube_modes(lat: &Lattice, cube: &Cube) -> Vec<usize> {
    let mut modes: Vec<usize> = lat.cube_sites(cube).into_iter().flat_map(|s| lat.modes_of_site(s)).collect();
    modes.sort_unstable();
    modes
}

fn random_polynomial<T: Real>(modes: &[usize], kind: PerturbationKind, rng: &mut ChaCha8Rng) -> MajoranaPolynomial<T> {
    let mut poly = MajoranaPolynomial::new();
    let n = modes.len();
    if kind != PerturbationKind::Quartic {
        for a in 0..n {
            for b in a + 1..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                poly.push(Complex::new(T::zero(), T::of(x)), vec![modes[a], modes[b]]);
            }
        }
    }
    if kind != PerturbationKind::Quadratic {
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let x: f64 = rng.gen_range(-1.0..1.0);
                        poly.push(Complex::new(T::of(x), T::zero()), vec![modes[a], modes[b], modes[c], modes[d]]);
                    }
                }
            }
        }
    }
    poly
}

/// Random Hermitian bosonic terms on every cube of every size `1..=L`.
/// Quadratic terms are `i x γ_a γ_b`, quartic terms `x γ_a γ_b γ_c γ_d`, with
/// `x` uniform in `[-1, 1)`; each size is then rescaled so its largest term
/// norm is exactly `J e^{-μ r}`. `J = 0` gives an empty perturbation.
pub fn generate_perturbation<T: Real>(spec: &PerturbationSpec, lat: &Lattice) -> Result<SymbolicPerturbation<T>> {
    if !(spec.strength >= 0.0 && spec.rate >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "J and mu must be nonnegative, got {}, {}",
            spec.strength, spec.rate
        )));
    }
    let mut out = SymbolicPerturbation { lattice: lat.clone(), terms: Vec::new() };
    if spec.strength == 0.0 {
        return Ok(out);
    }
    let space = FockSpace::new(lat)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for r in 1..=lat.size() {
        let mut batch = Vec::new();
        for cube in lat.cubes_of_size(r)? {
            let poly = random_polynomial::<T>(&cube_modes(lat, &cube), spec.kind, &mut rng);
            if poly.is_empty() {
                continue;
            }
            let norm = linalg::herm_norm(space.polynomial(&poly)?.matrix())?;
            batch.push((cube, poly, norm));
        }
        let max = batch.iter().fold(T::zero(), |m, b| m.max(b.2));
        if max == T::zero() {
            continue;
        }
        let scale = T::of(spec.strength * (-spec.rate * r as f64).exp()) / max;
        out.terms.extend(batch.into_iter().map(|(c, p, _)| (c, p.scaled(scale))));
    }
    Ok(out)
}

/// Groups the monomials of a Hermitian polynomial by the smallest cube
/// enclosing their sites. Monomials and their adjoints share a site set, so
/// every term stays Hermitian.
pub fn decompose_polynomial<T: Real>(space: &FockSpace, poly: &MajoranaPolynomial<T>) -> Result<LocalDecomposition<T>> {
    let lat = space.lattice();
    let mut groups: BTreeMap<Cube, MajoranaPolynomial<T>> = BTreeMap::new();
    for term in &poly.terms {
        let mut sites: Vec<usize> = term.modes.iter().map(|&m| lat.site_of_mode(m)).collect();
        sites.sort_unstable();
        sites.dedup();
        let cube = lat.enclosing_cube(&sites)?;
        groups.entry(cube).or_default().push(term.coef, term.modes.clone());
    }
    let mut dec = LocalDecomposition::new(space.dim());
    for (cube, p) in groups {
        dec.add(cube, space.polynomial(&p)?)?;
    }
    Ok(dec)
}

/// Splits a decomposition by the center site `u(C)` of each term's cube.
pub fn per_site_split<T: Real>(lat: &Lattice, dec: &LocalDecomposition<T>) -> BTreeMap<usize, FockOperator<T>> {
    let mut out: BTreeMap<usize, FockOperator<T>> = BTreeMap::new();
    for (cube, op) in dec.terms() {
        let u = lat.cube_center(cube);
        out.entry(u).or_insert_with(|| FockOperator::zero(dec.dim())).add_assign(op);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Site};
    use ndarray::Array2;

    fn space(size: usize, per: usize) -> FockSpace {
        FockSpace::new(&Lattice::chain(size, Boundary::Open, per).unwrap()).unwrap()
    }

    fn product(space: &FockSpace, coef: Complex<f64>, modes: Vec<usize>) -> FockOperator<f64> {
        let mut p = MajoranaPolynomial::new();
        p.push(coef, modes);
        space.polynomial(&p).unwrap()
    }

    #[test]
    fn on_site_pair_is_annihilated() {
        let sp = space(2, 2);
        let lat = sp.lattice().clone();
        let w = product(&sp, Complex::i(), vec![lat.mode(0, 0), lat.mode(0, 1)]);
        let out = project_out(&sp, &w, &[0]).unwrap();
        assert_eq!(linalg::max_abs(out.matrix()), 0.0);
        let across = product(&sp, Complex::i(), vec![lat.mode(0, 0), lat.mode(1, 0)]);
        assert_eq!(linalg::max_abs(project_out(&sp, &across, &[0]).unwrap().matrix()), 0.0);
        // A pair entirely off S is untouched.
        let off = product(&sp, Complex::i(), vec![lat.mode(1, 0), lat.mode(1, 1)]);
        assert_eq!(project_out(&sp, &off, &[0]).unwrap().matrix(), off.matrix());
    }

    #[test]
    fn identity_is_fixed_and_fermions_rejected() {
        let sp = space(2, 2);
        let id = FockOperator::<f64>::identity(sp.dim());
        assert_eq!(project_out(&sp, &id, &[0, 1]).unwrap(), id);
        let g = sp.majorana::<f64>(0).unwrap();
        assert!(matches!(project_out(&sp, &g, &[1]), Err(Error::Fermionic { .. })));
    }

    #[test]
    fn identity_unitary_keeps_operator_in_first_shell() {
        let sp = space(3, 2);
        let lat = sp.lattice().clone();
        let n = sp.num_modes();
        let u = sp.lift_orthogonal(&Array2::eye(n), &Array2::zeros((n, n))).unwrap();
        let w = product(&sp, Complex::i(), vec![lat.mode(1, 0), lat.mode(1, 1)]);
        let cube = Cube { corner: Site(vec![1]), size: 1 };
        let shells = localize_telescope(&sp, &w, &cube, &u, lat.diameter()).unwrap();
        assert!(linalg::max_abs(&(shells[0].matrix() - w.matrix())) < 1e-14);
        assert!(shells[1..].iter().all(|k| linalg::max_abs(k.matrix()) < 1e-14));
    }

    #[test]
    fn generated_terms_meet_envelope_with_equality() {
        let lat = Lattice::chain(4, Boundary::Open, 2).unwrap();
        let spec = PerturbationSpec { strength: 0.1, rate: 0.5, kind: PerturbationKind::Mixed, seed: 3 };
        let sym = generate_perturbation::<f64>(&spec, &lat).unwrap();
        let sp = FockSpace::new(&lat).unwrap();
        let dec = sym.to_decomposition(&sp).unwrap();
        for (r, m) in dec.size_maxima().unwrap() {
            assert!((m - 0.1 * (-0.5 * r as f64).exp()).abs() < 1e-13, "r = {r}");
        }
        let p = certify_strength(&dec).unwrap();
        assert!((p.amplitude - 0.1).abs() < 1e-12 && (p.rate - 0.5).abs() < 1e-12);
        assert!(dec.support_residual(&sp).unwrap() < 1e-13);
        for (_, op) in dec.terms() {
            assert_eq!(op.parity(), Parity::Bosonic);
            assert!(op.hermitian_deviation() < 1e-14);
        }
        let again = generate_perturbation::<f64>(&spec, &lat).unwrap();
        assert_eq!(sym, again);
        let zero = PerturbationSpec { strength: 0.0, ..spec };
        assert!(generate_perturbation::<f64>(&zero, &lat).unwrap().terms.is_empty());
    }

    #[test]
    fn single_term_strength_is_superexponential() {
        let sp = space(3, 2);
        let lat = sp.lattice().clone();
        let w = product(&sp, Complex::new(0.0, 0.3), vec![lat.mode(0, 0), lat.mode(0, 1)]);
        let mut dec = LocalDecomposition::new(sp.dim());
        dec.add(Cube { corner: Site(vec![0]), size: 1 }, w).unwrap();
        let p = certify_strength(&dec).unwrap();
        assert!(p.is_superexponential());
        assert!((p.amplitude - 0.3).abs() < 1e-14);
        assert_eq!(p.origin, 1.0);
    }

    #[test]
    fn split_uses_cube_centers() {
        let sp = space(4, 2);
        let lat = sp.lattice().clone();
        let mut dec = LocalDecomposition::new(sp.dim());
        let w = product(&sp, Complex::i(), vec![lat.mode(1, 0), lat.mode(3, 1)]);
        dec.add(Cube { corner: Site(vec![1]), size: 3 }, w.clone()).unwrap();
        let w2 = product(&sp, Complex::i(), vec![lat.mode(0, 0), lat.mode(1, 1)]);
        dec.add(Cube { corner: Site(vec![0]), size: 2 }, w2.clone()).unwrap();
        let split = per_site_split(&lat, &dec);
        assert_eq!(split.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(split[&2].matrix(), w.matrix());
        assert_eq!(split[&0].matrix(), w2.matrix());
    }
}
