//! Cubic lattice geometry: sites, Manhattan distance, cubes and balls.
//!
//! Majorana modes are laid out copy-slow: mode `local * num_sites + site`.
//! Doubling a lattice therefore appends a second block of modes and keeps the
//! first block's indices unchanged.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice parameter `{name}` must be positive")]
    NonPositive { name: &'static str },
    #[error("coordinate {coord} out of range for linear size {size}")]
    OutOfRange { coord: usize, size: usize },
    #[error("site has {got} coordinates, lattice has {expected} dimensions")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cube size {0} must satisfy 1 <= r <= L")]
    CubeSize(usize),
    #[error("empty site set has no enclosing cube")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(pub Vec<usize>);

impl Site {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Site {
    fn from(coords: Vec<usize>) -> Self {
        Site(coords)
    }
}

/// Axis-aligned box `[corner, corner + size)` intersected with (or wrapped
/// onto) the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub corner: Site,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Descriptor", into = "Descriptor")]
pub struct Lattice {
    dims: usize,
    size: usize,
    boundary: Boundary,
    modes_per_site: usize,
}

#[derive(Serialize, Deserialize)]
struct Descriptor {
    dims: usize,
    size: usize,
    boundary: Boundary,
    modes_per_site: usize,
}

impl TryFrom<Descriptor> for Lattice {
    type Error = LatticeError;
    fn try_from(d: Descriptor) -> Result<Self, Self::Error> {
        Lattice::new(d.dims, d.size, d.boundary, d.modes_per_site)
    }
}

impl From<Lattice> for Descriptor {
    fn from(l: Lattice) -> Self {
        Descriptor { dims: l.dims, size: l.size, boundary: l.boundary, modes_per_site: l.modes_per_site }
    }
}

impl Lattice {
    pub fn new(dims: usize, size: usize, boundary: Boundary, modes_per_site: usize) -> Result<Self, LatticeError> {
        if dims == 0 {
            return Err(LatticeError::NonPositive { name: "dims" });
        }
        if size == 0 {
            return Err(LatticeError::NonPositive { name: "size" });
        }
        if modes_per_site == 0 {
            return Err(LatticeError::NonPositive { name: "modes_per_site" });
        }
        Ok(Self { dims, size, boundary, modes_per_site })
    }

    /// One-dimensional chain of `size` sites.
    pub fn chain(size: usize, boundary: Boundary, modes_per_site: usize) -> Result<Self, LatticeError> {
        Self::new(1, size, boundary, modes_per_site)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn modes_per_site(&self) -> usize {
        self.modes_per_site
    }

    pub fn num_sites(&self) -> usize {
        self.size.pow(self.dims as u32)
    }

    pub fn num_modes(&self) -> usize {
        self.modes_per_site * self.num_sites()
    }

    /// Same geometry with twice the modes per site; copy index is the slow one.
    pub fn doubled(&self) -> Self {
        Self { modes_per_site: 2 * self.modes_per_site, ..self.clone() }
    }

    pub fn with_modes_per_site(&self, modes_per_site: usize) -> Result<Self, LatticeError> {
        Self::new(self.dims, self.size, self.boundary, modes_per_site)
    }

    pub fn mode(&self, site: usize, local: usize) -> usize {
        debug_assert!(site < self.num_sites() && local < self.modes_per_site);
        local * self.num_sites() + site
    }

    pub fn site_of_mode(&self, mode: usize) -> usize {
        mode % self.num_sites()
    }

    pub fn local_of_mode(&self, mode: usize) -> usize {
        mode / self.num_sites()
    }

    /// All modes living on `site`, ordered by local index.
    pub fn modes_of_site(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.modes_per_site).map(move |a| self.mode(site, a))
    }

    pub fn site(&self, index: usize) -> Site {
        Site(self.coords(index))
    }

    pub(crate) fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims];
        for d in (0..self.dims).rev() {
            out[d] = index % self.size;
            index /= self.size;
        }
        out
    }

    /// Flat index; the first coordinate is the slowest.
    pub fn index(&self, site: &Site) -> Result<usize, LatticeError> {
        self.check(site)?;
        Ok(self.flat(site.coords()))
    }

    fn flat(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.size + c)
    }

    fn check(&self, site: &Site) -> Result<(), LatticeError> {
        if site.0.len() != self.dims {
            return Err(LatticeError::DimensionMismatch { expected: self.dims, got: site.0.len() });
        }
        if let Some(&coord) = site.0.iter().find(|&&c| c >= self.size) {
            return Err(LatticeError::OutOfRange { coord, size: self.size });
        }
        Ok(())
    }

    fn axis_dist(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.size - d),
        }
    }

    pub fn manhattan_dist(&self, a: &Site, b: &Site) -> Result<usize, LatticeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.0.iter().zip(&b.0).map(|(&x, &y)| self.axis_dist(x, y)).sum())
    }

    /// Manhattan distance between flat site indices.
    pub fn site_dist(&self, i: usize, j: usize) -> usize {
        let (mut i, mut j) = (i, j);
        let mut total = 0;
        for _ in 0..self.dims {
            total += self.axis_dist(i % self.size, j % self.size);
            i /= self.size;
            j /= self.size;
        }
        total
    }

    pub fn mode_dist(&self, m: usize, n: usize) -> usize {
        self.site_dist(self.site_of_mode(m), self.site_of_mode(n))
    }

    /// Largest distance between two sites.
    pub fn diameter(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.dims * (self.size - 1),
            Boundary::Periodic => self.dims * (self.size / 2),
        }
    }

    /// Every cube of linear size `r`, one per corner site.
    pub fn cubes_of_size(&self, r: usize) -> Result<Vec<Cube>, LatticeError> {
        if r < 1 || r > self.size {
            return Err(LatticeError::CubeSize(r));
        }
        Ok((0..self.num_sites()).map(|i| Cube { corner: self.site(i), size: r }).collect())
    }

    /// Per-axis coordinate ranges actually covered by the cube.
    fn cube_axes(&self, cube: &Cube) -> Vec<Vec<usize>> {
        cube.corner
            .0
            .iter()
            .map(|&c| match self.boundary {
                Boundary::Open => (c..(c + cube.size).min(self.size)).collect(),
                Boundary::Periodic => (0..cube.size).map(|o| (c + o) % self.size).collect(),
            })
            .collect()
    }

    /// Flat indices of the sites in the cube, ascending.
    pub fn cube_sites(&self, cube: &Cube) -> Vec<usize> {
        let axes = self.cube_axes(cube);
        let mut sites = vec![0usize];
        for axis in &axes {
            sites = sites.iter().flat_map(|&prefix| axis.iter().map(move |&c| prefix * self.size + c)).collect();
        }
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// Sites within Manhattan distance `l` of the cube.
    pub fn ball(&self, cube: &Cube, l: usize) -> BTreeSet<usize> {
        let inside = self.cube_sites(cube);
        (0..self.num_sites()).filter(|&s| inside.iter().any(|&c| self.site_dist(s, c) <= l)).collect()
    }

    /// Smallest radius whose ball around the cube is the whole lattice.
    pub fn covering_radius(&self, cube: &Cube) -> usize {
        let inside = self.cube_sites(cube);
        (0..self.num_sites())
            .map(|s| inside.iter().map(|&c| self.site_dist(s, c)).min().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Smallest cube whose site set contains every site in `sites`.
    pub fn enclosing_cube(&self, sites: &[usize]) -> Result<Cube, LatticeError> {
        if sites.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        let mut corner = Vec::with_capacity(self.dims);
        let mut extent = 1;
        for d in 0..self.dims {
            let mut cs: Vec<usize> = sites.iter().map(|&s| self.coords(s)[d]).collect();
            cs.sort_unstable();
            cs.dedup();
            let (start, len) = match self.boundary {
                Boundary::Open => (cs[0], cs[cs.len() - 1] - cs[0] + 1),
                Boundary::Periodic => self.shortest_arc(&cs),
            };
            corner.push(start);
            extent = extent.max(len);
        }
        Ok(Cube { corner: Site(corner), size: extent })
    }

    /// Shortest circular interval covering sorted distinct coordinates.
    fn shortest_arc(&self, cs: &[usize]) -> (usize, usize) {
        if cs.len() == 1 {
            return (cs[0], 1);
        }
        let k = cs.len();
        let (mut best_gap, mut best_idx) = (0, 0);
        for i in 0..k {
            let gap = if i + 1 < k { cs[i + 1] - cs[i] } else { cs[0] + self.size - cs[k - 1] };
            if gap > best_gap {
                best_gap = gap;
                best_idx = i;
            }
        }
        (cs[(best_idx + 1) % k], self.size - best_gap + 1)
    }

    /// Site closest to the middle of the cube's covered region. For an even
    /// extent the lower of the two middle coordinates is used on each axis.
    pub fn cube_center(&self, cube: &Cube) -> usize {
        let coords: Vec<usize> = self.cube_axes(cube).iter().map(|axis| axis[(axis.len() - 1) / 2]).collect();
        self.flat(&coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(dims: usize, size: usize, boundary: Boundary) -> Lattice {
        Lattice::new(dims, size, boundary, 1).unwrap()
    }

    #[test]
    fn manhattan_examples() {
        let l = lat(2, 5, Boundary::Open);
        assert_eq!(l.manhattan_dist(&Site(vec![0, 0]), &Site(vec![0, 0])).unwrap(), 0);
        assert_eq!(l.manhattan_dist(&Site(vec![0, 0]), &Site(vec![2, 3])).unwrap(), 5);
        let ring = lat(1, 5, Boundary::Periodic);
        assert_eq!(ring.manhattan_dist(&Site(vec![0]), &Site(vec![4])).unwrap(), 1);
        assert!(matches!(
            l.manhattan_dist(&Site(vec![0, 5]), &Site(vec![0, 0])),
            Err(LatticeError::OutOfRange { coord: 5, size: 5 })
        ));
    }

    #[test]
    fn cube_counts() {
        let l = lat(1, 4, Boundary::Open);
        assert_eq!(l.cubes_of_size(1).unwrap().len(), 4);
        let twos = l.cubes_of_size(2).unwrap();
        assert_eq!(twos.len(), 4);
        // The last corner's cube is clipped to a single site.
        assert_eq!(l.cube_sites(&twos[3]), vec![3]);
        assert_eq!(lat(2, 3, Boundary::Periodic).cubes_of_size(3).unwrap().len(), 9);
        assert!(matches!(l.cubes_of_size(0), Err(LatticeError::CubeSize(0))));
        assert!(l.cubes_of_size(5).is_err());
    }

    #[test]
    fn cube_count_by_enumeration() {
        // Enumerate every (corner, r) box directly and compare.
        let l = lat(1, 4, Boundary::Open);
        for r in 1..=4 {
            let mut brute = 0;
            for corner in 0..4 {
                let covered: Vec<usize> = (corner..corner + r).filter(|&x| x < 4).collect();
                assert!(!covered.is_empty());
                brute += 1;
            }
            assert_eq!(l.cubes_of_size(r).unwrap().len(), brute);
        }
    }

    #[test]
    fn ball_examples() {
        let l = lat(1, 10, Boundary::Open);
        let c = Cube { corner: Site(vec![4]), size: 1 };
        assert_eq!(l.ball(&c, 0).into_iter().collect::<Vec<_>>(), vec![4]);
        assert_eq!(l.ball(&c, 2).into_iter().collect::<Vec<_>>(), vec![2, 3, 4, 5, 6]);
        let sq = lat(2, 5, Boundary::Open);
        let centre = Cube { corner: Site(vec![2, 2]), size: 1 };
        assert_eq!(sq.ball(&centre, 1).len(), 5);
    }

    #[test]
    fn enclosing_cube_wraps_on_rings() {
        let ring = lat(1, 6, Boundary::Periodic);
        let c = ring.enclosing_cube(&[5, 0, 1]).unwrap();
        assert_eq!(c, Cube { corner: Site(vec![5]), size: 3 });
        assert_eq!(ring.cube_sites(&c), vec![0, 1, 5]);
        let open = lat(2, 4, Boundary::Open);
        let sites = [open.index(&Site(vec![1, 0])).unwrap(), open.index(&Site(vec![2, 2])).unwrap()];
        let c = open.enclosing_cube(&sites).unwrap();
        assert_eq!(c, Cube { corner: Site(vec![1, 0]), size: 3 });
    }

    #[test]
    fn centers() {
        let l = lat(1, 8, Boundary::Open);
        assert_eq!(l.cube_center(&Cube { corner: Site(vec![2]), size: 3 }), 3);
        assert_eq!(l.cube_center(&Cube { corner: Site(vec![2]), size: 4 }), 3);
        // Clipped cube: centre of the covered part, never outside the lattice.
        assert_eq!(l.cube_center(&Cube { corner: Site(vec![6]), size: 4 }), 6);
    }

    #[test]
    fn descriptor_json() {
        let l = Lattice::new(2, 3, Boundary::Periodic, 2).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"dims":2,"size":3,"boundary":"periodic","modes_per_site":2}"#);
        assert_eq!(serde_json::from_str::<Lattice>(&s).unwrap(), l);
        assert!(serde_json::from_str::<Lattice>(r#"{"dims":0,"size":3,"boundary":"open","modes_per_site":1}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_lattice() -> impl Strategy<Value = Lattice> {
            (1usize..=3, 1usize..=5, prop::bool::ANY).prop_map(|(d, l, p)| {
                let b = if p { Boundary::Periodic } else { Boundary::Open };
                Lattice::new(d, l, b, 1).unwrap()
            })
        }

        proptest! {
            #[test]
            fn flat_index_round_trips(l in any_lattice()) {
                for i in 0..l.num_sites() {
                    prop_assert_eq!(l.index(&l.site(i)).unwrap(), i);
                }
            }

            #[test]
            fn metric_axioms(l in any_lattice(), seed in 0usize..1000) {
                let n = l.num_sites();
                let (a, b, c) = (seed % n, (seed / 7) % n, (seed / 49) % n);
                prop_assert_eq!(l.site_dist(a, b), l.site_dist(b, a));
                prop_assert_eq!(l.site_dist(a, b) == 0, a == b);
                prop_assert!(l.site_dist(a, c) <= l.site_dist(a, b) + l.site_dist(b, c));
                prop_assert_eq!(
                    l.site_dist(a, b),
                    l.manhattan_dist(&l.site(a), &l.site(b)).unwrap()
                );
            }

            #[test]
            fn balls_grow_and_cover(l in any_lattice(), corner in 0usize..125, r in 1usize..=5) {
                let r = r.min(l.size());
                let cube = Cube { corner: l.site(corner % l.num_sites()), size: r };
                let mut prev = l.ball(&cube, 0);
                prop_assert_eq!(prev.iter().copied().collect::<Vec<_>>(), l.cube_sites(&cube));
                for radius in 1..=l.diameter() {
                    let next = l.ball(&cube, radius);
                    prop_assert!(prev.is_subset(&next));
                    prev = next;
                }
                prop_assert_eq!(prev.len(), l.num_sites());
            }

            #[test]
            fn enclosing_cube_contains_its_sites(l in any_lattice(), picks in prop::collection::vec(0usize..125, 1..4)) {
                let sites: Vec<usize> = picks.iter().map(|p| p % l.num_sites()).collect();
                let cube = l.enclosing_cube(&sites).unwrap();
                let inside = l.cube_sites(&cube);
                for s in &sites {
                    prop_assert!(inside.contains(s));
                }
                prop_assert!(l.cubes_of_size(cube.size).unwrap().contains(&cube));
            }
        }
    }
}
