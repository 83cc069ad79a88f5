//! The defect-free rotated surface-code lattice and defect-map ingestion.
//!
//! Layout convention: y grows downward, the top and bottom data rows are the
//! X boundaries, the left and right columns are the Z boundaries. The
//! checkerboard is fixed by requiring the top-left corner data node's X
//! syndrome neighbour to sit above it, which makes a syndrome at (2a, 2b) an
//! X syndrome exactly when a + b is odd.

use std::collections::HashMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coord::{Basis, Coord, Edge};
use crate::error::LatticeError;

/// Which original side(s) of the patch a boundary data node belongs to,
/// packed as a bitmask. Tracked through boundary deformation so logical
/// operators know which segment is "top" vs "bottom".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SideSet(pub u8);

impl SideSet {
    pub const TOP: SideSet = SideSet(1);
    pub const BOTTOM: SideSet = SideSet(2);
    pub const LEFT: SideSet = SideSet(4);
    pub const RIGHT: SideSet = SideSet(8);

    pub fn empty() -> SideSet {
        SideSet(0)
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn union(self, other: SideSet) -> SideSet {
        SideSet(self.0 | other.0)
    }
    pub fn contains(self, other: SideSet) -> bool {
        self.0 & other.0 == other.0
    }
    /// Restrict to the sides relevant for one basis: X logicals terminate on
    /// top/bottom, Z logicals on left/right.
    pub fn for_basis(self, basis: Basis) -> SideSet {
        match basis {
            Basis::X => SideSet(self.0 & 0b0011),
            Basis::Z => SideSet(self.0 & 0b1100),
        }
    }
}

/// Boundary classification of a data node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryType {
    /// On an X boundary only.
    BX,
    /// On a Z boundary only.
    BZ,
    /// Corner: on both an X and a Z boundary.
    BC,
}

/// Immutable rotated surface-code lattice for code size L.
#[derive(Debug, Clone)]
pub struct Lattice {
    size: u32,
    data: Vec<Coord>,
    syndromes: Vec<Coord>,
    syndrome_basis: Vec<Basis>,
    data_index: HashMap<Coord, usize>,
    syndrome_index: HashMap<Coord, usize>,
    /// Data neighbours of each syndrome, by id, in coordinate order.
    syn_data: Vec<Vec<usize>>,
    /// Syndrome neighbours of each data node, by id, in coordinate order.
    data_syn: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Lattice {
    /// Build the size-L lattice. L must be positive and odd.
    pub fn build(size: i64) -> Result<Lattice, LatticeError> {
        if size < 1 || size % 2 == 0 {
            return Err(LatticeError::BadSize(size));
        }
        let l = size as i32;
        let mut data = Vec::with_capacity((l * l) as usize);
        for y in (1..=2 * l - 1).step_by(2) {
            for x in (1..=2 * l - 1).step_by(2) {
                data.push(Coord::new(x, y));
            }
        }
        data.sort();
        let mut syndromes = Vec::new();
        let mut syndrome_basis = Vec::new();
        for y in (0..=2 * l).step_by(2) {
            for x in (0..=2 * l).step_by(2) {
                if let Some(basis) = syndrome_basis_at(l, Coord::new(x, y)) {
                    syndromes.push(Coord::new(x, y));
                    syndrome_basis.push(basis);
                }
            }
        }
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..syndromes.len()).collect();
            idx.sort_by_key(|&i| syndromes[i]);
            idx
        };
        let syndromes: Vec<Coord> = order.iter().map(|&i| syndromes[i]).collect();
        let syndrome_basis: Vec<Basis> = order.iter().map(|&i| syndrome_basis[i]).collect();

        let data_index: HashMap<Coord, usize> =
            data.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let syndrome_index: HashMap<Coord, usize> =
            syndromes.iter().enumerate().map(|(i, &c)| (c, i)).collect();

        let mut syn_data = vec![Vec::new(); syndromes.len()];
        let mut data_syn = vec![Vec::new(); data.len()];
        let mut edges = Vec::new();
        for (si, &s) in syndromes.iter().enumerate() {
            let mut nbrs: Vec<Coord> = s
                .diagonal_neighbors()
                .into_iter()
                .filter(|c| data_index.contains_key(c))
                .collect();
            nbrs.sort();
            for c in nbrs {
                let di = data_index[&c];
                syn_data[si].push(di);
                data_syn[di].push(si);
                edges.push(Edge::new(c, s));
            }
        }
        for list in &mut data_syn {
            list.sort_by_key(|&si| syndromes[si]);
        }
        edges.sort();

        Ok(Lattice {
            size: size as u32,
            data,
            syndromes,
            syndrome_basis,
            data_index,
            syndrome_index,
            syn_data,
            data_syn,
            edges,
        })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn data(&self) -> &[Coord] {
        &self.data
    }

    pub fn syndromes(&self) -> &[Coord] {
        &self.syndromes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_qubits(&self) -> usize {
        self.data.len() + self.syndromes.len()
    }

    pub fn data_id(&self, c: Coord) -> Option<usize> {
        self.data_index.get(&c).copied()
    }

    pub fn syndrome_id(&self, c: Coord) -> Option<usize> {
        self.syndrome_index.get(&c).copied()
    }

    pub fn is_qubit(&self, c: Coord) -> bool {
        self.data_index.contains_key(&c) || self.syndrome_index.contains_key(&c)
    }

    pub fn basis_of(&self, syndrome_id: usize) -> Basis {
        self.syndrome_basis[syndrome_id]
    }

    /// Data neighbours (ids) of a syndrome, in coordinate order.
    pub fn data_neighbors(&self, syndrome_id: usize) -> &[usize] {
        &self.syn_data[syndrome_id]
    }

    /// Syndrome neighbours (ids) of a data node, in coordinate order.
    pub fn syndrome_neighbors(&self, data_id: usize) -> &[usize] {
        &self.data_syn[data_id]
    }

    pub fn has_coupler(&self, data: Coord, syndrome: Coord) -> bool {
        let (dx, dy) = (data.x - syndrome.x, data.y - syndrome.y);
        dx.abs() == 1
            && dy.abs() == 1
            && self.data_index.contains_key(&data)
            && self.syndrome_index.contains_key(&syndrome)
    }

    /// Initial boundary classification of a data node, before deformation.
    pub fn initial_boundary(&self, c: Coord) -> Option<(BoundaryType, SideSet)> {
        let l = self.size as i32;
        let mut sides = SideSet::empty();
        if c.y == 1 {
            sides = sides.union(SideSet::TOP);
        }
        if c.y == 2 * l - 1 {
            sides = sides.union(SideSet::BOTTOM);
        }
        if c.x == 1 {
            sides = sides.union(SideSet::LEFT);
        }
        if c.x == 2 * l - 1 {
            sides = sides.union(SideSet::RIGHT);
        }
        if sides.is_empty() {
            return None;
        }
        let on_x = !sides.for_basis(Basis::X).is_empty();
        let on_z = !sides.for_basis(Basis::Z).is_empty();
        let typ = match (on_x, on_z) {
            (true, true) => BoundaryType::BC,
            (true, false) => BoundaryType::BX,
            (false, true) => BoundaryType::BZ,
            (false, false) => unreachable!(),
        };
        Some((typ, sides))
    }
}

/// Basis of the syndrome at a syndrome-parity coordinate, or None when the
/// rotated layout leaves that position empty.
pub fn syndrome_basis_at(l: i32, c: Coord) -> Option<Basis> {
    if !c.is_syndrome_parity() || c.x < 0 || c.y < 0 || c.x > 2 * l || c.y > 2 * l {
        return None;
    }
    let (a, b) = (c.x / 2, c.y / 2);
    let basis = if (a + b) % 2 == 1 { Basis::X } else { Basis::Z };
    let interior_a = a >= 1 && a <= l - 1;
    let interior_b = b >= 1 && b <= l - 1;
    let present = if interior_a && interior_b {
        true
    } else if (b == 0 || b == l) && interior_a {
        // Top/bottom edges host only X syndromes.
        basis == Basis::X
    } else if (a == 0 || a == l) && interior_b {
        basis == Basis::Z
    } else {
        false
    };
    present.then_some(basis)
}

/// Fabrication defects of one device: broken qubits and broken couplers.
/// Rates and seed are provenance only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DefectMap {
    pub qubits: Vec<Coord>,
    pub couplers: Vec<Edge>,
    pub qubit_rate: f64,
    pub coupler_rate: f64,
    pub seed: u64,
}

impl DefectMap {
    pub fn is_defective_qubit(&self, c: Coord) -> bool {
        self.qubits.binary_search(&c).is_ok()
    }

    pub fn is_defective_coupler(&self, data: Coord, syndrome: Coord) -> bool {
        self.couplers
            .binary_search(&Edge::new(data, syndrome))
            .is_ok()
    }

    pub fn normalize(&mut self) {
        self.qubits.sort();
        self.qubits.dedup();
        self.couplers.sort();
        self.couplers.dedup();
    }
}

/// Draw a random defect map. Every qubit (data and syndrome) fails
/// independently with `qubit_rate`, every coupler with `coupler_rate`.
///
/// Decisions are drawn from ChaCha8 seeded with `seed`, in row-major
/// coordinate order: data qubits, then syndrome qubits, then couplers. This
/// fixed order makes the map a pure function of (L, rates, seed).
pub fn inject_defects(
    lattice: &Lattice,
    qubit_rate: f64,
    coupler_rate: f64,
    seed: u64,
) -> Result<DefectMap, LatticeError> {
    for rate in [qubit_rate, coupler_rate] {
        if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
            return Err(LatticeError::BadRate(rate));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qubit_threshold = rate_threshold(qubit_rate);
    let coupler_threshold = rate_threshold(coupler_rate);
    let mut hit = |rng: &mut ChaCha8Rng, threshold: u128| (rng.next_u64() as u128) < threshold;

    let mut map = DefectMap {
        qubit_rate,
        coupler_rate,
        seed,
        ..DefectMap::default()
    };
    let l = lattice.size() as i32;
    for y in (1..=2 * l - 1).step_by(2) {
        for x in (1..=2 * l - 1).step_by(2) {
            if hit(&mut rng, qubit_threshold) {
                map.qubits.push(Coord::new(x, y));
            }
        }
    }
    for y in (0..=2 * l).step_by(2) {
        for x in (0..=2 * l).step_by(2) {
            let c = Coord::new(x, y);
            if lattice.syndrome_id(c).is_some() && hit(&mut rng, qubit_threshold) {
                map.qubits.push(c);
            }
        }
    }
    let mut edges: Vec<Edge> = lattice.edges().to_vec();
    edges.sort();
    for e in edges {
        if hit(&mut rng, coupler_threshold) {
            map.couplers.push(e);
        }
    }
    map.normalize();
    Ok(map)
}

fn rate_threshold(rate: f64) -> u128 {
    // Exact for rate 1.0; below that, floor(rate * 2^64).
    if rate >= 1.0 {
        1u128 << 64
    } else {
        (rate * (u64::MAX as f64 + 1.0)) as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_even_and_nonpositive_sizes() {
        assert!(Lattice::build(0).is_err());
        assert!(Lattice::build(2).is_err());
        assert!(Lattice::build(-3).is_err());
        assert!(Lattice::build(8).is_err());
    }

    #[test]
    fn l1_is_a_single_data_qubit() {
        let lat = Lattice::build(1).unwrap();
        assert_eq!(lat.data().len(), 1);
        assert_eq!(lat.syndromes().len(), 0);
        assert_eq!(lat.edges().len(), 0);
    }

    #[test]
    fn l3_counts() {
        let lat = Lattice::build(3).unwrap();
        assert_eq!(lat.data().len(), 9);
        assert_eq!(lat.syndromes().len(), 8);
        let x = (0..8).filter(|&i| lat.basis_of(i) == Basis::X).count();
        assert_eq!(x, 4);
        assert_eq!(lat.edges().len(), 24);
    }

    #[test]
    fn l7_counts() {
        let lat = Lattice::build(7).unwrap();
        assert_eq!(lat.data().len(), 49);
        assert_eq!(lat.syndromes().len(), 48);
    }

    #[test]
    fn closed_form_counts_match_enumeration() {
        for l in (1..=15).step_by(2) {
            let lat = Lattice::build(l).unwrap();
            let l = l as usize;
            assert_eq!(lat.data().len(), l * l);
            assert_eq!(lat.syndromes().len(), l * l - 1);
            let couplers: usize = (0..lat.syndromes().len())
                .map(|s| lat.data_neighbors(s).len())
                .sum();
            assert_eq!(lat.edges().len(), couplers);
            if l > 1 {
                assert_eq!(couplers, 4 * (l - 1) * l);
            }
        }
    }

    #[test]
    fn neighbor_type_templates() {
        let lat = Lattice::build(7).unwrap();
        for (di, &c) in lat.data().iter().enumerate() {
            let mut x = 0;
            let mut z = 0;
            for &si in lat.syndrome_neighbors(di) {
                match lat.basis_of(si) {
                    Basis::X => x += 1,
                    Basis::Z => z += 1,
                }
            }
            match lat.initial_boundary(c) {
                None => assert_eq!((x, z), (2, 2), "interior {c}"),
                Some((BoundaryType::BC, _)) => assert_eq!((x, z), (1, 1), "corner {c}"),
                Some((BoundaryType::BX, _)) => assert_eq!((x, z), (2, 1), "x-boundary {c}"),
                Some((BoundaryType::BZ, _)) => assert_eq!((x, z), (1, 2), "z-boundary {c}"),
            }
        }
    }

    #[test]
    fn syndrome_weights_are_two_or_four() {
        let lat = Lattice::build(9).unwrap();
        let l = lat.size() as i32;
        for (si, &s) in lat.syndromes().iter().enumerate() {
            let w = lat.data_neighbors(si).len();
            assert!(w == 2 || w == 4, "syndrome {s} has weight {w}");
            if w == 2 {
                // Weight-2 only on the boundary row/column matching its type.
                match lat.basis_of(si) {
                    Basis::X => assert!(s.y == 0 || s.y == 2 * l),
                    Basis::Z => assert!(s.x == 0 || s.x == 2 * l),
                }
            }
        }
    }

    #[test]
    fn top_left_corner_convention() {
        // The X syndrome neighbour of the top-left corner data node (1,1)
        // lies above it at (2,0).
        let lat = Lattice::build(5).unwrap();
        assert_eq!(
            lat.syndrome_id(Coord::new(2, 0))
                .map(|s| lat.basis_of(s)),
            Some(Basis::X)
        );
        assert!(lat.syndrome_id(Coord::new(0, 2)).is_none());
    }

    #[test]
    fn inject_extremes() {
        let lat = Lattice::build(5).unwrap();
        let none = inject_defects(&lat, 0.0, 0.0, 7).unwrap();
        assert!(none.qubits.is_empty() && none.couplers.is_empty());
        let all = inject_defects(&lat, 1.0, 1.0, 7).unwrap();
        assert_eq!(all.qubits.len(), lat.num_qubits());
        assert_eq!(all.couplers.len(), lat.edges().len());
    }

    #[test]
    fn inject_is_deterministic() {
        let lat = Lattice::build(9).unwrap();
        let a = inject_defects(&lat, 0.02, 0.02, 123).unwrap();
        let b = inject_defects(&lat, 0.02, 0.02, 123).unwrap();
        assert_eq!(a, b);
        let c = inject_defects(&lat, 0.02, 0.02, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn inject_rate_is_binomial() {
        // Empirical qubit defect fraction over many seeds stays within 3
        // sigma of the requested rate.
        let lat = Lattice::build(21).unwrap();
        let rate = 0.02;
        let seeds = 10_000u64;
        let mut defective = 0u64;
        for seed in 0..seeds {
            defective += inject_defects(&lat, rate, rate, seed).unwrap().qubits.len() as u64;
        }
        let n = seeds as f64 * lat.num_qubits() as f64;
        let sigma = (rate * (1.0 - rate) / n).sqrt();
        let observed = defective as f64 / n;
        assert!(
            (observed - rate).abs() < 3.0 * sigma,
            "observed {observed} vs rate {rate} (sigma {sigma})"
        );
    }

    #[test]
    fn bad_rates_rejected() {
        let lat = Lattice::build(3).unwrap();
        assert!(inject_defects(&lat, -0.1, 0.0, 0).is_err());
        assert!(inject_defects(&lat, 0.0, 1.5, 0).is_err());
    }
}
