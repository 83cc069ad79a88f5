//! Stabilizer search on the adapted lattice.
//!
//! The X (Z) stabilizer search graph holds every internally disabled data
//! node plus every X (Z) syndrome node — disabled syndromes included — and
//! the original couplers between them. Each connected component with at
//! least one undisabled syndrome becomes one stabilizer whose members are
//! exactly those undisabled syndromes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coord::{Basis, Coord};
use crate::error::CommutationError;
use crate::lattice::Lattice;
use crate::status::NodeStatus;

/// A stabilizer (or super-stabilizer when `members.len() >= 2`).
#[derive(Debug, Clone, Serialize)]
pub struct Stabilizer {
    pub basis: Basis,
    /// Member gauge syndromes, in coordinate order.
    pub members: Vec<Coord>,
    /// Data support with multiplicities: a qubit touched by two members
    /// counts twice and drops out of the mod-2 support.
    pub support_count: BTreeMap<Coord, u32>,
    /// Odd-multiplicity support, in coordinate order.
    pub support_mod2: Vec<Coord>,
    /// Internally disabled data nodes in this component (its defect region).
    pub region: Vec<Coord>,
}

impl Stabilizer {
    pub fn weight(&self) -> usize {
        self.support_mod2.len()
    }

    pub fn is_super(&self) -> bool {
        self.members.len() >= 2
    }

    /// Canonical key: the smallest member coordinate.
    pub fn key(&self) -> Coord {
        self.members[0]
    }

    /// Mod-2 support of a single member gauge.
    pub fn gauge_support(&self, lattice: &Lattice, status: &NodeStatus, member: Coord) -> Vec<Coord> {
        let si = lattice.syndrome_id(member).expect("member is a syndrome");
        lattice
            .data_neighbors(si)
            .iter()
            .copied()
            .filter(|&d| !status.is_data_disabled(d))
            .map(|d| lattice.data()[d])
            .collect()
    }
}

/// The node set of one basis' search graph, for tests and dumps.
#[derive(Debug, Clone)]
pub struct StabilizerSearchGraph {
    pub basis: Basis,
    /// Internally disabled data nodes.
    pub data_nodes: Vec<Coord>,
    /// All syndrome nodes of the basis, disabled ones included.
    pub syndrome_nodes: Vec<Coord>,
    /// Couplers between the included nodes.
    pub edges: Vec<(Coord, Coord)>,
}

pub fn build_search_graph(
    lattice: &Lattice,
    status: &NodeStatus,
    basis: Basis,
) -> StabilizerSearchGraph {
    let data_nodes = status.internal_data(lattice);
    let mut syndrome_nodes = Vec::new();
    let mut edges = Vec::new();
    for (si, &s) in lattice.syndromes().iter().enumerate() {
        if lattice.basis_of(si) != basis {
            continue;
        }
        syndrome_nodes.push(s);
        for &di in lattice.data_neighbors(si) {
            if status.is_internal_data(di) {
                edges.push((lattice.data()[di], s));
            }
        }
    }
    edges.sort();
    StabilizerSearchGraph {
        basis,
        data_nodes,
        syndrome_nodes,
        edges,
    }
}

/// Find all stabilizers of one basis by flooding connected components of the
/// search graph.
pub fn stabilizer_search(lattice: &Lattice, status: &NodeStatus, basis: Basis) -> Vec<Stabilizer> {
    let n_syn = lattice.syndromes().len();
    let n_data = lattice.data().len();
    // Component labels over syndromes (of this basis) and internal data.
    let mut syn_comp: Vec<Option<usize>> = vec![None; n_syn];
    let mut data_comp: Vec<Option<usize>> = vec![None; n_data];
    let mut n_comp = 0usize;

    for start in 0..n_syn {
        if lattice.basis_of(start) != basis || syn_comp[start].is_some() {
            continue;
        }
        let comp = n_comp;
        n_comp += 1;
        let mut stack = vec![(true, start)];
        while let Some((is_syn, id)) = stack.pop() {
            if is_syn {
                if syn_comp[id].is_some() {
                    continue;
                }
                syn_comp[id] = Some(comp);
                for &di in lattice.data_neighbors(id) {
                    if status.is_internal_data(di) && data_comp[di].is_none() {
                        stack.push((false, di));
                    }
                }
            } else {
                if data_comp[id].is_some() {
                    continue;
                }
                data_comp[id] = Some(comp);
                for &si in lattice.syndrome_neighbors(id) {
                    if lattice.basis_of(si) == basis && syn_comp[si].is_none() {
                        stack.push((true, si));
                    }
                }
            }
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for si in 0..n_syn {
        if let Some(comp) = syn_comp[si] {
            if !status.is_syndrome_disabled(si) {
                members[comp].push(si);
            }
        }
    }
    let mut regions: Vec<Vec<Coord>> = vec![Vec::new(); n_comp];
    for di in 0..n_data {
        if let Some(comp) = data_comp[di] {
            regions[comp].push(lattice.data()[di]);
        }
    }

    let mut stabilizers = Vec::new();
    for comp in 0..n_comp {
        if members[comp].is_empty() {
            continue; // only disabled nodes: no stabilizer
        }
        let mut support_count: BTreeMap<Coord, u32> = BTreeMap::new();
        for &si in &members[comp] {
            for &di in lattice.data_neighbors(si) {
                if !status.is_data_disabled(di) {
                    *support_count.entry(lattice.data()[di]).or_insert(0) += 1;
                }
            }
        }
        let support_mod2: Vec<Coord> = support_count
            .iter()
            .filter(|(_, &n)| n % 2 == 1)
            .map(|(&c, _)| c)
            .collect();
        stabilizers.push(Stabilizer {
            basis,
            members: members[comp].iter().map(|&si| lattice.syndromes()[si]).collect(),
            support_count,
            support_mod2,
            region: regions[comp].clone(),
        });
    }
    stabilizers.sort_by_key(|s| s.key());
    stabilizers
}

/// Both bases' stabilizers plus the group structure.
#[derive(Debug, Clone)]
pub struct StabilizerSet {
    pub x: Vec<Stabilizer>,
    pub z: Vec<Stabilizer>,
    pub groups: Vec<StabilizerGroup>,
}

impl StabilizerSet {
    pub fn build(lattice: &Lattice, status: &NodeStatus) -> StabilizerSet {
        let x = stabilizer_search(lattice, status, Basis::X);
        let z = stabilizer_search(lattice, status, Basis::Z);
        let groups = group_stabilizers(lattice, &x, &z);
        StabilizerSet { x, z, groups }
    }

    pub fn of(&self, basis: Basis) -> &[Stabilizer] {
        match basis {
            Basis::X => &self.x,
            Basis::Z => &self.z,
        }
    }

    pub fn get(&self, id: StabId) -> &Stabilizer {
        &self.of(id.basis)[id.index]
    }

    pub fn all_ids(&self) -> impl Iterator<Item = StabId> + '_ {
        let xs = (0..self.x.len()).map(|i| StabId {
            basis: Basis::X,
            index: i,
        });
        let zs = (0..self.z.len()).map(|i| StabId {
            basis: Basis::Z,
            index: i,
        });
        xs.chain(zs)
    }

    /// Group id of a stabilizer, if it belongs to a defect region.
    pub fn group_of(&self, id: StabId) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.member_ids.contains(&id))
    }

    /// Mean mod-2 weight over super-stabilizers (both bases), if any.
    pub fn avg_super_weight(&self) -> Option<f64> {
        let weights: Vec<usize> = self
            .x
            .iter()
            .chain(self.z.iter())
            .filter(|s| s.is_super())
            .map(|s| s.weight())
            .collect();
        if weights.is_empty() {
            None
        } else {
            Some(weights.iter().sum::<usize>() as f64 / weights.len() as f64)
        }
    }

    pub fn super_weights(&self) -> Vec<usize> {
        self.x
            .iter()
            .chain(self.z.iter())
            .filter(|s| s.is_super())
            .map(|s| s.weight())
            .collect()
    }
}

/// Identifies one stabilizer inside a `StabilizerSet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StabId {
    pub basis: Basis,
    pub index: usize,
}

/// A defect-region group: every stabilizer whose component touches the same
/// connected cluster of internally disabled data. Super-stabilizers in the
/// group alternate bases in the measurement schedule; the per-basis weight
/// statistics feed the local shell strategies.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizerGroup {
    pub id: usize,
    /// All stabilizers sharing the region (scheduling unit).
    pub member_ids: Vec<StabId>,
    /// The subset with >= 2 members.
    pub super_ids: Vec<StabId>,
    /// Internally disabled data of the region, in coordinate order.
    pub region: Vec<Coord>,
    pub w_avg: Option<f64>,
    pub w_max: Option<usize>,
    pub w_avg_x: Option<f64>,
    pub w_avg_z: Option<f64>,
    pub w_max_x: Option<usize>,
    pub w_max_z: Option<usize>,
}

/// Group stabilizers by connected defect regions: two stabilizers share a
/// group iff their regions are connected through shared internally disabled
/// data nodes. Stabilizers with empty regions form no group.
pub fn group_stabilizers(
    _lattice: &Lattice,
    x: &[Stabilizer],
    z: &[Stabilizer],
) -> Vec<StabilizerGroup> {
    // Union-find over stabilizers, keyed by region coordinates.
    let ids: Vec<StabId> = (0..x.len())
        .map(|i| StabId {
            basis: Basis::X,
            index: i,
        })
        .chain((0..z.len()).map(|i| StabId {
            basis: Basis::Z,
            index: i,
        }))
        .collect();
    let stab = |id: StabId| -> &Stabilizer {
        match id.basis {
            Basis::X => &x[id.index],
            Basis::Z => &z[id.index],
        }
    };
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut by_coord: BTreeMap<Coord, usize> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        for &c in &stab(id).region {
            match by_coord.get(&c) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
                None => {
                    by_coord.insert(c, i);
                }
            }
        }
    }

    let mut clusters: BTreeMap<usize, Vec<StabId>> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        if stab(id).region.is_empty() {
            continue;
        }
        let root = find(&mut parent, i);
        clusters.entry(root).or_default().push(id);
    }

    let mut groups = Vec::new();
    for (gid, (_, member_ids)) in clusters.into_iter().enumerate() {
        let mut member_ids = member_ids;
        member_ids.sort_by_key(|&id| (stab(id).key(), id.basis));
        let super_ids: Vec<StabId> = member_ids
            .iter()
            .copied()
            .filter(|&id| stab(id).is_super())
            .collect();
        let mut region: Vec<Coord> = member_ids
            .iter()
            .flat_map(|&id| stab(id).region.iter().copied())
            .collect();
        region.sort();
        region.dedup();
        let weights = |basis: Option<Basis>| -> Vec<usize> {
            super_ids
                .iter()
                .filter(|id| basis.is_none() || Some(id.basis) == basis)
                .map(|&id| stab(id).weight())
                .collect()
        };
        let avg = |w: &[usize]| {
            if w.is_empty() {
                None
            } else {
                Some(w.iter().sum::<usize>() as f64 / w.len() as f64)
            }
        };
        let all = weights(None);
        let wx = weights(Some(Basis::X));
        let wz = weights(Some(Basis::Z));
        groups.push(StabilizerGroup {
            id: gid,
            w_avg: avg(&all),
            w_max: all.iter().max().copied(),
            w_avg_x: avg(&wx),
            w_avg_z: avg(&wz),
            w_max_x: wx.iter().max().copied(),
            w_max_z: wz.iter().max().copied(),
            member_ids,
            super_ids,
            region,
        });
    }
    groups
}

/// Check that every X stabilizer shares an even number of mod-2 support
/// qubits with every Z stabilizer.
pub fn verify_commutation(x: &[Stabilizer], z: &[Stabilizer]) -> Result<(), CommutationError> {
    for sx in x {
        for sz in z {
            let shared = intersection_size(&sx.support_mod2, &sz.support_mod2);
            if shared % 2 == 1 {
                return Err(CommutationError::OddOverlap {
                    x_basis: Basis::X,
                    x_stab: sx.key(),
                    z_basis: Basis::Z,
                    z_stab: sz.key(),
                    shared,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn intersection_size(a: &[Coord], b: &[Coord]) -> usize {
    // Both sorted.
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::adapt_bandage;
    use crate::baseline::adapt_traditional;
    use crate::lattice::DefectMap;

    fn defect_qubits(l: i64, coords: &[(i32, i32)]) -> (Lattice, NodeStatus) {
        let lattice = Lattice::build(l).unwrap();
        let mut map = DefectMap {
            qubits: coords.iter().map(|&(x, y)| Coord::new(x, y)).collect(),
            ..DefectMap::default()
        };
        map.normalize();
        let status = adapt_bandage(&lattice, &map).unwrap();
        (lattice, status)
    }

    #[test]
    fn defect_free_graph_has_isolated_syndromes() {
        let lattice = Lattice::build(5).unwrap();
        let status = adapt_bandage(&lattice, &DefectMap::default()).unwrap();
        let g = build_search_graph(&lattice, &status, Basis::X);
        assert!(g.data_nodes.is_empty());
        assert!(g.edges.is_empty());
        assert_eq!(g.syndrome_nodes.len(), 12);
    }

    #[test]
    fn defect_free_stabilizers_are_singletons() {
        let lattice = Lattice::build(7).unwrap();
        let status = adapt_bandage(&lattice, &DefectMap::default()).unwrap();
        for basis in [Basis::X, Basis::Z] {
            let stabs = stabilizer_search(&lattice, &status, basis);
            assert_eq!(stabs.len(), 24);
            assert!(stabs.iter().all(|s| !s.is_super()));
        }
    }

    #[test]
    fn single_internal_defect_merges_pairs() {
        let (lattice, status) = defect_qubits(7, &[(7, 7)]);
        for basis in [Basis::X, Basis::Z] {
            let stabs = stabilizer_search(&lattice, &status, basis);
            let supers: Vec<&Stabilizer> = stabs.iter().filter(|s| s.is_super()).collect();
            assert_eq!(supers.len(), 1, "{basis}");
            assert_eq!(supers[0].members.len(), 2);
            assert_eq!(supers[0].weight(), 6);
        }
    }

    #[test]
    fn weight1_example_supports() {
        // Weight-1 Z syndrome kept by the bandage method: C-shaped weight-8
        // X super-stabilizer, T-shaped weight-10 Z super-stabilizer, with
        // one data qubit counted twice on the X side.
        let (lattice, status) = defect_qubits(7, &[(5, 5), (7, 5), (5, 7)]);
        let set = StabilizerSet::build(&lattice, &status);
        let sx: Vec<&Stabilizer> = set.x.iter().filter(|s| s.is_super()).collect();
        let sz: Vec<&Stabilizer> = set.z.iter().filter(|s| s.is_super()).collect();
        assert_eq!(sx.len(), 1);
        assert_eq!(sz.len(), 1);
        assert_eq!(sx[0].weight(), 8);
        assert_eq!(sz[0].weight(), 10);
        assert_eq!(sx[0].support_count.get(&Coord::new(7, 7)), Some(&2));
        assert!(!sx[0].support_mod2.contains(&Coord::new(7, 7)));
        // Traditional disables the weight-1 syndrome and its neighbour,
        // raising the Z super weight to 12.
        let lattice2 = Lattice::build(7).unwrap();
        let mut map = DefectMap::default();
        map.qubits = vec![Coord::new(5, 5), Coord::new(5, 7), Coord::new(7, 5)];
        map.normalize();
        let trad = adapt_traditional(&lattice2, &map).unwrap();
        let tset = StabilizerSet::build(&lattice2, &trad);
        let tx: Vec<usize> = tset.x.iter().filter(|s| s.is_super()).map(|s| s.weight()).collect();
        let tz: Vec<usize> = tset.z.iter().filter(|s| s.is_super()).map(|s| s.weight()).collect();
        assert_eq!(tx, vec![8]);
        assert_eq!(tz, vec![12]);
    }

    #[test]
    fn ab_example_weights() {
        // Diagonal pair: bandage keeps the 4,4 bridge, average super weight
        // 20/3; traditional pays weight 10 on average.
        let (lattice, status) = defect_qubits(7, &[(3, 3), (5, 5)]);
        let set = StabilizerSet::build(&lattice, &status);
        let avg = set.avg_super_weight().unwrap();
        assert!((avg - 20.0 / 3.0).abs() < 1e-9, "bandage avg {avg}");

        let lattice2 = Lattice::build(7).unwrap();
        let mut map = DefectMap::default();
        map.qubits = vec![Coord::new(3, 3), Coord::new(5, 5)];
        let trad = adapt_traditional(&lattice2, &map).unwrap();
        let tset = StabilizerSet::build(&lattice2, &trad);
        assert_eq!(tset.avg_super_weight(), Some(10.0));
    }

    #[test]
    fn abc_example_weights() {
        let (lattice, status) = defect_qubits(7, &[(3, 3), (5, 5), (7, 7)]);
        let set = StabilizerSet::build(&lattice, &status);
        assert_eq!(set.avg_super_weight(), Some(7.0));

        let lattice2 = Lattice::build(7).unwrap();
        let mut map = DefectMap::default();
        map.qubits = vec![Coord::new(3, 3), Coord::new(5, 5), Coord::new(7, 7)];
        let trad = adapt_traditional(&lattice2, &map).unwrap();
        let tset = StabilizerSet::build(&lattice2, &trad);
        assert_eq!(tset.avg_super_weight(), Some(14.0));
    }

    #[test]
    fn partition_every_live_syndrome_once() {
        let (lattice, status) = defect_qubits(9, &[(5, 5), (8, 8), (3, 9)]);
        for basis in [Basis::X, Basis::Z] {
            let stabs = stabilizer_search(&lattice, &status, basis);
            let mut seen = std::collections::HashSet::new();
            for s in &stabs {
                for &m in &s.members {
                    assert!(seen.insert(m), "{m} in two stabilizers");
                }
            }
            let live = (0..lattice.syndromes().len())
                .filter(|&si| lattice.basis_of(si) == basis && !status.is_syndrome_disabled(si))
                .count();
            assert_eq!(seen.len(), live);
        }
    }

    #[test]
    fn commutation_clean_and_negative_control() {
        let (lattice, status) = defect_qubits(7, &[(3, 3), (5, 5), (7, 7)]);
        let set = StabilizerSet::build(&lattice, &status);
        verify_commutation(&set.x, &set.z).unwrap();

        // Drop one qubit from an X stabilizer: some pair must turn odd.
        let mut mutated = set.x.clone();
        let victim = mutated
            .iter_mut()
            .find(|s| s.is_super())
            .expect("has a super");
        victim.support_mod2.remove(0);
        let err = verify_commutation(&mutated, &set.z).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("odd"), "{msg}");
    }

    #[test]
    fn groups_single_defect() {
        let (lattice, status) = defect_qubits(7, &[(7, 7)]);
        let set = StabilizerSet::build(&lattice, &status);
        assert_eq!(set.groups.len(), 1);
        assert_eq!(set.groups[0].super_ids.len(), 2);
        assert_eq!(set.groups[0].w_avg, Some(6.0));
    }

    #[test]
    fn groups_well_separated_defects() {
        let (lattice, status) = defect_qubits(11, &[(3, 3), (17, 17)]);
        let set = StabilizerSet::build(&lattice, &status);
        assert_eq!(set.groups.len(), 2);
    }

    #[test]
    fn abc_chain_is_one_group() {
        let (lattice, status) = defect_qubits(7, &[(3, 3), (5, 5), (7, 7)]);
        let set = StabilizerSet::build(&lattice, &status);
        assert_eq!(set.groups.len(), 1);
        // 3 X supers and 1 Z super share the diagonal region.
        assert_eq!(set.groups[0].super_ids.len(), 4);
    }
}
