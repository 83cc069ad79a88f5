//! Logical-operator placement and code-distance metrics.
//!
//! Distances are measured on a graph whose nodes are the opposite-basis
//! stabilizers (super-stabilizers collapsed to single nodes) plus two
//! virtual nodes for the opposing boundary segments. Each undisabled data
//! qubit is an edge joining the stabilizers whose mod-2 support contains it;
//! boundary qubits connect to their segment's virtual node. A shortest
//! boundary-to-boundary path is then exactly a minimum-weight error string
//! that triggers no stabilizer: entering and leaving a stabilizer's support
//! flips it twice. On a defect-free lattice this reduces to the familiar
//! straight row/column of length L; across a merged super-stabilizer the
//! string pays only its entry and exit qubits, which is how clustered
//! defects shorten the code distance.
//!
//! The operator used as a circuit observable is placed differently: it must
//! commute with every individually measured gauge, so it is routed as a
//! data/syndrome path that avoids super-stabilizer regions. See
//! [`find_bare_logical`].

use std::collections::HashMap;

use serde::Serialize;

use crate::coord::{Basis, Coord};
use crate::error::LogicalError;
use crate::lattice::{Lattice, SideSet};
use crate::patch::{intersection_size, StabilizerSet};
use crate::status::NodeStatus;

/// A logical operator as an explicit data-qubit string.
#[derive(Debug, Clone, Serialize)]
pub struct LogicalOperator {
    pub basis: Basis,
    /// Support in path order, from the first boundary to the second.
    pub data_support: Vec<Coord>,
    pub endpoints: (Coord, Coord),
}

impl LogicalOperator {
    pub fn weight(&self) -> usize {
        self.data_support.len()
    }

    pub fn sorted_support(&self) -> Vec<Coord> {
        let mut s = self.data_support.clone();
        s.sort();
        s
    }
}

/// Result of minimum-weight logical counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinWeightCount {
    pub weight: usize,
    pub count: u64,
    /// True when the count saturated the cap and is only a lower bound.
    pub lower_bound: bool,
}

/// The paper-defined logical operator search graph: all undisabled data
/// nodes, all undisabled opposite-basis syndrome nodes, and the couplers
/// between them. Used for observable placement and exported in dumps.
#[derive(Debug, Clone)]
pub struct LogicalSearchGraph {
    pub basis: Basis,
    pub data_nodes: Vec<Coord>,
    pub syndrome_nodes: Vec<Coord>,
    pub edges: Vec<(Coord, Coord)>,
}

pub fn build_logical_search_graph(
    lattice: &Lattice,
    status: &NodeStatus,
    basis: Basis,
) -> LogicalSearchGraph {
    let opp = basis.other();
    let mut data_nodes = Vec::new();
    for (di, &c) in lattice.data().iter().enumerate() {
        if !status.is_data_disabled(di) {
            data_nodes.push(c);
        }
    }
    let mut syndrome_nodes = Vec::new();
    let mut edges = Vec::new();
    for (si, &s) in lattice.syndromes().iter().enumerate() {
        if lattice.basis_of(si) != opp || status.is_syndrome_disabled(si) {
            continue;
        }
        syndrome_nodes.push(s);
        for &di in lattice.data_neighbors(si) {
            if !status.is_data_disabled(di) {
                edges.push((lattice.data()[di], s));
            }
        }
    }
    edges.sort();
    LogicalSearchGraph {
        basis,
        data_nodes,
        syndrome_nodes,
        edges,
    }
}

/// The distance graph described in the module docs.
pub struct DistanceGraph {
    /// Stabilizer nodes 0..n_stabs, then the two virtual boundary nodes.
    pub n_stabs: usize,
    /// (u, v, qubit); u, v < n_stabs + 2.
    pub edges: Vec<(usize, usize, Coord)>,
    pub adj: Vec<Vec<usize>>,
    /// Qubits invisible to this basis' checks (even multiplicity
    /// everywhere). Chosen logical operators must avoid them.
    pub invisible: Vec<Coord>,
    /// Qubits with a single odd membership but no tracked boundary side;
    /// excluded from the graph.
    pub dangling: Vec<Coord>,
}

impl DistanceGraph {
    pub fn source(&self) -> usize {
        self.n_stabs
    }
    pub fn sink(&self) -> usize {
        self.n_stabs + 1
    }
}

/// Build the distance graph for logical operators of `basis`.
pub fn build_distance_graph(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    basis: Basis,
) -> DistanceGraph {
    let opp = basis.other();
    let opp_stabs = stabs.of(opp);
    let mut stab_of_syndrome: HashMap<Coord, usize> = HashMap::new();
    for (i, s) in opp_stabs.iter().enumerate() {
        for &m in &s.members {
            stab_of_syndrome.insert(m, i);
        }
    }
    let n_stabs = opp_stabs.len();
    let source = n_stabs;
    let sink = n_stabs + 1;
    let (side_a, side_b) = match basis {
        Basis::X => (SideSet::TOP, SideSet::BOTTOM),
        Basis::Z => (SideSet::LEFT, SideSet::RIGHT),
    };

    let mut edges = Vec::new();
    let mut invisible = Vec::new();
    let mut dangling = Vec::new();
    for (di, &q) in lattice.data().iter().enumerate() {
        if status.is_data_disabled(di) {
            continue;
        }
        // Odd-multiplicity stabilizer memberships of this qubit.
        let mut parity: Vec<usize> = Vec::with_capacity(2);
        for &si in lattice.syndrome_neighbors(di) {
            if lattice.basis_of(si) != opp || status.is_syndrome_disabled(si) {
                continue;
            }
            let stab = stab_of_syndrome[&lattice.syndromes()[si]];
            if let Some(pos) = parity.iter().position(|&s| s == stab) {
                parity.swap_remove(pos);
            } else {
                parity.push(stab);
            }
        }
        let sides = status
            .membership(q)
            .map(|m| m.sides.for_basis(basis))
            .unwrap_or_else(SideSet::empty);
        let on_a = sides.contains(side_a);
        let on_b = sides.contains(side_b);
        match parity.len() {
            2 => edges.push((parity[0], parity[1], q)),
            1 => match (on_a, on_b) {
                (true, true) => {
                    edges.push((source, parity[0], q));
                    edges.push((sink, parity[0], q));
                }
                (true, false) => edges.push((source, parity[0], q)),
                (false, true) => edges.push((sink, parity[0], q)),
                (false, false) => dangling.push(q),
            },
            0 => {
                if on_a && on_b {
                    edges.push((source, sink, q));
                } else {
                    invisible.push(q);
                }
            }
            _ => unreachable!("a data qubit has at most two {opp} neighbours"),
        }
    }
    edges.sort_by_key(|&(_, _, q)| q);
    let mut adj = vec![Vec::new(); n_stabs + 2];
    for (i, &(u, v, _)) in edges.iter().enumerate() {
        adj[u].push(i);
        adj[v].push(i);
    }
    DistanceGraph {
        n_stabs,
        edges,
        adj,
        invisible,
        dangling,
    }
}

fn bfs_dist(graph: &DistanceGraph, from: usize) -> Vec<u32> {
    let n = graph.n_stabs + 2;
    let mut dist = vec![u32::MAX; n];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for &ei in &graph.adj[u] {
            let (a, b, _) = graph.edges[ei];
            let v = if a == u { b } else { a };
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Shortest boundary-to-boundary error string for `basis`, as a logical
/// operator. Ties are broken by always taking the smallest qubit coordinate,
/// which makes the result deterministic.
pub fn find_logical(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    basis: Basis,
) -> Result<LogicalOperator, LogicalError> {
    let graph = build_distance_graph(lattice, status, stabs, basis);
    let to_sink = bfs_dist(&graph, graph.sink());
    let d = to_sink[graph.source()];
    if d == u32::MAX || d == 0 {
        return Err(LogicalError::NoLogicalPath { basis });
    }
    // Greedy walk from source along distance-decreasing edges.
    let mut support = Vec::with_capacity(d as usize);
    let mut u = graph.source();
    let mut dist_left = d;
    while u != graph.sink() {
        let mut best: Option<(Coord, usize)> = None;
        for &ei in &graph.adj[u] {
            let (a, b, q) = graph.edges[ei];
            let v = if a == u { b } else { a };
            if to_sink[v] == dist_left - 1 {
                if best.map_or(true, |(bq, _)| q < bq) {
                    best = Some((q, v));
                }
            }
        }
        let (q, v) = best.expect("distance-decreasing edge exists");
        support.push(q);
        u = v;
        dist_left -= 1;
    }
    Ok(LogicalOperator {
        basis,
        data_support: support.clone(),
        endpoints: (support[0], *support.last().unwrap()),
    })
}

/// Code distances (d_X, d_Z) from the two shortest logical operators.
pub fn code_distances(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
) -> Result<(usize, usize), LogicalError> {
    let dx = find_logical(lattice, status, stabs, Basis::X)?.weight();
    let dz = find_logical(lattice, status, stabs, Basis::Z)?.weight();
    Ok((dx, dz))
}

/// Count distinct minimum-weight data supports realizing a logical operator
/// of `basis`. Counting saturates at `cap` and reports a lower bound.
pub fn count_min_weight_logicals(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    basis: Basis,
    cap: u64,
) -> Result<MinWeightCount, LogicalError> {
    let graph = build_distance_graph(lattice, status, stabs, basis);
    let from_source = bfs_dist(&graph, graph.source());
    let d = from_source[graph.sink()];
    if d == u32::MAX || d == 0 {
        return Err(LogicalError::NoLogicalPath { basis });
    }
    // Count shortest paths through the layered BFS order. Distinct paths
    // use distinct qubit sets: each edge is a unique qubit and a path's
    // edge set determines its traversal.
    let n = graph.n_stabs + 2;
    let mut count = vec![0u64; n];
    let mut saturated = false;
    count[graph.source()] = 1;
    let mut order: Vec<usize> = (0..n).filter(|&v| from_source[v] != u32::MAX).collect();
    order.sort_by_key(|&v| from_source[v]);
    for &v in &order {
        if v == graph.source() {
            continue;
        }
        let mut total = 0u64;
        for &ei in &graph.adj[v] {
            let (a, b, _) = graph.edges[ei];
            let u = if a == v { b } else { a };
            if from_source[u] != u32::MAX && from_source[u] + 1 == from_source[v] {
                let (sum, overflow) = total.overflowing_add(count[u]);
                total = if overflow { u64::MAX } else { sum };
            }
        }
        if total >= cap {
            total = cap;
            saturated = true;
        }
        count[v] = total;
    }
    Ok(MinWeightCount {
        weight: d as usize,
        count: count[graph.sink()],
        lower_bound: saturated,
    })
}

/// Violations reported by [`verify_logical`].
#[derive(Debug, Clone, Serialize)]
pub enum LogicalViolation {
    OddStabilizerOverlap { stab: Coord, shared: usize },
    TouchesInvisibleQubit { qubit: Coord },
}

/// Check a logical operator: it must overlap every opposite-basis
/// stabilizer evenly and avoid qubits invisible to that basis.
pub fn verify_logical(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    op: &LogicalOperator,
) -> Result<(), Vec<LogicalViolation>> {
    let mut violations = Vec::new();
    let support = op.sorted_support();
    for s in stabs.of(op.basis.other()) {
        let shared = intersection_size(&support, &s.support_mod2);
        if shared % 2 == 1 {
            violations.push(LogicalViolation::OddStabilizerOverlap {
                stab: s.key(),
                shared,
            });
        }
    }
    let graph = build_distance_graph(lattice, status, stabs, op.basis);
    for q in &graph.invisible {
        if support.binary_search(q).is_ok() {
            violations.push(LogicalViolation::TouchesInvisibleQubit { qubit: *q });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// The X and Z logical operators must overlap in an odd number of qubits.
pub fn conjugate_overlap_is_odd(x_op: &LogicalOperator, z_op: &LogicalOperator) -> bool {
    intersection_size(&x_op.sorted_support(), &z_op.sorted_support()) % 2 == 1
}

/// Place a logical operator usable as a circuit observable: a path of
/// undisabled data qubits joined through undisabled opposite-basis syndrome
/// qubits that commutes with every individually measured check, gauges
/// included. Routed to avoid super-stabilizer regions; falls back through a
/// set of deterministic tie-break rotations before giving up.
pub fn find_bare_logical(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    basis: Basis,
) -> Option<LogicalOperator> {
    let opp = basis.other();
    // Supports the observable must overlap evenly: every opposite-basis
    // stabilizer product, and each gauge of region stabilizers.
    let mut constraints: Vec<Vec<Coord>> = Vec::new();
    for s in stabs.of(opp) {
        constraints.push(s.support_mod2.clone());
        if !s.region.is_empty() {
            for &m in &s.members {
                constraints.push(s.gauge_support(lattice, status, m));
            }
        }
    }
    let commutes = |support: &[Coord]| -> bool {
        constraints
            .iter()
            .all(|c| intersection_size(support, c) % 2 == 0)
    };

    // Syndromes usable as hops: undisabled, opposite basis. Hops through
    // gauge syndromes of a region are allowed only if the full operator
    // verifies, which the final check covers; preferring regular syndromes
    // keeps paths clear of super-stabilizers.
    let in_region: Vec<bool> = {
        let mut v = vec![false; lattice.syndromes().len()];
        for s in stabs.of(opp) {
            if !s.region.is_empty() {
                for &m in &s.members {
                    v[lattice.syndrome_id(m).unwrap()] = true;
                }
            }
        }
        v
    };

    let (side_a, side_b) = match basis {
        Basis::X => (SideSet::TOP, SideSet::BOTTOM),
        Basis::Z => (SideSet::LEFT, SideSet::RIGHT),
    };
    let is_terminal = |di: usize, side: SideSet| -> bool {
        status
            .membership(lattice.data()[di])
            .map(|m| m.sides.for_basis(basis).contains(side))
            .unwrap_or(false)
    };

    // Candidate 1: straight rows/columns.
    let l = lattice.size() as i32;
    for fixed in (1..=2 * l - 1).step_by(2) {
        let line: Vec<Coord> = match basis {
            Basis::X => (1..=2 * l - 1)
                .step_by(2)
                .map(|y| Coord::new(fixed, y))
                .collect(),
            Basis::Z => (1..=2 * l - 1)
                .step_by(2)
                .map(|x| Coord::new(x, fixed))
                .collect(),
        };
        let ids: Option<Vec<usize>> = line.iter().map(|&c| lattice.data_id(c)).collect();
        let Some(ids) = ids else { continue };
        if ids.iter().any(|&di| status.is_data_disabled(di)) {
            continue;
        }
        if !is_terminal(ids[0], side_a) || !is_terminal(*ids.last().unwrap(), side_b) {
            continue;
        }
        let connected = ids.windows(2).all(|w| {
            shared_live_syndrome(lattice, status, opp, w[0], w[1], &in_region, true).is_some()
        });
        if connected && commutes(&sorted(&line)) {
            return Some(LogicalOperator {
                basis,
                data_support: line.clone(),
                endpoints: (line[0], *line.last().unwrap()),
            });
        }
    }

    // Candidate 2: BFS shortest data/syndrome paths, avoiding region
    // syndromes first, then allowing them; several tie-break rotations.
    for allow_region_hops in [false, true] {
        for rotation in 0..8 {
            if let Some(op) = bfs_bare_path(
                lattice,
                status,
                opp,
                basis,
                side_a,
                side_b,
                &in_region,
                allow_region_hops,
                rotation,
            ) {
                if commutes(&sorted(&op.data_support)) {
                    return Some(op);
                }
            }
        }
    }
    None
}

fn sorted(v: &[Coord]) -> Vec<Coord> {
    let mut s = v.to_vec();
    s.sort();
    s
}

fn shared_live_syndrome(
    lattice: &Lattice,
    status: &NodeStatus,
    opp: Basis,
    a: usize,
    b: usize,
    in_region: &[bool],
    allow_region: bool,
) -> Option<usize> {
    for &si in lattice.syndrome_neighbors(a) {
        if lattice.basis_of(si) != opp
            || status.is_syndrome_disabled(si)
            || (!allow_region && in_region[si])
        {
            continue;
        }
        if lattice.data_neighbors(si).contains(&b) {
            return Some(si);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn bfs_bare_path(
    lattice: &Lattice,
    status: &NodeStatus,
    opp: Basis,
    basis: Basis,
    side_a: SideSet,
    side_b: SideSet,
    in_region: &[bool],
    allow_region: bool,
    rotation: usize,
) -> Option<LogicalOperator> {
    let n = lattice.data().len();
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut starts: Vec<usize> = (0..n)
        .filter(|&di| {
            !status.is_data_disabled(di)
                && status
                    .membership(lattice.data()[di])
                    .map(|m| m.sides.for_basis(basis).contains(side_a))
                    .unwrap_or(false)
        })
        .collect();
    starts.rotate_left(rotation.min(starts.len().saturating_sub(1)));
    for di in starts {
        seen[di] = true;
        queue.push_back(di);
    }
    let goal = |di: usize| {
        status
            .membership(lattice.data()[di])
            .map(|m| m.sides.for_basis(basis).contains(side_b))
            .unwrap_or(false)
    };
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            let mut path = vec![u];
            let mut cur = u;
            while let Some(p) = prev[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            let support: Vec<Coord> = path.iter().map(|&di| lattice.data()[di]).collect();
            return Some(LogicalOperator {
                basis,
                data_support: support.clone(),
                endpoints: (support[0], *support.last().unwrap()),
            });
        }
        // Neighbours through shared live syndromes.
        let mut nbrs: Vec<usize> = Vec::new();
        for &si in lattice.syndrome_neighbors(u) {
            if lattice.basis_of(si) != opp
                || status.is_syndrome_disabled(si)
                || (!allow_region && in_region[si])
            {
                continue;
            }
            for &di in lattice.data_neighbors(si) {
                if di != u && !status.is_data_disabled(di) && !seen[di] {
                    nbrs.push(di);
                }
            }
        }
        nbrs.sort();
        nbrs.dedup();
        nbrs.rotate_left(rotation.min(nbrs.len().saturating_sub(1)));
        for v in nbrs {
            if !seen[v] {
                seen[v] = true;
                prev[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::adapt_bandage;
    use crate::baseline::adapt_traditional;
    use crate::lattice::DefectMap;

    fn setup(l: i64, coords: &[(i32, i32)], traditional: bool) -> (Lattice, NodeStatus, StabilizerSet) {
        let lattice = Lattice::build(l).unwrap();
        let mut map = DefectMap {
            qubits: coords.iter().map(|&(x, y)| Coord::new(x, y)).collect(),
            ..DefectMap::default()
        };
        map.normalize();
        let status = if traditional {
            adapt_traditional(&lattice, &map).unwrap()
        } else {
            adapt_bandage(&lattice, &map).unwrap()
        };
        let stabs = StabilizerSet::build(&lattice, &status);
        (lattice, status, stabs)
    }

    #[test]
    fn defect_free_distances_are_l() {
        for l in [3, 5, 7] {
            let (lattice, status, stabs) = setup(l, &[], false);
            let (dx, dz) = code_distances(&lattice, &status, &stabs).unwrap();
            assert_eq!((dx, dz), (l as usize, l as usize));
        }
    }

    #[test]
    fn defect_free_logical_is_straight_line() {
        let (lattice, status, stabs) = setup(5, &[], false);
        let op = find_logical(&lattice, &status, &stabs, Basis::X).unwrap();
        assert_eq!(op.weight(), 5);
        assert!(op.data_support.iter().all(|c| c.x == 1));
    }

    #[test]
    fn ab_case_distances() {
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5)], false);
        assert_eq!(code_distances(&lattice, &status, &stabs).unwrap(), (5, 6));
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5)], true);
        assert_eq!(code_distances(&lattice, &status, &stabs).unwrap(), (5, 5));
    }

    #[test]
    fn abc_case_distances() {
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5), (7, 7)], false);
        assert_eq!(code_distances(&lattice, &status, &stabs).unwrap(), (4, 6));
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5), (7, 7)], true);
        assert_eq!(code_distances(&lattice, &status, &stabs).unwrap(), (4, 4));
    }

    #[test]
    fn one_defect_same_for_both_methods() {
        let (lattice, status, stabs) = setup(7, &[(3, 3)], false);
        let band = code_distances(&lattice, &status, &stabs).unwrap();
        let (lattice, status, stabs) = setup(7, &[(3, 3)], true);
        let trad = code_distances(&lattice, &status, &stabs).unwrap();
        assert_eq!(band, trad);
    }

    #[test]
    fn disconnected_boundaries_error() {
        // A full row of defects destroys the X logical.
        let defects: Vec<(i32, i32)> = (1..=9).step_by(2).map(|x| (x, 5)).collect();
        let lattice = Lattice::build(5).unwrap();
        let mut map = DefectMap {
            qubits: defects.iter().map(|&(x, y)| Coord::new(x, y)).collect(),
            ..DefectMap::default()
        };
        map.normalize();
        let status = adapt_bandage(&lattice, &map).unwrap();
        let stabs = StabilizerSet::build(&lattice, &status);
        assert!(matches!(
            find_logical(&lattice, &status, &stabs, Basis::X),
            Err(LogicalError::NoLogicalPath { .. })
        ));
    }

    #[test]
    fn verify_logical_negative_control() {
        let (lattice, status, stabs) = setup(7, &[], false);
        let mut op = find_logical(&lattice, &status, &stabs, Basis::X).unwrap();
        verify_logical(&lattice, &status, &stabs, &op).unwrap();
        op.data_support.remove(2);
        assert!(verify_logical(&lattice, &status, &stabs, &op).is_err());
    }

    #[test]
    fn conjugate_overlap() {
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5)], false);
        let x = find_logical(&lattice, &status, &stabs, Basis::X).unwrap();
        let z = find_logical(&lattice, &status, &stabs, Basis::Z).unwrap();
        assert!(conjugate_overlap_is_odd(&x, &z));
    }

    #[test]
    fn defect_free_conjugates_cross_once() {
        let (lattice, status, stabs) = setup(5, &[], false);
        let x = find_logical(&lattice, &status, &stabs, Basis::X).unwrap();
        let z = find_logical(&lattice, &status, &stabs, Basis::Z).unwrap();
        assert_eq!(
            intersection_size(&x.sorted_support(), &z.sorted_support()),
            1
        );
    }

    #[test]
    fn bare_logical_defect_free_is_straight() {
        let (lattice, status, stabs) = setup(5, &[], false);
        let op = find_bare_logical(&lattice, &status, &stabs, Basis::Z).unwrap();
        assert_eq!(op.weight(), 5);
        assert!(op.data_support.iter().all(|c| c.y == op.data_support[0].y));
    }

    #[test]
    fn bare_logical_avoids_super_regions() {
        let (lattice, status, stabs) = setup(7, &[(3, 3), (5, 5), (7, 7)], false);
        for basis in [Basis::X, Basis::Z] {
            let op = find_bare_logical(&lattice, &status, &stabs, basis).unwrap();
            verify_logical(&lattice, &status, &stabs, &op).unwrap();
        }
    }
}
