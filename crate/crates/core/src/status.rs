//! The NodeStatus ledger: which nodes an adaptation disabled and why, plus
//! the current boundary membership of the deformed patch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coord::{Basis, Coord};
use crate::lattice::{BoundaryType, Lattice, SideSet};

/// Why a node was disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisableReason {
    /// The component itself is defective.
    Defective,
    /// Removed by boundary deformation (unsafe boundary node or a redundant
    /// syndrome cleaned from a frontier).
    FrontierCleaned,
    /// Data node disabled because a neighbouring syndrome qubit is defective.
    NeighborOfDefectSyndrome,
    /// Data node disabled because one of its couplers is defective.
    CouplerDefect,
    /// Syndrome left with no undisabled data neighbours.
    WeightZero,
    /// Disabled by the traditional weight-1/bridge iteration.
    BaselineRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMembership {
    pub typ: BoundaryType,
    pub sides: SideSet,
}

/// Mutable adaptation state over one lattice.
#[derive(Debug, Clone)]
pub struct NodeStatus {
    data_disabled: Vec<bool>,
    syn_disabled: Vec<bool>,
    /// Data disabled by internal steps (not boundary deformation). These are
    /// the nodes super-stabilizers stretch across.
    data_internal: Vec<bool>,
    reasons: BTreeMap<Coord, DisableReason>,
    boundary: BTreeMap<Coord, BoundaryMembership>,
}

impl NodeStatus {
    pub fn new(lattice: &Lattice) -> NodeStatus {
        let mut boundary = BTreeMap::new();
        for &c in lattice.data() {
            if let Some((typ, sides)) = lattice.initial_boundary(c) {
                boundary.insert(c, BoundaryMembership { typ, sides });
            }
        }
        NodeStatus {
            data_disabled: vec![false; lattice.data().len()],
            syn_disabled: vec![false; lattice.syndromes().len()],
            data_internal: vec![false; lattice.data().len()],
            reasons: BTreeMap::new(),
            boundary,
        }
    }

    pub fn is_data_disabled(&self, id: usize) -> bool {
        self.data_disabled[id]
    }

    pub fn is_syndrome_disabled(&self, id: usize) -> bool {
        self.syn_disabled[id]
    }

    pub fn is_internal_data(&self, id: usize) -> bool {
        self.data_internal[id]
    }

    pub fn disable_data(
        &mut self,
        lattice: &Lattice,
        id: usize,
        reason: DisableReason,
        internal: bool,
    ) {
        if self.data_disabled[id] {
            return;
        }
        self.data_disabled[id] = true;
        self.data_internal[id] = internal;
        let c = lattice.data()[id];
        self.reasons.insert(c, reason);
        self.boundary.remove(&c);
    }

    pub fn disable_syndrome(&mut self, lattice: &Lattice, id: usize, reason: DisableReason) {
        if self.syn_disabled[id] {
            return;
        }
        self.syn_disabled[id] = true;
        self.reasons.insert(lattice.syndromes()[id], reason);
    }

    /// Count of undisabled data neighbours of a syndrome.
    pub fn syndrome_weight(&self, lattice: &Lattice, syndrome_id: usize) -> usize {
        lattice
            .data_neighbors(syndrome_id)
            .iter()
            .filter(|&&d| !self.data_disabled[d])
            .count()
    }

    /// Count of undisabled syndrome neighbours of a data node.
    pub fn data_degree(&self, lattice: &Lattice, data_id: usize) -> usize {
        lattice
            .syndrome_neighbors(data_id)
            .iter()
            .filter(|&&s| !self.syn_disabled[s])
            .count()
    }

    pub fn boundary(&self) -> &BTreeMap<Coord, BoundaryMembership> {
        &self.boundary
    }

    pub fn membership(&self, c: Coord) -> Option<BoundaryMembership> {
        self.boundary.get(&c).copied()
    }

    /// Add an undisabled data node to the X or Z boundary, inheriting sides.
    /// A node on both boundaries becomes a corner.
    pub fn add_to_boundary(&mut self, c: Coord, axis: Basis, sides: SideSet) {
        let entry = self.boundary.entry(c).or_insert(BoundaryMembership {
            typ: match axis {
                Basis::X => BoundaryType::BX,
                Basis::Z => BoundaryType::BZ,
            },
            sides: SideSet::empty(),
        });
        entry.typ = match (entry.typ, axis) {
            (BoundaryType::BX, Basis::Z) | (BoundaryType::BZ, Basis::X) => BoundaryType::BC,
            (t, _) => t,
        };
        entry.sides = entry.sides.union(sides);
    }

    pub fn reasons(&self) -> &BTreeMap<Coord, DisableReason> {
        &self.reasons
    }

    pub fn disabled_count(&self) -> usize {
        self.reasons.len()
    }

    pub fn disabled_data_count(&self) -> usize {
        self.data_disabled.iter().filter(|&&b| b).count()
    }

    pub fn all_data_disabled(&self) -> bool {
        self.data_disabled.iter().all(|&b| b)
    }

    /// Internally disabled data nodes, in coordinate order.
    pub fn internal_data(&self, lattice: &Lattice) -> Vec<Coord> {
        lattice
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.data_internal[*i])
            .map(|(_, &c)| c)
            .collect()
    }
}
