//! The bandage-like adaptation pipeline: boundary deformation with the
//! frontier cleaner, then a single pass of internal defect disabling.

use crate::coord::{Basis, Coord};
use crate::error::AdaptError;
use crate::lattice::{BoundaryType, DefectMap, Lattice, SideSet};
use crate::status::{DisableReason, NodeStatus};

/// Why a boundary data node failed its safety check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnsafeReason {
    /// Condition 1: the node itself is defective.
    SelfDefective,
    /// Condition 2: a frontier syndrome or coupler is defective.
    FrontierDefect,
    /// Condition 3: the frontier shape does not match the boundary type.
    FrontierShape,
}

/// Check the three safety conditions for an undisabled boundary data node.
/// The frontier is the node's undisabled syndrome neighbours together with
/// the couplers to them.
pub fn is_safe(
    node: Coord,
    lattice: &Lattice,
    defects: &DefectMap,
    status: &NodeStatus,
) -> Result<Result<(), UnsafeReason>, AdaptError> {
    let id = lattice.data_id(node).ok_or(AdaptError::NotOnBoundary(node))?;
    let membership = status
        .membership(node)
        .ok_or(AdaptError::NotOnBoundary(node))?;
    if status.is_data_disabled(id) {
        return Err(AdaptError::NotOnBoundary(node));
    }
    if defects.is_defective_qubit(node) {
        return Ok(Err(UnsafeReason::SelfDefective));
    }
    let mut x = 0usize;
    let mut z = 0usize;
    for &si in lattice.syndrome_neighbors(id) {
        if status.is_syndrome_disabled(si) {
            continue;
        }
        let s = lattice.syndromes()[si];
        if defects.is_defective_qubit(s) || defects.is_defective_coupler(node, s) {
            return Ok(Err(UnsafeReason::FrontierDefect));
        }
        match lattice.basis_of(si) {
            Basis::X => x += 1,
            Basis::Z => z += 1,
        }
    }
    let wanted = match membership.typ {
        BoundaryType::BX => (2, 1),
        BoundaryType::BZ => (1, 2),
        BoundaryType::BC => (1, 1),
    };
    if (x, z) == wanted {
        Ok(Ok(()))
    } else {
        Ok(Err(UnsafeReason::FrontierShape))
    }
}

/// Result of one frontier cleaning, mostly for reports and tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanOutcome {
    pub disabled_syndromes: Vec<Coord>,
    pub new_boundary_nodes: Vec<Coord>,
}

/// Clean the frontier of a data node that was just disabled during boundary
/// deformation. `typ`/`sides` are the node's boundary membership recorded
/// before it was disabled.
pub fn frontier_cleaner(
    lattice: &Lattice,
    defects: &DefectMap,
    status: &mut NodeStatus,
    n0: Coord,
    typ: BoundaryType,
    sides: SideSet,
) -> CleanOutcome {
    let id = lattice.data_id(n0).expect("cleaner target is a data node");
    let mut out = CleanOutcome::default();

    // Disable redundant syndrome nodes in the frontier.
    for &si in lattice.syndrome_neighbors(id) {
        if status.is_syndrome_disabled(si) {
            continue;
        }
        let s = lattice.syndromes()[si];
        let basis = lattice.basis_of(si);
        if defects.is_defective_qubit(s) {
            status.disable_syndrome(lattice, si, DisableReason::Defective);
        } else if status.syndrome_weight(lattice, si) == 0 {
            status.disable_syndrome(lattice, si, DisableReason::WeightZero);
        } else if (basis == Basis::X && typ == BoundaryType::BZ)
            || (basis == Basis::Z && typ == BoundaryType::BX)
        {
            status.disable_syndrome(lattice, si, DisableReason::FrontierCleaned);
        } else {
            continue;
        }
        out.disabled_syndromes.push(s);
    }

    let mut typ = typ;
    if typ == BoundaryType::BC {
        // A corner keeps at most one of its two remaining syndromes.
        let live: Vec<usize> = lattice
            .syndrome_neighbors(id)
            .iter()
            .copied()
            .filter(|&si| !status.is_syndrome_disabled(si))
            .collect();
        if live.len() == 2 {
            let w0 = status.syndrome_weight(lattice, live[0]);
            let w1 = status.syndrome_weight(lattice, live[1]);
            let victim = if w0 < w1 {
                live[0]
            } else if w1 < w0 {
                live[1]
            } else {
                // Tie: disable the Z syndrome, preferring to keep X.
                *live
                    .iter()
                    .find(|&&si| lattice.basis_of(si) == Basis::Z)
                    .unwrap_or(&live[0])
            };
            status.disable_syndrome(lattice, victim, DisableReason::FrontierCleaned);
            out.disabled_syndromes.push(lattice.syndromes()[victim]);
        }
    }

    // Disabled syndrome neighbours that still have undisabled data.
    let cleanup: Vec<usize> = lattice
        .syndrome_neighbors(id)
        .iter()
        .copied()
        .filter(|&si| {
            status.is_syndrome_disabled(si) && status.syndrome_weight(lattice, si) > 0
        })
        .collect();

    if typ == BoundaryType::BC {
        // Re-type the corner by counting, per basis, the data nodes with
        // three undisabled syndromes next to the disabled syndromes.
        let mut x = 0usize;
        let mut z = 0usize;
        for &si in &cleanup {
            let candidates = lattice
                .data_neighbors(si)
                .iter()
                .filter(|&&d| !status.is_data_disabled(d) && status.data_degree(lattice, d) == 3)
                .count();
            match lattice.basis_of(si) {
                Basis::X => x += candidates,
                Basis::Z => z += candidates,
            }
        }
        typ = if x < z {
            BoundaryType::BX
        } else if x > z {
            BoundaryType::BZ
        } else {
            // Tie: treat the corner as an X boundary.
            BoundaryType::BX
        };
    }

    // Syndromes of the wrong type for the (final) boundary push the
    // boundary inward: their undisabled data neighbours join it.
    let axis = match typ {
        BoundaryType::BX => Basis::X,
        BoundaryType::BZ => Basis::Z,
        BoundaryType::BC => unreachable!("corner was re-typed above"),
    };
    let new_sides = sides.for_basis(axis);
    for &si in &cleanup {
        let mismatched = lattice.basis_of(si) == axis.other();
        if !mismatched {
            continue;
        }
        for &di in lattice.data_neighbors(si) {
            if status.is_data_disabled(di) {
                continue;
            }
            let c = lattice.data()[di];
            status.add_to_boundary(c, axis, new_sides);
            out.new_boundary_nodes.push(c);
        }
    }
    out.new_boundary_nodes.sort();
    out.new_boundary_nodes.dedup();
    out
}

fn disable_unsafe(
    lattice: &Lattice,
    defects: &DefectMap,
    status: &mut NodeStatus,
    n0: Coord,
    why: UnsafeReason,
) {
    let id = lattice.data_id(n0).unwrap();
    let membership = status.membership(n0).unwrap();
    let reason = match why {
        UnsafeReason::SelfDefective => DisableReason::Defective,
        _ => DisableReason::FrontierCleaned,
    };
    status.disable_data(lattice, id, reason, false);
    frontier_cleaner(lattice, defects, status, n0, membership.typ, membership.sides);
}

/// Deform the boundary inward until every remaining boundary data node is
/// safe. Corners are visited first, then full passes in coordinate order.
pub fn boundary_deformation(
    lattice: &Lattice,
    defects: &DefectMap,
) -> Result<NodeStatus, AdaptError> {
    let mut status = NodeStatus::new(lattice);

    let corners: Vec<Coord> = status
        .boundary()
        .iter()
        .filter(|(_, m)| m.typ == BoundaryType::BC)
        .map(|(&c, _)| c)
        .collect();
    for c in corners {
        if status.membership(c).is_none() {
            continue;
        }
        if let Err(why) = is_safe(c, lattice, defects, &status)? {
            disable_unsafe(lattice, defects, &mut status, c, why);
        }
    }

    loop {
        let mut changed = false;
        let snapshot: Vec<Coord> = status.boundary().keys().copied().collect();
        for c in snapshot {
            if status.membership(c).is_none() {
                continue; // disabled earlier in this pass
            }
            if let Err(why) = is_safe(c, lattice, defects, &status)? {
                disable_unsafe(lattice, defects, &mut status, c, why);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if status.all_data_disabled() {
        return Err(AdaptError::AdaptationExhausted);
    }
    Ok(status)
}

/// One pass of internal defect disabling, in the fixed order: defective
/// syndromes (with their data neighbours), defective data, defective
/// couplers, then weight-0 syndromes. The boundary shape is untouched.
pub fn disable_internal_defects(lattice: &Lattice, defects: &DefectMap, status: &mut NodeStatus) {
    // Step 1: defective syndrome nodes and their neighbouring data nodes.
    for &q in &defects.qubits {
        let Some(si) = lattice.syndrome_id(q) else { continue };
        if status.is_syndrome_disabled(si) {
            continue;
        }
        status.disable_syndrome(lattice, si, DisableReason::Defective);
        for &di in lattice.data_neighbors(si) {
            if !status.is_data_disabled(di) {
                status.disable_data(
                    lattice,
                    di,
                    DisableReason::NeighborOfDefectSyndrome,
                    true,
                );
            }
        }
    }
    // Step 2: defective data nodes.
    for &q in &defects.qubits {
        let Some(di) = lattice.data_id(q) else { continue };
        if !status.is_data_disabled(di) {
            status.disable_data(lattice, di, DisableReason::Defective, true);
        }
    }
    // Step 3: defective couplers with both endpoints alive lose their data
    // endpoint.
    for e in &defects.couplers {
        let (Some(di), Some(si)) = (lattice.data_id(e.data), lattice.syndrome_id(e.syndrome))
        else {
            continue;
        };
        if !status.is_data_disabled(di) && !status.is_syndrome_disabled(si) {
            status.disable_data(lattice, di, DisableReason::CouplerDefect, true);
        }
    }
    // Step 4: weight-0 syndromes.
    disable_weight0(lattice, status);
}

pub(crate) fn disable_weight0(lattice: &Lattice, status: &mut NodeStatus) {
    for si in 0..lattice.syndromes().len() {
        if !status.is_syndrome_disabled(si) && status.syndrome_weight(lattice, si) == 0 {
            status.disable_syndrome(lattice, si, DisableReason::WeightZero);
        }
    }
}

/// The full bandage-like adaptation: boundary deformation followed by one
/// pass of internal defect disabling.
pub fn adapt_bandage(lattice: &Lattice, defects: &DefectMap) -> Result<NodeStatus, AdaptError> {
    let mut status = boundary_deformation(lattice, defects)?;
    disable_internal_defects(lattice, defects, &mut status);
    if status.all_data_disabled() {
        return Err(AdaptError::AdaptationExhausted);
    }
    Ok(status)
}
