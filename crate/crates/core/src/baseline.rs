//! The traditional super-stabilizer baseline: after the shared adaptation
//! pipeline, iteratively disable internal weight-1 and bridge syndrome
//! qubits (and their data neighbours) until none remain. This is the
//! modified baseline that leaves boundary-adjacent offenders alone, so the
//! boundary shape never changes here.

use crate::coord::Coord;
use crate::error::AdaptError;
use crate::lattice::{DefectMap, Lattice};
use crate::status::{DisableReason, NodeStatus};

/// A bridge syndrome: connected to exactly two undisabled data qubits lying
/// on the same diagonal line through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeClassification {
    pub syndrome: Coord,
    pub diagonal_pair: (Coord, Coord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Offender {
    pub syndrome_id: usize,
    pub victims: Vec<usize>,
}

/// Internal weight-1 and bridge syndromes, excluding any whose undisabled
/// data neighbours include a current boundary data node.
pub fn find_weight1_and_bridge(lattice: &Lattice, status: &NodeStatus) -> Vec<Coord> {
    scan_offenders(lattice, status)
        .into_iter()
        .map(|o| lattice.syndromes()[o.syndrome_id])
        .collect()
}

pub(crate) fn scan_offenders(lattice: &Lattice, status: &NodeStatus) -> Vec<Offender> {
    let mut found = Vec::new();
    for si in 0..lattice.syndromes().len() {
        if status.is_syndrome_disabled(si) {
            continue;
        }
        let live: Vec<usize> = lattice
            .data_neighbors(si)
            .iter()
            .copied()
            .filter(|&d| !status.is_data_disabled(d))
            .collect();
        let near_boundary = live
            .iter()
            .any(|&d| status.membership(lattice.data()[d]).is_some());
        if near_boundary {
            continue;
        }
        match live.len() {
            1 => found.push(Offender {
                syndrome_id: si,
                victims: live,
            }),
            2 => {
                let a = lattice.data()[live[0]];
                let b = lattice.data()[live[1]];
                // Same diagonal through the syndrome, either orientation.
                if a.x != b.x && a.y != b.y {
                    found.push(Offender {
                        syndrome_id: si,
                        victims: live,
                    });
                }
            }
            _ => {}
        }
    }
    found
}

/// Bridge classifications among the current offenders, for reports.
pub fn classify_bridges(lattice: &Lattice, status: &NodeStatus) -> Vec<BridgeClassification> {
    scan_offenders(lattice, status)
        .into_iter()
        .filter(|o| o.victims.len() == 2)
        .map(|o| BridgeClassification {
            syndrome: lattice.syndromes()[o.syndrome_id],
            diagonal_pair: (lattice.data()[o.victims[0]], lattice.data()[o.victims[1]]),
        })
        .collect()
}

/// Traditional adaptation: the bandage pipeline plus the iterative
/// weight-1/bridge disabling rounds.
pub fn adapt_traditional(lattice: &Lattice, defects: &DefectMap) -> Result<NodeStatus, AdaptError> {
    let mut status = crate::adapter::adapt_bandage(lattice, defects)?;
    loop {
        let found = scan_offenders(lattice, &status);
        if found.is_empty() {
            break;
        }
        for o in &found {
            status.disable_syndrome(lattice, o.syndrome_id, DisableReason::BaselineRule);
            for &d in &o.victims {
                if !status.is_data_disabled(d) {
                    status.disable_data(lattice, d, DisableReason::BaselineRule, true);
                }
            }
        }
        crate::adapter::disable_weight0(lattice, &mut status);
        if status.all_data_disabled() {
            return Err(AdaptError::AdaptationExhausted);
        }
    }
    Ok(status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::adapt_bandage;

    fn defect_qubits(coords: &[(i32, i32)]) -> DefectMap {
        let mut map = DefectMap {
            qubits: coords.iter().map(|&(x, y)| Coord::new(x, y)).collect(),
            ..DefectMap::default()
        };
        map.normalize();
        map
    }

    #[test]
    fn defect_free_has_no_offenders() {
        let lattice = Lattice::build(7).unwrap();
        let status = adapt_bandage(&lattice, &DefectMap::default()).unwrap();
        assert!(find_weight1_and_bridge(&lattice, &status).is_empty());
    }

    #[test]
    fn two_diagonal_defects_make_one_bridge() {
        let lattice = Lattice::build(7).unwrap();
        let defects = defect_qubits(&[(3, 3), (5, 5)]);
        let status = adapt_bandage(&lattice, &defects).unwrap();
        let bridges = classify_bridges(&lattice, &status);
        assert_eq!(bridges.len(), 1);
        assert_eq!(bridges[0].syndrome, Coord::new(4, 4));
        assert_eq!(
            bridges[0].diagonal_pair,
            (Coord::new(3, 5), Coord::new(5, 3))
        );
    }

    #[test]
    fn weight1_syndrome_is_found() {
        // Three data defects around (6,6) leave it weight-1.
        let lattice = Lattice::build(7).unwrap();
        let defects = defect_qubits(&[(5, 5), (7, 5), (5, 7)]);
        let status = adapt_bandage(&lattice, &defects).unwrap();
        let found = find_weight1_and_bridge(&lattice, &status);
        assert_eq!(found, vec![Coord::new(6, 6)]);
    }

    #[test]
    fn single_isolated_defect_matches_bandage() {
        let lattice = Lattice::build(7).unwrap();
        let defects = defect_qubits(&[(7, 7)]);
        let bandage = adapt_bandage(&lattice, &defects).unwrap();
        let traditional = adapt_traditional(&lattice, &defects).unwrap();
        assert_eq!(bandage.reasons(), traditional.reasons());
    }

    /// The avalanche: three diagonal data defects cost the traditional
    /// method 13 qubits in three iterations, against 3 for bandage.
    #[test]
    fn avalanche_disables_13_vs_3() {
        let lattice = Lattice::build(7).unwrap();
        let defects = defect_qubits(&[(5, 5), (7, 7), (9, 9)]);
        let bandage = adapt_bandage(&lattice, &defects).unwrap();
        assert_eq!(bandage.disabled_count(), 3);
        let traditional = adapt_traditional(&lattice, &defects).unwrap();
        assert_eq!(traditional.disabled_count(), 13);
    }

    #[test]
    fn traditional_is_superset_of_bandage() {
        let lattice = Lattice::build(9).unwrap();
        for seed in 0..20 {
            let defects = crate::lattice::inject_defects(&lattice, 0.03, 0.03, seed).unwrap();
            let (Ok(b), Ok(t)) = (
                adapt_bandage(&lattice, &defects),
                adapt_traditional(&lattice, &defects),
            ) else {
                continue;
            };
            for c in b.reasons().keys() {
                assert!(t.reasons().contains_key(c), "{c} missing from traditional");
            }
        }
    }

    #[test]
    fn no_offenders_remain_after_traditional() {
        let lattice = Lattice::build(11).unwrap();
        for seed in 0..20 {
            let defects = crate::lattice::inject_defects(&lattice, 0.02, 0.02, seed).unwrap();
            let Ok(status) = adapt_traditional(&lattice, &defects) else {
                continue;
            };
            assert!(find_weight1_and_bridge(&lattice, &status).is_empty());
        }
    }
}
