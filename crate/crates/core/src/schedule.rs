//! Shelled measurement schedules for stabilizer groups.
//!
//! Regular stabilizers are measured every cycle. Within a group the X and Z
//! gauges alternate in blocks of the group's shell size; same-type gauges of
//! a group are always measured together, and the first block's basis is
//! opposite to the prepared state.

use serde::{Deserialize, Serialize};

use crate::coord::Basis;
use crate::error::CircuitError;
use crate::patch::{StabId, StabilizerSet};

/// How per-group shell sizes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShellStrategy {
    /// Every group uses the same shell size.
    Global { n_shell: usize },
    /// Per group: floor(r * average super-stabilizer weight), clamped to 1.
    LocalAvg { r: f64 },
    /// Per group: floor(r * maximum super-stabilizer weight), clamped to 1.
    LocalMax { r: f64 },
}

impl ShellStrategy {
    pub fn label(&self) -> String {
        match self {
            ShellStrategy::Global { n_shell } => format!("global{n_shell}"),
            ShellStrategy::LocalAvg { r } => format!("localavg{r}"),
            ShellStrategy::LocalMax { r } => format!("localmax{r}"),
        }
    }
}

/// The memory-experiment initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreparedState {
    /// |0..0>, protected by the Z logical.
    Zero,
    /// |+..+>, protected by the X logical.
    Plus,
}

impl PreparedState {
    /// Basis of the memory (preparation and final readout).
    pub fn basis(self) -> Basis {
        match self {
            PreparedState::Zero => Basis::Z,
            PreparedState::Plus => Basis::X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PreparedState::Zero => "zero",
            PreparedState::Plus => "plus",
        }
    }
}

/// Per-group measurement plan.
#[derive(Debug, Clone, Serialize)]
pub struct GroupPlan {
    pub group_id: usize,
    pub shell: usize,
    /// Basis measured in the first block: opposite to the prepared state.
    pub first: Basis,
    pub gauges_x: Vec<StabId>,
    pub gauges_z: Vec<StabId>,
}

impl GroupPlan {
    /// Which basis this group measures at cycle `t`.
    pub fn basis_at(&self, t: usize) -> Basis {
        if (t / self.shell) % 2 == 0 {
            self.first
        } else {
            self.first.other()
        }
    }

    /// Block index at cycle `t` (blocks count per basis switch).
    pub fn block_at(&self, t: usize) -> usize {
        t / self.shell
    }
}

/// A full measurement schedule.
#[derive(Debug, Clone, Serialize)]
pub struct Schedule {
    pub cycles: usize,
    pub prepared: PreparedState,
    /// Stabilizers outside any defect region, measured every cycle.
    pub regular: Vec<StabId>,
    pub groups: Vec<GroupPlan>,
}

/// Shell size for every group under a strategy. Sizes clamp to at least 1;
/// a group with no super-stabilizers also gets 1.
pub fn shell_sizes(
    stabs: &StabilizerSet,
    strategy: ShellStrategy,
    size_l: u32,
) -> Result<Vec<usize>, CircuitError> {
    if let ShellStrategy::Global { n_shell } = strategy {
        let max = (size_l as usize - 1) / 2;
        if n_shell < 1 || n_shell > max.max(1) {
            return Err(CircuitError::BadShell(n_shell, max));
        }
    }
    Ok(stabs
        .groups
        .iter()
        .map(|g| {
            let s = match strategy {
                ShellStrategy::Global { n_shell } => n_shell,
                ShellStrategy::LocalAvg { r } => (r * g.w_avg.unwrap_or(0.0)).floor() as usize,
                ShellStrategy::LocalMax { r } => {
                    (r * g.w_max.unwrap_or(0) as f64).floor() as usize
                }
            };
            s.max(1)
        })
        .collect())
}

/// Build the per-cycle plan.
pub fn build_schedule(
    stabs: &StabilizerSet,
    strategy: ShellStrategy,
    prepared: PreparedState,
    cycles: usize,
    size_l: u32,
) -> Result<Schedule, CircuitError> {
    if cycles < 1 {
        return Err(CircuitError::BadCycles);
    }
    let shells = shell_sizes(stabs, strategy, size_l)?;
    let grouped: std::collections::BTreeSet<StabId> = stabs
        .groups
        .iter()
        .flat_map(|g| g.member_ids.iter().copied())
        .collect();
    let regular: Vec<StabId> = stabs.all_ids().filter(|id| !grouped.contains(id)).collect();
    let first = prepared.basis().other();
    let groups = stabs
        .groups
        .iter()
        .zip(shells)
        .map(|(g, shell)| GroupPlan {
            group_id: g.id,
            shell,
            first,
            gauges_x: g
                .member_ids
                .iter()
                .copied()
                .filter(|id| id.basis == Basis::X)
                .collect(),
            gauges_z: g
                .member_ids
                .iter()
                .copied()
                .filter(|id| id.basis == Basis::Z)
                .collect(),
        })
        .collect();
    Ok(Schedule {
        cycles,
        prepared,
        regular,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::adapt_bandage;
    use crate::coord::Coord;
    use crate::lattice::{DefectMap, Lattice};

    fn stab_set(l: i64, coords: &[(i32, i32)]) -> (Lattice, StabilizerSet) {
        let lattice = Lattice::build(l).unwrap();
        let mut map = DefectMap {
            qubits: coords.iter().map(|&(x, y)| Coord::new(x, y)).collect(),
            ..DefectMap::default()
        };
        map.normalize();
        let status = adapt_bandage(&lattice, &map).unwrap();
        let stabs = StabilizerSet::build(&lattice, &status);
        (lattice, stabs)
    }

    #[test]
    fn global_shell_applies_everywhere() {
        let (_, stabs) = stab_set(11, &[(3, 3), (9, 9), (17, 5)]);
        let sizes = shell_sizes(&stabs, ShellStrategy::Global { n_shell: 3 }, 11).unwrap();
        assert!(!sizes.is_empty());
        assert!(sizes.iter().all(|&s| s == 3));
    }

    #[test]
    fn global_shell_range_enforced() {
        let (_, stabs) = stab_set(7, &[(7, 7)]);
        assert!(shell_sizes(&stabs, ShellStrategy::Global { n_shell: 0 }, 7).is_err());
        assert!(shell_sizes(&stabs, ShellStrategy::Global { n_shell: 4 }, 7).is_err());
        assert!(shell_sizes(&stabs, ShellStrategy::Global { n_shell: 3 }, 7).is_ok());
    }

    #[test]
    fn localavg_floor_formula() {
        // One isolated defect: the group's X and Z supers both weigh 6, so
        // r=0.5 gives floor(0.5*6) = 3.
        let (_, stabs) = stab_set(7, &[(7, 7)]);
        let sizes = shell_sizes(&stabs, ShellStrategy::LocalAvg { r: 0.5 }, 7).unwrap();
        assert_eq!(sizes, vec![3]);
        // Clamping: tiny r still yields 1.
        let sizes = shell_sizes(&stabs, ShellStrategy::LocalAvg { r: 0.01 }, 7).unwrap();
        assert_eq!(sizes, vec![1]);
    }

    #[test]
    fn localmax_uses_group_maximum() {
        // ABC diagonal: supers weigh 6,6,6 and 10; max 10, avg 7.
        let (_, stabs) = stab_set(7, &[(3, 3), (5, 5), (7, 7)]);
        let avg = shell_sizes(&stabs, ShellStrategy::LocalAvg { r: 0.5 }, 7).unwrap();
        assert_eq!(avg, vec![3]); // floor(3.5)
        let max = shell_sizes(&stabs, ShellStrategy::LocalMax { r: 0.5 }, 7).unwrap();
        assert_eq!(max, vec![5]);
    }

    #[test]
    fn block_pattern_unrolls() {
        // One group, shell 2, |0>: X,X,Z,Z,X,X over six cycles.
        let (_, stabs) = stab_set(7, &[(7, 7)]);
        let schedule = build_schedule(
            &stabs,
            ShellStrategy::Global { n_shell: 2 },
            PreparedState::Zero,
            6,
            7,
        )
        .unwrap();
        let g = &schedule.groups[0];
        let pattern: Vec<Basis> = (0..6).map(|t| g.basis_at(t)).collect();
        assert_eq!(
            pattern,
            vec![Basis::X, Basis::X, Basis::Z, Basis::Z, Basis::X, Basis::X]
        );
    }

    #[test]
    fn no_defects_means_no_groups() {
        let (_, stabs) = stab_set(5, &[]);
        let schedule = build_schedule(
            &stabs,
            ShellStrategy::Global { n_shell: 1 },
            PreparedState::Zero,
            5,
            5,
        )
        .unwrap();
        assert!(schedule.groups.is_empty());
        assert_eq!(schedule.regular.len(), 24);
    }

    #[test]
    fn zero_cycles_rejected() {
        let (_, stabs) = stab_set(5, &[]);
        assert!(build_schedule(
            &stabs,
            ShellStrategy::Global { n_shell: 1 },
            PreparedState::Zero,
            0,
            5
        )
        .is_err());
    }
}
