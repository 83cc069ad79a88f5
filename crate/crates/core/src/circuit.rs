//! Lowering a schedule to a noisy stabilizer-measurement circuit in the
//! Stim-compatible text format.
//!
//! Every check is extracted with a reset ancilla, a Hadamard sandwich and up
//! to four CZ layers. Data partners of X checks are H-conjugated around
//! their CZ layer; adjacent conjugations cancel, so each cycle keeps at most
//! four two-qubit layers plus thin single-qubit layers. All checks follow
//! the same geometric data order (NE, NW, SE, SW as seen from the ancilla),
//! which keeps partially applied neighbouring checks commuting.
//!
//! Noise follows the SI1000 model with a single rate p: CZ gets two-qubit
//! depolarizing p, one-qubit Cliffords p/10, reset a 2p bitflip, measurement
//! a 5p bitflip, idling p/10 per layer, and qubits idling through the
//! measure/reset window 2p.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::coord::{Basis, Coord};
use crate::error::CircuitError;
use crate::lattice::Lattice;
use crate::logical::find_bare_logical;
use crate::patch::{StabId, StabilizerSet};
use crate::schedule::{PreparedState, Schedule, ShellStrategy};
use crate::status::NodeStatus;

/// SI1000 noise scale. p = 0 emits a noiseless circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    pub p: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Option<NoiseParams> {
        (0.0..0.5).contains(&p).then_some(NoiseParams { p })
    }
    pub fn noiseless() -> NoiseParams {
        NoiseParams { p: 0.0 }
    }
}

/// An emitted circuit plus bookkeeping used by tests and reports.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub text: String,
    pub num_qubits: usize,
    pub num_measurements: usize,
    pub num_detectors: usize,
    pub cycles: usize,
    pub observable_support: Vec<Coord>,
}

/// Remove noise instructions, leaving the structural circuit.
pub fn strip_noise(text: &str) -> String {
    text.lines()
        .filter(|line| {
            let op = line.trim().split(['(', ' ']).next().unwrap_or("");
            !matches!(op, "X_ERROR" | "DEPOLARIZE1" | "DEPOLARIZE2")
        })
        .map(|l| format!("{l}\n"))
        .collect()
}

struct Emitter<'a> {
    lattice: &'a Lattice,
    status: &'a NodeStatus,
    stabs: &'a StabilizerSet,
    schedule: &'a Schedule,
    p: f64,
    text: String,
    qubit_id: HashMap<Coord, u32>,
    live: Vec<Coord>,
    meas_count: usize,
    det_count: usize,
    /// (syndrome coord, cycle) -> absolute measurement index.
    check_rec: HashMap<(Coord, usize), usize>,
    /// data coord -> absolute measurement index of the final readout.
    data_rec: HashMap<Coord, usize>,
}

impl<'a> Emitter<'a> {
    fn id(&self, c: Coord) -> u32 {
        self.qubit_id[&c]
    }

    fn ids(&self, coords: &[Coord]) -> Vec<u32> {
        let mut v: Vec<u32> = coords.iter().map(|&c| self.id(c)).collect();
        v.sort_unstable();
        v
    }

    fn line(&mut self, op: &str, arg: Option<f64>, targets: &[u32]) {
        if targets.is_empty() {
            return;
        }
        match arg {
            Some(a) => {
                let _ = write!(self.text, "{op}({a})");
            }
            None => {
                let _ = write!(self.text, "{op}");
            }
        }
        for t in targets {
            let _ = write!(self.text, " {t}");
        }
        self.text.push('\n');
    }

    fn tick(&mut self) {
        self.text.push_str("TICK\n");
    }

    /// p/10 idle noise on live qubits outside `busy` (sorted ids).
    fn idle(&mut self, busy: &[u32], rate: f64) {
        if self.p == 0.0 {
            return;
        }
        let idle: Vec<u32> = (0..self.live.len() as u32)
            .filter(|id| busy.binary_search(id).is_err())
            .collect();
        self.line("DEPOLARIZE1", Some(rate), &idle);
    }

    fn measure(&mut self, coords: &[Coord]) -> Vec<(Coord, usize)> {
        let mut order: Vec<Coord> = coords.to_vec();
        order.sort_by_key(|&c| self.id(c));
        let ids: Vec<u32> = order.iter().map(|&c| self.id(c)).collect();
        if self.p > 0.0 {
            self.line("X_ERROR", Some(5.0 * self.p), &ids);
        }
        self.line("M", None, &ids);
        order
            .into_iter()
            .map(|c| {
                let idx = self.meas_count;
                self.meas_count += 1;
                (c, idx)
            })
            .collect()
    }

    fn detector(&mut self, coord: Coord, t: usize, abs_recs: &[usize]) {
        let _ = write!(self.text, "DETECTOR({}, {}, {t})", coord.x, coord.y);
        for &abs in abs_recs {
            let back = self.meas_count - abs;
            let _ = write!(self.text, " rec[-{back}]");
        }
        self.text.push('\n');
        self.det_count += 1;
    }

    fn members(&self, id: StabId) -> &'a [Coord] {
        &self.stabs.get(id).members
    }

    fn gauge_support(&self, member: Coord) -> Vec<Coord> {
        let si = self.lattice.syndrome_id(member).unwrap();
        self.lattice
            .data_neighbors(si)
            .iter()
            .copied()
            .filter(|&d| !self.status.is_data_disabled(d))
            .map(|d| self.lattice.data()[d])
            .collect()
    }
}

/// Gauge-level commutation needed for a legal schedule: any two opposite
/// basis checks measured on independent timetables must overlap evenly.
/// Only gauges within one group may anticommute, since the group alternates
/// their bases. Returns the offending pair otherwise.
fn check_gauge_commutation(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
) -> Result<(), CircuitError> {
    // Map every live syndrome to (its stabilizer, its group).
    let mut info: HashMap<Coord, (StabId, Option<usize>)> = HashMap::new();
    for id in stabs.all_ids() {
        let group = stabs.group_of(id);
        for &m in &stabs.get(id).members {
            info.insert(m, (id, group));
        }
    }
    // Accumulate shared-support counts for opposite-basis syndrome pairs.
    let mut shared: HashMap<(Coord, Coord), usize> = HashMap::new();
    for (di, _) in lattice.data().iter().enumerate() {
        if status.is_data_disabled(di) {
            continue;
        }
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for &si in lattice.syndrome_neighbors(di) {
            if status.is_syndrome_disabled(si) {
                continue;
            }
            match lattice.basis_of(si) {
                Basis::X => xs.push(lattice.syndromes()[si]),
                Basis::Z => zs.push(lattice.syndromes()[si]),
            }
        }
        for &x in &xs {
            for &z in &zs {
                *shared.entry((x, z)).or_insert(0) += 1;
            }
        }
    }
    let mut pairs: Vec<((Coord, Coord), usize)> = shared.into_iter().collect();
    pairs.sort();
    for &((x, z), n) in &pairs {
        if n % 2 == 0 {
            continue;
        }
        let (_, x_group) = info[&x];
        let (_, z_group) = info[&z];
        let same_group = x_group.is_some() && x_group == z_group;
        if !same_group {
            return Err(CircuitError::GaugeObstruction {
                basis: Basis::X,
                gauge: x,
                other_basis: Basis::Z,
                stab: z,
            });
        }
    }
    // Within a group, gauges may anticommute pairwise (the alternating
    // blocks absorb that), but each stabilizer product must still commute
    // with every opposite gauge or its cross-block detectors break.
    for group in &stabs.groups {
        for &sid in &group.member_ids {
            let stab = stabs.get(sid);
            for &oid in &group.member_ids {
                if oid.basis == sid.basis {
                    continue;
                }
                for &gauge in &stabs.get(oid).members {
                    let gi = lattice.syndrome_id(gauge).unwrap();
                    let shared = lattice
                        .data_neighbors(gi)
                        .iter()
                        .filter(|&&d| {
                            !status.is_data_disabled(d)
                                && stab
                                    .support_mod2
                                    .binary_search(&lattice.data()[d])
                                    .is_ok()
                        })
                        .count();
                    if shared % 2 == 1 {
                        return Err(CircuitError::GaugeObstruction {
                            basis: oid.basis,
                            gauge,
                            other_basis: sid.basis,
                            stab: stab.key(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

const CZ_DIRECTIONS: [(i32, i32); 4] = [(1, -1), (-1, -1), (1, 1), (-1, 1)];

/// Lower a schedule to circuit text with SI1000 noise at rate `noise.p` and
/// the prepared-basis logical operator as observable 0.
pub fn emit_circuit(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    schedule: &Schedule,
    noise: NoiseParams,
) -> Result<Circuit, CircuitError> {
    check_gauge_commutation(lattice, status, stabs)?;
    let prep_basis = schedule.prepared.basis();
    let observable = find_bare_logical(lattice, status, stabs, prep_basis)
        .ok_or(CircuitError::ObservableBlocked)?;

    // Live qubits in coordinate order get contiguous ids.
    let mut live: Vec<Coord> = Vec::new();
    for (di, &c) in lattice.data().iter().enumerate() {
        if !status.is_data_disabled(di) {
            live.push(c);
        }
    }
    for (si, &c) in lattice.syndromes().iter().enumerate() {
        if !status.is_syndrome_disabled(si) {
            live.push(c);
        }
    }
    live.sort();
    let qubit_id: HashMap<Coord, u32> = live
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i as u32))
        .collect();
    let live_data: Vec<Coord> = live
        .iter()
        .copied()
        .filter(|c| c.is_data_parity())
        .collect();

    let mut em = Emitter {
        lattice,
        status,
        stabs,
        schedule,
        p: noise.p,
        text: String::new(),
        qubit_id,
        live: live.clone(),
        meas_count: 0,
        det_count: 0,
        check_rec: HashMap::new(),
        data_rec: HashMap::new(),
    };
    for &c in &live {
        let _ = writeln!(em.text, "QUBIT_COORDS({}, {}) {}", c.x, c.y, em.id(c));
    }

    // Initial reset of every qubit.
    let all_ids: Vec<u32> = (0..live.len() as u32).collect();
    em.line("R", None, &all_ids);
    if em.p > 0.0 {
        em.line("X_ERROR", Some(2.0 * em.p), &all_ids);
    }
    em.tick();

    for t in 0..schedule.cycles {
        // Checks measured this cycle.
        let mut active: Vec<(Coord, Basis)> = Vec::new();
        for &id in &schedule.regular {
            active.push((em.members(id)[0], id.basis));
        }
        for plan in &schedule.groups {
            let basis = plan.basis_at(t);
            let side = match basis {
                Basis::X => &plan.gauges_x,
                Basis::Z => &plan.gauges_z,
            };
            for &sid in side {
                for &m in em.members(sid) {
                    active.push((m, basis));
                }
            }
        }

        // CZ layers and Hadamard toggle slots.
        let mut cz_layers: [Vec<(u32, u32)>; 4] = Default::default();
        let mut h_toggle: [HashMap<u32, u32>; 5] = Default::default();
        let mut toggle = |slot: usize, id: u32, map: &mut [HashMap<u32, u32>; 5]| {
            *map[slot].entry(id).or_insert(0) += 1;
        };
        for &(anc, basis) in &active {
            let aid = em.id(anc);
            toggle(0, aid, &mut h_toggle);
            toggle(4, aid, &mut h_toggle);
            let si = lattice.syndrome_id(anc).unwrap();
            for &di in lattice.data_neighbors(si) {
                if status.is_data_disabled(di) {
                    continue;
                }
                let d = lattice.data()[di];
                let delta = (d.x - anc.x, d.y - anc.y);
                let layer = CZ_DIRECTIONS.iter().position(|&v| v == delta).unwrap();
                cz_layers[layer].push((aid, em.id(d)));
                if basis == Basis::X {
                    toggle(layer, em.id(d), &mut h_toggle);
                    toggle(layer + 1, em.id(d), &mut h_toggle);
                }
            }
        }
        if t == 0 && schedule.prepared == PreparedState::Plus {
            for &c in &live_data {
                toggle(0, em.id(c), &mut h_toggle);
            }
        }

        for slot in 0..5 {
            let mut hs: Vec<u32> = h_toggle[slot]
                .iter()
                .filter(|(_, &n)| n % 2 == 1)
                .map(|(&id, _)| id)
                .collect();
            hs.sort_unstable();
            if !hs.is_empty() {
                em.line("H", None, &hs);
                if em.p > 0.0 {
                    em.line("DEPOLARIZE1", Some(em.p / 10.0), &hs);
                }
                em.idle(&hs, em.p / 10.0);
                em.tick();
            }
            if slot < 4 && !cz_layers[slot].is_empty() {
                let mut pairs = cz_layers[slot].clone();
                pairs.sort_unstable();
                let mut targets = Vec::with_capacity(pairs.len() * 2);
                let mut busy = Vec::with_capacity(pairs.len() * 2);
                for &(a, d) in &pairs {
                    targets.push(a);
                    targets.push(d);
                    busy.push(a);
                    busy.push(d);
                }
                busy.sort_unstable();
                em.line("CZ", None, &targets);
                if em.p > 0.0 {
                    em.line("DEPOLARIZE2", Some(em.p), &targets);
                }
                em.idle(&busy, em.p / 10.0);
                em.tick();
            }
        }

        // Measure and reset the active ancillas.
        let ancillas: Vec<Coord> = active.iter().map(|&(c, _)| c).collect();
        let recs = em.measure(&ancillas);
        for (c, idx) in recs {
            em.check_rec.insert((c, t), idx);
        }
        let anc_ids = em.ids(&ancillas);
        if t + 1 < schedule.cycles {
            em.line("R", None, &anc_ids);
            if em.p > 0.0 {
                em.line("X_ERROR", Some(2.0 * em.p), &anc_ids);
            }
        }
        em.idle(&anc_ids, 2.0 * em.p);
        em.tick();

        emit_cycle_detectors(&mut em, t);
    }

    // Final data readout in the memory basis.
    if schedule.prepared == PreparedState::Plus {
        let ids = em.ids(&live_data);
        em.line("H", None, &ids);
        if em.p > 0.0 {
            em.line("DEPOLARIZE1", Some(em.p / 10.0), &ids);
        }
        em.idle(&ids, em.p / 10.0);
        em.tick();
    }
    let recs = em.measure(&live_data);
    for (c, idx) in recs {
        em.data_rec.insert(c, idx);
    }
    emit_final_detectors(&mut em);

    let mut obs_targets: Vec<usize> = observable
        .data_support
        .iter()
        .map(|c| em.data_rec[c])
        .collect();
    obs_targets.sort_unstable();
    let _ = write!(em.text, "OBSERVABLE_INCLUDE(0)");
    for abs in obs_targets {
        let back = em.meas_count - abs;
        let _ = write!(em.text, " rec[-{back}]");
    }
    em.text.push('\n');

    Ok(Circuit {
        text: em.text,
        num_qubits: live.len(),
        num_measurements: em.meas_count,
        num_detectors: em.det_count,
        cycles: schedule.cycles,
        observable_support: observable.data_support,
    })
}

fn emit_cycle_detectors(em: &mut Emitter, t: usize) {
    let schedule = em.schedule;
    let prep = schedule.prepared.basis();
    // Regular stabilizers compare with the previous cycle; the first cycle
    // anchors the preparation basis.
    for &id in &schedule.regular {
        let m = em.members(id)[0];
        let now = em.check_rec[&(m, t)];
        if t == 0 {
            if id.basis == prep {
                em.detector(m, t, &[now]);
            }
        } else {
            let before = em.check_rec[&(m, t - 1)];
            em.detector(m, t, &[now, before]);
        }
    }
    for plan in &schedule.groups {
        let basis = plan.basis_at(t);
        let side = match basis {
            Basis::X => &plan.gauges_x,
            Basis::Z => &plan.gauges_z,
        };
        if t % plan.shell != 0 {
            // Inside a block: per-gauge comparison with the previous cycle.
            for &sid in side {
                for &m in em.members(sid) {
                    let now = em.check_rec[&(m, t)];
                    let before = em.check_rec[&(m, t - 1)];
                    em.detector(m, t, &[now, before]);
                }
            }
            continue;
        }
        // First cycle of a block.
        let block = plan.block_at(t);
        if block < 2 {
            // First block of this basis.
            if basis == prep {
                for &sid in side {
                    let members = em.members(sid).to_vec();
                    let recs: Vec<usize> =
                        members.iter().map(|&m| em.check_rec[&(m, t)]).collect();
                    em.detector(members[0], t, &recs);
                }
            }
            continue;
        }
        // Product of this block's first outcomes against the previous
        // same-basis block's last outcomes.
        let t_prev = (block - 1) * plan.shell - 1;
        for &sid in side {
            let members = em.members(sid).to_vec();
            let mut recs: Vec<usize> = members.iter().map(|&m| em.check_rec[&(m, t)]).collect();
            recs.extend(members.iter().map(|&m| em.check_rec[&(m, t_prev)]));
            em.detector(members[0], t, &recs);
        }
    }
}

fn emit_final_detectors(em: &mut Emitter) {
    let schedule = em.schedule;
    let prep = schedule.prepared.basis();
    let last = schedule.cycles - 1;
    for &id in &schedule.regular {
        if id.basis != prep {
            continue;
        }
        let stab = em.stabs.get(id);
        let m = stab.members[0];
        let mut recs: Vec<usize> = stab
            .support_mod2
            .iter()
            .map(|q| em.data_rec[q])
            .collect();
        recs.push(em.check_rec[&(m, last)]);
        em.detector(m, schedule.cycles, &recs);
    }
    for plan in &schedule.groups {
        let side = match prep {
            Basis::X => &plan.gauges_x,
            Basis::Z => &plan.gauges_z,
        };
        let t_last_prep = (0..schedule.cycles)
            .rev()
            .find(|&t| plan.basis_at(t) == prep);
        match t_last_prep {
            None => {
                // This basis never ran: the data readout alone reproduces
                // the prepared eigenvalue of each stabilizer product.
                for &sid in side {
                    let stab = em.stabs.get(sid);
                    let key = stab.members[0];
                    let recs: Vec<usize> = stab
                        .support_mod2
                        .iter()
                        .map(|q| em.data_rec[q])
                        .collect();
                    em.detector(key, schedule.cycles, &recs);
                }
            }
            Some(t_prep) if t_prep == last => {
                // Final block matches the readout basis: close each gauge.
                for &sid in side {
                    for m in em.members(sid).to_vec() {
                        let mut recs: Vec<usize> = em
                            .gauge_support(m)
                            .iter()
                            .map(|q| em.data_rec[q])
                            .collect();
                        recs.push(em.check_rec[&(m, last)]);
                        em.detector(m, schedule.cycles, &recs);
                    }
                }
            }
            Some(t_prep) => {
                // An opposite block intervened: compare stabilizer products.
                for &sid in side {
                    let stab = em.stabs.get(sid);
                    let key = stab.members[0];
                    let members = stab.members.clone();
                    let mut recs: Vec<usize> = stab
                        .support_mod2
                        .iter()
                        .map(|q| em.data_rec[q])
                        .collect();
                    recs.extend(members.iter().map(|&m| em.check_rec[&(m, t_prep)]));
                    em.detector(key, schedule.cycles, &recs);
                }
            }
        }
    }
}

/// One entry of a sweep manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub device_sha: String,
    pub method: String,
    pub strategy: String,
    pub p: f64,
    pub state: String,
    pub cycles: usize,
    pub detectors: usize,
}

/// Emit a grid of circuits, one file per (strategy, p, state), and return
/// the manifest entries in emission order.
#[allow(clippy::too_many_arguments)]
pub fn sweep_circuits(
    lattice: &Lattice,
    status: &NodeStatus,
    stabs: &StabilizerSet,
    method: &str,
    device_sha: &str,
    strategies: &[ShellStrategy],
    ps: &[f64],
    out_dir: &Path,
) -> Result<Vec<ManifestEntry>, CircuitError> {
    let cycles = lattice.size() as usize;
    let mut manifest = Vec::new();
    std::fs::create_dir_all(out_dir)?;
    for &strategy in strategies {
        for &p in ps {
            for state in [PreparedState::Zero, PreparedState::Plus] {
                let schedule = crate::schedule::build_schedule(
                    stabs,
                    strategy,
                    state,
                    cycles,
                    lattice.size(),
                )?;
                let noise = NoiseParams::new(p).ok_or(CircuitError::BadNoise(p))?;
                let circuit = emit_circuit(lattice, status, stabs, &schedule, noise)?;
                let file = format!(
                    "{method}_{}_{}_p{}.stim",
                    strategy.label(),
                    state.label(),
                    p
                );
                std::fs::write(out_dir.join(&file), &circuit.text)?;
                manifest.push(ManifestEntry {
                    file,
                    device_sha: device_sha.to_string(),
                    method: method.to_string(),
                    strategy: strategy.label(),
                    p,
                    state: state.label().to_string(),
                    cycles,
                    detectors: circuit.num_detectors,
                });
            }
        }
    }
    Ok(manifest)
}
