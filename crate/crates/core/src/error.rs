//! Error types shared across the crate.

use thiserror::Error;

use crate::coord::Coord;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("code size must be a positive odd integer, got {0}")]
    BadSize(i64),
    #[error("rate {0} is outside [0, 1]")]
    BadRate(f64),
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("device file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Lattice(#[from] LatticeError),
    #[error("defective qubit {0} is not a qubit of the size-{1} lattice")]
    UnknownQubit(Coord, u32),
    #[error("defective coupler {0}-{1} is not a coupler of the size-{2} lattice")]
    UnknownCoupler(Coord, Coord, u32),
    #[error("duplicate defect entry {0}")]
    DuplicateQubit(Coord),
    #[error("duplicate coupler entry {0}-{1}")]
    DuplicateCoupler(Coord, Coord),
}

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("adaptation disabled every data qubit; the lattice is unusable")]
    AdaptationExhausted,
    #[error("{0} is not an undisabled boundary data node")]
    NotOnBoundary(Coord),
}

#[derive(Debug, Error)]
pub enum LogicalError {
    #[error("no {basis} logical path connects the two boundaries; the code is destroyed")]
    NoLogicalPath { basis: crate::coord::Basis },
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("cycle count must be at least 1")]
    BadCycles,
    #[error("global shell size {0} is outside 1..=(L-1)/2 = {1}")]
    BadShell(usize, usize),
    #[error("physical error rate {0} is outside [0, 0.5)")]
    BadNoise(f64),
    #[error("gauge of {basis} stabilizer at {gauge} shares an odd number of qubits with the {other_basis} stabilizer at {stab}; no consistent measurement schedule exists")]
    GaugeObstruction {
        basis: crate::coord::Basis,
        gauge: Coord,
        other_basis: crate::coord::Basis,
        stab: Coord,
    },
    #[error("no logical operator usable as the circuit observable commutes with every scheduled measurement")]
    ObservableBlocked,
    #[error("{0}")]
    Logical(#[from] LogicalError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("line {line}: unknown instruction `{what}`")]
    UnknownInstruction { line: usize, what: String },
    #[error("line {line}: malformed instruction: {why}")]
    Malformed { line: usize, why: String },
    #[error("circuit has nondeterministic detectors {0:?}; refusing to sample")]
    Nondeterministic(Vec<usize>),
}

#[derive(Debug, Error)]
pub enum CommutationError {
    #[error("{x_basis} stabilizer at {x_stab} and {z_basis} stabilizer at {z_stab} share {shared} data qubits (odd)")]
    OddOverlap {
        x_basis: crate::coord::Basis,
        x_stab: Coord,
        z_basis: crate::coord::Basis,
        z_stab: Coord,
        shared: usize,
    },
}
