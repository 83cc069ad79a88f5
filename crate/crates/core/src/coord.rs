//! Doubled integer coordinates for the rotated surface code lattice.
//!
//! Data qubits sit at odd (x, y), syndrome qubits at even (x, y). For a code
//! of size L the data grid spans 1..=2L-1 and syndromes span 0..=2L. Parity
//! alone tells a node's kind, so coordinates hash and serialize exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Stabilizer basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => write!(f, "X"),
            Basis::Z => write!(f, "Z"),
        }
    }
}

/// A lattice position in doubled coordinates. Ordering is lexicographic on
/// (x, y), which fixes every iteration order in the adapter.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Coord {
        Coord { x, y }
    }

    pub fn is_data_parity(self) -> bool {
        self.x & 1 == 1 && self.y & 1 == 1
    }

    pub fn is_syndrome_parity(self) -> bool {
        self.x & 1 == 0 && self.y & 1 == 0
    }

    /// The four diagonal neighbours, i.e. the other endparity reachable by one
    /// coupler. Order: NE, NW, SE, SW with y growing downward.
    pub fn diagonal_neighbors(self) -> [Coord; 4] {
        [
            Coord::new(self.x + 1, self.y - 1),
            Coord::new(self.x - 1, self.y - 1),
            Coord::new(self.x + 1, self.y + 1),
            Coord::new(self.x - 1, self.y + 1),
        ]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Kind of lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Data,
    Syndrome(Basis),
}

/// A coupler between one data qubit and one diagonally adjacent syndrome
/// qubit. Stored with the data endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub data: Coord,
    pub syndrome: Coord,
}

impl Edge {
    pub fn new(data: Coord, syndrome: Coord) -> Edge {
        Edge { data, syndrome }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.data, self.syndrome)
    }
}
