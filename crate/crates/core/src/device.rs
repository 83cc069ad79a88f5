//! Device files: a JSON description of one lattice plus its defects.
//!
//! Canonical form sorts defect lists lexicographically and uses pretty
//! 2-space indentation, so `serialize(parse(d)) == d` for canonical inputs.

use serde::{Deserialize, Serialize};

use crate::coord::{Coord, Edge};
use crate::error::DeviceError;
use crate::lattice::{DefectMap, Lattice};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct DeviceDoc {
    size: i64,
    defects: DefectsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<MetaDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct DefectsDoc {
    qubits: Vec<[i32; 2]>,
    couplers: Vec<[[i32; 2]; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct MetaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qubit_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coupler_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Parse a device file, validating every coordinate against the lattice.
pub fn parse_device(text: &str) -> Result<(Lattice, DefectMap), DeviceError> {
    let doc: DeviceDoc = serde_json::from_str(text)?;
    let lattice = Lattice::build(doc.size)?;
    let mut map = DefectMap::default();
    if let Some(meta) = &doc.meta {
        map.qubit_rate = meta.qubit_rate.unwrap_or(0.0);
        map.coupler_rate = meta.coupler_rate.unwrap_or(0.0);
        map.seed = meta.seed.unwrap_or(0);
    }
    for q in &doc.defects.qubits {
        let c = Coord::new(q[0], q[1]);
        if !lattice.is_qubit(c) {
            return Err(DeviceError::UnknownQubit(c, lattice.size()));
        }
        if map.qubits.contains(&c) {
            return Err(DeviceError::DuplicateQubit(c));
        }
        map.qubits.push(c);
    }
    for pair in &doc.defects.couplers {
        let a = Coord::new(pair[0][0], pair[0][1]);
        let b = Coord::new(pair[1][0], pair[1][1]);
        // Either endpoint order is accepted; canonical form puts data first.
        let (data, syndrome) = if a.is_data_parity() { (a, b) } else { (b, a) };
        if !lattice.has_coupler(data, syndrome) {
            return Err(DeviceError::UnknownCoupler(a, b, lattice.size()));
        }
        let e = Edge::new(data, syndrome);
        if map.couplers.contains(&e) {
            return Err(DeviceError::DuplicateCoupler(e.data, e.syndrome));
        }
        map.couplers.push(e);
    }
    map.normalize();
    Ok((lattice, map))
}

/// Serialize a device to canonical text.
pub fn serialize_device(lattice: &Lattice, defects: &DefectMap) -> String {
    let mut defects = defects.clone();
    defects.normalize();
    let meta = if defects.qubit_rate != 0.0 || defects.coupler_rate != 0.0 || defects.seed != 0 {
        Some(MetaDoc {
            qubit_rate: Some(defects.qubit_rate),
            coupler_rate: Some(defects.coupler_rate),
            seed: Some(defects.seed),
        })
    } else {
        None
    };
    let doc = DeviceDoc {
        size: lattice.size() as i64,
        defects: DefectsDoc {
            qubits: defects.qubits.iter().map(|c| [c.x, c.y]).collect(),
            couplers: defects
                .couplers
                .iter()
                .map(|e| [[e.data.x, e.data.y], [e.syndrome.x, e.syndrome.y]])
                .collect(),
        },
        meta,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("device doc serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::inject_defects;

    #[test]
    fn round_trip_is_identity_on_canonical_form() {
        let lattice = Lattice::build(7).unwrap();
        let defects = inject_defects(&lattice, 0.05, 0.05, 42).unwrap();
        let text = serialize_device(&lattice, &defects);
        let (lat2, def2) = parse_device(&text).unwrap();
        assert_eq!(lat2.size(), 7);
        assert_eq!(def2, defects);
        assert_eq!(serialize_device(&lat2, &def2), text);
    }

    #[test]
    fn unknown_coordinate_is_named() {
        let text = r#"{"size": 5, "defects": {"qubits": [[12, 1]], "couplers": []}}"#;
        let err = parse_device(text).unwrap_err();
        assert!(err.to_string().contains("(12, 1)"), "{err}");
    }

    #[test]
    fn out_of_range_coordinate_rejected() {
        let text = r#"{"size": 5, "defects": {"qubits": [[1, 21]], "couplers": []}}"#;
        assert!(parse_device(text).is_err());
    }

    #[test]
    fn duplicate_defect_rejected() {
        let text = r#"{"size": 5, "defects": {"qubits": [[1, 1], [1, 1]], "couplers": []}}"#;
        let err = parse_device(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn bad_coupler_rejected() {
        let text = r#"{"size": 5, "defects": {"qubits": [], "couplers": [[[1, 1], [5, 5]]]}}"#;
        assert!(parse_device(text).is_err());
    }
}
