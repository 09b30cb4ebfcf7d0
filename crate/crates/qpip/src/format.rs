//! Circuit files: `{"q": 5, "n": 3, "inputs": [2, 3, 1], "output": 2,
//! "gates": [{"g": "TOFFOLI", "wires": [0, 1, 2]}, {"g": "MEASURE", "wires": [2]}]}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qpip_core::protocol::{Circuit, Gate};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    pub g: String,
    pub wires: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub q: u32,
    pub n: usize,
    /// Basis input per wire; all zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<u32>>,
    /// Defaults to the wire measured by the last gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<usize>,
    pub gates: Vec<GateRecord>,
}

fn gate_from(r: &GateRecord) -> Result<Gate> {
    let w = &r.wires;
    let want = match r.g.as_str() {
        "SUM" | "CNOT" => 2,
        "TOFFOLI" => 3,
        _ => 1,
    };
    if w.len() != want {
        return Err(Error::Format(format!("{} takes {want} wire(s), got {}", r.g, w.len())));
    }
    Ok(match r.g.as_str() {
        "X" => Gate::X(w[0]),
        "Z" => Gate::Z(w[0]),
        "F" => Gate::Fourier(w[0]),
        "SUM" => Gate::Sum(w[0], w[1]),
        "TOFFOLI" => Gate::Toffoli(w[0], w[1], w[2]),
        "MEASURE" => Gate::Measure(w[0]),
        "H" => Gate::H(w[0]),
        "K" => Gate::K(w[0]),
        "CNOT" => Gate::Cnot(w[0], w[1]),
        other => return Err(Error::Format(format!("unknown gate {other:?}"))),
    })
}

fn gate_to(g: &Gate) -> GateRecord {
    let name = match g {
        Gate::X(_) => "X",
        Gate::Z(_) => "Z",
        Gate::Fourier(_) => "F",
        Gate::Sum(..) => "SUM",
        Gate::Toffoli(..) => "TOFFOLI",
        Gate::Measure(_) => "MEASURE",
        Gate::H(_) => "H",
        Gate::K(_) => "K",
        Gate::Cnot(..) => "CNOT",
    };
    GateRecord { g: name.into(), wires: g.wires() }
}

impl CircuitFile {
    pub fn to_circuit(&self) -> Result<Circuit> {
        let gates = self.gates.iter().map(gate_from).collect::<Result<Vec<_>>>()?;
        let inputs = self.inputs.clone().unwrap_or_else(|| vec![0; self.n]);
        if inputs.len() != self.n {
            return Err(Error::Format(format!("{} inputs for {} wires", inputs.len(), self.n)));
        }
        let output = match self.output {
            Some(o) => o,
            None => match gates.last() {
                Some(Gate::Measure(w)) => *w,
                _ => return Err(Error::Format("no output wire and no final measurement".into())),
            },
        };
        Ok(Circuit::new(self.q, inputs, gates, output)?)
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        CircuitFile { q: c.q, n: c.num_wires, inputs: Some(c.inputs.clone()), output: Some(c.output), gates: c.gates.iter().map(gate_to).collect() }
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    serde_json::from_str::<CircuitFile>(text)?.to_circuit()
}

pub fn circuit_json(c: &Circuit) -> String {
    serde_json::to_string(&CircuitFile::from_circuit(c)).expect("circuit files always serialize")
}

/// Hex SHA-256 of the canonical JSON form.
pub fn circuit_hash(c: &Circuit) -> String {
    format!("{:x}", Sha256::digest(circuit_json(c).as_bytes()))
}

/// Circuits shipped with the harness, by name. All are YES instances.
pub fn fixture(name: &str) -> Option<Circuit> {
    let (q, inputs, gates, output) = match name {
        "shift" => (5, vec![2], vec![Gate::X(0), Gate::Measure(0)], 0),
        "toffoli-demo" => (5, vec![2, 3, 1], vec![Gate::Toffoli(0, 1, 2), Gate::Measure(2)], 2),
        "fourier-cycle" => (5, vec![1, 0], vec![Gate::Fourier(0), Gate::Fourier(0), Gate::Fourier(0), Gate::Fourier(0), Gate::Sum(0, 1), Gate::Measure(1)], 1),
        "sum-toffoli" => (5, vec![1, 1, 0], vec![Gate::Sum(0, 2), Gate::Z(1), Gate::Toffoli(0, 1, 2), Gate::X(2), Gate::Measure(2)], 2),
        "qubit-parity" => (2, vec![0, 0], vec![Gate::H(0), Gate::K(0), Gate::K(0), Gate::H(0), Gate::Cnot(0, 1), Gate::Measure(1)], 1),
        _ => return None,
    };
    Circuit::new(q, inputs, gates, output).ok()
}

pub const FIXTURES: [&str; 5] = ["shift", "toffoli-demo", "fourier-cycle", "sum-toffoli", "qubit-parity"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_defaults() {
        let text = r#"{"q":5,"n":3,"inputs":[2,3,1],"gates":[{"g":"TOFFOLI","wires":[0,1,2]},{"g":"MEASURE","wires":[2]}]}"#;
        let c = parse_circuit(text).unwrap();
        assert_eq!(c, fixture("toffoli-demo").unwrap());
        assert_eq!(parse_circuit(&circuit_json(&c)).unwrap(), c);
        assert_eq!(circuit_hash(&c).len(), 64);
        let zeros = parse_circuit(r#"{"q":5,"n":1,"gates":[{"g":"X","wires":[0]},{"g":"MEASURE","wires":[0]}]}"#).unwrap();
        assert_eq!(zeros.inputs, vec![0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_circuit(r#"{"q":5,"n":1,"gates":[{"g":"SWAP","wires":[0]}]}"#).is_err());
        assert!(parse_circuit(r#"{"q":5,"n":2,"gates":[{"g":"SUM","wires":[0]}]}"#).is_err());
        assert!(parse_circuit(r#"{"q":4,"n":1,"gates":[{"g":"MEASURE","wires":[0]}]}"#).is_err());
        assert!(parse_circuit("not json").is_err());
    }

    #[test]
    fn fixtures_are_yes_instances() {
        for name in FIXTURES {
            let c = fixture(name).unwrap();
            assert_eq!(qpip_core::protocol::honest_verdict(&c).unwrap(), Some(qpip_core::protocol::ProtocolVerdict::Accept), "{name}");
        }
    }
}
