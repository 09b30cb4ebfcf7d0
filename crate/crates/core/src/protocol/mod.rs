//! Verifier/prover protocols on top of the two authentication schemes.
//!
//! Both parties talk through [`Message`]s. Quantum data moves either as a
//! serialized state (polynomial protocol, verifier to prover only) or as an
//! ownership transfer of wires in a shared [`Kernel`] (Clifford protocol).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{SparseState, WireId};

pub mod clifford;
pub mod kernel;
pub mod keys;
pub mod poly;
pub mod prover;
pub mod universal;

pub use kernel::{Kernel, Occupancy, Party};
pub use prover::{Prover, ProverContext, StandardProver, Strategy};

/// Gates of a circuit instance. `H`, `K` and `Cnot` exist for qubit circuits
/// run through the Clifford protocol; there `Sum` is CNOT and `Fourier` is H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Gate {
    X(usize),
    Z(usize),
    Sum(usize, usize),
    Fourier(usize),
    Toffoli(usize, usize, usize),
    Measure(usize),
    H(usize),
    K(usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::X(w) | Gate::Z(w) | Gate::Fourier(w) | Gate::Measure(w) | Gate::H(w) | Gate::K(w) => vec![w],
            Gate::Sum(a, b) | Gate::Cnot(a, b) => vec![a, b],
            Gate::Toffoli(a, b, c) => vec![a, b, c],
        }
    }
}

/// A circuit on `num_wires` qudits of dimension `q`, started from the basis
/// state `inputs`. The instance's answer is read from `output`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Circuit {
    pub q: u32,
    pub num_wires: usize,
    pub inputs: Vec<u32>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl Circuit {
    pub fn new(q: u32, inputs: Vec<u32>, gates: Vec<Gate>, output: usize) -> Result<Self> {
        let c = Circuit { q, num_wires: inputs.len(), inputs, gates, output };
        c.validate()?;
        Ok(c)
    }

    /// Structural checks: wires in range and distinct per gate, no gate on
    /// a measured wire, qubit-only gates only at `q = 2`.
    pub fn validate_structure(&self) -> Result<()> {
        if !crate::galois::is_prime(self.q) {
            return Err(Error::NotPrime(self.q));
        }
        if self.inputs.len() != self.num_wires || self.num_wires == 0 || self.output >= self.num_wires {
            return Err(Error::Parameter("inputs, wire count and output disagree".into()));
        }
        if self.inputs.iter().any(|v| *v >= self.q) {
            return Err(Error::Parameter("input value out of range".into()));
        }
        let mut measured = vec![false; self.num_wires];
        for g in &self.gates {
            let ws = g.wires();
            for (i, w) in ws.iter().enumerate() {
                if *w >= self.num_wires {
                    return Err(Error::WireOutOfRange(*w));
                }
                if ws[..i].contains(w) {
                    return Err(Error::WireCollision);
                }
                if measured[*w] {
                    return Err(Error::Parameter(alloc::format!("{g:?} acts on a measured wire")));
                }
            }
            if matches!(g, Gate::H(_) | Gate::K(_) | Gate::Cnot(..)) && self.q != 2 {
                return Err(Error::Parameter(alloc::format!("{g:?} needs q = 2")));
            }
            if let Gate::Measure(w) = g {
                measured[*w] = true;
            }
        }
        Ok(())
    }

    /// Instance checks on top of [`Self::validate_structure`]: the last gate
    /// measures `output` and nothing else measures it.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.gates.last() != Some(&Gate::Measure(self.output)) {
            return Err(Error::Parameter("the circuit must end by measuring its output wire".into()));
        }
        Ok(())
    }

    pub fn num_toffolis(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Toffoli(..))).count()
    }

    /// The circuit deciding the complementary question for outputs in
    /// `{0, 1}`: a fresh wire starting at 1 receives `q − 1` SUMs from the
    /// output, so it holds `1 − v`, and is measured instead.
    pub fn complement(&self) -> Result<Self> {
        self.validate()?;
        let fresh = self.num_wires;
        let mut gates = self.gates.clone();
        gates.pop();
        gates.extend(core::iter::repeat_n(Gate::Sum(self.output, fresh), self.q as usize - 1));
        gates.push(Gate::Measure(fresh));
        let mut inputs = self.inputs.clone();
        inputs.push(1);
        Circuit::new(self.q, inputs, gates, fresh)
    }
}

/// Run the circuit on bare qudits without measuring; `Measure` gates
/// collapse their wire with `rng`. Returns the state and the wire ids.
pub fn simulate_plain<R: rand::Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Result<(SparseState, Vec<WireId>)> {
    circuit.validate_structure()?;
    let mut s = SparseState::new(circuit.q)?;
    let wires: Vec<WireId> = circuit.inputs.iter().map(|v| s.alloc(*v)).collect::<Result<_>>()?;
    for g in &circuit.gates {
        apply_plain_gate(&mut s, &wires, *g, rng)?;
    }
    Ok((s, wires))
}

fn apply_plain_gate<R: rand::Rng + ?Sized>(s: &mut SparseState, w: &[WireId], g: Gate, rng: &mut R) -> Result<()> {
    match g {
        Gate::X(a) => s.apply_x(w[a], 1),
        Gate::Z(a) => s.apply_z(w[a], 1),
        Gate::Sum(a, b) | Gate::Cnot(a, b) => s.apply_sum(w[a], w[b]),
        Gate::Fourier(a) | Gate::H(a) => s.apply_fourier_r(w[a], 1),
        Gate::Toffoli(a, b, c) => s.apply_toffoli(w[a], w[b], w[c]),
        Gate::K(a) => s.apply_diagonal(&[w[a]], |d| if d[0] == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) }),
        Gate::Measure(a) => s.measure(&[w[a]], rng).map(|_| ()),
    }
}

/// Exact distribution of the output value, all gates but the final
/// measurement applied. Requires mid-circuit measurements to be absent.
pub fn plain_output_distribution(circuit: &Circuit) -> Result<Vec<f64>> {
    circuit.validate()?;
    let body = &circuit.gates[..circuit.gates.len() - 1];
    if body.iter().any(|g| matches!(g, Gate::Measure(_))) {
        return Err(Error::Unsupported("exact output distribution with mid-circuit measurements".into()));
    }
    let trimmed = Circuit { gates: body.to_vec(), ..circuit.clone() };
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    let (mut s, wires) = simulate_plain(&trimmed, &mut rng)?;
    let mut dist = vec![0.0; circuit.q as usize];
    for (v, p) in s.outcome_distribution(&[wires[circuit.output]])? {
        dist[v[0] as usize] += p;
    }
    Ok(dist)
}

/// Acceptance convention: a decoded output value other than 0 means YES.
/// On qubits this is "the output measures to 1".
pub fn accepts(value: u32) -> bool {
    value != 0
}

/// The verdict an honest run produces with certainty, if there is one.
pub fn honest_verdict(circuit: &Circuit) -> Result<Option<ProtocolVerdict>> {
    let dist = plain_output_distribution(circuit)?;
    Ok(if dist[0] < 1e-9 {
        Some(ProtocolVerdict::Accept)
    } else if (dist[0] - 1.0).abs() < 1e-9 {
        Some(ProtocolVerdict::Reject)
    } else {
        None
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum ProtocolVerdict {
    Accept,
    Reject,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum ApplyGate {
    Sum,
    Fourier,
    FourierInverse,
    Measure,
    MeasureOutput,
}

/// A state of `n` qudits as nonzero amplitudes at basis indices (first
/// qudit most significant).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(from = "payload_serde::Repr", into = "payload_serde::Repr"))]
pub struct StatePayload {
    pub q: u32,
    pub n: usize,
    pub terms: Vec<(u64, C64)>,
}

impl StatePayload {
    pub fn from_digit_terms(q: u32, n: usize, terms: &[(Vec<u32>, C64)]) -> Result<Self> {
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(terms.len());
        for (d, a) in terms {
            if d.len() != n || d.iter().any(|v| *v >= q) {
                return Err(Error::DimensionMismatch("payload term does not fit the register".into()));
            }
            out.push((d.iter().fold(0u64, |acc, v| acc * q as u64 + *v as u64), *a));
        }
        out.sort_by_key(|t| t.0);
        Ok(StatePayload { q, n, terms: out })
    }

    pub fn digit_terms(&self) -> Vec<(Vec<u32>, C64)> {
        self.terms
            .iter()
            .map(|(i, a)| {
                let mut d = vec![0u32; self.n];
                let mut r = *i;
                for slot in d.iter_mut().rev() {
                    *slot = (r % self.q as u64) as u32;
                    r /= self.q as u64;
                }
                (d, *a)
            })
            .collect()
    }
}

/// Up to this many amplitudes a payload is written densely.
pub const DENSE_PAYLOAD_LIMIT: u64 = 1024;

#[cfg(feature = "serde")]
mod payload_serde {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Repr {
        Dense { q: u32, n: usize, amps: Vec<[f64; 2]> },
        Sparse { q: u32, n: usize, terms: Vec<(u64, f64, f64)> },
    }

    impl From<StatePayload> for Repr {
        fn from(p: StatePayload) -> Repr {
            let dim = (p.q as u64).checked_pow(p.n as u32);
            match dim {
                Some(dim) if dim <= DENSE_PAYLOAD_LIMIT => {
                    let mut amps = vec![[0.0, 0.0]; dim as usize];
                    for (i, a) in &p.terms {
                        amps[*i as usize] = [a.re, a.im];
                    }
                    Repr::Dense { q: p.q, n: p.n, amps }
                }
                _ => Repr::Sparse { q: p.q, n: p.n, terms: p.terms.iter().map(|(i, a)| (*i, a.re, a.im)).collect() },
            }
        }
    }

    impl From<Repr> for StatePayload {
        fn from(r: Repr) -> StatePayload {
            match r {
                Repr::Dense { q, n, amps } => StatePayload {
                    q,
                    n,
                    terms: amps.iter().enumerate().filter(|(_, a)| a[0] != 0.0 || a[1] != 0.0).map(|(i, a)| (i as u64, C64::new(a[0], a[1]))).collect(),
                },
                Repr::Sparse { q, n, terms } => StatePayload { q, n, terms: terms.into_iter().map(|(i, re, im)| (i, C64::new(re, im))).collect() },
            }
        }
    }
}

/// Quantum content of an `AUTH_STATE` message.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum Payload {
    /// Serialized registers, `m` qudits each, in register order.
    State(StatePayload),
    /// Ownership transfer of kernel wires, in register order.
    Wires(Vec<WireId>),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Message {
    /// Verifier sends authenticated registers.
    AuthState { registers: Vec<usize>, payload: Payload },
    /// Verifier asks for registers back (Clifford protocol).
    Request { registers: Vec<usize>, output: bool },
    /// Prover hands a register back (Clifford protocol).
    Return { register: usize, wires: Vec<WireId> },
    /// Verifier instructs a transversal operation on registers.
    Apply { gate: ApplyGate, registers: Vec<usize>, power: u32 },
    Measured { register: usize, outcomes: Vec<u32> },
    Interpreted { register: usize, value: Option<u32> },
    Verdict { verdict: ProtocolVerdict },
}

impl Message {
    pub fn carries_quantum(&self) -> bool {
        matches!(self, Message::AuthState { .. } | Message::Return { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::AuthState { .. } => "AUTH_STATE",
            Message::Request { .. } => "REQUEST",
            Message::Return { .. } => "RETURN",
            Message::Apply { .. } => "APPLY",
            Message::Measured { .. } => "MEASURED",
            Message::Interpreted { .. } => "INTERPRETED",
            Message::Verdict { .. } => "VERDICT",
        }
    }

    /// What the prover learns from a verifier message, with serialized
    /// quantum payloads reduced to their shape.
    pub fn instruction_view(&self) -> Message {
        match self {
            Message::AuthState { registers, payload: Payload::State(p) } => {
                Message::AuthState { registers: registers.clone(), payload: Payload::State(StatePayload { q: p.q, n: p.n, terms: Vec::new() }) }
            }
            other => other.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Direction {
    #[cfg_attr(feature = "serde", serde(rename = "V->P"))]
    VerifierToProver,
    #[cfg_attr(feature = "serde", serde(rename = "P->V"))]
    ProverToVerifier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum ProtocolKind {
    Clifford,
    Poly,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TranscriptEntry {
    pub seq: usize,
    pub direction: Direction,
    pub message: Message,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct OwnershipEvent {
    pub seq: usize,
    pub wires: Vec<WireId>,
    pub to: Party,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Transcript {
    pub protocol: ProtocolKind,
    pub entries: Vec<TranscriptEntry>,
    pub ownership: Vec<OwnershipEvent>,
    pub verdict: ProtocolVerdict,
    /// Decoded output value, when the run got that far.
    pub output: Option<u32>,
    /// Verifier quantum occupancy after each change.
    pub occupancy: Vec<usize>,
    pub high_water: usize,
    /// Why the verifier aborted, if it did.
    pub abort_reason: Option<String>,
}

impl Transcript {
    pub(crate) fn new(protocol: ProtocolKind) -> Self {
        Transcript {
            protocol,
            entries: Vec::new(),
            ownership: Vec::new(),
            verdict: ProtocolVerdict::Abort,
            output: None,
            occupancy: Vec::new(),
            high_water: 0,
            abort_reason: None,
        }
    }

    pub(crate) fn push(&mut self, direction: Direction, message: Message) {
        let seq = self.entries.len();
        self.entries.push(TranscriptEntry { seq, direction, message });
    }

    /// True when quantum messages form a prefix of the transcript and all
    /// of them go from verifier to prover.
    pub fn classical_after_first_round(&self) -> bool {
        let first_classical = self.entries.iter().position(|e| !e.message.carries_quantum()).unwrap_or(self.entries.len());
        self.entries[..first_classical].iter().all(|e| e.direction == Direction::VerifierToProver)
            && self.entries[first_classical..].iter().all(|e| !e.message.carries_quantum())
    }

    /// The verifier-to-prover stream with serialized states reduced to
    /// their shape.
    pub fn instruction_stream(&self) -> Vec<Message> {
        self.entries.iter().filter(|e| e.direction == Direction::VerifierToProver).map(|e| e.message.instruction_view()).collect()
    }
}

/// Run-time options shared by both protocols.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    /// Depolarizing strength on every transmitted register (0 for none).
    pub noise: f64,
    /// Withhold interpreted values and the verdict from the prover.
    pub blind: bool,
}

impl RunConfig {
    pub fn new(d: usize) -> Self {
        RunConfig { d, noise: 0.0, blind: false }
    }
}

/// Independent generator streams of one run: verifier, prover, channel.
pub fn run_rngs(seed: u64) -> (rand_chacha::ChaCha20Rng, rand_chacha::ChaCha20Rng, rand_chacha::ChaCha20Rng) {
    use rand::SeedableRng;
    let mk = |stream: u64| {
        let mut r = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    };
    (mk(1), mk(2), mk(3))
}
