//! The Clifford protocol: one qubit per register, authenticated with a
//! random Clifford on `1 + d` qubits. For each gate the verifier takes the
//! registers back, decodes them, applies the gate itself and re-encodes
//! under fresh keys. Registers live in one shared kernel and move by
//! ownership transfer, so this protocol runs in-process only.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::prover::{Prover, ProverContext};
use super::{run_rngs, Circuit, Direction, Gate, Kernel, Message, OwnershipEvent, Party, Payload, ProtocolKind, ProtocolVerdict, RunConfig, Transcript};
use crate::clifford::{CliffordGate, CliffordTableau};
use crate::error::{Error, Result};
use crate::qsim::{SparseState, WireId};

fn apply_clifford_gates(s: &mut SparseState, gates: &[CliffordGate], wires: &[WireId]) -> Result<()> {
    for g in gates {
        match *g {
            CliffordGate::Cnot(c, t) => s.apply_sum(wires[c], wires[t])?,
            CliffordGate::X(w) => s.apply_x(wires[w], 1)?,
            CliffordGate::Z(w) => s.apply_z(wires[w], 1)?,
            _ => {
                let local: Vec<WireId> = g.wires().iter().map(|w| wires[*w]).collect();
                s.apply_unitary(&local, &g.local_matrix())?;
            }
        }
    }
    Ok(())
}

fn apply_logical(s: &mut SparseState, gate: Gate, w: &dyn Fn(usize) -> WireId) -> Result<()> {
    match gate {
        Gate::X(a) => s.apply_x(w(a), 1),
        Gate::Z(a) => s.apply_z(w(a), 1),
        Gate::Sum(a, b) | Gate::Cnot(a, b) => s.apply_sum(w(a), w(b)),
        Gate::Fourier(a) | Gate::H(a) => s.apply_fourier_r(w(a), 1),
        Gate::K(a) => s.apply_diagonal(&[w(a)], |d| if d[0] == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) }),
        Gate::Toffoli(..) | Gate::Measure(_) => Err(Error::Unsupported(alloc::format!("{gate:?} as a verifier-side gate"))),
    }
}

/// Verifier state machine of the Clifford protocol.
pub struct CliffordVerifier {
    d: usize,
    circuit: Circuit,
    keys: Vec<Option<CliffordTableau>>,
    /// Decoded data wire of each register while the verifier holds it.
    held: Vec<Option<WireId>>,
    pc: usize,
    expected: VecDeque<usize>,
    blind: bool,
    verdict: Option<ProtocolVerdict>,
    output: Option<u32>,
    abort_reason: Option<String>,
    rng: ChaCha20Rng,
    started: bool,
    transferred: Option<Vec<WireId>>,
}

impl CliffordVerifier {
    pub fn new(circuit: &Circuit, config: &RunConfig, rng: ChaCha20Rng) -> Result<Self> {
        circuit.validate()?;
        if circuit.q != 2 {
            return Err(Error::Parameter("the Clifford protocol works on qubits".into()));
        }
        if config.d == 0 {
            return Err(Error::Parameter("d must be at least 1".into()));
        }
        if circuit.num_toffolis() > 0 {
            return Err(Error::Unsupported("Toffoli in the Clifford protocol (1- and 2-qubit gates only)".into()));
        }
        let n = circuit.num_wires;
        Ok(CliffordVerifier {
            d: config.d,
            circuit: circuit.clone(),
            keys: vec![None; n],
            held: vec![None; n],
            pc: 0,
            expected: VecDeque::new(),
            blind: config.blind,
            verdict: None,
            output: None,
            abort_reason: None,
            rng,
            started: false,
            transferred: None,
        })
    }

    pub fn verdict(&self) -> Option<ProtocolVerdict> {
        self.verdict
    }

    pub fn output(&self) -> Option<u32> {
        self.output
    }

    pub fn abort_reason(&self) -> Option<&str> {
        self.abort_reason.as_deref()
    }

    /// Encode the data wire of register `r` with a fresh key and hand it
    /// to the prover.
    fn send(&mut self, kernel: &mut Kernel, r: usize) -> Result<Message> {
        let data = self.held[r].take().ok_or(Error::Parameter("register not held".into()))?;
        let ancillas = kernel.alloc(Party::Verifier, &vec![0; self.d])?;
        let mut wires = vec![data];
        wires.extend(ancillas);
        let key = CliffordTableau::random(1 + self.d, &mut self.rng)?;
        apply_clifford_gates(kernel.state_for(Party::Verifier, &wires)?, &key.to_gates(), &wires)?;
        self.keys[r] = Some(key);
        kernel.transfer(&wires, Party::Prover)?;
        Ok(Message::AuthState { registers: vec![r], payload: Payload::Wires(wires) })
    }

    pub fn start(&mut self, kernel: &mut Kernel) -> Result<Vec<Message>> {
        if self.started {
            return Err(Error::Parameter("verifier already started".into()));
        }
        self.started = true;
        let mut out = Vec::new();
        for (j, v) in self.circuit.inputs.clone().into_iter().enumerate() {
            self.held[j] = Some(kernel.alloc(Party::Verifier, &[v])?[0]);
            out.push(self.send(kernel, j)?);
        }
        out.extend(self.request());
        Ok(out)
    }

    fn request(&mut self) -> Option<Message> {
        let gate = *self.circuit.gates.get(self.pc)?;
        let registers = gate.wires();
        self.expected = registers.iter().copied().collect();
        let output = matches!(gate, Gate::Measure(w) if w == self.circuit.output && self.pc + 1 == self.circuit.gates.len());
        Some(Message::Request { registers, output })
    }

    pub fn abort(&mut self, reason: impl Into<String>) -> Vec<Message> {
        if self.verdict.is_some() {
            return Vec::new();
        }
        self.verdict = Some(ProtocolVerdict::Abort);
        self.abort_reason = Some(reason.into());
        self.expected.clear();
        if self.blind {
            Vec::new()
        } else {
            vec![Message::Verdict { verdict: ProtocolVerdict::Abort }]
        }
    }

    pub fn handle(&mut self, kernel: &mut Kernel, msg: &Message) -> Result<Vec<Message>> {
        if self.verdict.is_some() {
            return Ok(Vec::new());
        }
        let Message::Return { register, wires } = msg else {
            return Ok(self.abort(alloc::format!("unexpected {} from the prover", msg.kind())));
        };
        if self.expected.front() != Some(register) {
            return Ok(self.abort(alloc::format!("register {register} returned out of turn")));
        }
        if wires.len() != 1 + self.d {
            return Ok(self.abort("wrong number of qubits returned"));
        }
        if kernel.transfer(wires, Party::Verifier).is_err() {
            return Ok(self.abort("returned qubits are not the prover's to give"));
        }
        self.transferred = Some(wires.clone());
        self.expected.pop_front();
        let key = self.keys[*register].take().ok_or(Error::Parameter("register has no key".into()))?;
        let undo: Vec<CliffordGate> = key.to_gates().into_iter().rev().map(|g| g.inverse()).collect();
        apply_clifford_gates(kernel.state_for(Party::Verifier, wires)?, &undo, wires)?;
        let syndrome = kernel.measure(Party::Verifier, &wires[1..], &mut self.rng)?;
        if syndrome.iter().any(|s| *s != 0) {
            return Ok(self.abort(alloc::format!("register {register} failed authentication")));
        }
        self.held[*register] = Some(wires[0]);
        if !self.expected.is_empty() {
            return Ok(Vec::new());
        }
        let gate = self.circuit.gates[self.pc];
        self.pc += 1;
        if let Gate::Measure(w) = gate {
            let data = self.held[w].take().expect("held after decode");
            let v = kernel.measure(Party::Verifier, &[data], &mut self.rng)?[0];
            if self.pc == self.circuit.gates.len() {
                self.output = Some(v);
                let verdict = if super::accepts(v) { ProtocolVerdict::Accept } else { ProtocolVerdict::Reject };
                self.verdict = Some(verdict);
                return Ok(if self.blind { Vec::new() } else { vec![Message::Verdict { verdict }] });
            }
            return Ok(self.request().into_iter().collect());
        }
        let held = &self.held;
        let lookup = |w: usize| held[w].expect("decoded register");
        let wires_used: Vec<WireId> = gate.wires().iter().map(|w| lookup(*w)).collect();
        apply_logical(kernel.state_for(Party::Verifier, &wires_used)?, gate, &lookup)?;
        let mut out = Vec::new();
        for r in gate.wires() {
            out.push(self.send(kernel, r)?);
        }
        out.extend(self.request());
        Ok(out)
    }
}

fn depolarize_wires<R: Rng + ?Sized>(s: &mut SparseState, wires: &[WireId], p: f64, rng: &mut R) -> Result<()> {
    if p <= 0.0 {
        return Ok(());
    }
    for w in wires {
        if rng.gen::<f64>() < p {
            let (x, z) = (rng.gen_range(0..s.q()), rng.gen_range(0..s.q()));
            s.apply_x(*w, x)?;
            s.apply_z(*w, z)?;
        }
    }
    Ok(())
}

/// One in-process run of the Clifford protocol.
pub fn run_clifford_qpip<P: Prover + ?Sized>(circuit: &Circuit, prover: &mut P, config: &RunConfig, seed: u64) -> Result<Transcript> {
    let (vrng, mut prng, mut crng) = run_rngs(seed);
    let mut kernel = Kernel::new(2)?;
    let mut verifier = CliffordVerifier::new(circuit, config, vrng)?;
    let mut t = Transcript::new(ProtocolKind::Clifford);
    let mut outbox: VecDeque<Message> = verifier.start(&mut kernel)?.into();
    loop {
        while let Some(msg) = outbox.pop_front() {
            t.push(Direction::VerifierToProver, msg.clone());
            if let Message::AuthState { payload: Payload::Wires(w), .. } = &msg {
                t.ownership.push(OwnershipEvent { seq: t.entries.len() - 1, wires: w.clone(), to: Party::Prover });
                depolarize_wires(kernel.raw_state(), w, config.noise, &mut crng)?;
            }
            let mut ctx = ProverContext::new(&mut kernel, &mut prng);
            let replies = match prover.handle(&mut ctx, &msg) {
                Ok(r) => r,
                Err(e @ Error::TooLarge { .. }) => return Err(e),
                Err(e) => {
                    outbox.clear();
                    outbox.extend(verifier.abort(alloc::format!("prover error: {}", e)));
                    continue;
                }
            };
            for r in replies {
                t.push(Direction::ProverToVerifier, r.clone());
                let next = verifier.handle(&mut kernel, &r)?;
                if let Some(wires) = verifier.transferred.take() {
                    t.ownership.push(OwnershipEvent { seq: t.entries.len() - 1, wires, to: Party::Verifier });
                }
                if verifier.verdict() == Some(ProtocolVerdict::Abort) {
                    outbox.clear();
                }
                outbox.extend(next);
            }
        }
        if verifier.verdict().is_some() {
            break;
        }
        outbox.extend(verifier.abort("prover sent no reply"));
        if outbox.is_empty() {
            break;
        }
    }
    t.verdict = verifier.verdict().unwrap_or(ProtocolVerdict::Abort);
    t.output = verifier.output();
    t.occupancy = kernel.occupancy().trace().to_vec();
    t.high_water = kernel.occupancy().high_water();
    t.abort_reason = verifier.abort_reason().map(String::from);
    Ok(t)
}
