//! The polynomial protocol: inputs and Toffoli states are sent once,
//! authenticated under a shared sign key; everything afterwards is
//! classical.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::keys::{KeyGate, KeyRules};
use super::prover::{Prover, ProverContext, StandardProver};
use super::{run_rngs, ApplyGate, Circuit, Direction, Gate, Kernel, Message, Occupancy, Payload, ProtocolKind, ProtocolVerdict, RunConfig, StatePayload, Transcript};
use crate::code_poly::{toffoli_terms, SignKey, SignedCode};
use crate::error::{Error, Result};
use crate::linalg::root_of_unity;
use crate::qas_poly::{interpret_measurement, PolyAuthKey};
use crate::qsim::PureState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Power {
    Const(u32),
    Slot(usize),
    NegSlot(usize),
    NegProduct(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    X { reg: usize, power: Power },
    Z { reg: usize, power: Power },
    Sum { src: usize, dst: usize, power: Power },
    Fourier { reg: usize },
    FourierInverse { reg: usize },
    Measure { reg: usize, slot: Option<usize>, output: bool },
}

struct Plan {
    steps: Vec<Step>,
    slots: usize,
    toffolis: Vec<[usize; 3]>,
    /// Register holding each logical wire at the end.
    final_regs: Vec<usize>,
    registers: usize,
}

/// Logical Toffoli on registers (a, b, c) through a Toffoli state in
/// (t1, t2, t3); t1..t3 carry the result.
fn gadget(steps: &mut Vec<Step>, [a, b, c]: [usize; 3], [t1, t2, t3]: [usize; 3], slot: usize) {
    let (u, v, w) = (slot, slot + 1, slot + 2);
    steps.extend([
        // u = a + x, v = b + y; t1 = u − a, t2 = v − b, t3 = (u − a)(v − b)
        Step::Sum { src: t1, dst: a, power: Power::Const(1) },
        Step::Sum { src: t2, dst: b, power: Power::Const(1) },
        Step::Measure { reg: a, slot: Some(u), output: false },
        Step::Measure { reg: b, slot: Some(v), output: false },
        // t1 → a, t2 → b
        Step::Fourier { reg: t1 },
        Step::Fourier { reg: t1 },
        Step::Fourier { reg: t2 },
        Step::Fourier { reg: t2 },
        Step::X { reg: t1, power: Power::Slot(u) },
        Step::X { reg: t2, power: Power::Slot(v) },
        // t3 → ab
        Step::Sum { src: t2, dst: t3, power: Power::Slot(u) },
        Step::Sum { src: t1, dst: t3, power: Power::Slot(v) },
        Step::X { reg: t3, power: Power::NegProduct(u, v) },
        // t3 → ab + c, then erase c by a Fourier-basis measurement
        Step::Sum { src: c, dst: t3, power: Power::Const(1) },
        Step::Fourier { reg: c },
        Step::Measure { reg: c, slot: Some(w), output: false },
        // phase ω^{w c} = ω^{w t3} ω^{−w ab}
        Step::Z { reg: t3, power: Power::NegSlot(w) },
        Step::FourierInverse { reg: t2 },
        Step::Sum { src: t1, dst: t2, power: Power::Slot(w) },
        Step::Fourier { reg: t2 },
    ]);
}

fn plan(circuit: &Circuit) -> Result<Plan> {
    let n = circuit.num_wires;
    let mut reg: Vec<usize> = (0..n).collect();
    let mut next = n;
    let mut slots = 0;
    let mut steps = Vec::new();
    let mut toffolis = Vec::new();
    let last = circuit.gates.len().wrapping_sub(1);
    for (i, g) in circuit.gates.iter().enumerate() {
        match *g {
            Gate::X(w) => steps.push(Step::X { reg: reg[w], power: Power::Const(1) }),
            Gate::Z(w) => steps.push(Step::Z { reg: reg[w], power: Power::Const(1) }),
            Gate::Sum(a, b) => steps.push(Step::Sum { src: reg[a], dst: reg[b], power: Power::Const(1) }),
            Gate::Fourier(w) => steps.push(Step::Fourier { reg: reg[w] }),
            Gate::Toffoli(a, b, c) => {
                let t = [next, next + 1, next + 2];
                next += 3;
                gadget(&mut steps, [reg[a], reg[b], reg[c]], t, slots);
                slots += 3;
                toffolis.push(t);
                reg[a] = t[0];
                reg[b] = t[1];
                reg[c] = t[2];
            }
            Gate::Measure(w) => steps.push(Step::Measure { reg: reg[w], slot: None, output: i == last && w == circuit.output }),
            Gate::H(_) | Gate::K(_) | Gate::Cnot(..) => return Err(Error::Unsupported(alloc::format!("{g:?} in the polynomial protocol"))),
        }
    }
    Ok(Plan { steps, slots, toffolis, final_regs: reg, registers: next })
}

/// `P_{x,z}` on consecutive registers of a term list.
fn pad_terms(terms: &mut [(Vec<u32>, C64)], keys: &[&PolyAuthKey], q: u32) {
    for (digits, amp) in terms.iter_mut() {
        let mut phase = 0i64;
        for (r, key) in keys.iter().enumerate() {
            let m = key.x.len();
            for i in 0..m {
                let v = (digits[r * m + i] + key.x[i]) % q;
                digits[r * m + i] = v;
                phase += key.z[i] as i64 * v as i64;
            }
        }
        *amp *= root_of_unity(q, phase);
    }
}

/// Apply an independent depolarizing event to each qudit of a payload:
/// with probability `p` a uniformly random Pauli.
pub fn depolarize_payload<R: Rng + ?Sized>(payload: &mut StatePayload, p: f64, rng: &mut R) {
    if p <= 0.0 {
        return;
    }
    let q = payload.q;
    let mut terms = payload.digit_terms();
    for wire in 0..payload.n {
        if rng.gen::<f64>() >= p {
            continue;
        }
        let (x, z) = (rng.gen_range(0..q), rng.gen_range(0..q));
        for (d, a) in terms.iter_mut() {
            d[wire] = (d[wire] + x) % q;
            *a *= root_of_unity(q, z as i64 * d[wire] as i64);
        }
    }
    *payload = StatePayload::from_digit_terms(q, payload.n, &terms).expect("same shape");
}

/// Verifier state machine of the polynomial protocol.
pub struct PolyVerifier {
    q: u32,
    d: usize,
    rules: KeyRules,
    sign: SignKey,
    keys: Vec<Option<PolyAuthKey>>,
    plan: Plan,
    input_terms: Option<Vec<(Vec<u32>, C64)>>,
    inputs: Vec<u32>,
    pc: usize,
    slots: Vec<Option<u32>>,
    awaiting: Option<(usize, Option<usize>, bool)>,
    blind: bool,
    verdict: Option<ProtocolVerdict>,
    output: Option<u32>,
    abort_reason: Option<String>,
    occupancy: Occupancy,
    rng: ChaCha20Rng,
    started: bool,
}

impl PolyVerifier {
    pub fn new(circuit: &Circuit, config: &RunConfig, rng: ChaCha20Rng) -> Result<Self> {
        circuit.validate()?;
        Self::build(circuit, config, rng, None)
    }

    /// Verifier for a circuit that may stop short of measuring its output,
    /// started from the joint logical state `terms` of all input wires.
    pub fn with_input_terms(circuit: &Circuit, config: &RunConfig, rng: ChaCha20Rng, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        circuit.validate_structure()?;
        Self::build(circuit, config, rng, Some(terms))
    }

    fn build(circuit: &Circuit, config: &RunConfig, rng: ChaCha20Rng, input_terms: Option<Vec<(Vec<u32>, C64)>>) -> Result<Self> {
        let rules = KeyRules::new(circuit.q, config.d)?;
        if circuit.q as usize <= rules.m() || circuit.q >= 16 {
            return Err(Error::Parameter(alloc::format!("need m < q < 16, got q={} m={}", circuit.q, rules.m())));
        }
        let plan = plan(circuit)?;
        Ok(PolyVerifier {
            q: circuit.q,
            d: config.d,
            sign: SignKey::all_plus(rules.m()),
            rules,
            keys: vec![None; plan.registers],
            slots: vec![None; plan.slots],
            plan,
            input_terms,
            inputs: circuit.inputs.clone(),
            pc: 0,
            awaiting: None,
            blind: config.blind,
            verdict: None,
            output: None,
            abort_reason: None,
            occupancy: Occupancy::default(),
            rng,
            started: false,
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

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    /// Done: a verdict exists, or the plan ran out without an output
    /// measurement.
    pub fn is_finished(&self) -> bool {
        self.verdict.is_some() || (self.started && self.awaiting.is_none() && self.pc >= self.plan.steps.len())
    }

    pub(crate) fn final_register(&self, wire: usize) -> usize {
        self.plan.final_regs[wire]
    }

    pub(crate) fn key(&self, reg: usize) -> Option<&PolyAuthKey> {
        self.keys.get(reg).and_then(|k| k.as_ref())
    }

    pub(crate) fn code(&self) -> Result<SignedCode> {
        SignedCode::new(self.q, self.d, self.sign.clone())
    }

    fn fresh_key(&mut self, reg: usize) -> PolyAuthKey {
        let key = PolyAuthKey::random_pad(self.sign.clone(), self.q, &mut self.rng);
        self.keys[reg] = Some(key.clone());
        key
    }

    fn auth_message(&mut self, regs: Vec<usize>, logical: &[(Vec<u32>, C64)]) -> Result<Message> {
        let m = self.rules.m();
        self.occupancy.set(regs.len() * m);
        let keys: Vec<PolyAuthKey> = regs.iter().map(|r| self.fresh_key(*r)).collect();
        let mut terms = self.code()?.encode_terms(logical, regs.len())?;
        pad_terms(&mut terms, &keys.iter().collect::<Vec<_>>(), self.q);
        let payload = StatePayload::from_digit_terms(self.q, regs.len() * m, &terms)?;
        self.occupancy.set(0);
        Ok(Message::AuthState { registers: regs, payload: Payload::State(payload) })
    }

    /// The authentication phase followed by every instruction up to the
    /// first measurement request.
    pub fn start(&mut self) -> Result<Vec<Message>> {
        if self.started {
            return Err(Error::Parameter("verifier already started".into()));
        }
        self.started = true;
        self.occupancy.set(0);
        self.sign = SignKey::random(self.rules.m(), &mut self.rng);
        let mut out = Vec::new();
        let n = self.inputs.len();
        match self.input_terms.take() {
            Some(terms) => out.push(self.auth_message((0..n).collect(), &terms)?),
            None => {
                for j in 0..n {
                    let logical = [(vec![self.inputs[j]], C64::new(1.0, 0.0))];
                    out.push(self.auth_message(vec![j], &logical)?);
                }
            }
        }
        for t in self.plan.toffolis.clone() {
            out.push(self.auth_message(t.to_vec(), &toffoli_terms(self.q))?);
        }
        out.extend(self.run()?);
        Ok(out)
    }

    fn eval(&self, p: Power) -> u32 {
        let q = self.q as i64;
        let slot = |s: usize| self.slots[s].expect("slot filled before use") as i64;
        let v = match p {
            Power::Const(c) => c as i64,
            Power::Slot(s) => slot(s),
            Power::NegSlot(s) => -slot(s),
            Power::NegProduct(a, b) => -(slot(a) * slot(b)),
        };
        v.rem_euclid(q) as u32
    }

    fn key_mut(&mut self, reg: usize) -> Result<&mut PolyAuthKey> {
        self.keys[reg].as_mut().ok_or_else(|| Error::Parameter(alloc::format!("register {reg} is not live")))
    }

    fn update_one(&mut self, gate: KeyGate, reg: usize) -> Result<()> {
        let rules = self.rules.clone();
        rules.update(gate, &mut [self.key_mut(reg)?])
    }

    fn run(&mut self) -> Result<Vec<Message>> {
        let mut out = Vec::new();
        while self.verdict.is_none() && self.awaiting.is_none() && self.pc < self.plan.steps.len() {
            let step = self.plan.steps[self.pc];
            self.pc += 1;
            match step {
                Step::X { reg, power } => {
                    let p = self.eval(power);
                    self.update_one(KeyGate::X(p), reg)?;
                }
                Step::Z { reg, power } => {
                    let p = self.eval(power);
                    self.update_one(KeyGate::Z(p), reg)?;
                }
                Step::Sum { src, dst, power } => {
                    let p = self.eval(power);
                    out.push(Message::Apply { gate: ApplyGate::Sum, registers: vec![src, dst], power: p });
                    let mut a = self.keys[src].take().ok_or(Error::Parameter("source register is not live".into()))?;
                    let res = self.rules.update(KeyGate::Sum(p), &mut [&mut a, self.keys[dst].as_mut().ok_or(Error::Parameter("target register is not live".into()))?]);
                    self.keys[src] = Some(a);
                    res?;
                }
                Step::Fourier { reg } => {
                    out.push(Message::Apply { gate: ApplyGate::Fourier, registers: vec![reg], power: 1 });
                    self.update_one(KeyGate::Fourier, reg)?;
                }
                Step::FourierInverse { reg } => {
                    out.push(Message::Apply { gate: ApplyGate::FourierInverse, registers: vec![reg], power: 1 });
                    self.update_one(KeyGate::FourierInverse, reg)?;
                }
                Step::Measure { reg, slot, output } => {
                    let gate = if output { ApplyGate::MeasureOutput } else { ApplyGate::Measure };
                    out.push(Message::Apply { gate, registers: vec![reg], power: 0 });
                    self.awaiting = Some((reg, slot, output));
                }
            }
        }
        Ok(out)
    }

    /// Stop with ABORT; returns what the prover is told.
    pub fn abort(&mut self, reason: impl Into<String>) -> Vec<Message> {
        if self.verdict.is_some() {
            return Vec::new();
        }
        self.verdict = Some(ProtocolVerdict::Abort);
        self.abort_reason = Some(reason.into());
        self.awaiting = None;
        if self.blind {
            Vec::new()
        } else {
            vec![Message::Verdict { verdict: ProtocolVerdict::Abort }]
        }
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Vec<Message>> {
        if self.verdict.is_some() {
            return Ok(Vec::new());
        }
        let Message::Measured { register, outcomes } = msg else {
            return Ok(self.abort(alloc::format!("unexpected {} from the prover", msg.kind())));
        };
        let Some((reg, slot, output)) = self.awaiting else {
            return Ok(self.abort("unsolicited MEASURED"));
        };
        if *register != reg {
            return Ok(self.abort(alloc::format!("MEASURED for register {register}, expected {reg}")));
        }
        if outcomes.len() != self.rules.m() || outcomes.iter().any(|o| *o >= self.q) {
            return Ok(self.abort("malformed measurement report"));
        }
        self.awaiting = None;
        let key = self.keys[reg].take().ok_or(Error::Parameter("measured register is not live".into()))?;
        let value = interpret_measurement(outcomes, &key, self.q, self.d)?;
        let mut out = Vec::new();
        if !self.blind {
            out.push(Message::Interpreted { register: reg, value });
        }
        let Some(v) = value else {
            out.extend(self.abort(alloc::format!("register {reg} does not decode")));
            return Ok(out);
        };
        if let Some(s) = slot {
            self.slots[s] = Some(v);
        }
        if output {
            self.output = Some(v);
            let verdict = if super::accepts(v) { ProtocolVerdict::Accept } else { ProtocolVerdict::Reject };
            self.verdict = Some(verdict);
            if !self.blind {
                out.push(Message::Verdict { verdict });
            }
            return Ok(out);
        }
        out.extend(self.run()?);
        Ok(out)
    }
}

/// Reply of a prover link: messages, or a reason the prover broke the
/// protocol.
#[derive(Clone, Debug, PartialEq)]
pub enum LinkReply {
    Replies(Vec<Message>),
    Violation(String),
}

/// Transport from the verifier to a prover.
pub trait ProverLink {
    fn exchange(&mut self, msg: &Message) -> Result<LinkReply>;
}

/// A prover in the same process with its own kernel; the channel applies
/// optional depolarizing noise to transmitted states.
pub struct LocalLink<'a, P: Prover + ?Sized> {
    kernel: Kernel,
    prover: &'a mut P,
    rng: ChaCha20Rng,
    noise: f64,
    channel_rng: ChaCha20Rng,
}

impl<'a, P: Prover + ?Sized> LocalLink<'a, P> {
    pub fn new(q: u32, prover: &'a mut P, rng: ChaCha20Rng, noise: f64, channel_rng: ChaCha20Rng) -> Result<Self> {
        Ok(LocalLink { kernel: Kernel::new(q)?, prover, rng, noise, channel_rng })
    }

    pub fn kernel(&mut self) -> &mut Kernel {
        &mut self.kernel
    }

    pub fn prover(&mut self) -> &mut P {
        self.prover
    }
}

impl<P: Prover + ?Sized> ProverLink for LocalLink<'_, P> {
    fn exchange(&mut self, msg: &Message) -> Result<LinkReply> {
        let mut delivered = msg.clone();
        if let Message::AuthState { payload: Payload::State(p), .. } = &mut delivered {
            depolarize_payload(p, self.noise, &mut self.channel_rng);
        }
        let mut ctx = ProverContext::new(&mut self.kernel, &mut self.rng);
        Ok(match self.prover.handle(&mut ctx, &delivered) {
            Ok(r) => LinkReply::Replies(r),
            // the simulation ran out of room; that says nothing about the prover
            Err(e @ Error::TooLarge { .. }) => return Err(e),
            Err(e) => LinkReply::Violation(e.to_string()),
        })
    }
}

/// Drive a verifier against a prover link until it finishes.
pub fn drive(verifier: &mut PolyVerifier, link: &mut dyn ProverLink) -> Result<Transcript> {
    let mut t = Transcript::new(ProtocolKind::Poly);
    let mut outbox: VecDeque<Message> = verifier.start()?.into();
    loop {
        while let Some(msg) = outbox.pop_front() {
            t.push(Direction::VerifierToProver, msg.clone());
            let replies = match link.exchange(&msg)? {
                LinkReply::Replies(r) => r,
                LinkReply::Violation(reason) => {
                    outbox.clear();
                    outbox.extend(verifier.abort(alloc::format!("prover error: {reason}")));
                    continue;
                }
            };
            for r in replies {
                t.push(Direction::ProverToVerifier, r.clone());
                let next = verifier.handle(&r)?;
                if verifier.verdict() == Some(ProtocolVerdict::Abort) {
                    outbox.clear();
                }
                outbox.extend(next);
            }
        }
        if verifier.is_finished() {
            break;
        }
        outbox.extend(verifier.abort("prover sent no reply"));
        if outbox.is_empty() {
            break;
        }
    }
    t.verdict = verifier.verdict().unwrap_or(ProtocolVerdict::Abort);
    t.output = verifier.output();
    t.occupancy = verifier.occupancy().trace().to_vec();
    t.high_water = verifier.occupancy().high_water();
    t.abort_reason = verifier.abort_reason().map(String::from);
    Ok(t)
}

/// One in-process run of the polynomial protocol.
pub fn run_poly_qpip<P: Prover + ?Sized>(circuit: &Circuit, prover: &mut P, config: &RunConfig, seed: u64) -> Result<Transcript> {
    let (vrng, prng, crng) = run_rngs(seed);
    let mut verifier = PolyVerifier::new(circuit, config, vrng)?;
    let mut link = LocalLink::new(circuit.q, prover, prng, config.noise, crng)?;
    drive(&mut verifier, &mut link)
}

/// Run an honest execution of `circuit` (no output measurement needed) on
/// the joint logical input `terms`, then decode every unmeasured wire with
/// the verifier's keys. Returns the logical state of those wires in wire
/// order, with the wires' indices.
pub fn logical_output_state(circuit: &Circuit, terms: Vec<(Vec<u32>, C64)>, d: usize, seed: u64) -> Result<(PureState, Vec<usize>)> {
    let (vrng, prng, crng) = run_rngs(seed);
    let config = RunConfig::new(d);
    let mut verifier = PolyVerifier::with_input_terms(circuit, &config, vrng, terms)?;
    let mut prover = StandardProver::poly(circuit.q, d, super::Strategy::Honest)?;
    let mut link = LocalLink::new(circuit.q, &mut prover, prng, 0.0, crng)?;
    let t = drive(&mut verifier, &mut link)?;
    if t.verdict == ProtocolVerdict::Abort && t.abort_reason.is_some() {
        return Err(Error::Parameter(alloc::format!("honest run aborted: {:?}", t.abort_reason)));
    }
    let mut measured = vec![false; circuit.num_wires];
    for g in &circuit.gates {
        if let Gate::Measure(w) = g {
            measured[*w] = true;
        }
    }
    let code = verifier.code()?;
    let mut logical = Vec::new();
    let mut kept = Vec::new();
    for w in (0..circuit.num_wires).filter(|w| !measured[*w]) {
        let reg = verifier.final_register(w);
        let key = verifier.key(reg).ok_or(Error::Parameter("final register has no key".into()))?;
        let wires = link.prover().register_wires(reg)?;
        let s = link.kernel().raw_state();
        s.apply_pauli(&wires, &key.pad(circuit.q)?.inverse())?;
        let (lw, p) = code.decode_sparse(s, &wires)?;
        if (p - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(alloc::format!("register of wire {w} left the code space (p = {p})")));
        }
        logical.push(lw);
        kept.push(w);
    }
    let state = link.kernel().raw_state().to_dense(&logical)?;
    Ok((state, kept))
}
