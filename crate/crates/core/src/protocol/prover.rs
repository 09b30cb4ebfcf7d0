use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::keys::KeyRules;
use super::{ApplyGate, Kernel, Message, Party, Payload, StatePayload};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qsim::{PauliLabel, WireId};

/// What a prover may do: act on wires it holds and allocate its own.
pub struct ProverContext<'a> {
    kernel: &'a mut Kernel,
    rng: &'a mut dyn RngCore,
}

impl<'a> ProverContext<'a> {
    pub fn new(kernel: &'a mut Kernel, rng: &'a mut dyn RngCore) -> Self {
        ProverContext { kernel, rng }
    }

    pub fn q(&self) -> u32 {
        self.kernel.q()
    }

    pub fn rng(&mut self) -> &mut dyn RngCore {
        self.rng
    }

    pub fn load(&mut self, payload: &StatePayload) -> Result<Vec<WireId>> {
        if payload.q != self.q() {
            return Err(Error::DimensionMismatch("payload dimension".into()));
        }
        self.kernel.alloc_terms(Party::Prover, payload.n, &payload.digit_terms())
    }

    pub fn alloc(&mut self, digits: &[u32]) -> Result<Vec<WireId>> {
        self.kernel.alloc(Party::Prover, digits)
    }

    pub fn apply_x(&mut self, w: WireId, power: u32) -> Result<()> {
        self.kernel.state_for(Party::Prover, &[w])?.apply_x(w, power)
    }

    pub fn apply_z(&mut self, w: WireId, power: u32) -> Result<()> {
        self.kernel.state_for(Party::Prover, &[w])?.apply_z(w, power)
    }

    pub fn apply_sum_power(&mut self, control: WireId, target: WireId, power: u32) -> Result<()> {
        self.kernel.state_for(Party::Prover, &[control, target])?.apply_sum_power(control, target, power)
    }

    pub fn apply_fourier(&mut self, w: WireId, r: u32) -> Result<()> {
        self.kernel.state_for(Party::Prover, &[w])?.apply_fourier_r(w, r)
    }

    pub fn apply_fourier_inverse(&mut self, w: WireId, r: u32) -> Result<()> {
        self.kernel.state_for(Party::Prover, &[w])?.apply_fourier_r_inverse(w, r)
    }

    pub fn apply_pauli(&mut self, wires: &[WireId], p: &PauliLabel) -> Result<()> {
        self.kernel.state_for(Party::Prover, wires)?.apply_pauli(wires, p)
    }

    pub fn apply_unitary(&mut self, wires: &[WireId], u: &Matrix) -> Result<()> {
        self.kernel.state_for(Party::Prover, wires)?.apply_unitary(wires, u)
    }

    pub fn measure(&mut self, wires: &[WireId]) -> Result<Vec<u32>> {
        self.kernel.measure(Party::Prover, wires, &mut *self.rng)
    }
}

/// A prover reacts to each verifier message with zero or more replies.
/// Errors count as protocol violations and make the verifier abort.
pub trait Prover {
    fn handle(&mut self, ctx: &mut ProverContext<'_>, msg: &Message) -> Result<Vec<Message>>;
}

/// Deviations from the honest prover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Honest,
    /// Apply `P_{x,z}` to the first register named in instruction number
    /// `round` (counting from 0), before carrying it out.
    FixedPauli { round: usize, x: Vec<u32>, z: Vec<u32> },
    /// Shift every wire of the output register by one before it is
    /// measured (polynomial) or handed back for measurement (Clifford).
    OutputFlip,
    /// Report uniformly random measurement outcomes.
    RandomReport,
    /// At instruction `round`, swap the first named register for fresh
    /// random basis states.
    StateSwap { round: usize },
}

/// Honest behavior plus one of the [`Strategy`] deviations.
#[derive(Clone, Debug)]
pub struct StandardProver {
    strategy: Strategy,
    register_len: usize,
    rules: Option<KeyRules>,
    registers: BTreeMap<usize, Vec<WireId>>,
    round: usize,
}

impl StandardProver {
    pub fn poly(q: u32, d: usize, strategy: Strategy) -> Result<Self> {
        let rules = KeyRules::new(q, d)?;
        Self::build(rules.m(), Some(rules), strategy)
    }

    pub fn clifford(d: usize, strategy: Strategy) -> Result<Self> {
        if strategy == Strategy::RandomReport {
            return Err(Error::Unsupported("the Clifford prover never reports measurements".into()));
        }
        Self::build(1 + d, None, strategy)
    }

    fn build(register_len: usize, rules: Option<KeyRules>, strategy: Strategy) -> Result<Self> {
        if let Strategy::FixedPauli { x, z, .. } = &strategy {
            if x.len() != register_len || z.len() != register_len {
                return Err(Error::DimensionMismatch(alloc::format!("attack must cover {register_len} wires")));
            }
        }
        Ok(StandardProver { strategy, register_len, rules, registers: BTreeMap::new(), round: 0 })
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// Wires the prover currently files under register `r`.
    pub fn register_wires(&self, r: usize) -> Result<Vec<WireId>> {
        self.wires(r)
    }

    fn wires(&self, r: usize) -> Result<Vec<WireId>> {
        self.registers.get(&r).cloned().ok_or_else(|| Error::Parameter(alloc::format!("no register {r}")))
    }

    fn store(&mut self, registers: &[usize], wires: &[WireId]) -> Result<()> {
        if wires.len() != registers.len() * self.register_len {
            return Err(Error::DimensionMismatch("register payload size".into()));
        }
        for (r, chunk) in registers.iter().zip(wires.chunks(self.register_len)) {
            self.registers.insert(*r, chunk.to_vec());
        }
        Ok(())
    }

    fn before_instruction(&mut self, ctx: &mut ProverContext<'_>, registers: &[usize]) -> Result<()> {
        let round = self.round;
        self.round += 1;
        let Some(first) = registers.first() else { return Ok(()) };
        match &self.strategy {
            Strategy::FixedPauli { round: t, x, z } if *t == round => {
                let wires = self.wires(*first)?;
                ctx.apply_pauli(&wires, &PauliLabel::new(ctx.q(), x.clone(), z.clone())?)?;
            }
            Strategy::StateSwap { round: t } if *t == round => {
                let q = ctx.q();
                let junk: Vec<u32> = (0..self.register_len).map(|_| ctx.rng().gen_range(0..q)).collect();
                let fresh = ctx.alloc(&junk)?;
                self.registers.insert(*first, fresh);
            }
            _ => {}
        }
        Ok(())
    }
}

impl Prover for StandardProver {
    fn handle(&mut self, ctx: &mut ProverContext<'_>, msg: &Message) -> Result<Vec<Message>> {
        match msg {
            Message::AuthState { registers, payload } => {
                let wires = match payload {
                    Payload::State(p) => ctx.load(p)?,
                    Payload::Wires(w) => w.clone(),
                };
                self.store(registers, &wires)?;
                Ok(Vec::new())
            }
            Message::Apply { gate, registers, power } => {
                self.before_instruction(ctx, registers)?;
                match gate {
                    ApplyGate::Sum => {
                        let [src, dst] = registers.as_slice() else { return Err(Error::Parameter("SUM names two registers".into())) };
                        let (a, b) = (self.wires(*src)?, self.wires(*dst)?);
                        for (c, t) in a.iter().zip(&b) {
                            ctx.apply_sum_power(*c, *t, *power)?;
                        }
                        Ok(Vec::new())
                    }
                    ApplyGate::Fourier | ApplyGate::FourierInverse => {
                        let rules = self.rules.as_ref().ok_or_else(|| Error::Unsupported("transversal Fourier needs the code".into()))?;
                        for r in registers {
                            for (w, c) in self.wires(*r)?.iter().zip(rules.coefficients()) {
                                if *gate == ApplyGate::Fourier {
                                    ctx.apply_fourier(*w, *c)?;
                                } else {
                                    ctx.apply_fourier_inverse(*w, *c)?;
                                }
                            }
                        }
                        Ok(Vec::new())
                    }
                    ApplyGate::Measure | ApplyGate::MeasureOutput => {
                        let [r] = registers.as_slice() else { return Err(Error::Parameter("MEASURE names one register".into())) };
                        let wires = self.wires(*r)?;
                        if *gate == ApplyGate::MeasureOutput && self.strategy == Strategy::OutputFlip {
                            for w in &wires {
                                ctx.apply_x(*w, 1)?;
                            }
                        }
                        let mut outcomes = ctx.measure(&wires)?;
                        if self.strategy == Strategy::RandomReport {
                            let q = ctx.q();
                            outcomes.iter_mut().for_each(|o| *o = ctx.rng().gen_range(0..q));
                        }
                        self.registers.remove(r);
                        Ok(alloc::vec![Message::Measured { register: *r, outcomes }])
                    }
                }
            }
            Message::Request { registers, output } => {
                self.before_instruction(ctx, registers)?;
                let mut replies = Vec::new();
                for r in registers {
                    let wires = self.wires(*r)?;
                    if *output && self.strategy == Strategy::OutputFlip {
                        ctx.apply_x(wires[0], 1)?;
                    }
                    self.registers.remove(r);
                    replies.push(Message::Return { register: *r, wires });
                }
                Ok(replies)
            }
            Message::Interpreted { .. } | Message::Verdict { .. } => Ok(Vec::new()),
            Message::Return { .. } | Message::Measured { .. } => Err(Error::Parameter("prover-to-verifier message sent to the prover".into())),
        }
    }
}
