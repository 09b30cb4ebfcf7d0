//! Blind mode and the yes/no wrapper.
//!
//! The universal circuit is a fixed gate list over data wires plus control
//! wires; a hidden circuit only changes the control inputs, which travel
//! authenticated like every other input.

use alloc::vec;
use alloc::vec::Vec;

use super::clifford::run_clifford_qpip;
use super::poly::run_poly_qpip;
use super::prover::Prover;
use super::{Circuit, Gate, Message, ProtocolKind, ProtocolVerdict, RunConfig, Transcript};
use crate::code_poly::SignKey;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qas_poly::prover_view;
use crate::qsim::{DensityMatrix, PureState};

/// One gate of a hidden circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HiddenGate {
    X(usize),
    Z(usize),
    /// `SUM` from the first wire into the second; needs a menu with sums.
    Sum(usize, usize),
}

/// Fixed circuit with `slots` gate positions over `data` wires.
///
/// Per slot and data wire `j` there is an X control (`SUM(ctrl, j)` adds
/// its value to `j`) and a Z control (the same conjugated by `F`). With
/// `with_sums` every ordered pair `(j, k)` also gets a control driving
/// `Toffoli(ctrl, j, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalCircuit {
    q: u32,
    data: usize,
    slots: usize,
    with_sums: bool,
    output: usize,
}

impl UniversalCircuit {
    pub fn new(q: u32, data: usize, slots: usize, with_sums: bool, output: usize) -> Result<Self> {
        if data == 0 || output >= data {
            return Err(Error::Parameter("output must be one of the data wires".into()));
        }
        if with_sums && data < 2 {
            return Err(Error::Parameter("sums need two data wires".into()));
        }
        Ok(UniversalCircuit { q, data, slots, with_sums, output })
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        if !self.with_sums {
            return Vec::new();
        }
        (0..self.data).flat_map(|j| (0..self.data).filter(move |k| *k != j).map(move |k| (j, k))).collect()
    }

    fn controls_per_slot(&self) -> usize {
        2 * self.data + self.pairs().len()
    }

    pub fn num_wires(&self) -> usize {
        self.data + self.slots * self.controls_per_slot()
    }

    /// The gate list with no final measurement.
    pub fn body(&self) -> Vec<Gate> {
        let mut gates = Vec::new();
        let per = self.controls_per_slot();
        for s in 0..self.slots {
            let base = self.data + s * per;
            for j in 0..self.data {
                gates.push(Gate::Sum(base + 2 * j, j));
                gates.extend([Gate::Fourier(j); 3]);
                gates.push(Gate::Sum(base + 2 * j + 1, j));
                gates.push(Gate::Fourier(j));
            }
            for (i, (j, k)) in self.pairs().into_iter().enumerate() {
                gates.push(Gate::Toffoli(base + 2 * self.data + i, j, k));
            }
        }
        gates
    }

    /// Control values encoding `hidden`; unused slots stay zero.
    pub fn controls(&self, hidden: &[HiddenGate]) -> Result<Vec<u32>> {
        if hidden.len() > self.slots {
            return Err(Error::Parameter(alloc::format!("{} gates do not fit in {} slots", hidden.len(), self.slots)));
        }
        let per = self.controls_per_slot();
        let pairs = self.pairs();
        let mut c = vec![0; self.slots * per];
        for (s, g) in hidden.iter().enumerate() {
            let idx = match *g {
                HiddenGate::X(j) if j < self.data => 2 * j,
                HiddenGate::Z(j) if j < self.data => 2 * j + 1,
                HiddenGate::Sum(j, k) => {
                    let i = pairs.iter().position(|p| *p == (j, k)).ok_or_else(|| Error::Unsupported(alloc::format!("{g:?} is not on the menu")))?;
                    2 * self.data + i
                }
                _ => return Err(Error::WireOutOfRange(self.data)),
            };
            c[s * per + idx] = 1;
        }
        Ok(c)
    }

    /// Inputs and gates without the final measurement, for oracle checks.
    pub fn unmeasured(&self, hidden: &[HiddenGate], data_inputs: &[u32]) -> Result<Circuit> {
        if data_inputs.len() != self.data {
            return Err(Error::DimensionMismatch("data inputs".into()));
        }
        let mut inputs = data_inputs.to_vec();
        inputs.extend(self.controls(hidden)?);
        let c = Circuit { q: self.q, num_wires: self.num_wires(), inputs, gates: self.body(), output: self.output };
        c.validate_structure()?;
        Ok(c)
    }

    /// The full instance: body followed by the output measurement.
    pub fn instance(&self, hidden: &[HiddenGate], data_inputs: &[u32]) -> Result<Circuit> {
        let mut c = self.unmeasured(hidden, data_inputs)?;
        c.gates.push(Gate::Measure(self.output));
        c.validate()?;
        Ok(c)
    }
}

/// Sign- and pad-averaged view of one authenticated register holding
/// `logical`.
pub fn averaged_register_view(logical: &PureState, d: usize) -> Result<DensityMatrix> {
    let m = 2 * d + 1;
    let mut acc: Option<Matrix> = None;
    let signs: Vec<SignKey> = SignKey::all(m).collect();
    let w = 1.0 / signs.len() as f64;
    for k in &signs {
        let v = prover_view(k, logical, d)?;
        match acc.as_mut() {
            None => acc = Some(v.matrix().scale(w.into())),
            Some(a) => a.add_assign_scaled(v.matrix(), w.into()),
        }
    }
    DensityMatrix::from_matrix(logical.q(), m, acc.expect("at least one sign key"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlindnessReport {
    /// Largest trace distance between prover views of corresponding
    /// registers across the compared runs.
    pub max_view_distance: f64,
    pub registers_compared: usize,
    /// Whether every run produced the same verifier-to-prover stream.
    pub streams_identical: bool,
    pub transcripts: Vec<Transcript>,
}

/// Compare what the prover sees across circuits of the same shape, all
/// run with the same seed and an honest prover. Input registers are
/// compared one at a time (keys are independent per register); Toffoli
/// states do not depend on the circuit.
pub fn blindness_check(circuits: &[Circuit], config: &RunConfig, seed: u64) -> Result<BlindnessReport> {
    let Some(first) = circuits.first() else {
        return Err(Error::Parameter("nothing to compare".into()));
    };
    if circuits.iter().any(|c| c.num_wires != first.num_wires || c.q != first.q) {
        return Err(Error::DimensionMismatch("circuits differ in shape".into()));
    }
    let mut views: Vec<Vec<DensityMatrix>> = Vec::new();
    let mut cache: Vec<(u32, DensityMatrix)> = Vec::new();
    for c in circuits {
        let mut per = Vec::new();
        for v in &c.inputs {
            let view = match cache.iter().find(|(k, _)| k == v) {
                Some((_, m)) => m.clone(),
                None => {
                    let m = averaged_register_view(&PureState::basis(c.q, &[*v])?, config.d)?;
                    cache.push((*v, m.clone()));
                    m
                }
            };
            per.push(view);
        }
        views.push(per);
    }
    let mut max = 0.0f64;
    for a in &views {
        for b in &views {
            for (x, y) in a.iter().zip(b) {
                max = max.max(x.trace_distance(y));
            }
        }
    }
    let mut transcripts = Vec::new();
    for c in circuits {
        let mut prover = super::StandardProver::poly(c.q, config.d, super::Strategy::Honest)?;
        transcripts.push(run_poly_qpip(c, &mut prover, config, seed)?);
    }
    let streams: Vec<Vec<Message>> = transcripts.iter().map(|t| t.instruction_stream()).collect();
    let streams_identical = streams.windows(2).all(|w| w[0] == w[1]);
    Ok(BlindnessReport { max_view_distance: max, registers_compared: first.num_wires, streams_identical, transcripts })
}

/// Run either protocol in-process.
pub fn run_qpip<P: Prover + ?Sized>(kind: ProtocolKind, circuit: &Circuit, prover: &mut P, config: &RunConfig, seed: u64) -> Result<Transcript> {
    match kind {
        ProtocolKind::Clifford => run_clifford_qpip(circuit, prover, config, seed),
        ProtocolKind::Poly => run_poly_qpip(circuit, prover, config, seed),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Claim {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Yes,
    No,
    Abort,
}

/// The prover opens with a claim; the verifier then checks the circuit
/// for that claim (the complement for "no") and adopts the claim only if
/// the run accepts.
pub fn symmetric_run<P: Prover + ?Sized>(kind: ProtocolKind, circuit: &Circuit, claim: Claim, prover: &mut P, config: &RunConfig, seed: u64) -> Result<(Decision, Transcript)> {
    let target = match claim {
        Claim::Yes => circuit.clone(),
        Claim::No => circuit.complement()?,
    };
    let t = run_qpip(kind, &target, prover, config, seed)?;
    let decision = match (t.verdict, claim) {
        (ProtocolVerdict::Accept, Claim::Yes) => Decision::Yes,
        (ProtocolVerdict::Accept, Claim::No) => Decision::No,
        _ => Decision::Abort,
    };
    Ok((decision, t))
}
