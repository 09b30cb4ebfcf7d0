//! Signed quantum polynomial codes over `F_q`.
//!
//! For a sign string `k ∈ {±1}^m`, `m = 2d + 1`, the logical state `|a⟩`
//! is encoded as
//! `|S_a^k⟩ = q^{-d/2} Σ_{deg f ≤ d, f(0) = a} |k_1 f(α_1), …, k_m f(α_m)⟩`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::galois::{interpolation_coefficients, EvalPoints, FieldPolynomial, PrimeField};
use crate::linalg::{Matrix, ZERO};
use crate::qas_clifford::Verdict;
use crate::qsim::{PureState, SparseState, WireId};


/// Sign string `k ∈ {±1}^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignKey {
    negative: Vec<bool>,
}

impl SignKey {
    /// From a list of ±1 values.
    pub fn new(values: &[i8]) -> Result<Self> {
        if values.iter().any(|v| *v != 1 && *v != -1) {
            return Err(Error::Parameter("sign key entries must be ±1".into()));
        }
        Ok(Self { negative: values.iter().map(|v| *v == -1).collect() })
    }

    pub fn all_plus(m: usize) -> Self {
        Self { negative: vec![false; m] }
    }

    /// Bit `i` of `index` set ⇔ `k_i = −1`.
    pub fn from_index(m: usize, index: u64) -> Self {
        Self { negative: (0..m).map(|i| index >> i & 1 == 1).collect() }
    }

    /// All `2^m` keys in index order.
    pub fn all(m: usize) -> impl Iterator<Item = SignKey> {
        (0..1u64 << m).map(move |i| Self::from_index(m, i))
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self { negative: (0..m).map(|_| rng.gen()).collect() }
    }

    pub fn len(&self) -> usize {
        self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.negative.is_empty()
    }

    pub fn values(&self) -> Vec<i8> {
        self.negative.iter().map(|n| if *n { -1 } else { 1 }).collect()
    }

    /// Entries as elements of `F_q` (−1 ↦ q − 1).
    pub fn as_field(&self, q: u32) -> Vec<u32> {
        self.negative.iter().map(|n| if *n { q - 1 } else { 1 }).collect()
    }
}

/// Logical gates with a transversal implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalGate {
    X,
    Z,
    /// Logical SUM from the first register into the second.
    Sum,
    Fourier,
    FourierInverse,
}

/// Physical single- or two-wire gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhysicalOp {
    X { wire: usize, power: u32 },
    Z { wire: usize, power: u32 },
    Sum { control: usize, target: usize },
    Fourier { wire: usize, r: u32 },
    FourierInverse { wire: usize, r: u32 },
}

impl PhysicalOp {
    pub fn apply_dense(&self, s: &mut PureState) -> Result<()> {
        match *self {
            PhysicalOp::X { wire, power } => s.apply_x(wire, power),
            PhysicalOp::Z { wire, power } => s.apply_z(wire, power),
            PhysicalOp::Sum { control, target } => s.apply_sum(control, target),
            PhysicalOp::Fourier { wire, r } => s.apply_fourier_r(wire, r),
            PhysicalOp::FourierInverse { wire, r } => s.apply_fourier_r_inverse(wire, r),
        }
    }

    pub fn apply_sparse(&self, s: &mut SparseState) -> Result<()> {
        match *self {
            PhysicalOp::X { wire, power } => s.apply_x(wire, power),
            PhysicalOp::Z { wire, power } => s.apply_z(wire, power),
            PhysicalOp::Sum { control, target } => s.apply_sum(control, target),
            PhysicalOp::Fourier { wire, r } => s.apply_fourier_r(wire, r),
            PhysicalOp::FourierInverse { wire, r } => s.apply_fourier_r_inverse(wire, r),
        }
    }
}

/// The signed polynomial code `C_k` with parameters `(q, d)`.
#[derive(Clone, Debug)]
pub struct SignedCode {
    field: PrimeField,
    d: usize,
    points: EvalPoints,
    key: SignKey,
    c: Vec<u32>,
    // supports[a] = basis strings of |S_a⟩
    supports: Vec<Vec<Vec<u32>>>,
    // logical value of each codeword string
    lookup: BTreeMap<Vec<u32>, u32>,
}

impl SignedCode {
    /// Code with the default points `α_i = i`.
    pub fn new(q: u32, d: usize, key: SignKey) -> Result<Self> {
        let field = PrimeField::new(q)?;
        let points = EvalPoints::standard(field, 2 * d + 1)?;
        Self::with_points(points, d, key)
    }

    pub fn with_points(points: EvalPoints, d: usize, key: SignKey) -> Result<Self> {
        let field = points.field();
        let q = field.modulus();
        let m = 2 * d + 1;
        if points.len() != m || key.len() != m {
            return Err(Error::DimensionMismatch(alloc::format!("degree {d} needs {m} points and signs")));
        }
        if q as usize <= m {
            return Err(Error::Parameter(alloc::format!("code needs q > m, got q={q}, m={m}")));
        }
        let signs = key.as_field(q);
        let mut lookup = BTreeMap::new();
        let mut supports = Vec::with_capacity(q as usize);
        for a in field.elements() {
            let mut words = Vec::new();
            for f in FieldPolynomial::enumerate_with_constant(field, d, a) {
                let word: Vec<u32> = points.evaluate(&f).iter().zip(&signs).map(|(v, s)| (v.value() * s) % q).collect();
                lookup.insert(word.clone(), a.value());
                words.push(word);
            }
            supports.push(words);
        }
        let c = interpolation_coefficients(&points).iter().map(|x| x.value()).collect();
        Ok(Self { field, d, points, key, c, supports, lookup })
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        2 * self.d + 1
    }

    pub fn key(&self) -> &SignKey {
        &self.key
    }

    pub fn points(&self) -> &EvalPoints {
        &self.points
    }

    /// Interpolation coefficients `c_i` with `Σ c_i f(α_i) = f(0)`.
    pub fn interpolation_coefficients(&self) -> &[u32] {
        &self.c
    }

    /// Basis strings in the support of `|S_a⟩`.
    pub fn codewords(&self, a: u32) -> &[Vec<u32>] {
        &self.supports[a as usize]
    }

    /// `Some(a)` if `digits` lies in the support of `|S_a⟩`.
    pub fn logical_value(&self, digits: &[u32]) -> Option<u32> {
        if digits.len() != self.m() || digits.iter().any(|d| *d >= self.q()) {
            return None;
        }
        self.lookup.get(digits).copied()
    }

    fn amplitude(&self) -> f64 {
        1.0 / (self.q() as f64).powi(self.d as i32).sqrt()
    }

    /// Powers of the transversal logical X: `X^{k_i}` on wire `i`.
    pub fn x_powers(&self) -> Vec<u32> {
        self.key.as_field(self.q())
    }

    /// Powers of the transversal logical Z: `Z^{t_i}`, `t_i = c_i k_i`.
    pub fn z_powers(&self) -> Vec<u32> {
        let q = self.q();
        self.key.as_field(q).iter().zip(&self.c).map(|(k, c)| k * c % q).collect()
    }

    /// Encoding isometry `V_k` (`q^m × q`), columns `|S_a⟩`.
    pub fn isometry(&self) -> Result<Matrix> {
        let dim = crate::qsim::check_size(self.q(), self.m())?;
        let mut v = Matrix::zeros(dim, self.q() as usize);
        let amp = C64::new(self.amplitude(), 0.0);
        for (a, words) in self.supports.iter().enumerate() {
            for w in words {
                v[(index_of(self.q(), w), a)] = amp;
            }
        }
        Ok(v)
    }

    /// Encode a single logical qudit.
    pub fn encode(&self, logical: &PureState) -> Result<PureState> {
        if logical.q() != self.q() || logical.num_qudits() != 1 {
            return Err(Error::DimensionMismatch("logical input must be one qudit of the code's dimension".into()));
        }
        let terms = self.encode_terms(&dense_terms(logical), 1)?;
        let dim = crate::qsim::check_size(self.q(), self.m())?;
        let mut amps = vec![ZERO; dim];
        for (digits, a) in terms {
            amps[index_of(self.q(), &digits)] += a;
        }
        PureState::from_amplitudes(self.q(), self.m(), amps)
    }

    /// Encode a state of `registers` logical qudits given as sparse terms;
    /// register `j` occupies physical positions `j·m .. (j+1)·m`.
    pub fn encode_terms(&self, logical: &[(Vec<u32>, C64)], registers: usize) -> Result<Vec<(Vec<u32>, C64)>> {
        let m = self.m();
        let amp = self.amplitude().powi(registers as i32);
        let mut out = Vec::new();
        for (digits, a) in logical {
            if digits.len() != registers {
                return Err(Error::DimensionMismatch("logical term arity".into()));
            }
            // odometer over the q^d support strings of each register
            let per = self.supports[0].len();
            let mut idx = vec![0usize; registers];
            loop {
                let mut word = Vec::with_capacity(registers * m);
                for (j, v) in digits.iter().enumerate() {
                    word.extend_from_slice(&self.supports[*v as usize][idx[j]]);
                }
                out.push((word, a * amp));
                let mut j = registers;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < per {
                        break;
                    }
                    idx[j] = 0;
                }
                if idx.iter().all(|i| *i == 0) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Exact decoding: probability that the register passes the code-space
    /// check, and (if nonzero) the post-state with the register replaced by
    /// its logical qudit at the position of `wires[0]`.
    pub fn decode_exact(&self, state: &PureState, wires: &[usize]) -> Result<(f64, Option<PureState>)> {
        if wires.len() != self.m() || state.q() != self.q() {
            return Err(Error::DimensionMismatch("register does not match the code".into()));
        }
        let q = self.q() as usize;
        let front = state.reorder_to_front(wires)?;
        let rest_n = state.num_qudits() - wires.len();
        let rest_dim = q.pow(rest_n as u32);
        let amp = self.amplitude();
        let mut out = vec![ZERO; q * rest_dim];
        for (a, words) in self.supports.iter().enumerate() {
            for w in words {
                let base = index_of(self.q(), w) * rest_dim;
                for r in 0..rest_dim {
                    out[a * rest_dim + r] += front.amplitudes()[base + r] * amp;
                }
            }
        }
        let p: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        if p < 1e-24 {
            return Ok((0.0, None));
        }
        let logical_first = PureState::from_unnormalized(self.q(), rest_n + 1, out)?;
        // put the logical wire where wires[0] was, others in original order
        let rest: Vec<usize> = (0..state.num_qudits()).filter(|w| !wires.contains(w)).collect();
        let order: Vec<usize> = (0..state.num_qudits())
            .filter(|w| *w == wires[0] || !wires.contains(w))
            .map(|w| if w == wires[0] { 0 } else { 1 + rest.iter().position(|r| *r == w).expect("rest wire") })
            .collect();
        Ok((p, Some(logical_first.reorder_to_front(&order)?)))
    }

    /// Projective code-space check followed by `V_k†` on VALID.
    pub fn detect_and_decode<R: Rng + ?Sized>(&self, state: &PureState, wires: &[usize], rng: &mut R) -> Result<(Verdict, Option<PureState>)> {
        let (p, post) = self.decode_exact(state, wires)?;
        if rng.gen::<f64>() < p {
            Ok((Verdict::Valid, post))
        } else {
            Ok((Verdict::Abort, None))
        }
    }

    /// Coherent `V_k†` (after projecting onto the code space) on a register
    /// of a sparse state. Returns the logical wire and the probability of
    /// the code-space branch; the state is renormalized to that branch.
    pub fn decode_sparse(&self, s: &mut SparseState, wires: &[WireId]) -> Result<(WireId, f64)> {
        if wires.len() != self.m() || s.q() != self.q() {
            return Err(Error::DimensionMismatch("register does not match the code".into()));
        }
        let amp = C64::new(self.amplitude(), 0.0);
        let (out, p) = s.transform_register(wires, 1, |d| self.logical_value(d).map(|a| (vec![a], amp)))?;
        if p > 1e-24 {
            s.renormalize(out[0])?;
        }
        Ok((out[0], p))
    }

    /// Physical gates implementing `gate` on the given registers (one for
    /// X, Z, F; source then target for SUM). Registers of a SUM must use
    /// the same sign key.
    pub fn logical_ops(&self, gate: LogicalGate, registers: &[&[usize]]) -> Result<Vec<PhysicalOp>> {
        let arity = if gate == LogicalGate::Sum { 2 } else { 1 };
        if registers.len() != arity || registers.iter().any(|r| r.len() != self.m()) {
            return Err(Error::DimensionMismatch(alloc::format!("{gate:?} needs {arity} register(s) of {} wires", self.m())));
        }
        let r0 = registers[0];
        Ok(match gate {
            LogicalGate::X => r0.iter().zip(self.x_powers()).map(|(w, p)| PhysicalOp::X { wire: *w, power: p }).collect(),
            LogicalGate::Z => r0.iter().zip(self.z_powers()).map(|(w, p)| PhysicalOp::Z { wire: *w, power: p }).collect(),
            LogicalGate::Sum => r0.iter().zip(registers[1]).map(|(c, t)| PhysicalOp::Sum { control: *c, target: *t }).collect(),
            LogicalGate::Fourier => r0.iter().zip(&self.c).map(|(w, c)| PhysicalOp::Fourier { wire: *w, r: *c }).collect(),
            LogicalGate::FourierInverse => r0.iter().zip(&self.c).map(|(w, c)| PhysicalOp::FourierInverse { wire: *w, r: *c }).collect(),
        })
    }
}

pub(crate) fn index_of(q: u32, digits: &[u32]) -> usize {
    digits.iter().fold(0usize, |acc, d| acc * q as usize + *d as usize)
}

fn dense_terms(s: &PureState) -> Vec<(Vec<u32>, C64)> {
    s.amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| (crate::qsim::index_to_digits(s.q(), s.num_qudits(), i), *a))
        .collect()
}

/// `(1/q) Σ_{a,b} |a, b, ab⟩`.
pub fn toffoli_state(q: u32) -> Result<PureState> {
    let mut amps = vec![ZERO; crate::qsim::check_size(q, 3)?];
    let amp = C64::new(1.0 / q as f64, 0.0);
    for a in 0..q {
        for b in 0..q {
            amps[index_of(q, &[a, b, a * b % q])] = amp;
        }
    }
    PureState::from_amplitudes(q, 3, amps)
}

/// Sparse terms of the Toffoli state, for encoding.
pub fn toffoli_terms(q: u32) -> Vec<(Vec<u32>, C64)> {
    let amp = C64::new(1.0 / q as f64, 0.0);
    (0..q).flat_map(|a| (0..q).map(move |b| (vec![a, b, a * b % q], amp))).collect()
}
