use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{amplitude_ceiling, check_size, DensityMatrix, PauliLabel};
use crate::error::{Error, Result};
use crate::linalg::{root_of_unity, Matrix, ONE, ZERO};

/// Dense state vector on `n` qudits of dimension `q`. Wire 0 is the most
/// significant digit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    q: u32,
    n: usize,
    amps: Vec<C64>,
}

/// Outcome of a standard-basis measurement.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcomes: Vec<u32>,
    pub collapsed: PureState,
    pub probability: f64,
}

impl PureState {
    /// `|0…0⟩`.
    pub fn zero(q: u32, n: usize) -> Result<Self> {
        Self::basis(q, &vec![0; n])
    }

    pub fn basis(q: u32, digits: &[u32]) -> Result<Self> {
        let n = digits.len();
        let dim = check_size(q, n)?;
        if let Some(d) = digits.iter().find(|&&d| d >= q) {
            return Err(Error::Parameter(alloc::format!("basis digit {d} ≥ q={q}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[digits_to_index(q, digits)] = ONE;
        Ok(Self { q, n, amps })
    }

    /// Wraps amplitudes that must already be normalized (within 1e-9).
    pub fn from_amplitudes(q: u32, n: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = check_size(q, n)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(alloc::format!("{} amplitudes for {} qudits of dimension {}", amps.len(), n, q)));
        }
        let state = Self { q, n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(alloc::format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Normalizes the given amplitudes.
    pub fn from_unnormalized(q: u32, n: usize, mut amps: Vec<C64>) -> Result<Self> {
        let dim = check_size(q, n)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(alloc::format!("{} amplitudes for {} qudits of dimension {}", amps.len(), n, q)));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::ZeroNormBranch);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { q, n, amps })
    }

    pub fn random<R: Rng + ?Sized>(q: u32, n: usize, rng: &mut R) -> Result<Self> {
        let dim = check_size(q, n)?;
        let amps = (0..dim).map(|_| C64::new(crate::linalg::gaussian(rng), crate::linalg::gaussian(rng))).collect();
        Self::from_unnormalized(q, n, amps)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn num_qudits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u32]) -> C64 {
        self.amps[digits_to_index(self.q, digits)]
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stride(&self, wire: usize) -> usize {
        (self.q as usize).pow((self.n - 1 - wire) as u32)
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire < self.n {
            Ok(())
        } else {
            Err(Error::WireOutOfRange(wire))
        }
    }

    fn check_distinct(&self, wires: &[usize]) -> Result<()> {
        for (i, w) in wires.iter().enumerate() {
            self.check_wire(*w)?;
            if wires[..i].contains(w) {
                return Err(Error::WireCollision);
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.amps.len(), other.amps.len(), "inner product of states of different size");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Canonical test equality: `|⟨φ|ψ⟩|` within `tol` of 1 and both normalized.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.q == other.q && self.n == other.n && (self.norm() - 1.0).abs() < tol && (other.norm() - 1.0).abs() < tol && (self.inner(other).norm() - 1.0).abs() < tol
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.q != other.q {
            return Err(Error::DimensionMismatch("tensor of states with different qudit dimension".into()));
        }
        let n = self.n + other.n;
        check_size(self.q, n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { q: self.q, n, amps })
    }

    pub fn apply_pauli(&mut self, p: &PauliLabel) -> Result<()> {
        if p.q() != self.q || p.len() != self.n {
            return Err(Error::DimensionMismatch(alloc::format!("Pauli on {} qudits (q={}) applied to {} qudits (q={})", p.len(), p.q(), self.n, self.q)));
        }
        for w in 0..self.n {
            if p.x()[w] != 0 {
                self.apply_x(w, p.x()[w])?;
            }
            if p.z()[w] != 0 {
                self.apply_z(w, p.z()[w])?;
            }
        }
        let phase = p.phase_factor();
        if p.phase() != 0 {
            self.amps.iter_mut().for_each(|a| *a *= phase);
        }
        Ok(())
    }

    /// `X^power` on `wire`: `|a⟩ → |a + power⟩`.
    pub fn apply_x(&mut self, wire: usize, power: u32) -> Result<()> {
        self.check_wire(wire)?;
        let q = self.q as usize;
        let shift = power as usize % q;
        if shift == 0 {
            return Ok(());
        }
        let stride = self.stride(wire);
        let block = stride * q;
        let mut scratch = vec![ZERO; q];
        for base in (0..self.amps.len()).step_by(block) {
            for off in 0..stride {
                for d in 0..q {
                    scratch[(d + shift) % q] = self.amps[base + off + d * stride];
                }
                for d in 0..q {
                    self.amps[base + off + d * stride] = scratch[d];
                }
            }
        }
        Ok(())
    }

    /// `Z^power` on `wire`: `|a⟩ → ω^{power·a}|a⟩`.
    pub fn apply_z(&mut self, wire: usize, power: u32) -> Result<()> {
        self.check_wire(wire)?;
        let q = self.q as usize;
        let phases: Vec<C64> = (0..q).map(|a| root_of_unity(self.q, power as i64 * a as i64)).collect();
        let stride = self.stride(wire);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            let d = (idx / stride) % q;
            if d != 0 {
                *amp *= phases[d];
            }
        }
        Ok(())
    }

    /// `F_r|a⟩ = q^{-1/2} Σ_b ω^{rab}|b⟩`.
    pub fn apply_fourier_r(&mut self, wire: usize, r: u32) -> Result<()> {
        if r.is_multiple_of(self.q) {
            return Err(Error::ZeroFourierParameter);
        }
        self.apply_unitary(&[wire], &fourier_matrix(self.q, r))
    }

    /// `F_r†`.
    pub fn apply_fourier_r_inverse(&mut self, wire: usize, r: u32) -> Result<()> {
        if r.is_multiple_of(self.q) {
            return Err(Error::ZeroFourierParameter);
        }
        self.apply_unitary(&[wire], &fourier_matrix(self.q, r).adjoint())
    }

    /// `|a, b⟩ → |a, b + a⟩` on (control, target).
    pub fn apply_sum(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply_sum_power(control, target, 1)
    }

    /// `|a, b⟩ → |a, b + power·a⟩`.
    pub fn apply_sum_power(&mut self, control: usize, target: usize, power: u32) -> Result<()> {
        self.check_distinct(&[control, target])?;
        let (q, cs, ts) = (self.q as usize, self.stride(control), self.stride(target));
        let power = power as usize % q;
        self.permute(|idx| {
            let a = (idx / cs) % q;
            let b = (idx / ts) % q;
            let nb = (b + power * a) % q;
            idx + nb * ts - b * ts
        });
        Ok(())
    }

    /// `|a, b, c⟩ → |a, b, c + ab⟩`.
    pub fn apply_toffoli(&mut self, a: usize, b: usize, c: usize) -> Result<()> {
        self.check_distinct(&[a, b, c])?;
        let q = self.q as usize;
        let (sa, sb, sc) = (self.stride(a), self.stride(b), self.stride(c));
        self.permute(|idx| {
            let va = (idx / sa) % q;
            let vb = (idx / sb) % q;
            let vc = (idx / sc) % q;
            let nc = (vc + va * vb) % q;
            idx + nc * sc - vc * sc
        });
        Ok(())
    }

    fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let mut out = vec![ZERO; self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            out[f(idx)] = *amp;
        }
        self.amps = out;
    }

    /// Apply a `q^k × q^k` matrix to `wires` (first listed wire most significant).
    pub fn apply_unitary(&mut self, wires: &[usize], u: &Matrix) -> Result<()> {
        self.check_distinct(wires)?;
        let q = self.q as usize;
        let k = wires.len();
        let sub = q.pow(k as u32);
        if u.rows() != sub || u.cols() != sub {
            return Err(Error::DimensionMismatch(alloc::format!("{}x{} matrix on {} wires", u.rows(), u.cols(), k)));
        }
        let strides: Vec<usize> = wires.iter().map(|&w| self.stride(w)).collect();
        let offsets: Vec<usize> = (0..sub)
            .map(|s| {
                let mut rem = s;
                let mut off = 0;
                for j in (0..k).rev() {
                    off += (rem % q) * strides[j];
                    rem /= q;
                }
                off
            })
            .collect();
        let mut buf = vec![ZERO; sub];
        for base in 0..self.amps.len() {
            if strides.iter().any(|&s| (base / s) % q != 0) {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                buf[s] = self.amps[base + off];
            }
            let out = u.apply(&buf);
            for (s, off) in offsets.iter().enumerate() {
                self.amps[base + off] = out[s];
            }
        }
        Ok(())
    }

    /// Marginal distribution of the standard-basis outcomes on `wires`,
    /// indexed by the outcome digits read as a base-q number.
    pub fn outcome_distribution(&self, wires: &[usize]) -> Result<Vec<f64>> {
        self.check_distinct(wires)?;
        let q = self.q as usize;
        let strides: Vec<usize> = wires.iter().map(|&w| self.stride(w)).collect();
        let mut probs = vec![0.0; q.pow(wires.len() as u32)];
        for (idx, amp) in self.amps.iter().enumerate() {
            let key = strides.iter().fold(0, |acc, s| acc * q + (idx / s) % q);
            probs[key] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Projects `wires` onto `outcomes`; returns the branch probability and
    /// the renormalized state.
    pub fn project(&self, wires: &[usize], outcomes: &[u32]) -> Result<(f64, PureState)> {
        self.check_distinct(wires)?;
        if wires.len() != outcomes.len() {
            return Err(Error::DimensionMismatch("one outcome per measured wire".into()));
        }
        let q = self.q as usize;
        let strides: Vec<usize> = wires.iter().map(|&w| self.stride(w)).collect();
        let mut amps = self.amps.clone();
        for (idx, amp) in amps.iter_mut().enumerate() {
            if strides.iter().zip(outcomes).any(|(s, o)| (idx / s) % q != *o as usize) {
                *amp = ZERO;
            }
        }
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p < 1e-24 {
            return Err(Error::ZeroNormBranch);
        }
        let norm = p.sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok((p, PureState { q: self.q, n: self.n, amps }))
    }

    /// Born-rule measurement of `wires` in the standard basis.
    pub fn measure_standard<R: Rng + ?Sized>(&self, wires: &[usize], rng: &mut R) -> Result<Measurement> {
        let probs = self.outcome_distribution(wires)?;
        let key = sample_index(&probs, rng)?;
        let outcomes = index_to_digits(self.q, wires.len(), key);
        let (probability, collapsed) = self.project(wires, &outcomes)?;
        Ok(Measurement { outcomes, collapsed, probability })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.amps.len();
        let mut m = Matrix::zeros(dim, dim);
        for r in 0..dim {
            if self.amps[r] == ZERO {
                continue;
            }
            for c in 0..dim {
                m[(r, c)] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix::from_matrix_unchecked(self.q, self.n, m)
    }

    /// Partial trace onto `keep` (in the listed order).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.check_distinct(keep)?;
        if keep.is_empty() {
            return Err(Error::Parameter("reduced density needs at least one wire".into()));
        }
        let q = self.q as usize;
        let rest: Vec<usize> = (0..self.n).filter(|w| !keep.contains(w)).collect();
        let kd = q.pow(keep.len() as u32);
        let rd = q.pow(rest.len() as u32);
        // reshape into a kd × rd matrix, then ρ = M M†
        let ks: Vec<usize> = keep.iter().map(|&w| self.stride(w)).collect();
        let rs: Vec<usize> = rest.iter().map(|&w| self.stride(w)).collect();
        let mut mat = vec![ZERO; kd * rd];
        for (idx, amp) in self.amps.iter().enumerate() {
            let k = ks.iter().fold(0, |acc, s| acc * q + (idx / s) % q);
            let r = rs.iter().fold(0, |acc, s| acc * q + (idx / s) % q);
            mat[k * rd + r] = *amp;
        }
        let mut rho = Matrix::zeros(kd, kd);
        for i in 0..kd {
            for j in 0..kd {
                let mut acc = ZERO;
                for r in 0..rd {
                    acc += mat[i * rd + r] * mat[j * rd + r].conj();
                }
                rho[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(self.q, keep.len(), rho))
    }

    /// Move `wires` (in order) to the front, keeping the others in order.
    pub fn reorder_to_front(&self, wires: &[usize]) -> Result<PureState> {
        self.check_distinct(wires)?;
        let mut order: Vec<usize> = wires.to_vec();
        order.extend((0..self.n).filter(|w| !wires.contains(w)));
        let q = self.q as usize;
        let strides: Vec<usize> = order.iter().map(|&w| self.stride(w)).collect();
        let mut amps = vec![ZERO; self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            let new = strides.iter().fold(0, |acc, s| acc * q + (idx / s) % q);
            amps[new] = *amp;
        }
        Ok(PureState { q: self.q, n: self.n, amps })
    }

    /// Discards wires that are known to be in the basis state `digits`
    /// (e.g. right after measuring them). Errors if they are not.
    pub fn drop_basis_wires(&self, wires: &[usize], digits: &[u32]) -> Result<PureState> {
        let (p, _) = self.project(wires, digits)?;
        if (p - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("dropped wires are not in a definite basis state".into()));
        }
        let front = self.reorder_to_front(wires)?;
        let q = self.q as usize;
        let rest_n = self.n - wires.len();
        let rd = q.pow(rest_n as u32);
        let offset = digits_to_index(self.q, digits) * rd;
        Ok(PureState { q: self.q, n: rest_n, amps: front.amps[offset..offset + rd].to_vec() })
    }

    pub fn ceiling() -> u128 {
        amplitude_ceiling()
    }
}

pub(crate) fn digits_to_index(q: u32, digits: &[u32]) -> usize {
    digits.iter().fold(0usize, |acc, &d| acc * q as usize + d as usize)
}

pub(crate) fn index_to_digits(q: u32, n: usize, mut idx: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for w in (0..n).rev() {
        out[w] = (idx % q as usize) as u32;
        idx /= q as usize;
    }
    out
}

/// Inverse-CDF sampling over an unnormalized weight vector.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if total < 1e-24 {
        return Err(Error::ZeroNormBranch);
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        last = i;
        if u < *w {
            return Ok(i);
        }
        u -= w;
    }
    Ok(last)
}

/// Matrix of `F_r`.
pub fn fourier_matrix(q: u32, r: u32) -> Matrix {
    let dim = q as usize;
    let s = 1.0 / (q as f64).sqrt();
    let mut m = Matrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            m[(b, a)] = root_of_unity(q, r as i64 * a as i64 * b as i64) * s;
        }
    }
    m
}
