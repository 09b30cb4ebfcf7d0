use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{amplitude_ceiling, fourier_matrix, PauliLabel, PureState};
use crate::error::{Error, Result};
use crate::linalg::{root_of_unity, Matrix, ONE, ZERO};

/// Handle of a wire inside a [`SparseState`]. Ids are never reused.
pub type WireId = usize;

const BITS: u32 = 4;
const MAX_WIRES_PER_FACTOR: usize = (128 / BITS) as usize;
const PRUNE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Live { factor: usize, pos: usize },
    Measured(u32),
    Released,
}

#[derive(Clone, Debug, PartialEq)]
struct Factor {
    wires: Vec<WireId>,
    // distinct keys in no particular order; digit at position p sits in
    // bits [4p, 4p+4)
    terms: Vec<(u128, C64)>,
}

/// A product of sparse factors over qudits of dimension `q < 16`.
///
/// Wires that never interacted live in separate factors; a multi-wire gate
/// merges the factors it touches. Measured wires are projected out and
/// removed, so long protocol runs stay small as long as the live
/// entanglement does.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    q: u32,
    slots: Vec<Slot>,
    factors: Vec<Option<Factor>>,
}

#[inline]
fn digit(key: u128, pos: usize) -> u32 {
    ((key >> (BITS as usize * pos)) & 0xF) as u32
}

#[inline]
fn with_digit(key: u128, pos: usize, d: u32) -> u128 {
    let shift = BITS as usize * pos;
    (key & !(0xFu128 << shift)) | ((d as u128) << shift)
}

fn sort_and_combine(terms: &mut Vec<(u128, C64)>) {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Vec<(u128, C64)> = Vec::with_capacity(terms.len());
    for (k, a) in terms.drain(..) {
        match out.last_mut() {
            Some((lk, la)) if *lk == k => *la += a,
            _ => out.push((k, a)),
        }
    }
    out.retain(|(_, a)| a.norm() > PRUNE);
    *terms = out;
}

impl SparseState {
    pub fn new(q: u32) -> Result<Self> {
        if !(2..16).contains(&q) {
            return Err(Error::Parameter(alloc::format!("sparse states need 2 ≤ q < 16, got {q}")));
        }
        Ok(Self { q, slots: Vec::new(), factors: Vec::new() })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Fresh wire in the basis state `|digit⟩`.
    pub fn alloc(&mut self, digit: u32) -> Result<WireId> {
        Ok(self.alloc_terms(1, [(vec![digit], ONE)])?[0])
    }

    /// Fresh register of `n` wires holding `Σ amp |digits⟩`. Amplitudes are
    /// taken as given (callers pass normalized states).
    pub fn alloc_terms<I, D>(&mut self, n: usize, terms: I) -> Result<Vec<WireId>>
    where
        I: IntoIterator<Item = (D, C64)>,
        D: AsRef<[u32]>,
    {
        if n == 0 || n > MAX_WIRES_PER_FACTOR {
            return Err(Error::Parameter(alloc::format!("register of {n} wires")));
        }
        let mut packed = Vec::new();
        for (digits, amp) in terms {
            let digits = digits.as_ref();
            if digits.len() != n {
                return Err(Error::DimensionMismatch(alloc::format!("term with {} digits for {} wires", digits.len(), n)));
            }
            let mut key = 0u128;
            for (p, &d) in digits.iter().enumerate() {
                if d >= self.q {
                    return Err(Error::Parameter(alloc::format!("digit {d} ≥ q={}", self.q)));
                }
                key = with_digit(key, p, d);
            }
            packed.push((key, amp));
        }
        sort_and_combine(&mut packed);
        if packed.is_empty() {
            return Err(Error::ZeroNormBranch);
        }
        let factor = self.factors.len();
        let first = self.slots.len();
        let wires: Vec<WireId> = (first..first + n).collect();
        for pos in 0..n {
            self.slots.push(Slot::Live { factor, pos });
        }
        self.factors.push(Some(Factor { wires: wires.clone(), terms: packed }));
        Ok(wires)
    }

    /// Fresh register holding a dense state (wire 0 of `state` first).
    pub fn alloc_dense(&mut self, state: &PureState) -> Result<Vec<WireId>> {
        if state.q() != self.q {
            return Err(Error::DimensionMismatch("dense state with different q".into()));
        }
        let n = state.num_qudits();
        let terms = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > PRUNE)
            .map(|(i, a)| (super::index_to_digits(self.q, n, i), *a))
            .collect::<Vec<_>>();
        self.alloc_terms(n, terms)
    }

    pub fn is_live(&self, w: WireId) -> bool {
        matches!(self.slots.get(w), Some(Slot::Live { .. }))
    }

    pub fn measured_value(&self, w: WireId) -> Option<u32> {
        match self.slots.get(w) {
            Some(Slot::Measured(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn live_wires(&self) -> impl Iterator<Item = WireId> + '_ {
        (0..self.slots.len()).filter(|&w| self.is_live(w))
    }

    /// Total number of stored terms over all factors.
    pub fn num_terms(&self) -> usize {
        self.factors.iter().flatten().map(|f| f.terms.len()).sum()
    }

    /// Wires sharing a factor with `w`.
    pub fn factor_wires(&self, w: WireId) -> Result<Vec<WireId>> {
        let (f, _) = self.locate(w)?;
        Ok(self.factor(f).wires.clone())
    }

    fn locate(&self, w: WireId) -> Result<(usize, usize)> {
        match self.slots.get(w) {
            Some(Slot::Live { factor, pos }) => Ok((*factor, *pos)),
            _ => Err(Error::WireOutOfRange(w)),
        }
    }

    fn factor(&self, f: usize) -> &Factor {
        self.factors[f].as_ref().expect("live slot points at a live factor")
    }

    fn factor_mut(&mut self, f: usize) -> &mut Factor {
        self.factors[f].as_mut().expect("live slot points at a live factor")
    }

    fn check_distinct(&self, wires: &[WireId]) -> Result<()> {
        for (i, w) in wires.iter().enumerate() {
            self.locate(*w)?;
            if wires[..i].contains(w) {
                return Err(Error::WireCollision);
            }
        }
        Ok(())
    }

    /// Merge the factors holding `wires` into one; returns its index and the
    /// positions of `wires` inside it.
    fn merge(&mut self, wires: &[WireId]) -> Result<(usize, Vec<usize>)> {
        self.check_distinct(wires)?;
        let mut ids: Vec<usize> = Vec::new();
        for w in wires {
            let (f, _) = self.locate(*w)?;
            if !ids.contains(&f) {
                ids.push(f);
            }
        }
        let target = ids[0];
        for &other in &ids[1..] {
            let (lw, rw) = (self.factor(target).wires.len(), self.factor(other).wires.len());
            if lw + rw > MAX_WIRES_PER_FACTOR {
                return Err(Error::Unsupported(alloc::format!("entangled block of {} wires", lw + rw)));
            }
            let count = self.factor(target).terms.len() as u128 * self.factor(other).terms.len() as u128;
            let limit = amplitude_ceiling();
            if count > limit {
                return Err(Error::TooLarge { amps: count, limit });
            }
            let right = self.factors[other].take().expect("merging a live factor");
            let left = self.factor_mut(target);
            let shift = BITS as usize * lw;
            let mut terms = Vec::with_capacity(count as usize);
            for (lk, la) in &left.terms {
                for (rk, ra) in &right.terms {
                    terms.push((lk | (rk << shift), la * ra));
                }
            }
            left.terms = terms;
            left.wires.extend(&right.wires);
            for (i, w) in right.wires.iter().enumerate() {
                self.slots[*w] = Slot::Live { factor: target, pos: lw + i };
            }
        }
        let positions = wires.iter().map(|w| self.locate(*w).map(|(_, p)| p)).collect::<Result<Vec<_>>>()?;
        Ok((target, positions))
    }

    /// Apply a classical reversible map to the digits of `wires`. The map
    /// is checked to be a bijection on all `q^k` local digit strings.
    pub fn apply_permutation(&mut self, wires: &[WireId], f: impl Fn(&mut [u32])) -> Result<()> {
        let q = self.q;
        let k = wires.len();
        let local = crate::qsim::check_size(q, k)?;
        let mut seen = vec![false; local];
        let mut buf = vec![0u32; k];
        for i in 0..local {
            let mut rem = i;
            for b in buf.iter_mut().rev() {
                *b = (rem % q as usize) as u32;
                rem /= q as usize;
            }
            f(&mut buf);
            let image = buf.iter().fold(0usize, |acc, b| acc * q as usize + (b % q) as usize);
            if core::mem::replace(&mut seen[image], true) {
                return Err(Error::Parameter("map is not a permutation".into()));
            }
        }
        let (fi, pos) = self.merge(wires)?;
        let factor = self.factor_mut(fi);
        for (key, _) in factor.terms.iter_mut() {
            for (b, p) in buf.iter_mut().zip(&pos) {
                *b = digit(*key, *p);
            }
            f(&mut buf);
            for (b, p) in buf.iter().zip(&pos) {
                *key = with_digit(*key, *p, b % q);
            }
        }
        Ok(())
    }

    /// Multiply each term by `f(digits of wires)`.
    pub fn apply_diagonal(&mut self, wires: &[WireId], f: impl Fn(&[u32]) -> C64) -> Result<()> {
        let (fi, pos) = self.merge(wires)?;
        let mut buf = vec![0u32; wires.len()];
        for (key, amp) in self.factor_mut(fi).terms.iter_mut() {
            for (b, p) in buf.iter_mut().zip(&pos) {
                *b = digit(*key, *p);
            }
            *amp *= f(&buf);
        }
        Ok(())
    }

    pub fn apply_x(&mut self, w: WireId, power: u32) -> Result<()> {
        let p = power % self.q;
        if p == 0 {
            return self.locate(w).map(|_| ());
        }
        let q = self.q;
        self.apply_permutation(&[w], |d| d[0] = (d[0] + p) % q)
    }

    pub fn apply_z(&mut self, w: WireId, power: u32) -> Result<()> {
        let p = power % self.q;
        if p == 0 {
            return self.locate(w).map(|_| ());
        }
        let q = self.q;
        self.apply_diagonal(&[w], |d| root_of_unity(q, p as i64 * d[0] as i64))
    }

    pub fn apply_sum(&mut self, control: WireId, target: WireId) -> Result<()> {
        self.apply_sum_power(control, target, 1)
    }

    /// `|a, b⟩ → |a, b + power·a⟩`.
    pub fn apply_sum_power(&mut self, control: WireId, target: WireId, power: u32) -> Result<()> {
        let q = self.q;
        let p = power % q;
        self.apply_permutation(&[control, target], |d| d[1] = (d[1] + p * d[0]) % q)
    }

    pub fn apply_toffoli(&mut self, a: WireId, b: WireId, c: WireId) -> Result<()> {
        let q = self.q;
        self.apply_permutation(&[a, b, c], |d| d[2] = (d[2] + d[0] * d[1]) % q)
    }

    pub fn apply_swap(&mut self, a: WireId, b: WireId) -> Result<()> {
        self.apply_permutation(&[a, b], |d| d.swap(0, 1))
    }

    pub fn apply_fourier_r(&mut self, w: WireId, r: u32) -> Result<()> {
        if r.is_multiple_of(self.q) {
            return Err(Error::ZeroFourierParameter);
        }
        self.apply_unitary(&[w], &fourier_matrix(self.q, r))
    }

    pub fn apply_fourier_r_inverse(&mut self, w: WireId, r: u32) -> Result<()> {
        if r.is_multiple_of(self.q) {
            return Err(Error::ZeroFourierParameter);
        }
        self.apply_unitary(&[w], &fourier_matrix(self.q, r).adjoint())
    }

    /// Apply `Z^{z_j} X^{x_j}` on `wires[j]` plus the label's global phase.
    pub fn apply_pauli(&mut self, wires: &[WireId], p: &PauliLabel) -> Result<()> {
        if p.q() != self.q || p.len() != wires.len() {
            return Err(Error::DimensionMismatch("Pauli label does not match the wires".into()));
        }
        self.check_distinct(wires)?;
        for (j, w) in wires.iter().enumerate() {
            self.apply_x(*w, p.x()[j])?;
            self.apply_z(*w, p.z()[j])?;
        }
        if p.phase() != 0 {
            if let Some(w) = wires.first() {
                let phase = p.phase_factor();
                let (fi, _) = self.locate(*w)?;
                self.factor_mut(fi).terms.iter_mut().for_each(|t| t.1 *= phase);
            }
        }
        Ok(())
    }

    /// Apply a `q^k × q^k` matrix to `wires` (first listed wire most significant).
    pub fn apply_unitary(&mut self, wires: &[WireId], u: &Matrix) -> Result<()> {
        let k = wires.len();
        let sub = (self.q as usize).pow(k as u32);
        if u.rows() != sub || u.cols() != sub {
            return Err(Error::DimensionMismatch(alloc::format!("{}x{} matrix on {} wires", u.rows(), u.cols(), k)));
        }
        let (fi, pos) = self.merge(wires)?;
        let q = self.q as usize;
        let limit = amplitude_ceiling();
        let columns: Vec<Vec<(usize, C64)>> = (0..sub).map(|c| (0..sub).filter(|&r| u[(r, c)].norm() > 0.0).map(|r| (r, u[(r, c)])).collect()).collect();
        let factor = self.factor_mut(fi);
        let mut out = Vec::new();
        for (key, amp) in &factor.terms {
            let col = pos.iter().fold(0usize, |acc, p| acc * q + digit(*key, *p) as usize);
            for (row, v) in &columns[col] {
                let mut nk = *key;
                let mut rem = *row;
                for p in pos.iter().rev() {
                    nk = with_digit(nk, *p, (rem % q) as u32);
                    rem /= q;
                }
                out.push((nk, amp * v));
            }
            if out.len() as u128 > limit.saturating_mul(2) {
                return Err(Error::TooLarge { amps: out.len() as u128, limit });
            }
        }
        sort_and_combine(&mut out);
        if out.len() as u128 > limit {
            return Err(Error::TooLarge { amps: out.len() as u128, limit });
        }
        factor.terms = out;
        Ok(())
    }

    /// Exact outcome distribution of a joint standard-basis measurement of
    /// `wires`, as (outcome digits, probability) in lexicographic order.
    pub fn outcome_distribution(&mut self, wires: &[WireId]) -> Result<Vec<(Vec<u32>, f64)>> {
        let (fi, pos) = self.merge(wires)?;
        let factor = self.factor(fi);
        let total: f64 = factor.terms.iter().map(|t| t.1.norm_sqr()).sum();
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (key, amp) in &factor.terms {
            let out: Vec<u32> = pos.iter().map(|p| digit(*key, *p)).collect();
            *acc.entry(out).or_insert(0.0) += amp.norm_sqr() / total;
        }
        Ok(acc.into_iter().collect())
    }

    /// Born-rule measurement; measured wires are removed from the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, wires: &[WireId], rng: &mut R) -> Result<Vec<u32>> {
        let dist = self.outcome_distribution(wires)?;
        let weights: Vec<f64> = dist.iter().map(|d| d.1).collect();
        let pick = super::sample_index(&weights, rng)?;
        let outcome = dist[pick].0.clone();
        self.postselect(wires, &outcome)?;
        Ok(outcome)
    }

    /// Project `wires` onto `outcomes`, renormalize and remove the wires.
    /// Returns the probability of the branch.
    pub fn postselect(&mut self, wires: &[WireId], outcomes: &[u32]) -> Result<f64> {
        if wires.len() != outcomes.len() {
            return Err(Error::DimensionMismatch("one outcome per measured wire".into()));
        }
        let (fi, pos) = self.merge(wires)?;
        let factor = self.factor_mut(fi);
        let total: f64 = factor.terms.iter().map(|t| t.1.norm_sqr()).sum();
        factor.terms.retain(|(key, _)| pos.iter().zip(outcomes).all(|(p, o)| digit(*key, *p) == *o));
        let kept: f64 = factor.terms.iter().map(|t| t.1.norm_sqr()).sum();
        if kept <= 1e-24 * total.max(1e-300) || kept == 0.0 {
            return Err(Error::ZeroNormBranch);
        }
        let scale = (total / kept).sqrt();
        factor.terms.iter_mut().for_each(|t| t.1 *= scale);
        self.remove_positions(fi, &pos);
        for (w, o) in wires.iter().zip(outcomes) {
            self.slots[*w] = Slot::Measured(*o);
        }
        Ok(kept / total)
    }

    /// Drop digits at `pos` (which must be constant across terms, e.g. right
    /// after a projection) from factor `fi`.
    fn remove_positions(&mut self, fi: usize, pos: &[usize]) {
        let factor = self.factors[fi].as_mut().expect("live factor");
        let keep: Vec<usize> = (0..factor.wires.len()).filter(|p| !pos.contains(p)).collect();
        for (key, _) in factor.terms.iter_mut() {
            let mut nk = 0u128;
            for (i, p) in keep.iter().enumerate() {
                nk = with_digit(nk, i, digit(*key, *p));
            }
            *key = nk;
        }
        let wires: Vec<WireId> = keep.iter().map(|p| factor.wires[*p]).collect();
        if wires.is_empty() {
            self.factors[fi] = None;
            return;
        }
        for (i, w) in wires.iter().enumerate() {
            self.slots[*w] = Slot::Live { factor: fi, pos: i };
        }
        self.factors[fi].as_mut().expect("live factor").wires = wires;
    }

    /// Replace the register `wires` by `out_len` fresh wires through a
    /// (generally non-unitary) linear map given on basis states:
    /// `|digits⟩ → amp |out⟩`, or annihilated when `f` returns `None`.
    /// Images of different inputs add up. The state is left unnormalized;
    /// the returned value is the squared norm of the affected factor
    /// divided by its norm before the map.
    pub fn transform_register(
        &mut self,
        wires: &[WireId],
        out_len: usize,
        f: impl Fn(&[u32]) -> Option<(Vec<u32>, C64)>,
    ) -> Result<(Vec<WireId>, f64)> {
        if out_len == 0 {
            return Err(Error::Parameter("transform to an empty register".into()));
        }
        let (fi, pos) = self.merge(wires)?;
        let width = self.factor(fi).wires.len();
        if width - wires.len() + out_len > MAX_WIRES_PER_FACTOR {
            return Err(Error::Unsupported("register transform exceeds the factor width".into()));
        }
        let keep: Vec<usize> = (0..width).filter(|p| !pos.contains(p)).collect();
        let factor = self.factor(fi);
        let before: f64 = factor.terms.iter().map(|t| t.1.norm_sqr()).sum();
        let mut buf = vec![0u32; wires.len()];
        let mut out = Vec::with_capacity(factor.terms.len());
        for (key, amp) in &factor.terms {
            for (b, p) in buf.iter_mut().zip(&pos) {
                *b = digit(*key, *p);
            }
            if let Some((digits, v)) = f(&buf) {
                if digits.len() != out_len {
                    return Err(Error::DimensionMismatch("transform produced wrong arity".into()));
                }
                let mut nk = 0u128;
                for (i, p) in keep.iter().enumerate() {
                    nk = with_digit(nk, i, digit(*key, *p));
                }
                for (i, d) in digits.iter().enumerate() {
                    nk = with_digit(nk, keep.len() + i, d % self.q);
                }
                out.push((nk, amp * v));
            }
        }
        sort_and_combine(&mut out);
        let after: f64 = out.iter().map(|t| t.1.norm_sqr()).sum();
        let old_wires = self.factor(fi).wires.clone();
        for w in wires {
            self.slots[*w] = Slot::Released;
        }
        let first = self.slots.len();
        let new_wires: Vec<WireId> = (first..first + out_len).collect();
        let mut all: Vec<WireId> = keep.iter().map(|p| old_wires[*p]).collect();
        all.extend(&new_wires);
        for (i, w) in all.iter().enumerate() {
            if *w >= first {
                self.slots.push(Slot::Live { factor: fi, pos: i });
            } else {
                self.slots[*w] = Slot::Live { factor: fi, pos: i };
            }
        }
        if out.is_empty() {
            // the whole branch was annihilated; keep a zero factor so callers
            // see probability 0 rather than a dangling register
            out.push((0, ZERO));
        }
        let factor = self.factor_mut(fi);
        factor.wires = all;
        factor.terms = out;
        Ok((new_wires, if before > 0.0 { after / before } else { 0.0 }))
    }

    /// Rescale the factor holding `w` to unit norm.
    pub fn renormalize(&mut self, w: WireId) -> Result<()> {
        let (fi, _) = self.locate(w)?;
        let factor = self.factor_mut(fi);
        let norm = factor.terms.iter().map(|t| t.1.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::ZeroNormBranch);
        }
        factor.terms.iter_mut().for_each(|t| t.1 /= norm);
        Ok(())
    }

    /// Dense copy of the joint state of `wires`, which must make up whole
    /// factors (i.e. not be entangled with anything else).
    pub fn to_dense(&mut self, wires: &[WireId]) -> Result<PureState> {
        let (fi, pos) = self.merge(wires)?;
        let factor = self.factor(fi);
        if factor.wires.len() != wires.len() {
            return Err(Error::Unsupported("wires are entangled with other live wires".into()));
        }
        let q = self.q;
        let dim = super::check_size(q, wires.len())?;
        let mut amps = vec![ZERO; dim];
        for (key, amp) in &factor.terms {
            let idx = pos.iter().fold(0usize, |acc, p| acc * q as usize + digit(*key, *p) as usize);
            amps[idx] = *amp;
        }
        PureState::from_unnormalized(q, wires.len(), amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Run the same random gate sequence on a dense and a sparse state.
    #[test]
    fn agrees_with_dense_simulation() {
        let q = 5u32;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let init = PureState::random(q, 2, &mut rng).unwrap();
            let mut dense = init.tensor(&PureState::basis(q, &[1, 3]).unwrap()).unwrap();
            let mut sparse = SparseState::new(q).unwrap();
            let mut w = sparse.alloc_dense(&init).unwrap();
            w.push(sparse.alloc(1).unwrap());
            w.push(sparse.alloc(3).unwrap());
            for _ in 0..12 {
                let a = rng.gen_range(0..4);
                let b = (a + rng.gen_range(1..4)) % 4;
                let c = (0..4).find(|x| *x != a && *x != b).unwrap();
                let p = rng.gen_range(1..q);
                match rng.gen_range(0..6) {
                    0 => {
                        dense.apply_x(a, p).unwrap();
                        sparse.apply_x(w[a], p).unwrap();
                    }
                    1 => {
                        dense.apply_z(a, p).unwrap();
                        sparse.apply_z(w[a], p).unwrap();
                    }
                    2 => {
                        dense.apply_sum(a, b).unwrap();
                        sparse.apply_sum(w[a], w[b]).unwrap();
                    }
                    3 => {
                        dense.apply_fourier_r(a, p).unwrap();
                        sparse.apply_fourier_r(w[a], p).unwrap();
                    }
                    4 => {
                        dense.apply_toffoli(a, b, c).unwrap();
                        sparse.apply_toffoli(w[a], w[b], w[c]).unwrap();
                    }
                    _ => {
                        let u = Matrix::random_unitary(25, &mut rng);
                        dense.apply_unitary(&[a, b], &u).unwrap();
                        sparse.apply_unitary(&[w[a], w[b]], &u).unwrap();
                    }
                }
            }
            let got = sparse.to_dense(&w).unwrap();
            assert!(got.approx_eq_up_to_phase(&dense, 1e-9));
            let exact = dense.outcome_distribution(&[2]).unwrap();
            let dist = sparse.outcome_distribution(&[w[2]]).unwrap();
            for (o, p) in dist {
                assert!((exact[o[0] as usize] - p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn measurement_removes_wires() {
        let q = 5u32;
        let mut s = SparseState::new(q).unwrap();
        let amps: Vec<(Vec<u32>, C64)> = (0..q).map(|b| (vec![b, b], C64::new(1.0 / 5f64.sqrt(), 0.0))).collect();
        let w = s.alloc_terms(2, amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = s.measure(&[w[0]], &mut rng).unwrap();
        assert_eq!(s.measured_value(w[0]), Some(out[0]));
        assert!(!s.is_live(w[0]));
        let rest = s.to_dense(&[w[1]]).unwrap();
        assert!(rest.approx_eq_up_to_phase(&PureState::basis(q, &out).unwrap(), 1e-12));
        assert!(s.apply_x(w[0], 1).is_err());
    }

    #[test]
    fn transform_register_decodes_repetition() {
        // |000⟩+|111⟩ over qubits decoded to a single wire
        let mut s = SparseState::new(2).unwrap();
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let w = s.alloc_terms(3, [(vec![0, 0, 0], h), (vec![1, 1, 1], h)]).unwrap();
        let (out, p) = s
            .transform_register(&w, 1, |d| if d.iter().all(|x| *x == d[0]) { Some((vec![d[0]], ONE)) } else { None })
            .unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let dense = s.to_dense(&out).unwrap();
        assert!((dense.amplitude(&[1]) - h).norm() < 1e-12);
    }

    #[test]
    fn entangled_export_is_refused() {
        let mut s = SparseState::new(3).unwrap();
        let a = s.alloc(0).unwrap();
        let b = s.alloc(0).unwrap();
        s.apply_fourier_r(a, 1).unwrap();
        s.apply_sum(a, b).unwrap();
        assert!(s.to_dense(&[a]).is_err());
        assert!(s.to_dense(&[a, b]).is_ok());
    }

    #[test]
    fn non_bijective_maps_are_refused() {
        let mut s = SparseState::new(5).unwrap();
        let a = s.alloc(1).unwrap();
        let b = s.alloc(2).unwrap();
        // the support alone would not reveal the collision
        assert!(s.apply_permutation(&[a, b], |d| d[1] = d[0] * d[1] % 5).is_err());
        assert!(s.apply_permutation(&[a], |d| d[0] = 0).is_err());
        s.apply_permutation(&[a, b], |d| d[1] = (d[1] + 2 * d[0]) % 5).unwrap();
        assert!((s.to_dense(&[a, b]).unwrap().amplitude(&[1, 4]).re - 1.0).abs() < 1e-12);
    }
}
