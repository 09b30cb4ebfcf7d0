//! Qubit Clifford group as stabilizer tableaus.
//!
//! A tableau stores the images `C† X_j C` and `C† Z_j C` of the generators,
//! with their signs; this is the decoding-direction conjugation used
//! throughout the crate. A Clifford is fixed up to global phase by its
//! tableau.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, ONE, ZERO};
use crate::qsim::{PauliLabel, PureState};

/// Largest register accepted by the sampler.
pub const MAX_SAMPLED_QUBITS: usize = 12;

/// Elementary qubit Clifford gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CliffordGate {
    H(usize),
    /// Phase gate `diag(1, i)`.
    K(usize),
    Kdg(usize),
    X(usize),
    Z(usize),
    /// CNOT (control, target).
    Cnot(usize, usize),
}

impl CliffordGate {
    pub fn inverse(self) -> CliffordGate {
        match self {
            CliffordGate::K(w) => CliffordGate::Kdg(w),
            CliffordGate::Kdg(w) => CliffordGate::K(w),
            g => g,
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(w) | CliffordGate::K(w) | CliffordGate::Kdg(w) | CliffordGate::X(w) | CliffordGate::Z(w) => vec![w],
            CliffordGate::Cnot(c, t) => vec![c, t],
        }
    }

    /// Local matrix on `wires()` (first wire most significant).
    pub fn local_matrix(&self) -> Matrix {
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            CliffordGate::H(_) => Matrix::from_rows(2, 2, vec![h, h, h, -h]),
            CliffordGate::K(_) => Matrix::from_rows(2, 2, vec![ONE, ZERO, ZERO, i]),
            CliffordGate::Kdg(_) => Matrix::from_rows(2, 2, vec![ONE, ZERO, ZERO, -i]),
            CliffordGate::X(_) => Matrix::from_rows(2, 2, vec![ZERO, ONE, ONE, ZERO]),
            CliffordGate::Z(_) => Matrix::from_rows(2, 2, vec![ONE, ZERO, ZERO, -ONE]),
            CliffordGate::Cnot(..) => {
                let mut m = Matrix::zeros(4, 4);
                for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
                    m[(r, c)] = ONE;
                }
                m
            }
        }
    }

    /// Images `g† X g`, `g† Z g` of the local generators, ordered
    /// `[X_0, Z_0]` or `[X_c, X_t, Z_c, Z_t]`.
    fn local_images(&self) -> Vec<PauliLabel> {
        let l = |x: &[u32], z: &[u32], phase: u32| PauliLabel::with_phase(2, x.to_vec(), z.to_vec(), phase).expect("valid qubit label");
        match self {
            CliffordGate::H(_) => vec![l(&[0], &[1], 0), l(&[1], &[0], 0)],
            // K† X K = −Y = i·ZX, K X K† = Y = −i·ZX
            CliffordGate::K(_) => vec![l(&[1], &[1], 1), l(&[0], &[1], 0)],
            CliffordGate::Kdg(_) => vec![l(&[1], &[1], 3), l(&[0], &[1], 0)],
            CliffordGate::X(_) => vec![l(&[1], &[0], 0), l(&[0], &[1], 2)],
            CliffordGate::Z(_) => vec![l(&[1], &[0], 2), l(&[0], &[1], 0)],
            CliffordGate::Cnot(..) => vec![l(&[1, 1], &[0, 0], 0), l(&[0, 1], &[0, 0], 0), l(&[0, 0], &[1, 0], 0), l(&[0, 0], &[1, 1], 0)],
        }
    }
}

/// Dense `2^n × 2^n` matrix of a gate.
pub fn gate_matrix(gate: CliffordGate, n: usize) -> Result<Matrix> {
    let wires = gate.wires();
    let local = gate.local_matrix();
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let digits: Vec<u32> = (0..n).map(|w| ((col >> (n - 1 - w)) & 1) as u32).collect();
        let mut s = PureState::basis(2, &digits)?;
        s.apply_unitary(&wires, &local)?;
        for (r, a) in s.amplitudes().iter().enumerate() {
            m[(r, col)] = *a;
        }
    }
    Ok(m)
}

/// Hermitian qubit Pauli `(−1)^sign ⊗σ_j` where `σ_j ∈ {I, X, Y, Z}` is
/// selected by `(x_j, z_j)`.
pub fn hermitian_pauli(x: Vec<u32>, z: Vec<u32>, sign: bool) -> PauliLabel {
    // Y = −i·ZX, so each Y contributes phase 3 (units of π/2)
    let ys = x.iter().zip(&z).filter(|(a, b)| **a == 1 && **b == 1).count() as u32;
    PauliLabel::with_phase(2, x, z, 3 * ys + if sign { 2 } else { 0 }).expect("valid qubit label")
}

/// Sign of a Hermitian qubit label, `None` if the label is not Hermitian.
pub fn hermitian_sign(p: &PauliLabel) -> Option<bool> {
    let ys = p.x().iter().zip(p.z()).filter(|(a, b)| **a == 1 && **b == 1).count() as u32;
    match (p.phase() + 4 - (3 * ys) % 4) % 4 {
        0 => Some(false),
        2 => Some(true),
        _ => None,
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliffordTableau {
    n: usize,
    // images[j] = C† X_j C, images[n + j] = C† Z_j C
    images: Vec<PauliLabel>,
}

impl core::fmt::Debug for CliffordTableau {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut d = f.debug_struct("CliffordTableau");
        for j in 0..self.n {
            d.field("x", &self.images[j]).field("z", &self.images[self.n + j]);
        }
        d.finish()
    }
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let mut images = Vec::with_capacity(2 * n);
        for j in 0..n {
            images.push(PauliLabel::single_x(2, n, j, 1));
        }
        for j in 0..n {
            images.push(PauliLabel::single_z(2, n, j, 1));
        }
        Self { n, images }
    }

    /// Builds a tableau from generator images, validating the symplectic
    /// relations and Hermiticity.
    pub fn from_images(x_images: Vec<PauliLabel>, z_images: Vec<PauliLabel>) -> Result<Self> {
        let n = x_images.len();
        if z_images.len() != n || x_images.iter().chain(&z_images).any(|p| p.q() != 2 || p.len() != n) {
            return Err(Error::DimensionMismatch("tableau images must be n-qubit labels".into()));
        }
        let mut images = x_images;
        images.extend(z_images);
        let t = Self { n, images };
        if !t.is_valid() {
            return Err(Error::Parameter("images do not define a Clifford".into()));
        }
        Ok(t)
    }

    /// Tableau of the circuit applying `gates` in order.
    pub fn from_gates(n: usize, gates: &[CliffordGate]) -> Result<Self> {
        let mut t = Self::identity(n);
        for g in gates {
            t.append(*g)?;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, j: usize) -> &PauliLabel {
        &self.images[j]
    }

    pub fn z_image(&self, j: usize) -> &PauliLabel {
        &self.images[self.n + j]
    }

    fn check_gate(&self, g: CliffordGate) -> Result<Vec<usize>> {
        let wires = g.wires();
        if let Some(w) = wires.iter().find(|w| **w >= self.n) {
            return Err(Error::WireOutOfRange(*w));
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(Error::WireCollision);
        }
        Ok(wires)
    }

    /// `C ← g·C` (gate applied after the current circuit).
    pub fn append(&mut self, g: CliffordGate) -> Result<()> {
        let wires = self.check_gate(g)?;
        let k = wires.len();
        // new image of a generator on the gate wires = T_C(g† P g), which is
        // a product of current images of the gate-wire generators
        let local = g.local_images();
        let old: Vec<PauliLabel> = wires.iter().map(|w| self.images[*w].clone()).chain(wires.iter().map(|w| self.images[self.n + *w].clone())).collect();
        for (slot, img) in local.iter().enumerate() {
            let mut acc = PauliLabel::with_phase(2, vec![0; self.n], vec![0; self.n], img.phase())?;
            for j in 0..k {
                if img.z()[j] == 1 {
                    acc = acc.mul(&old[k + j])?;
                }
                if img.x()[j] == 1 {
                    acc = acc.mul(&old[j])?;
                }
            }
            let target = if slot < k { wires[slot] } else { self.n + wires[slot - k] };
            self.images[target] = acc;
        }
        Ok(())
    }

    /// `C ← C·g` (gate applied before the current circuit).
    pub fn prepend(&mut self, g: CliffordGate) -> Result<()> {
        let wires = self.check_gate(g)?;
        for img in self.images.iter_mut() {
            *img = conjugate_local(g, &wires, img)?;
        }
        Ok(())
    }

    /// `C† P C`, phase included.
    pub fn conjugate_pauli(&self, p: &PauliLabel) -> Result<PauliLabel> {
        if p.q() != 2 || p.len() != self.n {
            return Err(Error::DimensionMismatch(alloc::format!("{}-qubit tableau applied to a {}-wire label (q={})", self.n, p.len(), p.q())));
        }
        let mut acc = PauliLabel::with_phase(2, vec![0; self.n], vec![0; self.n], p.phase())?;
        for j in 0..self.n {
            if p.z()[j] == 1 {
                acc = acc.mul(&self.images[self.n + j])?;
            }
            if p.x()[j] == 1 {
                acc = acc.mul(&self.images[j])?;
            }
        }
        Ok(acc)
    }

    /// Tableau of "apply `self`, then `next`".
    pub fn then(&self, next: &CliffordTableau) -> Result<CliffordTableau> {
        if next.n != self.n {
            return Err(Error::DimensionMismatch("composing tableaus of different size".into()));
        }
        let images = next.images.iter().map(|img| self.conjugate_pauli(img)).collect::<Result<Vec<_>>>()?;
        Ok(CliffordTableau { n: self.n, images })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Images are Hermitian and satisfy the canonical commutation relations.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        if self.images.iter().any(|p| hermitian_sign(p).is_none()) {
            return false;
        }
        for a in 0..2 * n {
            for b in 0..2 * n {
                let anti = a != b && a % n == b % n;
                if self.images[a].commutes_with(&self.images[b]) == anti {
                    return false;
                }
            }
        }
        true
    }

    /// Gate sequence (in time order) implementing this tableau.
    pub fn to_gates(&self) -> Vec<CliffordGate> {
        let mut t = self.clone();
        let mut reducers: Vec<CliffordGate> = Vec::new();
        let mut push = |t: &mut CliffordTableau, g: CliffordGate| {
            t.prepend(g).expect("gate on a valid wire");
            reducers.push(g);
        };
        let n = self.n;
        for j in 0..n {
            // X_j image → ±X_j
            for k in j..n {
                let a = &t.images[j];
                match (a.x()[k], a.z()[k]) {
                    (0, 1) => push(&mut t, CliffordGate::H(k)),
                    (1, 1) => push(&mut t, CliffordGate::K(k)),
                    _ => {}
                }
            }
            if t.images[j].x()[j] == 0 {
                let k = (j + 1..n).find(|&k| t.images[j].x()[k] == 1).expect("X image has support beyond fixed qubits");
                push(&mut t, CliffordGate::Cnot(k, j));
            }
            for k in j + 1..n {
                if t.images[j].x()[k] == 1 {
                    push(&mut t, CliffordGate::Cnot(j, k));
                }
            }
            // Z_j image → ±Z_j
            for k in j + 1..n {
                let b = &t.images[n + j];
                match (b.x()[k], b.z()[k]) {
                    (1, 0) => push(&mut t, CliffordGate::H(k)),
                    (1, 1) => {
                        push(&mut t, CliffordGate::K(k));
                        push(&mut t, CliffordGate::H(k));
                    }
                    _ => {}
                }
            }
            for k in j + 1..n {
                if t.images[n + j].z()[k] == 1 {
                    push(&mut t, CliffordGate::Cnot(k, j));
                }
            }
            if t.images[n + j].x()[j] == 1 {
                push(&mut t, CliffordGate::H(j));
                push(&mut t, CliffordGate::K(j));
                push(&mut t, CliffordGate::H(j));
            }
            if hermitian_sign(&t.images[j]) == Some(true) {
                push(&mut t, CliffordGate::Z(j));
            }
            if hermitian_sign(&t.images[n + j]) == Some(true) {
                push(&mut t, CliffordGate::X(j));
            }
        }
        debug_assert!(t.is_identity(), "synthesis must reduce to the identity");
        // C·g_1⋯g_k = I, so C = g_k†⋯g_1†: apply g_1† first
        reducers.into_iter().map(CliffordGate::inverse).collect()
    }

    pub fn inverse(&self) -> CliffordTableau {
        let gates: Vec<CliffordGate> = self.to_gates().into_iter().rev().map(CliffordGate::inverse).collect();
        Self::from_gates(self.n, &gates).expect("synthesized gates are in range")
    }

    /// Dense unitary (up to global phase) for `n ≤ 3`.
    pub fn to_unitary(&self) -> Result<Matrix> {
        if self.n > 3 {
            return Err(Error::Unsupported(alloc::format!("dense export of a {}-qubit Clifford", self.n)));
        }
        let mut u = Matrix::identity(1 << self.n);
        for g in self.to_gates() {
            u = gate_matrix(g, self.n)?.matmul(&u);
        }
        Ok(u)
    }

    /// Uniformly random Clifford; see [`CliffordTableau::from_key`].
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Ok(Self::random_with_key(n, rng)?.0)
    }

    /// Uniformly random Clifford together with its replay key string.
    pub fn random_with_key<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Self, String)> {
        check_sampled_size(n)?;
        let mut choices = Vec::with_capacity(2 * n + 1);
        let mut sweep = SymplecticSweep::new(n);
        for _ in 0..n {
            let span = 1u64 << sweep.dim();
            let a = rng.gen_range(1..span);
            let va = sweep.vector(a);
            let b = loop {
                let b = rng.gen_range(0..span);
                if symplectic(va, sweep.vector(b), n) {
                    break b;
                }
            };
            sweep.take(a, b);
            choices.push(a);
            choices.push(b);
        }
        choices.push(rng.gen_range(0..1u64 << (2 * n)));
        let t = sweep.finish(choices[2 * n]);
        Ok((t, encode_key(n, &choices)))
    }

    /// Replays a key produced by [`CliffordTableau::random_with_key`].
    ///
    /// The key is `2n + 1` zero-padded decimal fields of equal width (the
    /// digit count of `4^n − 1`): for each qubit the coefficient vector of
    /// the X image within the remaining symplectic subspace, then that of
    /// the Z image, and last the `2n` sign bits.
    pub fn from_key(n: usize, key: &str) -> Result<Self> {
        check_sampled_size(n)?;
        let width = key_width(n);
        if key.len() != (2 * n + 1) * width || !key.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::KeyFormat(alloc::format!("expected {} decimal digits", (2 * n + 1) * width)));
        }
        let fields: Vec<u64> = (0..2 * n + 1).map(|i| key[i * width..(i + 1) * width].parse::<u64>().expect("ascii digits")).collect();
        let mut sweep = SymplecticSweep::new(n);
        for i in 0..n {
            let span = 1u64 << sweep.dim();
            let (a, b) = (fields[2 * i], fields[2 * i + 1]);
            if a == 0 || a >= span || b >= span || !symplectic(sweep.vector(a), sweep.vector(b), n) {
                return Err(Error::KeyFormat(alloc::format!("invalid choice pair for qubit {i}")));
            }
            sweep.take(a, b);
        }
        if fields[2 * n] >= 1u64 << (2 * n) {
            return Err(Error::KeyFormat("sign field out of range".into()));
        }
        Ok(sweep.finish(fields[2 * n]))
    }
}

fn check_sampled_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SAMPLED_QUBITS {
        return Err(Error::Parameter(alloc::format!("Clifford sampling needs 1 ≤ n ≤ {MAX_SAMPLED_QUBITS}, got {n}")));
    }
    Ok(())
}

fn key_width(n: usize) -> usize {
    let mut v = (1u64 << (2 * n)) - 1;
    let mut w = 1;
    while v >= 10 {
        v /= 10;
        w += 1;
    }
    w
}

fn encode_key(n: usize, fields: &[u64]) -> String {
    let width = key_width(n);
    let mut s = String::with_capacity(fields.len() * width);
    for f in fields {
        write!(s, "{f:0width$}").expect("writing to a String");
    }
    s
}

// symplectic vectors over F_2: bits [0, n) carry x, bits [n, 2n) carry z
fn symplectic(a: u64, b: u64, n: usize) -> bool {
    let mask = (1u64 << n) - 1;
    let (ax, az, bx, bz) = (a & mask, a >> n, b & mask, b >> n);
    ((ax & bz) ^ (az & bx)).count_ones() % 2 == 1
}

struct SymplecticSweep {
    n: usize,
    basis: Vec<u64>,
    chosen: Vec<(u64, u64)>,
}

impl SymplecticSweep {
    fn new(n: usize) -> Self {
        Self { n, basis: (0..2 * n).map(|i| 1u64 << i).collect(), chosen: Vec::new() }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn vector(&self, coeffs: u64) -> u64 {
        self.basis.iter().enumerate().filter(|(i, _)| coeffs >> i & 1 == 1).fold(0, |acc, (_, v)| acc ^ v)
    }

    fn take(&mut self, a: u64, b: u64) {
        let (va, vb) = (self.vector(a), self.vector(b));
        self.chosen.push((va, vb));
        let n = self.n;
        // project onto the symplectic complement of span{va, vb}, then keep
        // a linearly independent subset
        let mut reduced: Vec<u64> = Vec::new();
        for v in &self.basis {
            let mut w = *v;
            if symplectic(*v, vb, n) {
                w ^= va;
            }
            if symplectic(*v, va, n) {
                w ^= vb;
            }
            for r in &reduced {
                let pivot = 63 - r.leading_zeros();
                if w >> pivot & 1 == 1 {
                    w ^= r;
                }
            }
            if w != 0 {
                // keep the echelon rows sorted by pivot, high to low
                for r in reduced.iter_mut() {
                    let pivot = 63 - w.leading_zeros();
                    if *r >> pivot & 1 == 1 {
                        *r ^= w;
                    }
                }
                reduced.push(w);
                reduced.sort_unstable_by(|x, y| y.cmp(x));
            }
        }
        debug_assert_eq!(reduced.len(), self.basis.len() - 2);
        self.basis = reduced;
    }

    fn finish(self, signs: u64) -> CliffordTableau {
        let n = self.n;
        let label = |v: u64, sign: bool| {
            let x = (0..n).map(|j| (v >> j & 1) as u32).collect();
            let z = (0..n).map(|j| (v >> (n + j) & 1) as u32).collect();
            hermitian_pauli(x, z, sign)
        };
        let mut images = Vec::with_capacity(2 * n);
        for (j, (a, _)) in self.chosen.iter().enumerate() {
            images.push(label(*a, signs >> j & 1 == 1));
        }
        for (j, (_, b)) in self.chosen.iter().enumerate() {
            images.push(label(*b, signs >> (n + j) & 1 == 1));
        }
        CliffordTableau { n, images }
    }
}

/// `g† P g` for a gate on `wires`.
fn conjugate_local(g: CliffordGate, wires: &[usize], p: &PauliLabel) -> Result<PauliLabel> {
    let k = wires.len();
    let local = g.local_images();
    let mut sub = PauliLabel::identity(2, k);
    for (j, w) in wires.iter().enumerate() {
        if p.z()[*w] == 1 {
            sub = sub.mul(&local[k + j])?;
        }
        if p.x()[*w] == 1 {
            sub = sub.mul(&local[j])?;
        }
    }
    let mut x = p.x().to_vec();
    let mut z = p.z().to_vec();
    for (j, w) in wires.iter().enumerate() {
        x[*w] = sub.x()[j];
        z[*w] = sub.z()[j];
    }
    PauliLabel::with_phase(2, x, z, p.phase() + sub.phase())
}

/// Every Clifford on `n ≤ 2` qubits exactly once (modulo global phase), by
/// breadth-first closure under H, K and CNOT, in discovery order.
pub fn enumerate_cliffords(n: usize) -> Result<Vec<CliffordTableau>> {
    if n == 0 || n > 2 {
        return Err(Error::Unsupported(alloc::format!("enumeration of the {n}-qubit Clifford group")));
    }
    let mut gens: Vec<CliffordGate> = (0..n).flat_map(|j| [CliffordGate::H(j), CliffordGate::K(j)]).collect();
    if n == 2 {
        gens.push(CliffordGate::Cnot(0, 1));
        gens.push(CliffordGate::Cnot(1, 0));
    }
    let start = CliffordTableau::identity(n);
    let mut seen: BTreeSet<CliffordTableau> = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(t) = queue.pop_front() {
        for g in &gens {
            let mut next = t.clone();
            next.append(*g)?;
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
        order.push(t);
    }
    Ok(order)
}

/// Number of Cliffords on `n` qubits modulo phase: `2^{n²+2n} Π (4^j − 1)`.
pub fn clifford_group_order(n: usize) -> u128 {
    let mut order: u128 = 1u128 << (n * n + 2 * n);
    for j in 1..=n {
        order *= (1u128 << (2 * j)) - 1;
    }
    order
}
