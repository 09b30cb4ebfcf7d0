use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, ZERO};

/// Generalized Pauli `e^{iπ·phase/q} · ⊗_j Z^{z_j} X^{x_j}` over `F_q`.
///
/// The phase is counted in units of `π/q`, so it lives mod `2q`; for qubits
/// this is the usual `i^phase`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    q: u32,
    x: Vec<u32>,
    z: Vec<u32>,
    phase: u32,
}

impl fmt::Debug for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^(iπ{}/{})", self.phase, self.q)?;
        for (x, z) in self.x.iter().zip(&self.z) {
            write!(f, " Z{}X{}", z, x)?;
        }
        Ok(())
    }
}

impl PauliLabel {
    pub fn new(q: u32, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        Self::with_phase(q, x, z, 0)
    }

    pub fn with_phase(q: u32, x: Vec<u32>, z: Vec<u32>, phase: u32) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(alloc::format!("x has {} entries, z has {}", x.len(), z.len())));
        }
        if q < 2 {
            return Err(Error::Parameter(alloc::format!("qudit dimension {q}")));
        }
        let x = x.into_iter().map(|v| v % q).collect();
        let z = z.into_iter().map(|v| v % q).collect();
        Ok(Self { q, x, z, phase: phase % (2 * q) })
    }

    pub fn identity(q: u32, n: usize) -> Self {
        Self { q, x: vec![0; n], z: vec![0; n], phase: 0 }
    }

    /// `X^power` on one wire of an `n`-wire register.
    pub fn single_x(q: u32, n: usize, wire: usize, power: u32) -> Self {
        let mut p = Self::identity(q, n);
        p.x[wire] = power % q;
        p
    }

    pub fn single_z(q: u32, n: usize, wire: usize, power: u32) -> Self {
        let mut p = Self::identity(q, n);
        p.z[wire] = power % q;
        p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn phase_factor(&self) -> C64 {
        let theta = core::f64::consts::PI * self.phase as f64 / self.q as f64;
        C64::new(theta.cos(), theta.sin())
    }

    /// Identity up to phase.
    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.z.iter().all(|&v| v == 0)
    }

    /// Number of wires acted on nontrivially.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x != 0 || **z != 0).count()
    }

    pub fn without_phase(&self) -> Self {
        Self { phase: 0, ..self.clone() }
    }

    /// Operator product `self · rhs`.
    pub fn mul(&self, rhs: &PauliLabel) -> Result<PauliLabel> {
        if self.q != rhs.q || self.len() != rhs.len() {
            return Err(Error::DimensionMismatch("Pauli product operands differ".into()));
        }
        let q = self.q as u64;
        // Z^a X^b Z^c X^d = ω^{-bc} Z^{a+c} X^{b+d}; ω = e^{iπ·2/q}
        let mut phase = (self.phase + rhs.phase) as u64;
        let mut x = Vec::with_capacity(self.len());
        let mut z = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let cross = (self.x[j] as u64 * rhs.z[j] as u64) % q;
            phase += 2 * (q - cross) % (2 * q);
            x.push(((self.x[j] + rhs.x[j]) as u64 % q) as u32);
            z.push(((self.z[j] + rhs.z[j]) as u64 % q) as u32);
        }
        Ok(PauliLabel { q: self.q, x, z, phase: (phase % (2 * q)) as u32 })
    }

    /// Exact operator inverse.
    pub fn inverse(&self) -> PauliLabel {
        // (Z^z X^x)^{-1} = X^{-x} Z^{-z} = ω^{-xz} Z^{-z} X^{-x}
        let q = self.q as u64;
        let mut phase = (2 * q - self.phase as u64) % (2 * q);
        let mut x = Vec::with_capacity(self.len());
        let mut z = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let xz = (self.x[j] as u64 * self.z[j] as u64) % q;
            phase = (phase + 2 * (q - xz)) % (2 * q);
            x.push((self.q - self.x[j]) % self.q);
            z.push((self.q - self.z[j]) % self.q);
        }
        PauliLabel { q: self.q, x, z, phase: phase as u32 }
    }

    /// Symplectic form: `self·other = ω^{form} other·self`.
    pub fn commutation_exponent(&self, other: &PauliLabel) -> u32 {
        let q = self.q as u64;
        let mut s = 0u64;
        for j in 0..self.len() {
            s += self.z[j] as u64 * other.x[j] as u64 % q;
            s += (q - self.x[j] as u64 * other.z[j] as u64 % q) % q;
        }
        (s % q) as u32
    }

    pub fn commutes_with(&self, other: &PauliLabel) -> bool {
        self.commutation_exponent(other) == 0
    }

    /// Dense matrix, wire 0 most significant.
    pub fn to_matrix(&self) -> Matrix {
        let q = self.q as usize;
        let dim = q.pow(self.len() as u32);
        let mut m = Matrix::zeros(dim, dim);
        let phase = self.phase_factor();
        for col in 0..dim {
            let (row, amp) = self.map_basis(col);
            m[(row, col)] = amp * phase;
        }
        m
    }

    /// Image of basis index `idx` (without the global phase): `(index, amplitude)`.
    pub(crate) fn map_basis(&self, idx: usize) -> (usize, C64) {
        let q = self.q as usize;
        let n = self.len();
        let mut out = 0usize;
        let mut exp = 0u64;
        let mut rem = idx;
        let mut digits = vec![0usize; n];
        for w in (0..n).rev() {
            digits[w] = rem % q;
            rem /= q;
        }
        for (w, d) in digits.iter().enumerate() {
            let shifted = (d + self.x[w] as usize) % q;
            exp += self.z[w] as u64 * shifted as u64;
            out = out * q + shifted;
        }
        let amp = if exp.is_multiple_of(q as u64) { C64::new(1.0, 0.0) } else { crate::linalg::root_of_unity(self.q, exp as i64) };
        (out, amp)
    }

    /// Enumerate all `q^{2n}` labels with zero phase in a fixed order.
    pub fn all(q: u32, n: usize) -> impl Iterator<Item = PauliLabel> {
        let total = (q as u64).pow(2 * n as u32);
        (0..total).map(move |mut idx| {
            let mut x = vec![0u32; n];
            let mut z = vec![0u32; n];
            for j in (0..n).rev() {
                z[j] = (idx % q as u64) as u32;
                idx /= q as u64;
                x[j] = (idx % q as u64) as u32;
                idx /= q as u64;
            }
            PauliLabel { q, x, z, phase: 0 }
        })
    }

    /// Concatenate wires: `self ⊗ other`.
    pub fn tensor(&self, other: &PauliLabel) -> Result<PauliLabel> {
        if self.q != other.q {
            return Err(Error::DimensionMismatch("Pauli tensor with different q".into()));
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Ok(PauliLabel { q: self.q, x, z, phase: (self.phase + other.phase) % (2 * self.q) })
    }
}

/// Decompose a `q^n·e × q^n·e` operator as `Σ_P P ⊗ U_P` with the Paulis
/// acting on the leading `n` qudits: `U_P = Tr_1((P† ⊗ I) U) / q^n`.
pub fn pauli_decompose(u: &Matrix, q: u32, n: usize) -> Vec<(PauliLabel, Matrix)> {
    let sys = (q as usize).pow(n as u32);
    assert!(u.is_square() && u.rows().is_multiple_of(sys), "operator does not split off the leading register");
    let env = u.rows() / sys;
    PauliLabel::all(q, n)
        .map(|p| {
            let pm = p.to_matrix();
            let mut block = Matrix::zeros(env, env);
            for i in 0..sys {
                for j in 0..sys {
                    // (P†)_{ji} = conj(P_{ij}); only one nonzero per column of P
                    let pij = pm[(i, j)];
                    if pij == ZERO {
                        continue;
                    }
                    let w = pij.conj();
                    for r in 0..env {
                        for c in 0..env {
                            block[(r, c)] += w * u[(i * env + r, j * env + c)];
                        }
                    }
                }
            }
            (p, block.scale(C64::new(1.0 / sys as f64, 0.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_matrices() {
        for q in [2u32, 3, 5] {
            let labels: Vec<PauliLabel> = PauliLabel::all(q, 2).step_by(3).collect();
            for a in &labels {
                for b in labels.iter().step_by(2) {
                    let ab = a.mul(b).unwrap();
                    assert!(ab.to_matrix().max_abs_diff(&a.to_matrix().matmul(&b.to_matrix())) < 1e-12);
                }
                let inv = a.inverse();
                assert!(inv.to_matrix().matmul(&a.to_matrix()).max_abs_diff(&Matrix::identity(a.to_matrix().rows())) < 1e-12);
            }
        }
    }

    #[test]
    fn commutation_exponent_matches_matrices() {
        let q = 5;
        let labels: Vec<PauliLabel> = PauliLabel::all(q, 1).collect();
        for a in &labels {
            for b in &labels {
                let lhs = a.to_matrix().matmul(&b.to_matrix());
                let rhs = b.to_matrix().matmul(&a.to_matrix()).scale(crate::linalg::root_of_unity(q, a.commutation_exponent(b) as i64));
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let u = Matrix::random_unitary(8, &mut rng);
        let parts = pauli_decompose(&u, 2, 2);
        let mut rebuilt = Matrix::zeros(8, 8);
        for (p, up) in &parts {
            rebuilt.add_assign_scaled(&p.to_matrix().kron(up), C64::new(1.0, 0.0));
        }
        assert!(rebuilt.max_abs_diff(&u) < 1e-12);
    }
}
