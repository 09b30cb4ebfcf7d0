//! Clifford authentication: append `d` zero qubits, apply a secret random
//! Clifford; the receiver undoes it and checks that the ancillas are zero.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::clifford::{enumerate_cliffords, CliffordTableau};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, ZERO};
use crate::qsim::{pauli_decompose, DensityMatrix, PauliLabel, PureState};
use crate::stats::Estimate;

/// Outcome of an authentication check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    Abort,
}

/// Secret key of one authenticated block of `m + d` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordAuthKey {
    tableau: CliffordTableau,
    m: usize,
    d: usize,
}

impl CliffordAuthKey {
    pub fn new(tableau: CliffordTableau, m: usize, d: usize) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::Parameter("Clifford authentication needs m ≥ 1 and d ≥ 1".into()));
        }
        if tableau.num_qubits() != m + d {
            return Err(Error::DimensionMismatch(alloc::format!("{}-qubit Clifford for m={m}, d={d}", tableau.num_qubits())));
        }
        Ok(Self { tableau, m, d })
    }

    pub fn random<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<Self> {
        Self::new(CliffordTableau::random(m + d, rng)?, m, d)
    }

    pub fn tableau(&self) -> &CliffordTableau {
        &self.tableau
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.m + self.d
    }
}

/// Adversarial channel on the transmitted qubits.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackChannel {
    Identity,
    /// A fixed (generalized) Pauli on the transmitted register.
    Pauli(PauliLabel),
    /// A unitary on the transmitted register followed by `env_qubits`
    /// environment qudits that start in `|0⟩`; system wires come first.
    Unitary { matrix: Matrix, env_qubits: usize },
}

/// Largest environment accepted for unitary attacks.
pub const MAX_ENV_QUBITS: usize = 2;

impl AttackChannel {
    pub fn env_qubits(&self) -> usize {
        match self {
            AttackChannel::Unitary { env_qubits, .. } => *env_qubits,
            _ => 0,
        }
    }

    /// Acts on a register of `n` wires of dimension `q`; the result carries
    /// the environment wires after the register.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        match self {
            AttackChannel::Identity => Ok(state.clone()),
            AttackChannel::Pauli(p) => {
                let mut s = state.clone();
                s.apply_pauli(p)?;
                Ok(s)
            }
            AttackChannel::Unitary { matrix, env_qubits } => {
                if *env_qubits > MAX_ENV_QUBITS {
                    return Err(Error::Parameter(alloc::format!("environment of {env_qubits} qudits (at most {MAX_ENV_QUBITS})")));
                }
                let total = state.num_qudits() + env_qubits;
                let dim = (state.q() as usize).pow(total as u32);
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(Error::DimensionMismatch(alloc::format!("attack matrix {}x{} for {} wires", matrix.rows(), matrix.cols(), total)));
                }
                let mut s = state.tensor(&PureState::zero(state.q(), *env_qubits)?)?;
                let wires: Vec<usize> = (0..total).collect();
                s.apply_unitary(&wires, matrix)?;
                Ok(s)
            }
        }
    }
}

/// Apply the Clifford of `tableau` to `wires` of a dense qubit state.
pub fn apply_clifford(state: &mut PureState, tableau: &CliffordTableau, wires: &[usize]) -> Result<()> {
    apply_gates(state, &tableau.to_gates(), wires)
}

/// Apply the inverse Clifford.
pub fn apply_clifford_inverse(state: &mut PureState, tableau: &CliffordTableau, wires: &[usize]) -> Result<()> {
    let gates: Vec<_> = tableau.to_gates().into_iter().rev().map(|g| g.inverse()).collect();
    apply_gates(state, &gates, wires)
}

fn apply_gates(state: &mut PureState, gates: &[crate::clifford::CliffordGate], wires: &[usize]) -> Result<()> {
    for g in gates {
        let local: Vec<usize> = g.wires().iter().map(|w| wires[*w]).collect();
        state.apply_unitary(&local, &g.local_matrix())?;
    }
    Ok(())
}

/// `C_k(|ψ⟩ ⊗ |0⟩^d)`.
pub fn clifford_encode(message: &PureState, key: &CliffordAuthKey) -> Result<PureState> {
    if message.q() != 2 || message.num_qudits() != key.m {
        return Err(Error::DimensionMismatch(alloc::format!("{}-qudit message for an m={} key", message.num_qudits(), key.m)));
    }
    let mut s = message.tensor(&PureState::zero(2, key.d)?)?;
    let wires: Vec<usize> = (0..key.n()).collect();
    apply_clifford(&mut s, &key.tableau, &wires)?;
    Ok(s)
}

/// Undo the Clifford and measure the ancillas; VALID iff all read 0.
pub fn clifford_decode<R: Rng + ?Sized>(received: &PureState, key: &CliffordAuthKey, rng: &mut R) -> Result<(Verdict, Option<PureState>)> {
    if received.q() != 2 || received.num_qudits() != key.n() {
        return Err(Error::DimensionMismatch(alloc::format!("{}-qubit register for an n={} key", received.num_qudits(), key.n())));
    }
    let mut s = received.clone();
    let wires: Vec<usize> = (0..key.n()).collect();
    apply_clifford_inverse(&mut s, &key.tableau, &wires)?;
    let ancillas: Vec<usize> = (key.m..key.n()).collect();
    let meas = s.measure_standard(&ancillas, rng)?;
    if meas.outcomes.iter().any(|o| *o != 0) {
        return Ok((Verdict::Abort, None));
    }
    Ok((Verdict::Valid, Some(meas.collapsed.drop_basis_wires(&ancillas, &meas.outcomes)?)))
}

/// Exact acceptance statistics of a decoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuthOutcome {
    /// Probability that every block is declared VALID.
    pub p_valid: f64,
    /// Probability of VALID with the message orthogonal to the intended one.
    pub p_fool: f64,
}

/// Decode `r = keys.len()` concatenated blocks of `received` (block `i` on
/// wires `i·n .. (i+1)·n`, any further wires are environment) and compare
/// with the joint intended message.
pub fn clifford_exact_outcome(keys: &[CliffordAuthKey], received: &PureState, intended: &PureState) -> Result<AuthOutcome> {
    let layout = BlockLayout::new(keys, received)?;
    let mut s = received.clone();
    for (i, key) in keys.iter().enumerate() {
        let wires: Vec<usize> = (layout.offsets[i]..layout.offsets[i] + key.n()).collect();
        apply_clifford_inverse(&mut s, &key.tableau, &wires)?;
    }
    layout.outcome(&s, intended)
}

struct BlockLayout {
    offsets: Vec<usize>,
    message: Vec<usize>,
    ancilla: Vec<usize>,
    env: Vec<usize>,
}

impl BlockLayout {
    fn new(keys: &[CliffordAuthKey], received: &PureState) -> Result<Self> {
        let mut offsets = Vec::new();
        let (mut message, mut ancilla) = (Vec::new(), Vec::new());
        let mut at = 0;
        for key in keys {
            offsets.push(at);
            message.extend(at..at + key.m);
            ancilla.extend(at + key.m..at + key.n());
            at += key.n();
        }
        if received.num_qudits() < at {
            return Err(Error::DimensionMismatch("received register shorter than the key blocks".into()));
        }
        let env = (at..received.num_qudits()).collect();
        Ok(Self { offsets, message, ancilla, env })
    }

    fn outcome(&self, decoded: &PureState, intended: &PureState) -> Result<AuthOutcome> {
        if intended.num_qudits() != self.message.len() {
            return Err(Error::DimensionMismatch("intended message size".into()));
        }
        let mut order = self.message.clone();
        order.extend(&self.ancilla);
        order.extend(&self.env);
        let s = decoded.reorder_to_front(&order)?;
        let q = decoded.q() as usize;
        let msg_dim = q.pow(self.message.len() as u32);
        let tail = q.pow((self.ancilla.len() + self.env.len()) as u32);
        let env_dim = q.pow(self.env.len() as u32);
        // ancillas all zero ⇔ the tail index is below env_dim
        let amps = s.amplitudes();
        let psi = intended.amplitudes();
        let mut p_valid = 0.0;
        let mut p_correct = 0.0;
        for e in 0..env_dim {
            let mut overlap = ZERO;
            for msg in 0..msg_dim {
                let a = amps[msg * tail + e];
                p_valid += a.norm_sqr();
                overlap += psi[msg].conj() * a;
            }
            p_correct += overlap.norm_sqr();
        }
        Ok(AuthOutcome { p_valid, p_fool: (p_valid - p_correct).max(0.0) })
    }
}

/// Monte Carlo soundness over fresh keys for `r = messages.len()` blocks
/// under a fixed attack on the concatenated register. Each trial
/// contributes the exact fooling probability given its keys.
pub fn estimate_clifford_soundness<R: Rng + ?Sized>(attack: &AttackChannel, messages: &[PureState], d: usize, trials: u64, rng: &mut R) -> Result<Estimate> {
    if messages.is_empty() || trials == 0 {
        return Err(Error::Parameter("need at least one block and one trial".into()));
    }
    let mut intended = messages[0].clone();
    for m in &messages[1..] {
        intended = intended.tensor(m)?;
    }
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let keys = messages.iter().map(|m| CliffordAuthKey::random(m.num_qudits(), d, rng)).collect::<Result<Vec<_>>>()?;
        let mut sent = clifford_encode(&messages[0], &keys[0])?;
        for (m, k) in messages[1..].iter().zip(&keys[1..]) {
            sent = sent.tensor(&clifford_encode(m, k)?)?;
        }
        let received = attack.apply(&sent)?;
        samples.push(clifford_exact_outcome(&keys, &received, &intended)?.p_fool);
    }
    Ok(Estimate::from_samples(samples))
}

/// Key-averaged result of one attacked block, computed over the whole
/// Clifford group (only for `m + d ≤ 2`).
#[derive(Clone, Debug)]
pub struct ExactTwirl {
    /// Decoded `(m + d)`-qubit state before the ancilla check, averaged over keys.
    pub rho_bob: DensityMatrix,
    pub p_valid: f64,
    pub p_fool: f64,
}

pub fn exact_clifford_twirl(attack: &AttackChannel, message: &PureState, d: usize) -> Result<ExactTwirl> {
    let m = message.num_qudits();
    let n = m + d;
    let group = enumerate_cliffords(n)?;
    let unitaries = group.iter().map(|t| t.to_unitary()).collect::<Result<Vec<_>>>()?;
    let input = message.tensor(&PureState::zero(2, d)?)?;
    let wires: Vec<usize> = (0..n).collect();
    let dim = 1usize << n;
    let mut acc = Matrix::zeros(dim, dim);
    let weight = C64::new(1.0 / group.len() as f64, 0.0);
    for u in &unitaries {
        let mut s = input.clone();
        s.apply_unitary(&wires, u)?;
        let mut s = attack.apply(&s)?;
        s.apply_unitary(&wires, &u.adjoint())?;
        let rho = s.reduced_density(&wires)?;
        acc.add_assign_scaled(rho.matrix(), weight);
    }
    let rho_bob = DensityMatrix::from_matrix(2, n, acc)?;
    let (p_valid, p_fool) = valid_and_fool(&rho_bob, message, d)?;
    Ok(ExactTwirl { rho_bob, p_valid, p_fool })
}

/// `Tr((I ⊗ |0⟩⟨0|^d) ρ)` and `Tr(((I − |ψ⟩⟨ψ|) ⊗ |0⟩⟨0|^d) ρ)`.
pub fn valid_and_fool(rho: &DensityMatrix, message: &PureState, d: usize) -> Result<(f64, f64)> {
    let m = message.num_qudits();
    if rho.num_qudits() != m + d {
        return Err(Error::DimensionMismatch("decoded state size".into()));
    }
    let anc = 1usize << d;
    let msg_dim = 1usize << m;
    let mut p_valid = 0.0;
    let mut p_correct = ZERO;
    let psi = message.amplitudes();
    for a in 0..msg_dim {
        p_valid += rho.matrix()[(a * anc, a * anc)].re;
        for b in 0..msg_dim {
            p_correct += psi[a].conj() * rho.matrix()[(a * anc, b * anc)] * psi[b];
        }
    }
    Ok((p_valid, p_valid - p_correct.re))
}

/// Reference prediction for a key-averaged attack on `rho_in` (`n` qubits):
/// `s·ρ + (1 − s)/(4^n − 1) Σ_{P≠I} PρP†`, with `s = ‖U_I|0_E⟩‖²` read off
/// the Pauli decomposition `U = Σ_P P ⊗ U_P`.
pub fn twirl_reference_channel(attack: &AttackChannel, rho_in: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
    let n = rho_in.num_qudits();
    let s = identity_weight(attack, n)?;
    let mut acc = rho_in.matrix().scale(C64::new(s, 0.0));
    let others = (1u64 << (2 * n)) as f64 - 1.0;
    let w = C64::new((1.0 - s) / others, 0.0);
    for p in PauliLabel::all(2, n).filter(|p| !p.is_identity()) {
        let pm = p.to_matrix();
        acc.add_assign_scaled(&pm.matmul(rho_in.matrix()).matmul(&pm.adjoint()), w);
    }
    Ok((s, DensityMatrix::from_matrix(2, n, acc)?))
}

/// Weight `Tr(U_I ρ_E U_I†)` of the identity component of an attack.
pub fn identity_weight(attack: &AttackChannel, n: usize) -> Result<f64> {
    match attack {
        AttackChannel::Identity => Ok(1.0),
        AttackChannel::Pauli(p) => {
            if p.len() != n {
                return Err(Error::DimensionMismatch("attack label size".into()));
            }
            Ok(if p.is_identity() { 1.0 } else { 0.0 })
        }
        AttackChannel::Unitary { matrix, env_qubits } => {
            if matrix.rows() != 1usize << (n + env_qubits) {
                return Err(Error::DimensionMismatch("attack matrix size".into()));
            }
            let parts = pauli_decompose(matrix, 2, n);
            let u_i = &parts.iter().find(|(p, _)| p.is_identity()).expect("identity label present").1;
            // first column of U_I is U_I|0_E⟩
            Ok((0..u_i.rows()).map(|r| u_i[(r, 0)].norm_sqr()).sum())
        }
    }
}

/// Fixed Pauli attack on `n` qubits from bit vectors.
pub fn pauli_attack(x: &[u32], z: &[u32]) -> Result<AttackChannel> {
    Ok(AttackChannel::Pauli(PauliLabel::new(2, x.to_vec(), z.to_vec())?))
}

/// `exp(iθ·X ⊗ I_E)` on the first transmitted qubit of an `n`-qubit block.
pub fn rotation_attack(theta: f64, n: usize, env_qubits: usize) -> AttackChannel {
    let (c, s) = (theta.cos(), theta.sin());
    let rot = Matrix::from_rows(2, 2, vec![C64::new(c, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(c, 0.0)]);
    let rest = Matrix::identity(1usize << (n - 1 + env_qubits));
    AttackChannel::Unitary { matrix: rot.kron(&rest), env_qubits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_key_appends_ancillas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = PureState::random(2, 1, &mut rng).unwrap();
        let key = CliffordAuthKey::new(CliffordTableau::identity(3), 1, 2).unwrap();
        let enc = clifford_encode(&psi, &key).unwrap();
        assert!(enc.approx_eq_up_to_phase(&psi.tensor(&PureState::zero(2, 2).unwrap()).unwrap(), 1e-12));
    }

    #[test]
    fn honest_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let psi = PureState::random(2, 1, &mut rng).unwrap();
            let key = CliffordAuthKey::random(1, 2, &mut rng).unwrap();
            let enc = clifford_encode(&psi, &key).unwrap();
            assert!((enc.norm() - 1.0).abs() < 1e-12);
            let (v, out) = clifford_decode(&enc, &key, &mut rng).unwrap();
            assert_eq!(v, Verdict::Valid);
            assert!(out.unwrap().approx_eq_up_to_phase(&psi, 1e-9));
        }
    }

    #[test]
    fn z_on_ancilla_is_harmless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = PureState::random(2, 1, &mut rng).unwrap();
        let key = CliffordAuthKey::new(CliffordTableau::identity(2), 1, 1).unwrap();
        let enc = clifford_encode(&psi, &key).unwrap();
        let hit = pauli_attack(&[0, 0], &[0, 1]).unwrap().apply(&enc).unwrap();
        let (v, out) = clifford_decode(&hit, &key, &mut rng).unwrap();
        assert_eq!(v, Verdict::Valid);
        assert!(out.unwrap().approx_eq_up_to_phase(&psi, 1e-12));
    }

    #[test]
    fn exact_outcome_of_honest_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = PureState::random(2, 1, &mut rng).unwrap();
        let b = PureState::random(2, 1, &mut rng).unwrap();
        let keys = [CliffordAuthKey::random(1, 1, &mut rng).unwrap(), CliffordAuthKey::random(1, 1, &mut rng).unwrap()];
        let sent = clifford_encode(&a, &keys[0]).unwrap().tensor(&clifford_encode(&b, &keys[1]).unwrap()).unwrap();
        let out = clifford_exact_outcome(&keys, &sent, &a.tensor(&b).unwrap()).unwrap();
        assert!((out.p_valid - 1.0).abs() < 1e-12 && out.p_fool.abs() < 1e-12);
    }

    #[test]
    fn identity_weight_of_rotation() {
        let theta = 0.3f64;
        let s = identity_weight(&rotation_attack(theta, 2, 1), 2).unwrap();
        assert!((s - theta.cos().powi(2)).abs() < 1e-12);
        assert_eq!(identity_weight(&AttackChannel::Identity, 2).unwrap(), 1.0);
        assert_eq!(identity_weight(&pauli_attack(&[1, 0], &[0, 0]).unwrap(), 2).unwrap(), 0.0);
    }
}
