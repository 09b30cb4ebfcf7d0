//! Polynomial authentication: encode in a secret signed polynomial code,
//! then apply a secret Pauli one-time pad.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::clifford::enumerate_cliffords;
use crate::code_poly::{index_of, SignKey, SignedCode};
use crate::error::{Error, Result};
use crate::galois::{fit_polynomial, EvalPoints, PrimeField};
use crate::linalg::{root_of_unity, Matrix, ONE, ZERO};
use crate::qas_clifford::{AttackChannel, AuthOutcome, Verdict};
use crate::qsim::{index_to_digits, DensityMatrix, PauliLabel, PureState};
use crate::stats::Estimate;

/// Sign key plus Pauli pad of one register.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyAuthKey {
    pub sign: SignKey,
    pub x: Vec<u32>,
    pub z: Vec<u32>,
}

impl PolyAuthKey {
    pub fn new(sign: SignKey, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        if x.len() != sign.len() || z.len() != sign.len() {
            return Err(Error::DimensionMismatch("pad length differs from the sign key".into()));
        }
        Ok(Self { sign, x, z })
    }

    pub fn random<R: Rng + ?Sized>(q: u32, m: usize, rng: &mut R) -> Self {
        let sign = SignKey::random(m, rng);
        Self::random_pad(sign, q, rng)
    }

    /// Fresh uniform pad for a given sign key.
    pub fn random_pad<R: Rng + ?Sized>(sign: SignKey, q: u32, rng: &mut R) -> Self {
        let m = sign.len();
        let x = (0..m).map(|_| rng.gen_range(0..q)).collect();
        let z = (0..m).map(|_| rng.gen_range(0..q)).collect();
        Self { sign, x, z }
    }

    /// `P_{x,z} = ⊗ Z^{z_i} X^{x_i}`.
    pub fn pad(&self, q: u32) -> Result<PauliLabel> {
        PauliLabel::new(q, self.x.clone(), self.z.clone())
    }
}

/// `P_{x,z} · V_k |ψ⟩`.
pub fn poly_encode(logical: &PureState, key: &PolyAuthKey, d: usize) -> Result<PureState> {
    let code = SignedCode::new(logical.q(), d, key.sign.clone())?;
    let mut s = code.encode(logical)?;
    s.apply_pauli(&key.pad(logical.q())?)?;
    Ok(s)
}

/// Remove the pad, then run the code-space check.
pub fn poly_decode<R: Rng + ?Sized>(state: &PureState, key: &PolyAuthKey, d: usize, rng: &mut R) -> Result<(Verdict, Option<PureState>)> {
    let code = SignedCode::new(state.q(), d, key.sign.clone())?;
    if state.num_qudits() != code.m() {
        return Err(Error::DimensionMismatch("register size differs from m".into()));
    }
    let mut s = state.clone();
    s.apply_pauli(&key.pad(state.q())?.inverse())?;
    let wires: Vec<usize> = (0..code.m()).collect();
    code.detect_and_decode(&s, &wires, rng)
}

/// Exact statistics for `r = keys.len()` registers on wires `j·m .. (j+1)·m`
/// of `received` (further wires are environment), against the joint
/// logical state `intended`.
pub fn poly_exact_outcome(keys: &[PolyAuthKey], received: &PureState, intended: &PureState, d: usize) -> Result<AuthOutcome> {
    let q = received.q();
    let m = 2 * d + 1;
    if received.num_qudits() < keys.len() * m || intended.num_qudits() != keys.len() {
        return Err(Error::DimensionMismatch("registers do not match the keys".into()));
    }
    let mut s = received.clone();
    let mut p_valid = 1.0;
    // decode from the last register so earlier offsets stay put
    for (j, key) in keys.iter().enumerate().rev() {
        let wires: Vec<usize> = (j * m..(j + 1) * m).collect();
        let pad_j = key.pad(q)?.inverse();
        let (px, pz): (Vec<u32>, Vec<u32>) = (0..s.num_qudits())
            .map(|w| if wires.contains(&w) { (pad_j.x()[w - j * m], pad_j.z()[w - j * m]) } else { (0, 0) })
            .unzip();
        let pad = PauliLabel::with_phase(q, px, pz, pad_j.phase())?;
        s.apply_pauli(&pad)?;
        let code = SignedCode::new(q, d, key.sign.clone())?;
        match code.decode_exact(&s, &wires)? {
            (p, Some(post)) => {
                p_valid *= p;
                s = post;
            }
            _ => return Ok(AuthOutcome { p_valid: 0.0, p_fool: 0.0 }),
        }
    }
    let logical: Vec<usize> = (0..keys.len()).collect();
    let rho = s.reduced_density(&logical)?;
    let overlap = rho.expectation(intended);
    Ok(AuthOutcome { p_valid, p_fool: (p_valid * (1.0 - overlap)).max(0.0) })
}

/// Acceptance probability of a fixed Pauli attack `P_{x′,z′}` on `C_k`,
/// averaged over logical basis states: `(1/q) Σ_{a,b} |⟨S_b|P|S_a⟩|²`.
pub fn pauli_acceptance(code: &SignedCode, x: &[u32], z: &[u32]) -> Result<f64> {
    let (q, m) = (code.q(), code.m());
    if x.len() != m || z.len() != m {
        return Err(Error::DimensionMismatch("attack length differs from m".into()));
    }
    let norm = (q as f64).powi(code.d() as i32);
    let mut total = 0.0;
    for a in 0..q {
        let mut inner = vec![ZERO; q as usize];
        for w in code.codewords(a) {
            let shifted: Vec<u32> = w.iter().zip(x).map(|(v, s)| (v + s) % q).collect();
            if let Some(b) = code.logical_value(&shifted) {
                let phase: u64 = shifted.iter().zip(z).map(|(v, s)| (*v as u64) * (*s as u64)).sum();
                inner[b as usize] += root_of_unity(q, phase as i64);
            }
        }
        total += inner.iter().map(|v| v.norm_sqr()).sum::<f64>() / (norm * norm);
    }
    Ok(total / q as f64)
}

/// Fraction of the `2^m` sign keys under which the Pauli attack goes
/// undetected.
pub fn pauli_attack_fooling(x: &[u32], z: &[u32], q: u32, d: usize) -> Result<f64> {
    if x.iter().all(|v| v % q == 0) && z.iter().all(|v| v % q == 0) {
        return Err(Error::Parameter("the identity is not an attack".into()));
    }
    let m = 2 * d + 1;
    let mut acc = 0.0;
    for key in SignKey::all(m) {
        acc += pauli_acceptance(&SignedCode::new(q, d, key)?, x, z)?;
    }
    Ok(acc / (1u64 << m) as f64)
}

/// Shared-sign-key concatenation: blockwise Pauli attack `(x_j, z_j)` on
/// register `j`; probability over sign keys that every register passes.
pub fn concat_pauli_attack_fooling(attacks: &[(Vec<u32>, Vec<u32>)], q: u32, d: usize) -> Result<f64> {
    if attacks.iter().all(|(x, z)| x.iter().chain(z).all(|v| v % q == 0)) {
        return Err(Error::Parameter("the identity is not an attack".into()));
    }
    let m = 2 * d + 1;
    let mut acc = 0.0;
    for key in SignKey::all(m) {
        let code = SignedCode::new(q, d, key)?;
        let mut p = 1.0;
        for (x, z) in attacks {
            p *= pauli_acceptance(&code, x, z)?;
        }
        acc += p;
    }
    Ok(acc / (1u64 << m) as f64)
}

/// Monte Carlo soundness over fresh (sign, pad) keys of one register.
/// Each trial contributes the exact fooling probability given its key.
pub fn estimate_poly_soundness<R: Rng + ?Sized>(attack: &AttackChannel, logical: &PureState, d: usize, trials: u64, rng: &mut R) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let q = logical.q();
    let m = 2 * d + 1;
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let key = PolyAuthKey::random(q, m, rng);
        let sent = poly_encode(logical, &key, d)?;
        let received = attack.apply(&sent)?;
        samples.push(poly_exact_outcome(core::slice::from_ref(&key), &received, logical, d)?.p_fool);
    }
    Ok(Estimate::from_samples(samples))
}

/// Exact fooling probability over all sign keys for the scheme without the
/// Pauli pad.
pub fn sign_only_fooling(attack: &AttackChannel, logical: &PureState, d: usize) -> Result<f64> {
    let m = 2 * d + 1;
    let mut acc = 0.0;
    for sign in SignKey::all(m) {
        let key = PolyAuthKey::new(sign, vec![0; m], vec![0; m])?;
        let sent = poly_encode(logical, &key, d)?;
        acc += poly_exact_outcome(&[key], &attack.apply(&sent)?, logical, d)?.p_fool;
    }
    Ok(acc / (1u64 << m) as f64)
}

/// Exact fooling probability of the full scheme, averaged over every sign
/// key and every pad.
pub fn padded_fooling_exact(attack: &AttackChannel, logical: &PureState, d: usize) -> Result<f64> {
    let q = logical.q();
    let m = 2 * d + 1;
    let pads = (q as u64).pow(2 * m as u32);
    let mut acc = 0.0;
    for sign in SignKey::all(m) {
        let code = SignedCode::new(q, d, sign.clone())?;
        let encoded = code.encode(logical)?;
        for p in 0..pads {
            let digits = index_to_digits(q, 2 * m, p as usize);
            let key = PolyAuthKey::new(sign.clone(), digits[..m].to_vec(), digits[m..].to_vec())?;
            let mut sent = encoded.clone();
            sent.apply_pauli(&key.pad(q)?)?;
            acc += poly_exact_outcome(&[key], &attack.apply(&sent)?, logical, d)?.p_fool;
        }
    }
    Ok(acc / ((1u64 << m) * pads) as f64)
}

/// A basis permutation that, for every sign key, carries the support of
/// `|S_0^k⟩` into the code space of `C_k` away from logical 0.
///
/// Negating a sign key leaves the code space and `|S_0⟩` unchanged, so it
/// suffices to handle the keys with `k_1 = +1`. The shared all-zero string
/// can only follow one class; the others keep `q^d − 1` of their `q^d`
/// strings. Returns the permutation of basis indices of `F_q^m`.
pub fn codeword_shift_permutation(q: u32, d: usize) -> Result<Vec<usize>> {
    let m = 2 * d + 1;
    let classes: Vec<SignedCode> = SignKey::all(m).filter(|k| k.values()[0] == 1).map(|k| SignedCode::new(q, d, k)).collect::<Result<_>>()?;
    let size = crate::qsim::check_size(q, m)?;
    let mut image: Vec<Option<usize>> = vec![None; size];
    let mut used = vec![false; size];
    let zero = 0usize;
    for (ci, code) in classes.iter().enumerate() {
        let sources: Vec<usize> = code.codewords(0).iter().map(|w| index_of(q, w)).filter(|i| ci == 0 || *i != zero).collect();
        let mut placed = false;
        for a in 1..q {
            let free: Vec<usize> = code.codewords(a).iter().map(|w| index_of(q, w)).filter(|i| !used[*i]).collect();
            if free.len() >= sources.len() {
                for (s, t) in sources.iter().zip(&free) {
                    image[*s] = Some(*t);
                    used[*t] = true;
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Unsupported("no disjoint target cosets for the shift attack".into()));
        }
    }
    let mut spare = (0..size).filter(|i| !used[*i]);
    Ok(image.into_iter().map(|t| t.unwrap_or_else(|| spare.next().expect("bijection completes"))).collect())
}

/// Unitary matrix of a basis permutation.
pub fn permutation_matrix(perm: &[usize]) -> Matrix {
    let mut u = Matrix::zeros(perm.len(), perm.len());
    for (src, dst) in perm.iter().enumerate() {
        u[(*dst, src)] = ONE;
    }
    u
}

/// Verifier-side interpretation of a measured register: unpad with `x`,
/// unsign with `k`, fit a polynomial of degree ≤ d and return `f(0)`;
/// `None` when no such polynomial exists.
pub fn interpret_measurement(outcomes: &[u32], key: &PolyAuthKey, q: u32, d: usize) -> Result<Option<u32>> {
    let m = 2 * d + 1;
    if outcomes.len() != m || key.x.len() != m {
        return Err(Error::DimensionMismatch("one outcome per register wire".into()));
    }
    if outcomes.iter().any(|o| *o >= q) {
        return Ok(None);
    }
    let field = PrimeField::new(q)?;
    let points = EvalPoints::standard(field, m)?;
    let signs = key.sign.as_field(q);
    let values: Vec<_> = (0..m).map(|i| (points.as_slice()[i], field.elem((outcomes[i] as i64 - key.x[i] as i64) * signs[i] as i64))).collect();
    Ok(fit_polynomial(field, &values, d)?.map(|f| f.constant_term().value()))
}

/// Key-averaged state of one transmitted register: `E_{x,z} P ρ P†` over
/// all `q^{2m}` pads, for a fixed sign key.
pub fn prover_view(sign: &SignKey, logical: &PureState, d: usize) -> Result<DensityMatrix> {
    let q = logical.q();
    let m = 2 * d + 1;
    let code = SignedCode::new(q, d, sign.clone())?;
    let encoded = code.encode(logical)?;
    let dim = encoded.dim();
    let pads = (q as u64).pow(2 * m as u32);
    let mut acc = Matrix::zeros(dim, dim);
    for p in 0..pads {
        let digits = index_to_digits(q, 2 * m, p as usize);
        let mut s = encoded.clone();
        s.apply_pauli(&PauliLabel::new(q, digits[..m].to_vec(), digits[m..].to_vec())?)?;
        let a = s.amplitudes();
        for r in 0..dim {
            if a[r] == ZERO {
                continue;
            }
            for c in 0..dim {
                if a[c] != ZERO {
                    acc[(r, c)] += a[r] * a[c].conj();
                }
            }
        }
    }
    DensityMatrix::from_matrix(q, m, acc.scale(C64::new(1.0 / pads as f64, 0.0)))
}

/// Clifford-scheme analogue: `E_C C(|ψ⟩⟨ψ| ⊗ |0⟩⟨0|^d)C†` over the whole
/// group (`m + d ≤ 2`).
pub fn clifford_prover_view(message: &PureState, d: usize) -> Result<DensityMatrix> {
    let n = message.num_qudits() + d;
    let input = message.tensor(&PureState::zero(2, d)?)?.to_density();
    let group = enumerate_cliffords(n)?;
    let dim = 1usize << n;
    let mut acc = Matrix::zeros(dim, dim);
    let w = C64::new(1.0 / group.len() as f64, 0.0);
    for t in &group {
        acc.add_assign_scaled(input.conjugate(&t.to_unitary()?).matrix(), w);
    }
    DensityMatrix::from_matrix(2, n, acc)
}
