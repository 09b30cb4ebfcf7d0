//! Verifier-side Pauli-key bookkeeping for the polynomial protocol.
//!
//! After a logical gate the register is still a padded codeword, under a
//! new pad that is a fixed function of the old one. Pauli gates are pure
//! key updates; SUM and Fourier are applied by the prover and then tracked.

use alloc::vec;
use alloc::vec::Vec;

use crate::code_poly::{SignKey, SignedCode};
use crate::error::{Error, Result};
use crate::galois::{interpolation_coefficients, EvalPoints, PrimeField};
use crate::qas_poly::PolyAuthKey;
use crate::qsim::index_to_digits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyGate {
    /// Logical `X̃^power`.
    X(u32),
    /// Logical `Z̃^power`.
    Z(u32),
    /// Transversal `SUM^power`, keys given as (source, target).
    Sum(u32),
    Fourier,
    FourierInverse,
}

/// Public data the updates need: `q` and the interpolation coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyRules {
    field: PrimeField,
    c: Vec<u32>,
}

impl KeyRules {
    pub fn new(q: u32, d: usize) -> Result<Self> {
        let field = PrimeField::new(q)?;
        let points = EvalPoints::standard(field, 2 * d + 1)?;
        let c = interpolation_coefficients(&points).iter().map(|v| v.value()).collect();
        Ok(KeyRules { field, c })
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.c
    }

    fn e(&self, v: i64) -> i64 {
        v.rem_euclid(self.q() as i64)
    }

    fn inv(&self, v: u32) -> i64 {
        self.field.elem(v as i64).inv().expect("coefficients are nonzero").value() as i64
    }

    /// Apply the update for `gate` in place. `keys` holds one key, or
    /// (source, target) for SUM.
    pub fn update(&self, gate: KeyGate, keys: &mut [&mut PolyAuthKey]) -> Result<()> {
        let arity = if matches!(gate, KeyGate::Sum(_)) { 2 } else { 1 };
        if keys.len() != arity || keys.iter().any(|k| k.x.len() != self.m()) {
            return Err(Error::DimensionMismatch(alloc::format!("{gate:?} updates {arity} key(s) of length {}", self.m())));
        }
        let q = self.q() as i64;
        match gate {
            KeyGate::X(p) => {
                let k = keys[0].sign.as_field(self.q());
                for i in 0..self.m() {
                    keys[0].x[i] = self.e(keys[0].x[i] as i64 - p as i64 * k[i] as i64) as u32;
                }
            }
            KeyGate::Z(p) => {
                let k = keys[0].sign.as_field(self.q());
                for i in 0..self.m() {
                    let t = k[i] as i64 * self.c[i] as i64 % q;
                    keys[0].z[i] = self.e(keys[0].z[i] as i64 - p as i64 * t) as u32;
                }
            }
            KeyGate::Sum(p) => {
                let (src, dst) = keys.split_at_mut(1);
                let (a, b) = (&mut *src[0], &mut *dst[0]);
                for i in 0..self.m() {
                    b.x[i] = self.e(b.x[i] as i64 + p as i64 * a.x[i] as i64) as u32;
                    a.z[i] = self.e(a.z[i] as i64 - p as i64 * b.z[i] as i64) as u32;
                }
            }
            KeyGate::Fourier => {
                // F_c Z^z X^x F_c† ∝ Z^{c x} X^{-z/c}
                for i in 0..self.m() {
                    let (x, z) = (keys[0].x[i] as i64, keys[0].z[i] as i64);
                    keys[0].x[i] = self.e(-z * self.inv(self.c[i])) as u32;
                    keys[0].z[i] = self.e(self.c[i] as i64 * x) as u32;
                }
            }
            KeyGate::FourierInverse => {
                for i in 0..self.m() {
                    let (x, z) = (keys[0].x[i] as i64, keys[0].z[i] as i64);
                    keys[0].x[i] = self.e(z * self.inv(self.c[i])) as u32;
                    keys[0].z[i] = self.e(-(self.c[i] as i64) * x) as u32;
                }
            }
        }
        Ok(())
    }
}

/// A fixed gate sequence over two registers: (gate, register indices).
pub type KeySchedule = Vec<(KeyGate, Vec<usize>)>;

/// Five gates touching both registers.
pub fn reference_schedule() -> KeySchedule {
    vec![
        (KeyGate::X(1), vec![0]),
        (KeyGate::Sum(1), vec![0, 1]),
        (KeyGate::Fourier, vec![0]),
        (KeyGate::Z(2), vec![1]),
        (KeyGate::Sum(3), vec![1, 0]),
    ]
}

fn run_schedule(rules: &KeyRules, schedule: &KeySchedule, keys: &mut [PolyAuthKey]) -> Result<()> {
    for (gate, regs) in schedule {
        match regs.as_slice() {
            [a] => rules.update(*gate, &mut [&mut keys[*a]])?,
            [a, b] if a != b => {
                let (lo, hi) = keys.split_at_mut((*a).max(*b));
                let (ka, kb) = if a < b { (&mut lo[*a], &mut hi[0]) } else { (&mut hi[0], &mut lo[*b]) };
                rules.update(*gate, &mut [ka, kb])?;
            }
            _ => return Err(Error::Parameter("schedule entry needs one or two distinct registers".into())),
        }
    }
    Ok(())
}

/// Exact pushforward of the uniform two-register key distribution through
/// a schedule, for one sign key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushforwardReport {
    /// Every wire position maps its `q^4` local keys one-to-one.
    pub per_wire_bijective: bool,
    /// Changing one wire's keys never changes another wire's image.
    pub transversal: bool,
    /// Rank over `F_q` of the linear part on the full `4m`-dimensional key
    /// space.
    pub rank: usize,
}

impl PushforwardReport {
    /// Uniform joint distribution, hence uniform marginals and pairwise
    /// independent registers.
    pub fn uniform(&self, m: usize) -> bool {
        self.per_wire_bijective && self.transversal && self.rank == 4 * m
    }
}

fn flatten(keys: &[PolyAuthKey]) -> Vec<u32> {
    keys.iter().flat_map(|k| k.x.iter().chain(&k.z).copied()).collect()
}

fn keys_from(sign: &SignKey, m: usize, v: &[u32]) -> Vec<PolyAuthKey> {
    (0..2).map(|r| PolyAuthKey { sign: sign.clone(), x: v[2 * r * m..(2 * r + 1) * m].to_vec(), z: v[(2 * r + 1) * m..(2 * r + 2) * m].to_vec() }).collect()
}

pub fn key_pushforward(q: u32, d: usize, sign: &SignKey, schedule: &KeySchedule) -> Result<PushforwardReport> {
    let rules = KeyRules::new(q, d)?;
    let m = rules.m();
    let dim = 4 * m;
    let image = |v: &[u32]| -> Result<Vec<u32>> {
        let mut keys = keys_from(sign, m, v);
        run_schedule(&rules, schedule, &mut keys)?;
        Ok(flatten(&keys))
    };
    // local coordinates of wire i in the flattened vector
    let local = |i: usize| [i, m + i, 2 * m + i, 3 * m + i];
    let base: Vec<u32> = (0..dim as u32).map(|j| (j * 7 + 3) % q).collect();
    let base_image = image(&base)?;
    let mut per_wire_bijective = true;
    let mut transversal = true;
    let local_states = (q as usize).pow(4);
    for i in 0..m {
        let mut seen = vec![false; local_states];
        for s in 0..local_states {
            let digits = index_to_digits(q, 4, s);
            let mut v = base.clone();
            for (j, p) in local(i).iter().enumerate() {
                v[*p] = digits[j];
            }
            let out = image(&v)?;
            let idx = local(i).iter().fold(0usize, |acc, p| acc * q as usize + out[*p] as usize);
            per_wire_bijective &= !core::mem::replace(&mut seen[idx], true);
            for j in (0..m).filter(|j| *j != i) {
                transversal &= local(j).iter().all(|p| out[*p] == base_image[*p]);
            }
        }
    }
    // linear part: columns are images of unit vectors minus the offset
    let zero_image = image(&vec![0; dim])?;
    let mut rows: Vec<Vec<i64>> = vec![vec![0; dim]; dim];
    for j in 0..dim {
        let mut e = vec![0; dim];
        e[j] = 1;
        let out = image(&e)?;
        for r in 0..dim {
            rows[r][j] = (out[r] as i64 - zero_image[r] as i64).rem_euclid(q as i64);
        }
    }
    Ok(PushforwardReport { per_wire_bijective, transversal, rank: rank_mod(rows, q as i64) })
}

fn rank_mod(mut a: Vec<Vec<i64>>, q: i64) -> usize {
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|r| a[*r][col] % q != 0) else { continue };
        a.swap(rank, p);
        let inv = (1..q).find(|v| a[rank][col] * v % q == 1).expect("prime modulus");
        for c in 0..cols {
            a[rank][c] = a[rank][c] * inv % q;
        }
        for r in 0..a.len() {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..cols {
                    a[r][c] = (a[r][c] - f * a[rank][c]).rem_euclid(q);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Exact distribution of the string a prover sees when measuring a padded
/// encoding of logical `a`, over a uniform X pad (the Z pad only adds
/// phases). Indexed by base-`q` string value.
pub fn measurement_string_distribution(q: u32, d: usize, sign: &SignKey, a: u32) -> Result<Vec<f64>> {
    let code = SignedCode::new(q, d, sign.clone())?;
    let m = code.m();
    let size = crate::qsim::check_size(q, m)?;
    let words = code.codewords(a);
    let weight = 1.0 / (size as f64 * words.len() as f64);
    let mut dist = vec![0.0; size];
    for xi in 0..size {
        let x = index_to_digits(q, m, xi);
        for w in words {
            let idx = w.iter().zip(&x).fold(0usize, |acc, (wi, xv)| acc * q as usize + ((wi + xv) % q) as usize);
            dist[idx] += weight;
        }
    }
    Ok(dist)
}
