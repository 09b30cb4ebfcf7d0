//! Numerical checks of the twirling and decomposition identities used in
//! the security proofs, at sizes where the groups can be enumerated.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::clifford::{enumerate_cliffords, CliffordTableau};
use crate::error::{Error, Result};
use crate::linalg::{gaussian, Matrix};
use crate::qsim::{pauli_decompose, PauliLabel};

/// Random full-rank density matrix `A A† / Tr(A A†)` with Gaussian `A`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let mut a = Matrix::zeros(dim, dim);
    for v in a.data_mut() {
        *v = C64::new(gaussian(rng), gaussian(rng));
    }
    let m = a.matmul(&a.adjoint());
    let t = m.trace().re;
    m.scale(C64::new(1.0 / t, 0.0))
}

fn label_index(p: &PauliLabel) -> usize {
    p.x().iter().zip(p.z()).fold(0usize, |acc, (x, z)| (acc * p.q() as usize + *x as usize) * p.q() as usize + *z as usize)
}

/// Image counts of `C† P C` (sign dropped) over the enumerated group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixReport {
    pub n: usize,
    pub group_size: usize,
    /// `counts[p][r]`: number of Cliffords taking label `p` to label `r`,
    /// both indexed as in [`PauliLabel::all`].
    pub counts: Vec<Vec<usize>>,
}

impl MixReport {
    /// Every non-identity label reaches every non-identity label exactly
    /// `|C_n| / (4^n − 1)` times, and never the identity.
    pub fn is_uniform(&self) -> bool {
        let labels = 1usize << (2 * self.n);
        if !self.group_size.is_multiple_of(labels - 1) {
            return false;
        }
        let expect = self.group_size / (labels - 1);
        self.counts.iter().enumerate().skip(1).all(|(_, row)| row[0] == 0 && row[1..].iter().all(|c| *c == expect))
    }
}

pub fn clifford_mix(n: usize) -> Result<MixReport> {
    let group = enumerate_cliffords(n)?;
    let labels: Vec<PauliLabel> = PauliLabel::all(2, n).collect();
    let mut counts = vec![vec![0usize; labels.len()]; labels.len()];
    for c in &group {
        for (i, p) in labels.iter().enumerate() {
            let img = c.conjugate_pauli(p)?;
            counts[i][label_index(&img)] += 1;
        }
    }
    Ok(MixReport { n, group_size: group.len(), counts })
}

fn conjugated(c: &CliffordTableau, p: &PauliLabel) -> Result<Matrix> {
    Ok(c.conjugate_pauli(p)?.to_matrix())
}

/// `Σ_C C†PC ρ C†P′C` over the enumerated `n`-qubit Clifford group.
pub fn clifford_twirl_cross(p: &PauliLabel, p2: &PauliLabel, rho: &Matrix) -> Result<Matrix> {
    if p.len() != p2.len() {
        return Err(Error::DimensionMismatch("Pauli labels of different length".into()));
    }
    let dim = 1usize << p.len();
    let mut acc = Matrix::zeros(dim, dim);
    for c in enumerate_cliffords(p.len())? {
        let term = conjugated(&c, p)?.matmul(rho).matmul(&conjugated(&c, p2)?);
        acc.add_assign_scaled(&term, C64::new(1.0, 0.0));
    }
    Ok(acc)
}

/// `Σ_Q Q†PQ ρ Q†P′†Q` over all generalized Paulis `Q` of the labels' size.
pub fn pauli_twirl_cross(p: &PauliLabel, p2: &PauliLabel, rho: &Matrix) -> Result<Matrix> {
    if p.q() != p2.q() || p.len() != p2.len() {
        return Err(Error::DimensionMismatch("Pauli labels of different shape".into()));
    }
    let (pm, p2m) = (p.to_matrix(), p2.to_matrix().adjoint());
    let mut acc = Matrix::zeros(pm.rows(), pm.rows());
    for q in PauliLabel::all(p.q(), p.len()) {
        let qm = q.to_matrix();
        let qd = qm.adjoint();
        let term = qd.matmul(&pm).matmul(&qm).matmul(rho).matmul(&qd).matmul(&p2m).matmul(&qm);
        acc.add_assign_scaled(&term, C64::new(1.0, 0.0));
    }
    Ok(acc)
}

/// `Σ_P Tr(U_P ρ U_P†)` for `U = Σ_P P ⊗ U_P`, Paulis on the leading `n`
/// qudits and `ρ` on the rest.
pub fn decomposition_trace_sum(u: &Matrix, q: u32, n: usize, rho: &Matrix) -> Result<f64> {
    let sys = (q as usize).pow(n as u32);
    if !u.is_square() || u.rows() != sys * rho.rows() {
        return Err(Error::DimensionMismatch("operator and environment state do not fit".into()));
    }
    Ok(pauli_decompose(u, q, n).iter().map(|(_, b)| b.matmul(rho).matmul(&b.adjoint()).trace().re).sum())
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    /// Instances checked.
    pub cases: usize,
    /// Largest deviation from the claimed value.
    pub max_error: f64,
    pub tolerance: f64,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// Run all checks: mix for `n ≤ 2`, the Clifford twirl at `n = 1`, the
/// decomposition on `unitaries` random two-qubit unitaries, and the
/// generalized Pauli twirls at `q = 3, 5`.
pub fn lemma_suite<R: Rng + ?Sized>(unitaries: usize, rng: &mut R) -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();
    for n in 1..=2 {
        let r = clifford_mix(n)?;
        out.push(LemmaCheck { name: if n == 1 { "clifford-mix-1" } else { "clifford-mix-2" }, cases: r.group_size, max_error: if r.is_uniform() { 0.0 } else { 1.0 }, tolerance: 0.0 });
    }

    let rho = random_density(2, rng);
    let mut err = 0.0f64;
    let mut cases = 0;
    for p in PauliLabel::all(2, 1) {
        for p2 in PauliLabel::all(2, 1).filter(|p2| *p2 != p) {
            err = err.max(clifford_twirl_cross(&p, &p2, &rho)?.max_abs());
            cases += 1;
        }
    }
    out.push(LemmaCheck { name: "clifford-twirl", cases, max_error: err, tolerance: 1e-9 });

    let mut err = 0.0f64;
    for _ in 0..unitaries {
        let u = Matrix::random_unitary(4, rng);
        let rho = random_density(2, rng);
        err = err.max((decomposition_trace_sum(&u, 2, 1, &rho)? - 1.0).abs());
    }
    out.push(LemmaCheck { name: "decompose", cases: unitaries, max_error: err, tolerance: 1e-9 });

    let (mut tw, mut id, mut cases, mut id_cases) = (0.0f64, 0.0f64, 0, 0);
    for q in [3u32, 5] {
        let rho = random_density(q as usize, rng);
        let labels: Vec<PauliLabel> = PauliLabel::all(q, 1).collect();
        let scale = C64::new(1.0 / labels.len() as f64, 0.0);
        for p in &labels {
            for p2 in labels.iter().filter(|p2| *p2 != p) {
                tw = tw.max(pauli_twirl_cross(p, p2, &rho)?.max_abs());
                cases += 1;
            }
            let avg = pauli_twirl_cross(p, p, &rho)?.scale(scale);
            let pm = p.to_matrix();
            id = id.max(avg.max_abs_diff(&pm.matmul(&rho).matmul(&pm.adjoint())));
            id_cases += 1;
        }
    }
    out.push(LemmaCheck { name: "pauli-twirl", cases, max_error: tw, tolerance: 1e-9 });
    out.push(LemmaCheck { name: "pauli-identity", cases: id_cases, max_error: id, tolerance: 1e-9 });
    Ok(out)
}
