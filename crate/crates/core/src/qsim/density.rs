use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::{check_size, PureState};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, ZERO};

/// Density operator on `n` qudits of dimension `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    q: u32,
    n: usize,
    m: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within 1e-9.
    pub fn from_matrix(q: u32, n: usize, m: Matrix) -> Result<Self> {
        let dim = check_size(q, n)?;
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch(alloc::format!("{}x{} density matrix for dimension {}", m.rows(), m.cols(), dim)));
        }
        if !m.is_hermitian(1e-9) {
            return Err(Error::Parameter("density matrix is not Hermitian".into()));
        }
        if (m.trace() - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::Parameter("density matrix trace is not 1".into()));
        }
        if m.hermitian_eigenvalues().first().is_some_and(|&e| e < -1e-9) {
            return Err(Error::Parameter("density matrix is not positive semidefinite".into()));
        }
        Ok(Self { q, n, m })
    }

    pub(crate) fn from_matrix_unchecked(q: u32, n: usize, m: Matrix) -> Self {
        Self { q, n, m }
    }

    pub fn maximally_mixed(q: u32, n: usize) -> Result<Self> {
        let dim = check_size(q, n)?;
        Ok(Self { q, n, m: Matrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) })
    }

    /// Sum of `weight_i · ρ_i`; weights are not renormalized.
    pub fn mixture<'a>(q: u32, n: usize, parts: impl IntoIterator<Item = (f64, &'a PureState)>) -> Result<Self> {
        let dim = check_size(q, n)?;
        let mut m = Matrix::zeros(dim, dim);
        for (w, s) in parts {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch("mixture component of wrong size".into()));
            }
            let a = s.amplitudes();
            for r in 0..dim {
                if a[r] == ZERO {
                    continue;
                }
                for c in 0..dim {
                    m[(r, c)] += a[r] * a[c].conj() * w;
                }
            }
        }
        Ok(Self { q, n, m })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn num_qudits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &PureState) -> f64 {
        let a = psi.amplitudes();
        let v = self.m.apply(a);
        a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum::<C64>().re
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &Matrix) -> DensityMatrix {
        Self { q: self.q, n: self.n, m: u.matmul(&self.m).matmul(&u.adjoint()) }
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        0.5 * self.m.sub(&other.m).hermitian_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Partial trace keeping `keep` in the listed order.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for (i, w) in keep.iter().enumerate() {
            if *w >= self.n {
                return Err(Error::WireOutOfRange(*w));
            }
            if keep[..i].contains(w) {
                return Err(Error::WireCollision);
            }
        }
        let q = self.q as usize;
        let rest: Vec<usize> = (0..self.n).filter(|w| !keep.contains(w)).collect();
        let stride = |w: usize| q.pow((self.n - 1 - w) as u32);
        let ks: Vec<usize> = keep.iter().map(|&w| stride(w)).collect();
        let rs: Vec<usize> = rest.iter().map(|&w| stride(w)).collect();
        let kd = q.pow(keep.len() as u32);
        let rd = q.pow(rest.len() as u32);
        let compose = |k: usize, r: usize| {
            let mut idx = 0;
            let mut rem = k;
            for s in ks.iter().rev() {
                idx += (rem % q) * s;
                rem /= q;
            }
            let mut rem = r;
            for s in rs.iter().rev() {
                idx += (rem % q) * s;
                rem /= q;
            }
            idx
        };
        let mut out = Matrix::zeros(kd, kd);
        for i in 0..kd {
            for j in 0..kd {
                let mut acc = ZERO;
                for r in 0..rd {
                    acc += self.m[(compose(i, r), compose(j, r))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix { q: self.q, n: keep.len(), m: out })
    }
}
