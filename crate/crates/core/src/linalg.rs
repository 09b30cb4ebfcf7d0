//! Small dense complex matrices: enough linear algebra for the numerical
//! checks (products, Kronecker products, partial traces, Hermitian spectra).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `e^{2πi k/q}`.
pub fn root_of_unity(q: u32, k: i64) -> C64 {
    let k = k.rem_euclid(q as i64) as f64;
    let theta = 2.0 * core::f64::consts::PI * k / q as f64;
    C64::new(theta.cos(), theta.sin())
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Matrix, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_assign_scaled(other, C64::new(-1.0, 0.0));
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.adjoint().matmul(self).max_abs_diff(&Matrix::identity(self.rows)) < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) < tol
    }

    /// Equality up to a global phase, judged on the largest entry.
    pub fn approx_eq_up_to_phase(&self, other: &Matrix, tol: f64) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        let (idx, _) = other.data.iter().enumerate().fold((0, 0.0), |best, (i, v)| if v.norm() > best.1 { (i, v.norm()) } else { best });
        if other.data[idx].norm() < tol {
            return self.max_abs() < tol;
        }
        let phase = self.data[idx] / other.data[idx];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.max_abs_diff(&other.scale(phase)) < tol
    }

    /// Eigenvalues of a Hermitian matrix (ascending), via the real symmetric
    /// embedding `[[A, -B], [B, A]]` and cyclic Jacobi rotations. Every
    /// eigenvalue of the embedding appears twice; one copy of each is kept.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues of non-square matrix");
        let n = self.rows;
        let size = 2 * n;
        let mut a = vec![0.0f64; size * size];
        for r in 0..n {
            for c in 0..n {
                let v = self[(r, c)];
                a[r * size + c] = v.re;
                a[(r + n) * size + (c + n)] = v.re;
                a[r * size + (c + n)] = -v.im;
                a[(r + n) * size + c] = v.im;
            }
        }
        jacobi_eigenvalues(&mut a, size);
        let mut eig: Vec<f64> = (0..size).map(|i| a[i * size + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }

    /// Haar-random unitary via Gram–Schmidt on a complex Gaussian matrix.
    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
        loop {
            let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect()).collect();
            let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
            let mut degenerate = false;
            for mut v in cols {
                for b in &basis {
                    let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= overlap * bi;
                    }
                }
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    degenerate = true;
                    break;
                }
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v);
            }
            if degenerate {
                continue;
            }
            let mut m = Matrix::zeros(n, n);
            for (c, col) in basis.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    m[(r, c)] = *v;
                }
            }
            return m;
        }
    }
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) {
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-26 {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Standard normal sample (Box–Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > 1e-300 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 4, 8] {
            assert!(Matrix::random_unitary(n, &mut rng).is_unitary(1e-10));
        }
    }

    #[test]
    fn hermitian_spectrum() {
        // Pauli Y has eigenvalues ±1
        let y = Matrix::from_rows(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]);
        let e = y.hermitian_eigenvalues();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = Matrix::random_unitary(6, &mut rng);
        let mut d = Matrix::zeros(6, 6);
        let spectrum = [-2.0, -0.5, 0.0, 0.25, 1.0, 3.0];
        for (i, s) in spectrum.iter().enumerate() {
            d[(i, i)] = C64::new(*s, 0.0);
        }
        let h = u.matmul(&d).matmul(&u.adjoint());
        let e = h.hermitian_eigenvalues();
        for (a, b) in e.iter().zip(spectrum.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn phase_insensitive_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Matrix::random_unitary(3, &mut rng);
        let v = u.scale(root_of_unity(7, 2));
        assert!(u.approx_eq_up_to_phase(&v, 1e-12));
        assert!(!u.approx_eq_up_to_phase(&Matrix::identity(3), 1e-6));
    }
}
