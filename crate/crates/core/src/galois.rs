//! Exact arithmetic over prime fields `F_q` and low-degree polynomials.
//!
//! Field sizes in this crate are tiny (q ≤ a few dozen), so everything is
//! done with plain `u32` residues and extended Euclid for inversion.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A prime modulus. Construction is the only place primality is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self> {
        if is_prime(q) {
            Ok(Self { q })
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn elem(&self, value: i64) -> Fp {
        Fp::from_i64(value, self.q)
    }

    pub fn zero(&self) -> Fp {
        Fp { value: 0, q: self.q }
    }

    pub fn one(&self) -> Fp {
        Fp { value: 1 % self.q, q: self.q }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fp> + '_ {
        (0..self.q).map(move |v| Fp { value: v, q: self.q })
    }
}

/// An element of `F_q`, carrying its modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u32,
    q: u32,
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.q)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Fp {
    /// Reduces `value` modulo `q`. The caller vouches for `q` being prime;
    /// use [`PrimeField::elem`] when it has not been validated.
    pub fn from_i64(value: i64, q: u32) -> Self {
        let r = value.rem_euclid(q as i64) as u32;
        Self { value: r, q }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Fp) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::ModulusMismatch(self.q, other.q))
        }
    }

    pub fn try_add(self, rhs: Fp) -> Result<Fp> {
        self.same_field(&rhs)?;
        Ok(Fp { value: (self.value + rhs.value) % self.q, q: self.q })
    }

    pub fn try_sub(self, rhs: Fp) -> Result<Fp> {
        self.same_field(&rhs)?;
        Ok(Fp { value: (self.value + self.q - rhs.value) % self.q, q: self.q })
    }

    pub fn try_mul(self, rhs: Fp) -> Result<Fp> {
        self.same_field(&rhs)?;
        let v = (self.value as u64 * rhs.value as u64) % self.q as u64;
        Ok(Fp { value: v as u32, q: self.q })
    }

    pub fn try_div(self, rhs: Fp) -> Result<Fp> {
        self.try_mul(rhs.inv()?)
    }

    /// Multiplicative inverse by extended Euclid.
    pub fn inv(self) -> Result<Fp> {
        if self.value == 0 {
            return Err(Error::InverseOfZero);
        }
        let (mut r0, mut r1) = (self.q as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fp::from_i64(t0, self.q))
    }

    pub fn pow(self, mut exp: u64) -> Fp {
        let q = self.q as u64;
        let mut base = self.value as u64 % q;
        let mut acc = 1 % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            exp >>= 1;
        }
        Fp { value: acc as u32, q: self.q }
    }
}

// Operator forms panic on mismatched moduli; the `try_*` methods report it.
impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        self.try_add(rhs).expect("field modulus mismatch")
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        self.try_sub(rhs).expect("field modulus mismatch")
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        self.try_mul(rhs).expect("field modulus mismatch")
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { value: (self.q - self.value) % self.q, q: self.q }
    }
}

/// Polynomial over `F_q`; `coeffs[i]` is the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldPolynomial {
    coeffs: Vec<Fp>,
    q: u32,
}

impl fmt::Debug for FieldPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 (mod {})", self.q);
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.value)?,
                1 => write!(f, "{}x", c.value)?,
                _ => write!(f, "{}x^{}", c.value, i)?,
            }
        }
        write!(f, " (mod {})", self.q)
    }
}

impl FieldPolynomial {
    pub fn new(field: PrimeField, coeffs: impl IntoIterator<Item = i64>) -> Self {
        let q = field.modulus();
        let coeffs = coeffs.into_iter().map(|c| Fp::from_i64(c, q)).collect();
        Self::from_elems(q, coeffs)
    }

    pub fn from_elems(q: u32, mut coeffs: Vec<Fp>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs, q }
    }

    pub fn zero(field: PrimeField) -> Self {
        Self { coeffs: Vec::new(), q: field.modulus() }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn coefficients(&self) -> &[Fp] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: Fp) -> Fp {
        assert_eq!(x.q, self.q, "field modulus mismatch");
        let mut acc = Fp { value: 0, q: self.q };
        for c in self.coeffs.iter().rev() {
            acc = acc * x + *c;
        }
        acc
    }

    pub fn constant_term(&self) -> Fp {
        self.coeffs.first().copied().unwrap_or(Fp { value: 0, q: self.q })
    }

    /// All polynomials of degree ≤ `max_degree` with `f(0) = constant`,
    /// enumerated in a fixed order (higher coefficients as base-q digits).
    pub fn enumerate_with_constant(field: PrimeField, max_degree: usize, constant: Fp) -> impl Iterator<Item = FieldPolynomial> {
        let q = field.modulus();
        let count = (q as u64).pow(max_degree as u32);
        (0..count).map(move |mut idx| {
            let mut coeffs = Vec::with_capacity(max_degree + 1);
            coeffs.push(constant);
            for _ in 0..max_degree {
                coeffs.push(Fp { value: (idx % q as u64) as u32, q });
                idx /= q as u64;
            }
            FieldPolynomial::from_elems(q, coeffs)
        })
    }
}

/// Distinct nonzero evaluation points `α_1..α_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvalPoints {
    field: PrimeField,
    alphas: Vec<Fp>,
}

impl EvalPoints {
    pub fn new(field: PrimeField, alphas: Vec<Fp>) -> Result<Self> {
        let q = field.modulus();
        if alphas.len() as u64 > q as u64 - 1 {
            return Err(Error::InvalidPoints(alloc::format!("{} points do not fit in F_{}", alphas.len(), q)));
        }
        for (i, a) in alphas.iter().enumerate() {
            if a.q != q {
                return Err(Error::ModulusMismatch(a.q, q));
            }
            if a.is_zero() {
                return Err(Error::InvalidPoints(alloc::format!("point {} is zero", i)));
            }
            if alphas[..i].contains(a) {
                return Err(Error::InvalidPoints(alloc::format!("point {} repeats", a.value)));
            }
        }
        Ok(Self { field, alphas })
    }

    /// `α_i = i` for `i = 1..=m`.
    pub fn standard(field: PrimeField, m: usize) -> Result<Self> {
        let alphas = (1..=m as i64).map(|i| field.elem(i)).collect();
        Self::new(field, alphas)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn as_slice(&self) -> &[Fp] {
        &self.alphas
    }

    pub fn evaluate(&self, f: &FieldPolynomial) -> Vec<Fp> {
        self.alphas.iter().map(|a| f.evaluate(*a)).collect()
    }
}

/// Coefficients `c_i = Π_{j≠i} (−α_j)/(α_i − α_j)` with
/// `Σ c_i f(α_i) = f(0)` for every `f` of degree ≤ m−1.
pub fn interpolation_coefficients(points: &EvalPoints) -> Vec<Fp> {
    let alphas = points.as_slice();
    let field = points.field();
    alphas
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            let mut num = field.one();
            let mut den = field.one();
            for (j, &aj) in alphas.iter().enumerate() {
                if i != j {
                    num = num * -aj;
                    den = den * (ai - aj);
                }
            }
            num * den.inv().expect("points are distinct")
        })
        .collect()
}

/// Lagrange interpolation through `values`; `Ok(None)` when the unique
/// interpolant has degree above `max_degree` (no fit).
pub fn fit_polynomial(field: PrimeField, values: &[(Fp, Fp)], max_degree: usize) -> Result<Option<FieldPolynomial>> {
    let q = field.modulus();
    for (i, (x, y)) in values.iter().enumerate() {
        if x.q != q {
            return Err(Error::ModulusMismatch(x.q, q));
        }
        if y.q != q {
            return Err(Error::ModulusMismatch(y.q, q));
        }
        if values[..i].iter().any(|(x2, _)| x2 == x) {
            return Err(Error::DuplicateAbscissa(x.value));
        }
    }
    let mut acc = alloc::vec![field.zero(); values.len().max(1)];
    for (i, &(xi, yi)) in values.iter().enumerate() {
        // basis polynomial Π_{j≠i} (x − x_j)/(x_i − x_j), built by repeated multiplication
        let mut basis = alloc::vec![field.one()];
        let mut den = field.one();
        for (j, &(xj, _)) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = alloc::vec![field.zero(); basis.len() + 1];
            for (k, &b) in basis.iter().enumerate() {
                next[k + 1] = next[k + 1] + b;
                next[k] = next[k] - b * xj;
            }
            basis = next;
            den = den * (xi - xj);
        }
        let scale = yi * den.inv()?;
        for (k, b) in basis.into_iter().enumerate() {
            acc[k] = acc[k] + b * scale;
        }
    }
    let poly = FieldPolynomial::from_elems(q, acc);
    Ok(match poly.degree() {
        Some(deg) if deg > max_degree => None,
        _ => Some(poly),
    })
}
