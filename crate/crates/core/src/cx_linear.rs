//! Complex scalars, small complex vectors and 2x2 matrices, and the bilinear
//! forms that make `C^n` and `Mat(2, C)` flat holomorphic Riemannian spaces.
//!
//! All forms here are complex *bilinear*: nothing is ever conjugated.

use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// A finite vector in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        if !entries.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("ComplexVec"));
        }
        Ok(Self(entries))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// Euclidean (Hermitian) length, used only to scale tolerances.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for &ComplexVec {
    type Output = ComplexVec;
    fn add(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVec {
    type Output = ComplexVec;
    fn sub(self, rhs: &ComplexVec) -> ComplexVec {
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// `<v, w> = sum v_i w_i`.
pub fn bilinear_cn(v: &ComplexVec, w: &ComplexVec) -> Result<Complex64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), actual: w.dim() });
    }
    Ok(bilinear_slice(v.as_slice(), w.as_slice()))
}

pub(crate) fn bilinear_slice(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Row-major 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl ComplexMat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        Self::new(p, ZERO, ZERO, q)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_entries(e: [Complex64; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn adjugate(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= 1e-300 || !det.is_finite() {
            return Err(Error::Singular);
        }
        Ok(self.adjugate() * (ONE / det))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise-max distance.
    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).max_norm()
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Mul<Complex64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self * Complex64::from(s)
    }
}

/// `<M, N> = (tr(MN) - tr(M) tr(N)) / 2`, the polarization of `M -> -det(M)`.
pub fn mat2_bilinear(m: &ComplexMat2, n: &ComplexMat2) -> Complex64 {
    0.5 * ((*m * *n).trace() - m.trace() * n.trace())
}

/// The linear isometry `(C^4, <,>) -> (Mat(2,C), <,>)`:
///
/// ```text
/// (z1, z2, z3, z4) -> [[-z1 - i z4, -z2 - i z3],
///                      [-z2 + i z3,  z1 - i z4]]
/// ```
///
/// so that `-det F(z) = z1^2 + z2^2 + z3^2 + z4^2`.
pub fn f_map(z: &ComplexVec) -> Result<ComplexMat2> {
    if z.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, actual: z.dim() });
    }
    Ok(f_map_array([z[0], z[1], z[2], z[3]]))
}

pub(crate) fn f_map_array(z: [Complex64; 4]) -> ComplexMat2 {
    let [z1, z2, z3, z4] = z;
    ComplexMat2::new(-z1 - I * z4, -z2 - I * z3, -z2 + I * z3, z1 - I * z4)
}

/// Inverse of [`f_map`].
pub fn f_map_inverse(m: &ComplexMat2) -> ComplexVec {
    let z1 = (m.d - m.a) * 0.5;
    let z4 = I * (m.a + m.d) * 0.5;
    let z2 = -(m.b + m.c) * 0.5;
    let z3 = (m.c - m.b) / (2.0 * I);
    ComplexVec(vec![z1, z2, z3, z4])
}
