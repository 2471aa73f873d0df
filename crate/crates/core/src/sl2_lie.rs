//! The Lie algebra `sl(2,C)`, its Killing form, the groups `SL(2,C)` and
//! `PSL(2,C)`, and the bi-invariant holomorphic Riemannian metric
//! `<,>_A = (1/8) (L_A)_* Kill`.
//!
//! Orthonormal basis of `(sl(2,C), Kill/8)`:
//! `H = diag(1,-1)`, `X = [[0,1],[1,0]]`, `Y = [[0,i],[-i,0]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cx_linear::{ComplexMat2, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::hrm_kernel::{ChartMetric, ScalarField};

const TRACE_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-10;
const TANGENT_TOL: f64 = 1e-10;
const BASE_TOL: f64 = 1e-12;

/// A trace-free 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Vector {
    mat: ComplexMat2,
}

impl Sl2Vector {
    /// Accepts `mat` if `|tr(mat)| < 1e-12` (scaled by the entry size for large matrices).
    pub fn new(mat: ComplexMat2) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::NonFinite("Sl2Vector"));
        }
        let tr = mat.trace().norm();
        if tr >= TRACE_TOL * mat.max_norm().max(1.0) {
            return Err(Error::NotTraceFree(tr));
        }
        Ok(Self { mat })
    }

    /// Removes the trace part: `mat - tr(mat)/2 I`.
    pub fn project(mat: ComplexMat2) -> Self {
        let half = mat.trace() * 0.5;
        Self { mat: mat - ComplexMat2::identity() * half }
    }

    /// `h H + x X + y Y` in the orthonormal basis.
    pub fn from_coords(h: Complex64, x: Complex64, y: Complex64) -> Self {
        let [bh, bx, by] = ORTHONORMAL_BASIS;
        Self { mat: bh.mat * h + bx.mat * x + by.mat * y }
    }

    /// Coordinates in the orthonormal basis.
    pub fn coords(&self) -> [Complex64; 3] {
        ORTHONORMAL_BASIS.map(|e| hrm_metric(&e, self))
    }

    pub const fn zero() -> Self {
        Self { mat: ComplexMat2::zero() }
    }

    pub fn mat(&self) -> &ComplexMat2 {
        &self.mat
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { mat: self.mat * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: self.mat + other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: self.mat - other.mat }
    }

    pub fn max_norm(&self) -> f64 {
        self.mat.max_norm()
    }
}

pub const H: Sl2Vector = Sl2Vector { mat: ComplexMat2::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)) };
pub const X: Sl2Vector = Sl2Vector { mat: ComplexMat2::new(ZERO, ONE, ONE, ZERO) };
pub const Y: Sl2Vector = Sl2Vector { mat: ComplexMat2::new(ZERO, I, Complex64::new(0.0, -1.0), ZERO) };

pub const ORTHONORMAL_BASIS: [Sl2Vector; 3] = [H, X, Y];

/// An `SL(2,C)` representative of an element of `PSL(2,C)`.
///
/// Group operations act on the representative; equality up to sign lives in
/// [`psl_equal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PslElement {
    rep: ComplexMat2,
}

impl PslElement {
    pub fn new(rep: ComplexMat2) -> Result<Self> {
        if !rep.is_finite() {
            return Err(Error::NonFinite("PslElement"));
        }
        let dev = (rep.det() - ONE).norm();
        if dev >= DET_TOL {
            return Err(Error::NotUnimodular(dev));
        }
        Ok(Self { rep })
    }

    /// Rescales an invertible matrix by a square root of its determinant.
    pub fn from_invertible(m: ComplexMat2) -> Result<Self> {
        let det = m.det();
        if det.norm() <= 1e-300 {
            return Err(Error::Singular);
        }
        Self::new(m * (ONE / det.sqrt()))
    }

    pub fn identity() -> Self {
        Self { rep: ComplexMat2::identity() }
    }

    pub fn rep(&self) -> &ComplexMat2 {
        &self.rep
    }

    pub fn inverse(&self) -> Self {
        Self { rep: self.rep.adjugate() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { rep: self.rep * other.rep }
    }

    pub fn neg(&self) -> Self {
        Self { rep: -self.rep }
    }
}

/// A tangent vector `vec` to `SL(2,C)` at `base`, stored as a matrix.
#[derive(Debug, Clone, Copy)]
pub struct TangentAtGroup {
    base: PslElement,
    vec: ComplexMat2,
}

impl TangentAtGroup {
    /// Requires `base^-1 vec` to be trace-free.
    pub fn new(base: PslElement, vec: ComplexMat2) -> Result<Self> {
        let tr = (base.inverse().rep * vec).trace().norm();
        if tr >= TANGENT_TOL * vec.max_norm().max(1.0) {
            return Err(Error::NotTraceFree(tr));
        }
        Ok(Self { base, vec })
    }

    /// Left translate `base * v` of a Lie algebra vector.
    pub fn left_translate(base: PslElement, v: &Sl2Vector) -> Self {
        Self { base, vec: base.rep * v.mat }
    }

    pub fn base(&self) -> &PslElement {
        &self.base
    }

    pub fn vec(&self) -> &ComplexMat2 {
        &self.vec
    }
}

/// `[M, N] = MN - NM`.
pub fn bracket(m: &Sl2Vector, n: &Sl2Vector) -> Sl2Vector {
    Sl2Vector::project(m.mat * n.mat - n.mat * m.mat)
}

/// `Kill(M, N) = 4 tr(MN)`.
pub fn killing(m: &Sl2Vector, n: &Sl2Vector) -> Complex64 {
    4.0 * (m.mat * n.mat).trace()
}

/// `Kill(M, N) / 8 = tr(MN) / 2`.
pub fn hrm_metric(m: &Sl2Vector, n: &Sl2Vector) -> Complex64 {
    0.5 * (m.mat * n.mat).trace()
}

/// The bi-invariant metric at `a`, computed through left translation.
pub fn metric_at(a: &PslElement, u: &TangentAtGroup, v: &TangentAtGroup) -> Result<Complex64> {
    if u.base.rep.dist(&a.rep) > BASE_TOL || v.base.rep.dist(&a.rep) > BASE_TOL {
        return Err(Error::BaseMismatch);
    }
    let inv = a.inverse().rep;
    Ok(0.5 * ((inv * u.vec) * (inv * v.vec)).trace())
}

/// The same metric computed through right translation, `((R_A)_* Kill)/8`.
pub fn metric_at_right(a: &PslElement, u: &TangentAtGroup, v: &TangentAtGroup) -> Result<Complex64> {
    if u.base.rep.dist(&a.rep) > BASE_TOL || v.base.rep.dist(&a.rep) > BASE_TOL {
        return Err(Error::BaseMismatch);
    }
    let inv = a.inverse().rep;
    Ok(0.5 * ((u.vec * inv) * (v.vec * inv)).trace())
}

/// `cosh(s) I + sinh(s)/s M` with `s^2 = -det(M)`.
///
/// Both functions are even in `s`, so they are evaluated as functions of `s^2`
/// and the choice of square root never matters. Near `s = 0` the Taylor series
/// in `s^2` replaces the quotient.
pub fn exp_sl2(m: &Sl2Vector) -> PslElement {
    let s2 = -m.mat.det();
    let (ch, shc) = if s2.norm() < 1e-6 {
        let ch = ONE + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
        let shc = ONE + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
        (ch, shc)
    } else {
        let s = s2.sqrt();
        (s.cosh(), s.sinh() / s)
    };
    PslElement { rep: ComplexMat2::identity() * ch + m.mat * shc }
}

/// `Ad(A) M = A M A^-1`; the sign of the representative cancels.
pub fn adjoint(a: &PslElement, m: &Sl2Vector) -> Sl2Vector {
    Sl2Vector::project(a.rep * m.mat * a.inverse().rep)
}

/// Equality in `PSL(2,C)`: `min(|A - B|, |A + B|) < tol` in the entrywise-max norm.
pub fn psl_equal(a: &PslElement, b: &PslElement, tol: f64) -> bool {
    psl_distance(a, b) < tol
}

pub fn psl_distance(a: &PslElement, b: &PslElement) -> f64 {
    a.rep.dist(&b.rep).min((a.rep + b.rep).max_norm())
}

/// The isometry `(A, B) . C = A C B^-1` of the bi-invariant metric.
pub fn isometry_action(a: &PslElement, b: &PslElement, c: &PslElement) -> PslElement {
    a.mul(c).mul(&b.inverse())
}

/// Pushforward of a tangent vector under `C -> A C B^-1`.
pub fn isometry_pushforward(a: &PslElement, b: &PslElement, u: &TangentAtGroup) -> TangentAtGroup {
    TangentAtGroup {
        base: isometry_action(a, b, &u.base),
        vec: a.rep * u.vec * b.inverse().rep,
    }
}

/// Curvature operator of the bi-invariant metric on left-invariant fields,
/// `R(V1, V2) V3 = -[[V1, V2], V3] / 4`.
pub fn algebraic_curvature(v1: &Sl2Vector, v2: &Sl2Vector, v3: &Sl2Vector) -> Sl2Vector {
    bracket(&bracket(v1, v2), v3).scale(Complex64::new(-0.25, 0.0))
}

pub use crate::hrm_kernel::PLANE_THRESHOLD;

/// `<R(V,W)W, V> / (|V|^2 |W|^2 - <V,W>^2)` for the algebraic curvature.
pub fn algebraic_sectional_curvature(v: &Sl2Vector, w: &Sl2Vector) -> Result<Complex64> {
    let vv = hrm_metric(v, v);
    let ww = hrm_metric(w, w);
    let vw = hrm_metric(v, w);
    let gram = vv * ww - vw * vw;
    let scale = v.mat.frobenius().powi(2) * w.mat.frobenius().powi(2);
    if gram.norm() <= PLANE_THRESHOLD * scale {
        return Err(Error::DegeneratePlane(gram));
    }
    Ok(hrm_metric(&algebraic_curvature(v, w, w), v) / gram)
}

/// Chart `(a, b, c) -> [[a, b], [c, (1 + bc)/a]]` of `SL(2,C)` on `{a != 0}`.
pub fn sl2_chart_embed(p: &[Complex64]) -> ComplexMat2 {
    ComplexMat2::new(p[0], p[1], p[2], (ONE + p[1] * p[2]) / p[0])
}

/// Chart coordinates of a representative; fails where `a = 0`.
pub fn sl2_chart_coords(a: &PslElement) -> Result<[Complex64; 3]> {
    let m = a.rep;
    if m.a.norm() < 1e-9 {
        return Err(Error::OutsideDomain);
    }
    Ok([m.a, m.b, m.c])
}

/// Chart components of a tangent matrix at a point of the chart.
pub fn sl2_chart_tangent(v: &ComplexMat2) -> [Complex64; 3] {
    [v.a, v.b, v.c]
}

/// The bi-invariant metric in the `(a, b, c)` chart,
/// `g_ij = tr(A^-1 d_i A A^-1 d_j A) / 2`.
pub fn sl2_chart_metric() -> ChartMetric {
    ChartMetric::new(
        3,
        ScalarField::Complex,
        |p| {
            let (a, b, c) = (p[0], p[1], p[2]);
            let m = sl2_chart_embed(p);
            let inv = m.adjugate();
            let partials = [
                ComplexMat2::new(ONE, ZERO, ZERO, -(ONE + b * c) / (a * a)),
                ComplexMat2::new(ZERO, ONE, ZERO, c / a),
                ComplexMat2::new(ZERO, ZERO, ONE, b / a),
            ];
            let left: Vec<ComplexMat2> = partials.iter().map(|d| inv * *d).collect();
            DMatrix::from_fn(3, 3, |i, j| (left[i] * left[j]).trace() * 0.5)
        },
        |p| p[0].norm() > 1e-9,
    )
}
