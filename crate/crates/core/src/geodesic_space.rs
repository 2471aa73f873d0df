//! The space `G = CP^1 x CP^1 \ diagonal` of oriented geodesics of `H^3`.
//!
//! The metric is `-4/(z1 - z2)^2 dz1 dz2`, read with the symmetric-product
//! convention `dz1 dz2 = (dz1 (x) dz2 + dz2 (x) dz1) / 2`, so `g12 = g21 =
//! -2/(z1 - z2)^2` in the finite chart. Points near infinity use `w = 1/z`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cx_linear::{ComplexMat2, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::hrm_kernel::{directional_derivative, ChartMetric, ScalarField};
use crate::rng::SampleRng;
use crate::sl2_lie::{hrm_metric, psl_equal, PslElement, Sl2Vector};

const DIAGONAL_GUARD: f64 = 1e-9;
const LINE_TOL: f64 = 1e-12;
const PULLBACK_PAIRS: usize = 8;

/// A point of `CP^1 = C u {infinity}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(Complex64),
    Infinity,
}

impl BoundaryPoint {
    /// Chordal distance on the Riemann sphere of diameter 2.
    pub fn chordal(&self, other: &Self) -> f64 {
        match (self, other) {
            (Self::Infinity, Self::Infinity) => 0.0,
            (Self::Finite(z), Self::Infinity) | (Self::Infinity, Self::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (Self::Finite(z), Self::Finite(w)) => 2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt(),
        }
    }

    /// Prefers the `w = 1/z` coordinate outside the unit disk.
    fn uses_inverted(&self) -> bool {
        match self {
            Self::Infinity => true,
            Self::Finite(z) => z.norm() > 1.0,
        }
    }

    fn coordinate(&self, inverted: bool) -> Result<Complex64> {
        match (self, inverted) {
            (Self::Finite(z), false) => Ok(*z),
            (Self::Finite(z), true) if *z != ZERO => Ok(z.inv()),
            (Self::Finite(_), true) => Err(Error::WrongChart("inverted")),
            (Self::Infinity, true) => Ok(ZERO),
            (Self::Infinity, false) => Err(Error::WrongChart("finite")),
        }
    }

    fn from_coordinate(c: Complex64, inverted: bool) -> Self {
        match inverted {
            false => Self::Finite(c),
            true if c == ZERO => Self::Infinity,
            true => Self::Finite(c.inv()),
        }
    }
}

/// An oriented geodesic of `H^3`, i.e. its ordered pair of endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicLine {
    p1: BoundaryPoint,
    p2: BoundaryPoint,
}

impl GeodesicLine {
    pub fn new(p1: BoundaryPoint, p2: BoundaryPoint) -> Result<Self> {
        if let BoundaryPoint::Finite(z) = p1 {
            if !z.is_finite() {
                return Err(Error::NonFinite("boundary point"));
            }
        }
        if let BoundaryPoint::Finite(z) = p2 {
            if !z.is_finite() {
                return Err(Error::NonFinite("boundary point"));
            }
        }
        if p1.chordal(&p2) <= LINE_TOL {
            return Err(Error::DegenerateLine);
        }
        Ok(Self { p1, p2 })
    }

    pub fn finite(z1: Complex64, z2: Complex64) -> Result<Self> {
        Self::new(BoundaryPoint::Finite(z1), BoundaryPoint::Finite(z2))
    }

    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        (self.p1, self.p2)
    }

    pub fn reversed(&self) -> Self {
        Self { p1: self.p2, p2: self.p1 }
    }

    /// Chordal distance between lines, treating them as ordered pairs.
    pub fn distance(&self, other: &Self) -> f64 {
        self.p1.chordal(&other.p1).max(self.p2.chordal(&other.p2))
    }
}

/// The four product charts of `G`: each factor uses `z` or `w = 1/z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GChart {
    /// `(z1, z2)`
    FiniteFinite,
    /// `(z1, w2)`
    FiniteInverted,
    /// `(w1, z2)`
    InvertedFinite,
    /// `(w1, w2)`
    InvertedInverted,
}

impl GChart {
    fn flags(self) -> (bool, bool) {
        match self {
            Self::FiniteFinite => (false, false),
            Self::FiniteInverted => (false, true),
            Self::InvertedFinite => (true, false),
            Self::InvertedInverted => (true, true),
        }
    }

    fn from_flags(a: bool, b: bool) -> Self {
        match (a, b) {
            (false, false) => Self::FiniteFinite,
            (false, true) => Self::FiniteInverted,
            (true, false) => Self::InvertedFinite,
            (true, true) => Self::InvertedInverted,
        }
    }

    /// The chart in which both coordinates of `line` have modulus at most 1.
    pub fn adapted(line: &GeodesicLine) -> Self {
        Self::from_flags(line.p1.uses_inverted(), line.p2.uses_inverted())
    }

    pub fn coords(self, line: &GeodesicLine) -> Result<[Complex64; 2]> {
        let (a, b) = self.flags();
        Ok([line.p1.coordinate(a)?, line.p2.coordinate(b)?])
    }

    pub fn line_from(self, c: &[Complex64]) -> Result<GeodesicLine> {
        let (a, b) = self.flags();
        GeodesicLine::new(BoundaryPoint::from_coordinate(c[0], a), BoundaryPoint::from_coordinate(c[1], b))
    }
}

fn off_diagonal(g12: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[ZERO, g12, g12, ZERO])
}

/// The metric of `G` in the `(z1, z2)` chart.
pub fn g_chart_metric() -> ChartMetric {
    g_chart_metric_in(GChart::FiniteFinite)
}

/// The metric of `G` in any of the four charts.
pub fn g_chart_metric_in(chart: GChart) -> ChartMetric {
    let denom = move |p: &[Complex64]| match chart {
        GChart::FiniteFinite | GChart::InvertedInverted => p[0] - p[1],
        GChart::FiniteInverted | GChart::InvertedFinite => p[0] * p[1] - ONE,
    };
    let sign = match chart {
        GChart::FiniteFinite | GChart::InvertedInverted => -2.0,
        GChart::FiniteInverted | GChart::InvertedFinite => 2.0,
    };
    ChartMetric::new(
        2,
        ScalarField::Complex,
        move |p| off_diagonal(sign / denom(p).powi(2)),
        move |p| denom(p).norm() > DIAGONAL_GUARD,
    )
}

/// `z -> (az + b)/(cz + d)` on `CP^1`.
pub fn mobius_apply(a: &PslElement, p: &BoundaryPoint) -> BoundaryPoint {
    let m = a.rep();
    match p {
        BoundaryPoint::Infinity if m.c == ZERO => BoundaryPoint::Infinity,
        BoundaryPoint::Infinity => BoundaryPoint::Finite(m.a / m.c),
        BoundaryPoint::Finite(z) => {
            let den = m.c * z + m.d;
            if den == ZERO {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Finite((m.a * z + m.b) / den)
            }
        }
    }
}

pub fn g_action(a: &PslElement, line: &GeodesicLine) -> GeodesicLine {
    GeodesicLine { p1: mobius_apply(a, &line.p1), p2: mobius_apply(a, &line.p2) }
}

fn rot_pi_finite(p: Complex64, q: Complex64) -> ComplexMat2 {
    let s = p + q;
    ComplexMat2::new(s, -2.0 * p * q, Complex64::new(2.0, 0.0), -s) * (I / (p - q))
}

/// The rotation by `pi` about a line, as the trace-free representative
/// `i/(p - q) [[p + q, -2pq], [2, -(p + q)]]`. Lines through infinity are
/// are first moved by `z -> z/(1 + s z)` with `s = +-1`.
pub fn rot_pi(line: &GeodesicLine) -> Result<PslElement> {
    let finite = match line.endpoints() {
        (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => {
            if (p - q).norm() <= LINE_TOL {
                return Err(Error::DegenerateLine);
            }
            return PslElement::new(rot_pi_finite(p, q));
        }
        (BoundaryPoint::Finite(z), BoundaryPoint::Infinity) | (BoundaryPoint::Infinity, BoundaryPoint::Finite(z)) => z,
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => return Err(Error::DegenerateLine),
    };
    // B^-1 = [[1, 0], [s, 1]] sends infinity to 1/s and keeps the finite end finite.
    let s = if (ONE + finite).norm() >= (ONE - finite).norm() { ONE } else { -ONE };
    let b_inv = PslElement::new(ComplexMat2::new(ONE, ZERO, s, ONE))?;
    let b = b_inv.inverse();
    let moved = g_action(&b_inv, line);
    let (p, q) = match moved.endpoints() {
        (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => (p, q),
        _ => return Err(Error::DegenerateLine),
    };
    let inner = PslElement::new(rot_pi_finite(p, q))?;
    Ok(b.mul(&inner).mul(&b_inv))
}

/// Membership in `Q = {M in PSL : M^2 = I, M != I} = PSL n P(sl)`.
pub fn q_membership(m: &PslElement, tol: f64) -> bool {
    let r = m.rep();
    r.trace().norm() < tol && (r.det() - ONE).norm() < tol && !psl_equal(m, &PslElement::identity(), tol)
}

/// Finite-difference differential of `rot_pi` in the `(z1, z2)` chart, as a
/// tangent matrix at `rot_pi(line)`.
pub fn rot_pi_differential(line: &GeodesicLine, v: &[Complex64]) -> Result<ComplexMat2> {
    let p = GChart::FiniteFinite.coords(line)?;
    let f = |c: &[Complex64]| -> Result<Vec<Complex64>> {
        Ok(rot_pi(&GChart::FiniteFinite.line_from(c)?)?.rep().entries().to_vec())
    };
    let d = directional_derivative(f, &p, v, ScalarField::Complex, 1e-5)?;
    Ok(ComplexMat2::from_entries([d[0], d[1], d[2], d[3]]))
}

/// Largest `|g(X, Y) - <dRot X, dRot Y>_PSL|` over seeded tangent pairs at
/// `line`, relative to `max(1, |g(X, Y)|)`.
pub fn rot_pi_pullback_check(line: &GeodesicLine, seed: u64) -> Result<f64> {
    rot_pi_pullback_check_with(line, &mut SampleRng::new(seed))
}

pub fn rot_pi_pullback_check_with(line: &GeodesicLine, rng: &mut SampleRng) -> Result<f64> {
    let p = GChart::FiniteFinite.coords(line)?;
    if (p[0] - p[1]).norm() < 1e-6 {
        return Err(Error::DegenerateLine);
    }
    let g = g_chart_metric();
    let m = rot_pi(line)?;
    let m_inv = m.inverse();
    let mut worst: f64 = 0.0;
    for _ in 0..PULLBACK_PAIRS {
        let x = [rng.complex_normal(), rng.complex_normal()];
        let y = [rng.complex_normal(), rng.complex_normal()];
        let lhs = g.inner(&p, &x, &y)?;
        let dx = Sl2Vector::project(*m_inv.rep() * rot_pi_differential(line, &x)?);
        let dy = Sl2Vector::project(*m_inv.rep() * rot_pi_differential(line, &y)?);
        let rhs = hrm_metric(&dx, &dy);
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    Ok(worst)
}

/// A seeded line with both endpoints in a disk of radius 2, kept away from the diagonal.
pub fn sample_line(rng: &mut SampleRng) -> GeodesicLine {
    loop {
        let z1 = rng.complex_normal();
        let z2 = rng.complex_normal();
        if z1.norm() < 2.0 && z2.norm() < 2.0 && (z1 - z2).norm() > 0.2 {
            return GeodesicLine::finite(z1, z2).expect("endpoints are separated");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx_linear::{bilinear_slice, f_map_inverse};
    use crate::hrm_kernel::{holomorphy_residual, jacobian, sectional_curvature};
    use crate::sl2_lie::{exp_sl2, psl_distance, X};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_psl(rng: &mut SampleRng) -> PslElement {
        let v = Sl2Vector::from_coords(rng.complex_normal(), rng.complex_normal(), rng.complex_normal());
        exp_sl2(&v.scale(0.5.into()))
    }

    fn zero_inf() -> GeodesicLine {
        GeodesicLine::new(BoundaryPoint::Finite(ZERO), BoundaryPoint::Infinity).unwrap()
    }

    #[test]
    fn metric_values_on_finite_chart() {
        let g = g_chart_metric();
        let p = [ZERO, ONE];
        assert_eq!(g.components(&p).unwrap()[(0, 1)], c(-2.0, 0.0));
        assert_eq!(g.inner(&p, &[ONE, ONE], &[ONE, ONE]).unwrap(), c(-4.0, 0.0));
        assert!(holomorphy_residual(&g, &p).unwrap() < 1e-9);
        assert!(matches!(g.components(&[ONE, ONE]), Err(Error::OutsideDomain)));
    }

    #[test]
    fn constant_curvature_in_every_chart() {
        let mut rng = SampleRng::new(41);
        for chart in [GChart::FiniteFinite, GChart::FiniteInverted, GChart::InvertedFinite, GChart::InvertedInverted] {
            let g = g_chart_metric_in(chart);
            for _ in 0..20 {
                let p = [rng.complex_normal() * 0.5, rng.complex_normal() * 0.5 + c(1.5, 0.0)];
                let v = [rng.complex_normal(), rng.complex_normal()];
                let w = [rng.complex_normal(), rng.complex_normal()];
                let k = sectional_curvature(&g, &p, &v, &w).unwrap().curvature;
                assert!((k + ONE).norm() < 1e-6, "{chart:?}: {k}");
            }
        }
    }

    #[test]
    fn chart_transitions_are_isometries() {
        let mut rng = SampleRng::new(42);
        for _ in 0..20 {
            let line = sample_line(&mut rng);
            let target = GChart::InvertedInverted;
            let q = target.coords(&line).unwrap();
            let transition = |c: &[Complex64]| -> Result<Vec<Complex64>> { Ok(target.coords(&GChart::FiniteFinite.line_from(c)?)?.to_vec()) };
            let p = GChart::FiniteFinite.coords(&line).unwrap();
            let pulled = crate::hrm_kernel::pullback_metric(&g_chart_metric_in(target), transition, &p, ScalarField::Complex, 1e-5).unwrap();
            let direct = g_chart_metric().components(&p).unwrap();
            let scale = 1.0 + crate::hrm_kernel::max_abs(&direct);
            assert!((pulled - direct).iter().all(|z| z.norm() < 1e-8 * scale));
            assert!(target.line_from(&q).unwrap().distance(&line) < 1e-12);
        }
    }

    #[test]
    fn mobius_examples() {
        let id = PslElement::identity();
        let p = BoundaryPoint::Finite(c(0.3, -2.0));
        assert_eq!(mobius_apply(&id, &p), p);
        let s = PslElement::new(ComplexMat2::from_real(0.0, -1.0, 1.0, 0.0)).unwrap();
        assert_eq!(mobius_apply(&s, &BoundaryPoint::Finite(ZERO)), BoundaryPoint::Infinity);
        assert_eq!(mobius_apply(&s, &BoundaryPoint::Infinity), BoundaryPoint::Finite(ZERO));
        let d = PslElement::new(ComplexMat2::diag(c(2.0, 0.0), c(0.5, 0.0))).unwrap();
        assert_eq!(g_action(&d, &zero_inf()), zero_inf());
    }

    #[test]
    fn mobius_composition() {
        let mut rng = SampleRng::new(43);
        for _ in 0..100 {
            let (a, b) = (random_psl(&mut rng), random_psl(&mut rng));
            let p = BoundaryPoint::Finite(rng.complex_normal());
            let lhs = mobius_apply(&a.mul(&b), &p);
            let rhs = mobius_apply(&a, &mobius_apply(&b, &p));
            assert!(lhs.chordal(&rhs) < 1e-10);
            assert_eq!(mobius_apply(&a.neg(), &p), mobius_apply(&a, &p));
        }
    }

    #[test]
    fn metric_is_psl_invariant() {
        let mut rng = SampleRng::new(44);
        let g = g_chart_metric();
        for _ in 0..50 {
            let a = random_psl(&mut rng);
            let line = sample_line(&mut rng);
            let image = g_action(&a, &line);
            let chart = GChart::adapted(&image);
            let map = |c: &[Complex64]| -> Result<Vec<Complex64>> { Ok(chart.coords(&g_action(&a, &GChart::FiniteFinite.line_from(c)?))?.to_vec()) };
            let p = GChart::FiniteFinite.coords(&line).unwrap();
            let pulled = crate::hrm_kernel::pullback_metric(&g_chart_metric_in(chart), map, &p, ScalarField::Complex, 1e-5).unwrap();
            let direct = g.components(&p).unwrap();
            let scale = 1.0 + crate::hrm_kernel::max_abs(&direct);
            assert!((pulled - direct).iter().all(|z| z.norm() < 1e-9 * scale));
        }
    }

    #[test]
    fn rot_pi_examples() {
        let m = rot_pi(&zero_inf()).unwrap();
        assert!(psl_equal(&m, &PslElement::new(ComplexMat2::diag(I, -I)).unwrap(), 1e-14));
        let m = rot_pi(&GeodesicLine::finite(ONE, -ONE).unwrap()).unwrap();
        assert!(m.rep().dist(&ComplexMat2::new(ZERO, I, I, ZERO)) < 1e-15);
        for z in [ONE, -ONE] {
            assert!(mobius_apply(&m, &BoundaryPoint::Finite(z)).chordal(&BoundaryPoint::Finite(z)) < 1e-15);
        }
        assert!(psl_equal(&m.mul(&m), &PslElement::identity(), 1e-15));
    }

    #[test]
    fn rot_pi_through_infinity_matches_limits() {
        let mut rng = SampleRng::new(45);
        for _ in 0..50 {
            let p = rng.complex_normal() * 2.0;
            let forward = rot_pi(&GeodesicLine::new(BoundaryPoint::Finite(p), BoundaryPoint::Infinity).unwrap()).unwrap();
            let limit = PslElement::new(ComplexMat2::new(-I, 2.0 * I * p, ZERO, I)).unwrap();
            assert!(psl_distance(&forward, &limit) < 1e-12 * (1.0 + p.norm()));
            let backward = rot_pi(&GeodesicLine::new(BoundaryPoint::Infinity, BoundaryPoint::Finite(p)).unwrap()).unwrap();
            let limit = PslElement::new(ComplexMat2::new(I, -2.0 * I * p, ZERO, -I)).unwrap();
            assert!(psl_distance(&backward, &limit) < 1e-12 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn rot_pi_lands_in_q_and_covers_twice() {
        let mut rng = SampleRng::new(46);
        for _ in 0..500 {
            let line = sample_line(&mut rng);
            let m = rot_pi(&line).unwrap();
            assert!(q_membership(&m, 1e-10));
            assert!(psl_equal(&m.mul(&m), &PslElement::identity(), 1e-10));
            assert!(psl_equal(&m, &rot_pi(&line.reversed()).unwrap(), 1e-12));
            let (p1, p2) = line.endpoints();
            assert!(mobius_apply(&m, &p1).chordal(&p1) < 1e-10);
            assert!(mobius_apply(&m, &p2).chordal(&p2) < 1e-10);
        }
        assert!(!q_membership(&PslElement::identity(), 1e-10));
        assert!(!q_membership(&exp_sl2(&crate::sl2_lie::H.scale(0.3.into())), 1e-10));
        assert!(q_membership(&PslElement::new(ComplexMat2::diag(I, -I)).unwrap(), 1e-10));
    }

    #[test]
    fn rot_pi_is_equivariant() {
        let mut rng = SampleRng::new(47);
        for _ in 0..100 {
            let a = random_psl(&mut rng);
            let line = sample_line(&mut rng);
            let lhs = rot_pi(&g_action(&a, &line)).unwrap();
            let rhs = a.mul(&rot_pi(&line).unwrap()).mul(&a.inverse());
            assert!(psl_distance(&lhs, &rhs) < 1e-9);
        }
    }

    #[test]
    fn rot_pi_is_a_local_isometry() {
        let line = GeodesicLine::finite(ZERO, ONE).unwrap();
        assert!(rot_pi_pullback_check(&line, 1).unwrap() < 1e-7);
        let mut rng = SampleRng::new(48);
        for _ in 0..50 {
            assert!(rot_pi_pullback_check_with(&sample_line(&mut rng), &mut rng).unwrap() < 1e-7);
        }
        let near = GeodesicLine::finite(ZERO, c(1e-8, 0.0)).unwrap();
        assert!(rot_pi_pullback_check(&near, 1).is_err());
    }

    #[test]
    fn one_parameter_orbit_at_zero_infinity() {
        // d/dt exp(tX) . (0, infinity) in the (z1, w2) chart at t = 0 has norm 4 = 4 <X, X>.
        let chart = GChart::FiniteInverted;
        let curve = |t: Complex64| -> Result<Vec<Complex64>> {
            let a = exp_sl2(&X.scale(t));
            Ok(chart.coords(&g_action(&a, &zero_inf()))?.to_vec())
        };
        let v = crate::hrm_kernel::derivative_1d(curve, ScalarField::Complex, 1e-5).unwrap();
        let norm = g_chart_metric_in(chart).inner(&[ZERO, ZERO], &v, &v).unwrap();
        assert!((norm - c(4.0, 0.0)).norm() < 1e-9);
        assert!((norm - 4.0 * hrm_metric(&X, &X)).norm() < 1e-9);
    }

    #[test]
    fn x2_chain_is_isometric() {
        // gamma -> F^-1(Rot_pi(gamma)) lands in {z4 = 0} and pulls <,>_{C^3} back to the G metric.
        let mut rng = SampleRng::new(49);
        let g = g_chart_metric();
        for _ in 0..50 {
            let line = sample_line(&mut rng);
            let p = GChart::FiniteFinite.coords(&line).unwrap();
            let chain = |c: &[Complex64]| -> Result<Vec<Complex64>> {
                let z = f_map_inverse(rot_pi(&GChart::FiniteFinite.line_from(c)?)?.rep());
                Ok(z.into_inner())
            };
            let z = chain(&p).unwrap();
            assert!(z[3].norm() < 1e-12);
            assert!((bilinear_slice(&z[..3], &z[..3]) + ONE).norm() < 1e-12);
            let j = jacobian(chain, &p, ScalarField::Complex, 1e-5).unwrap();
            let pulled = j.transpose() * &j;
            let direct = g.components(&p).unwrap();
            let scale = 1.0 + crate::hrm_kernel::max_abs(&direct);
            assert!((pulled - direct).iter().all(|z| z.norm() < 1e-8 * scale));
        }
    }
}
