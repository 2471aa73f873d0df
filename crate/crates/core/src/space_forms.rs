//! Flat space `(C^n, <,>_0)` and the quadrics `X_n = {z in C^(n+1) : sum z_i^2 = -1}`.
//!
//! Quadric charts are graphs: the coordinate `z_k` with the largest modulus at
//! the base point is solved for, `z_k = p_k sqrt((-1 - |u|^2) / p_k^2)` with the
//! principal root, which equals `p_k` at the base point. The induced metric in
//! the remaining coordinates `u` is `I + u u^T / (-1 - sum u_i^2)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cx_linear::{bilinear_slice, f_map, ComplexVec, ONE, ZERO};
use crate::error::{Error, Result};
use crate::hrm_kernel::{ChartMetric, ScalarField};
use crate::rng::SampleRng;
use crate::sl2_lie::PslElement;

const QUADRIC_TOL: f64 = 1e-10;
const ISOTROPIC_TOL: f64 = 1e-6;
const REDRAW_BUDGET: usize = 100;
const PIVOT_TOL: f64 = 1e-8;

/// `(C^n, sum dz_i^2)`.
pub fn flat_metric(n: usize) -> ChartMetric {
    ChartMetric::constant(ScalarField::Complex, DMatrix::identity(n, n))
}

/// A point of `X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricPoint {
    z: ComplexVec,
    residual: f64,
}

impl QuadricPoint {
    pub fn new(z: ComplexVec) -> Result<Self> {
        let residual = (bilinear_slice(z.as_slice(), z.as_slice()) + ONE).norm();
        if residual >= QUADRIC_TOL {
            return Err(Error::OffQuadric(residual));
        }
        Ok(Self { z, residual })
    }

    pub fn z(&self) -> &ComplexVec {
        &self.z
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `n`, the complex dimension of `X_n`.
    pub fn n(&self) -> usize {
        self.z.dim() - 1
    }
}

/// Rescales `w` onto `X_n` by a principal square root of `-1 / <w,w>`.
pub fn quadric_from_direction(w: &ComplexVec) -> Result<QuadricPoint> {
    let c = bilinear_slice(w.as_slice(), w.as_slice());
    if c.norm() < ISOTROPIC_TOL {
        return Err(Error::Isotropic);
    }
    let s = (-ONE / c).sqrt();
    QuadricPoint::new(w.scale(s))
}

pub fn quadric_sample(seed: u64, n: usize) -> Result<QuadricPoint> {
    quadric_sample_with(&mut SampleRng::new(seed), n)
}

pub fn quadric_sample_with(rng: &mut SampleRng, n: usize) -> Result<QuadricPoint> {
    if n < 2 {
        return Err(Error::InvalidArgument("quadric dimension must be at least 2"));
    }
    for _ in 0..REDRAW_BUDGET {
        let w = ComplexVec::new((0..=n).map(|_| rng.complex_normal()).collect())?;
        match quadric_from_direction(&w) {
            Err(Error::Isotropic) => continue,
            other => return other,
        }
    }
    Err(Error::SampleExhausted)
}

/// An orthonormal frame of `T_p X_n = p^perp`.
#[derive(Debug, Clone)]
pub struct QuadricFrame {
    pub base: QuadricPoint,
    pub vectors: Vec<ComplexVec>,
}

impl QuadricFrame {
    pub fn gram(&self) -> DMatrix<Complex64> {
        let n = self.vectors.len();
        DMatrix::from_fn(n, n, |i, j| bilinear_slice(self.vectors[i].as_slice(), self.vectors[j].as_slice()))
    }

    pub fn max_tangency_residual(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| bilinear_slice(self.base.z.as_slice(), v.as_slice()).norm())
            .fold(0.0, f64::max)
    }
}

fn pivot_ratio(v: &[Complex64]) -> f64 {
    let e: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if e == 0.0 {
        0.0
    } else {
        bilinear_slice(v, v).norm() / e
    }
}

/// Gram-Schmidt for `<,>_{C^(n+1)}` on the projections of the coordinate
/// vectors to `p^perp`, always taking the remaining candidate with the largest
/// normalized pivot `|<v,v>| / |v|^2`. If every candidate is isotropic, pairwise
/// sums are tried.
pub fn quadric_frame(p: &QuadricPoint) -> Result<QuadricFrame> {
    let z = p.z.as_slice();
    let dim = z.len();
    let pp = bilinear_slice(z, z);
    let mut candidates: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let coeff = z[j] / pp;
            (0..dim).map(|i| if i == j { ONE } else { ZERO } - coeff * z[i]).collect()
        })
        .collect();
    let mut frame: Vec<Vec<Complex64>> = Vec::with_capacity(dim - 1);
    while frame.len() < dim - 1 {
        let best = candidates
            .iter()
            .enumerate()
            .map(|(i, v)| (i, pivot_ratio(v)))
            .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
                Some((_, br)) if br >= r => acc,
                _ => Some((i, r)),
            });
        let pivot = match best {
            Some((i, r)) if r > PIVOT_TOL => candidates.swap_remove(i),
            _ => pair_pivot(&candidates).ok_or(Error::FrameConstruction)?,
        };
        let norm = bilinear_slice(&pivot, &pivot).sqrt();
        let u: Vec<Complex64> = pivot.iter().map(|x| x / norm).collect();
        for c in &mut candidates {
            let proj = bilinear_slice(c, &u);
            for (ci, ui) in c.iter_mut().zip(&u) {
                *ci -= proj * ui;
            }
        }
        frame.push(u);
    }
    Ok(QuadricFrame {
        base: p.clone(),
        vectors: frame.into_iter().map(ComplexVec::new).collect::<Result<_>>()?,
    })
}

fn pair_pivot(candidates: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let s: Vec<Complex64> = candidates[i].iter().zip(&candidates[j]).map(|(a, b)| a + b).collect();
            let r = pivot_ratio(&s);
            if r > PIVOT_TOL && best.as_ref().is_none_or(|(br, _)| r > *br) {
                best = Some((r, s));
            }
        }
    }
    best.map(|(_, v)| v)
}

/// A graph chart of `X_n` around a base point.
#[derive(Debug, Clone)]
pub struct QuadricChart {
    pub metric: ChartMetric,
    solved: usize,
    base: QuadricPoint,
}

impl QuadricChart {
    pub fn solved_index(&self) -> usize {
        self.solved
    }

    pub fn base(&self) -> &QuadricPoint {
        &self.base
    }

    fn drop_solved(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().enumerate().filter(|(i, _)| *i != self.solved).map(|(_, z)| *z).collect()
    }

    /// Chart coordinates of the base point.
    pub fn base_coords(&self) -> Vec<Complex64> {
        self.drop_solved(self.base.z.as_slice())
    }

    /// Chart components of an ambient tangent vector `v in p^perp`.
    pub fn to_chart_tangent(&self, v: &ComplexVec) -> Result<Vec<Complex64>> {
        if v.dim() != self.base.z.dim() {
            return Err(Error::DimensionMismatch { expected: self.base.z.dim(), actual: v.dim() });
        }
        Ok(self.drop_solved(v.as_slice()))
    }

    /// The ambient point with chart coordinates `u`.
    pub fn embed(&self, u: &[Complex64]) -> Result<ComplexVec> {
        embed_graph(self.solved, self.base.z[self.solved], u)
    }
}

fn embed_graph(solved: usize, pk: Complex64, u: &[Complex64]) -> Result<ComplexVec> {
    let rest = -ONE - bilinear_slice(u, u);
    let zk = pk * (rest / (pk * pk)).sqrt();
    let mut z = Vec::with_capacity(u.len() + 1);
    z.extend_from_slice(&u[..solved]);
    z.push(zk);
    z.extend_from_slice(&u[solved..]);
    ComplexVec::new(z)
}

/// `scale` times the induced metric of `X_n` in a graph chart around `p`.
pub fn quadric_chart(p: &QuadricPoint, scale: Complex64) -> Result<QuadricChart> {
    if scale.norm() == 0.0 || !scale.is_finite() {
        return Err(Error::InvalidArgument("metric scale must be nonzero and finite"));
    }
    let z = p.z.as_slice();
    let (solved, pk) = z
        .iter()
        .enumerate()
        .fold((0, ZERO), |(bi, bz), (i, zi)| if zi.norm() > bz.norm() { (i, *zi) } else { (bi, bz) });
    if pk.norm() < 1e-8 {
        return Err(Error::OutsideDomain);
    }
    let n = z.len() - 1;
    let metric = ChartMetric::new(
        n,
        ScalarField::Complex,
        move |u| {
            let rest = -ONE - bilinear_slice(u, u);
            DMatrix::from_fn(n, n, |i, j| {
                let delta = if i == j { ONE } else { ZERO };
                (delta + u[i] * u[j] / rest) * scale
            })
        },
        move |u| {
            let rest = -ONE - bilinear_slice(u, u);
            // Stay on the sheet of the principal root that contains the base point.
            rest.norm() > 1e-6 && (rest / (pk * pk)).re > -0.5 * (rest / (pk * pk)).norm()
        },
    );
    Ok(QuadricChart { metric, solved, base: p.clone() })
}

/// `X_3 -> SL(2,C)` via `F`.
pub fn x3_to_sl2(p: &QuadricPoint) -> Result<PslElement> {
    if p.z.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, actual: p.z.dim() });
    }
    PslElement::new(f_map(&p.z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx_linear::{mat2_bilinear, ComplexMat2, I};
    use crate::hrm_kernel::{christoffels, holomorphy_residual, jacobian, pullback_metric, sectional_curvature};
    use crate::sl2_lie::{sl2_chart_coords, sl2_chart_metric};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vec(v: &[Complex64]) -> ComplexVec {
        ComplexVec::new(v.to_vec()).unwrap()
    }

    fn chart_frame(chart: &QuadricChart) -> Vec<Vec<Complex64>> {
        quadric_frame(chart.base())
            .unwrap()
            .vectors
            .iter()
            .map(|v| chart.to_chart_tangent(v).unwrap())
            .collect()
    }

    #[test]
    fn forced_directions() {
        let p = quadric_from_direction(&vec(&[I, ZERO, ZERO])).unwrap();
        assert_eq!(p.z().as_slice(), &[I, ZERO, ZERO]);
        let q = quadric_from_direction(&vec(&[ONE, ZERO, ZERO, ZERO])).unwrap();
        assert!((q.z()[0].powi(2) + ONE).norm() < 1e-15);
        assert!(matches!(quadric_from_direction(&vec(&[ONE, I, ZERO])), Err(Error::Isotropic)));
        assert!(matches!(QuadricPoint::new(vec(&[ONE, ZERO, ZERO])), Err(Error::OffQuadric(_))));
    }

    #[test]
    fn sampled_points_lie_on_quadric() {
        let mut rng = SampleRng::new(31);
        for n in [2, 3] {
            for _ in 0..1000 {
                assert!(quadric_sample_with(&mut rng, n).unwrap().residual() < 1e-12);
            }
        }
        assert!(quadric_sample(1, 1).is_err());
        assert_eq!(quadric_sample(5, 3).unwrap(), quadric_sample(5, 3).unwrap());
    }

    #[test]
    fn frames_at_coordinate_points() {
        let f = quadric_frame(&QuadricPoint::new(vec(&[I, ZERO, ZERO])).unwrap()).unwrap();
        for v in &f.vectors {
            assert_eq!(v[0], ZERO);
        }
        assert!((f.gram().determinant() - ONE).norm() < 1e-14);
        let f = quadric_frame(&QuadricPoint::new(vec(&[ZERO, I, ZERO, ZERO])).unwrap()).unwrap();
        assert_eq!(f.vectors.len(), 3);
        for v in &f.vectors {
            assert_eq!(v[1], ZERO);
        }
    }

    #[test]
    fn sampled_frames_are_tangent_and_nondegenerate() {
        let mut rng = SampleRng::new(32);
        for n in [2, 3] {
            for _ in 0..200 {
                let f = quadric_frame(&quadric_sample_with(&mut rng, n).unwrap()).unwrap();
                assert!(f.max_tangency_residual() < 1e-10);
                assert!(f.gram().determinant().norm() > 1e-6);
                assert!((f.gram() - DMatrix::identity(n, n)).iter().all(|z| z.norm() < 1e-10));
            }
        }
    }

    #[test]
    fn flat_model_is_flat() {
        let g = flat_metric(3);
        let p = [c(0.2, 0.0), c(1.0, -1.0), c(0.0, 2.0)];
        assert!(christoffels(&g, &p).unwrap().max_abs() < 1e-10);
        let k = sectional_curvature(&g, &p, &[ONE, ZERO, c(0.0, 0.5)], &[ZERO, ONE, ZERO]).unwrap();
        assert!(k.curvature.norm() < 1e-10);
    }

    #[test]
    fn x2_curvature_at_coordinate_point() {
        let chart = quadric_chart(&QuadricPoint::new(vec(&[I, ZERO, ZERO])).unwrap(), ONE).unwrap();
        assert_eq!(chart.solved_index(), 0);
        let k = sectional_curvature(&chart.metric, &chart.base_coords(), &[ONE, ZERO], &[ZERO, ONE]).unwrap();
        assert!((k.curvature + ONE).norm() < 1e-6);
    }

    #[test]
    fn quadric_curvature_and_scaling() {
        let mut rng = SampleRng::new(33);
        for n in [2, 3] {
            for _ in 0..10 {
                let p = quadric_sample_with(&mut rng, n).unwrap();
                let chart = quadric_chart(&p, ONE).unwrap();
                let f = chart_frame(&chart);
                let u = chart.base_coords();
                let k = sectional_curvature(&chart.metric, &u, &f[0], &f[1]).unwrap().curvature;
                assert!((k + ONE).norm() < 1e-5, "{k}");
                for kk in [c(-4.0, 0.0), c(-1.0, 0.0), c(0.0, 2.0)] {
                    let scaled = quadric_chart(&p, -ONE / kk).unwrap();
                    let k = sectional_curvature(&scaled.metric, &u, &f[0], &f[1]).unwrap().curvature;
                    assert!((k - kk).norm() < 1e-5 * kk.norm(), "{k} vs {kk}");
                }
                assert!(holomorphy_residual(&chart.metric, &u).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn chart_embedding_stays_on_quadric() {
        let p = quadric_sample(34, 3).unwrap();
        let chart = quadric_chart(&p, ONE).unwrap();
        let mut u = chart.base_coords();
        assert!((chart.embed(&u).unwrap().as_slice().iter().zip(p.z().as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)) < 1e-14);
        u[0] += c(0.01, -0.02);
        assert!(QuadricPoint::new(chart.embed(&u).unwrap()).is_ok());
    }

    #[test]
    fn x3_maps_to_sl2_isometrically() {
        let a = x3_to_sl2(&QuadricPoint::new(vec(&[I, ZERO, ZERO, ZERO])).unwrap()).unwrap();
        assert_eq!(*a.rep(), ComplexMat2::diag(-I, I));

        let mut rng = SampleRng::new(35);
        let target = sl2_chart_metric();
        for _ in 0..20 {
            let p = quadric_sample_with(&mut rng, 3).unwrap();
            let a = x3_to_sl2(&p).unwrap();
            assert!((a.rep().det() - ONE).norm() < 1e-10);
            if sl2_chart_coords(&a).is_err() {
                continue;
            }
            let chart = quadric_chart(&p, ONE).unwrap();
            let to_sl2 = |u: &[Complex64]| -> Result<Vec<Complex64>> {
                let m = f_map(&chart.embed(u)?)?;
                Ok(vec![m.a, m.b, m.c])
            };
            let u = chart.base_coords();
            let pulled = pullback_metric(&target, to_sl2, &u, ScalarField::Complex, 1e-5).unwrap();
            let direct = chart.metric.components(&u).unwrap();
            assert!((pulled - &direct).iter().all(|z| z.norm() < 1e-9 * (1.0 + crate::hrm_kernel::max_abs(&direct))));

            let j = jacobian(|u: &[Complex64]| Ok(chart.embed(u)?.into_inner()), &u, ScalarField::Complex, 1e-5).unwrap();
            let (ui, vi) = (j.column(0), j.column(1));
            let (uv, vv): (Vec<_>, Vec<_>) = (ui.iter().copied().collect(), vi.iter().copied().collect());
            let lhs = bilinear_slice(&uv, &vv);
            let rhs = mat2_bilinear(&f_map(&vec(&uv)).unwrap(), &f_map(&vec(&vv)).unwrap());
            assert!((lhs - rhs).norm() < 1e-13 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn slice_lands_in_trace_free_matrices() {
        let mut rng = SampleRng::new(36);
        for _ in 0..200 {
            let p = quadric_sample_with(&mut rng, 2).unwrap();
            let mut z = p.z().clone().into_inner();
            z.push(ZERO);
            let a = x3_to_sl2(&QuadricPoint::new(ComplexVec::new(z).unwrap()).unwrap()).unwrap();
            assert!(a.rep().trace().norm() < 1e-12);
        }
    }
}
