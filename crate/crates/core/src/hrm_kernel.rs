//! Chart-level connection and curvature engine.
//!
//! A [`ChartMetric`] is a symmetric matrix-valued function on an open subset of
//! `C^n` (holomorphic charts) or `R^n` (real charts, stored with zero imaginary
//! parts). Both kinds go through the same code; only the finite-difference
//! stencils differ:
//!
//! * real charts use central differences along the real axis (second order for
//!   first derivatives, fourth order five-point stencils for second derivatives);
//! * holomorphic charts sample the four points `p + h u`, `p - h u`, `p + i h u`,
//!   `p - i h u`, i.e. a discrete Cauchy integral that averages the real- and
//!   imaginary-axis differences per Cauchy-Riemann.
//!
//! Mixed second derivatives come from polarization,
//! `d_i d_j f = (D^2_{e_i+e_j} f - D^2_{e_i-e_j} f) / 4`.
//!
//! # Curvature sign convention
//!
//! `R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_{[X,Y]} Z`, and the (0,4) tensor carries
//! an extra minus sign: `R(X,Y,Z,T) = -<R(X,Y)Z, T>`. Sectional curvature is
//! `K(V,W) = <R(V,W)W, V> / (|V|^2 |W|^2 - <V,W>^2)`, so the round sphere has
//! `K = +1` and hyperbolic space `K = -1`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cx_linear::{I, ZERO};
use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

type ComponentFn = dyn Fn(&[Complex64]) -> Matrix + Send + Sync;
type GuardFn = dyn Fn(&[Complex64]) -> bool + Send + Sync;

/// Whether chart coordinates and metric values are real or holomorphic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Real,
    Complex,
}

/// Step sizes for the finite-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Differencing {
    pub first_step: f64,
    pub second_step: f64,
}

impl Default for Differencing {
    fn default() -> Self {
        Self { first_step: 1e-5, second_step: 1e-3 }
    }
}

/// Metric components on a chart.
#[derive(Clone)]
pub struct ChartMetric {
    dim: usize,
    field: ScalarField,
    components: Arc<ComponentFn>,
    guard: Arc<GuardFn>,
    steps: Differencing,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric")
            .field("dim", &self.dim)
            .field("field", &self.field)
            .field("steps", &self.steps)
            .finish_non_exhaustive()
    }
}

impl ChartMetric {
    pub fn new(
        dim: usize,
        field: ScalarField,
        components: impl Fn(&[Complex64]) -> Matrix + Send + Sync + 'static,
        guard: impl Fn(&[Complex64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            field,
            components: Arc::new(components),
            guard: Arc::new(guard),
            steps: Differencing::default(),
        }
    }

    /// Constant metric `gram` on all of `C^n` (or `R^n`).
    pub fn constant(field: ScalarField, gram: Matrix) -> Self {
        let dim = gram.nrows();
        Self::new(dim, field, move |_| gram.clone(), |_| true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn differencing(&self) -> Differencing {
        self.steps
    }

    pub fn with_differencing(mut self, steps: Differencing) -> Self {
        self.steps = steps;
        self
    }

    pub fn contains(&self, p: &[Complex64]) -> bool {
        p.len() == self.dim && p.iter().all(|z| z.is_finite()) && (self.guard)(p)
    }

    /// `s * g` as a new chart metric.
    pub fn scaled(&self, s: Complex64) -> Self {
        let inner = Arc::clone(&self.components);
        Self {
            dim: self.dim,
            field: self.field,
            components: Arc::new(move |p| inner(p) * s),
            guard: Arc::clone(&self.guard),
            steps: self.steps,
        }
    }

    /// Components at `p`, after checking the domain.
    pub fn components(&self, p: &[Complex64]) -> Result<Matrix> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: p.len() });
        }
        if !self.contains(p) {
            return Err(Error::OutsideDomain);
        }
        let g = (self.components)(p);
        if g.iter().any(|z| !z.is_finite()) {
            return Err(Error::OutsideDomain);
        }
        Ok(g)
    }

    /// `g_p(v, w)`.
    pub fn inner(&self, p: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        let g = self.components(p)?;
        check_len(v, self.dim)?;
        check_len(w, self.dim)?;
        Ok(quadratic(&g, v, w))
    }

    fn flat_components(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.components(p)?.as_slice().to_vec())
    }
}

/// Coordinates of a point in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint(Vec<Complex64>);

impl ChartPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }
}

impl std::ops::Deref for ChartPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

fn check_len(v: &[Complex64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
    }
    Ok(())
}

/// `v^T g w`.
pub fn quadratic(g: &Matrix, v: &[Complex64], w: &[Complex64]) -> Complex64 {
    let n = v.len();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += v[i] * g[(i, j)] * w[j];
        }
    }
    acc
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn euclid_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

// ---------------------------------------------------------------------------
// Stencils
// ---------------------------------------------------------------------------

fn offset(p: &[Complex64], dir: &[Complex64], s: Complex64) -> Vec<Complex64> {
    p.iter().zip(dir).map(|(x, u)| x + s * u).collect()
}

fn accumulate(acc: &mut [Complex64], coeff: Complex64, v: &[Complex64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += coeff * x;
    }
}

/// Directional derivative of `f` at `p` along `dir`.
pub fn directional_derivative<F>(f: F, p: &[Complex64], dir: &[Complex64], field: ScalarField, h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let hc = Complex64::new(h, 0.0);
    let terms: Vec<(Complex64, Complex64)> = match field {
        ScalarField::Real => vec![(hc, (0.5 / h).into()), (-hc, (-0.5 / h).into())],
        ScalarField::Complex => {
            let w = 0.25 / h;
            vec![(hc, w.into()), (-hc, (-w).into()), (I * h, -I * w), (-I * h, I * w)]
        }
    };
    combine(&f, p, dir, &terms)
}

/// Second directional derivative `d^2/ds^2 f(p + s dir)` at `s = 0`.
pub fn second_directional_derivative<F>(f: F, p: &[Complex64], dir: &[Complex64], field: ScalarField, h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let hc = Complex64::new(h, 0.0);
    let terms: Vec<(Complex64, Complex64)> = match field {
        ScalarField::Real => {
            let w = 1.0 / (12.0 * h * h);
            vec![
                (2.0 * hc, (-w).into()),
                (hc, (16.0 * w).into()),
                (ZERO, (-30.0 * w).into()),
                (-hc, (16.0 * w).into()),
                (-2.0 * hc, (-w).into()),
            ]
        }
        ScalarField::Complex => {
            let w = 0.5 / (h * h);
            vec![(hc, w.into()), (-hc, w.into()), (I * h, (-w).into()), (-I * h, (-w).into())]
        }
    };
    combine(&f, p, dir, &terms)
}

fn combine<F>(f: &F, p: &[Complex64], dir: &[Complex64], terms: &[(Complex64, Complex64)]) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let mut acc: Option<Vec<Complex64>> = None;
    for &(shift, coeff) in terms {
        let v = f(&offset(p, dir, shift))?;
        let a = acc.get_or_insert_with(|| vec![ZERO; v.len()]);
        accumulate(a, coeff, &v);
    }
    Ok(acc.unwrap_or_default())
}

/// Derivative at `0` of a one-parameter family `s -> f(s)`.
pub fn derivative_1d<F>(f: F, field: ScalarField, h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    directional_derivative(|s: &[Complex64]| f(s[0]), &[ZERO], &[Complex64::new(1.0, 0.0)], field, h)
}

/// Jacobian of `map` at `p`; column `j` is the derivative along `e_j`.
pub fn jacobian<F>(map: F, p: &[Complex64], field: ScalarField, h: f64) -> Result<Matrix>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let n = p.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e = basis(n, j);
        cols.push(directional_derivative(&map, p, &e, field, h)?);
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(m, n, |i, j| cols[j][i]))
}

fn basis(n: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![ZERO; n];
    e[k] = Complex64::new(1.0, 0.0);
    e
}

/// Pullback `J^T g(map(p)) J` of `target` along `map`; `field` picks the stencil.
pub fn pullback_metric<F>(target: &ChartMetric, map: F, p: &[Complex64], field: ScalarField, h: f64) -> Result<Matrix>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let image = map(p)?;
    let j = jacobian(&map, p, field, h)?;
    let g = target.components(&image)?;
    Ok(j.transpose() * g * j)
}

// ---------------------------------------------------------------------------
// Metric jets and Christoffel symbols
// ---------------------------------------------------------------------------

struct MetricJet {
    g: Matrix,
    ginv: Matrix,
    /// `dg[k] = d_k g`.
    dg: Vec<Matrix>,
}

fn metric_jet(metric: &ChartMetric, p: &[Complex64]) -> Result<MetricJet> {
    let g = metric.components(p)?;
    let det = g.determinant();
    if det.norm() <= 1e-10 {
        return Err(Error::SingularMetric(det.norm()));
    }
    let ginv = g.clone().try_inverse().ok_or(Error::SingularMetric(det.norm()))?;
    let n = metric.dim;
    let h = metric.steps.first_step;
    let eval = |q: &[Complex64]| metric.flat_components(q);
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let d = directional_derivative(eval, p, &basis(n, k), metric.field, h)?;
        dg.push(Matrix::from_column_slice(n, n, &d));
    }
    Ok(MetricJet { g, ginv, dg })
}

fn second_derivatives(metric: &ChartMetric, p: &[Complex64]) -> Result<Vec<Vec<Matrix>>> {
    let n = metric.dim;
    let h = metric.steps.second_step;
    let eval = |q: &[Complex64]| metric.flat_components(q);
    let d2 = |dir: &[Complex64]| -> Result<Matrix> {
        let v = second_directional_derivative(eval, p, dir, metric.field, h)?;
        Ok(Matrix::from_column_slice(n, n, &v))
    };
    let mut out = vec![vec![Matrix::zeros(n, n); n]; n];
    for i in 0..n {
        out[i][i] = d2(&basis(n, i))?;
        for j in (i + 1)..n {
            let mut plus = basis(n, i);
            let mut minus = basis(n, i);
            plus[j] = Complex64::new(1.0, 0.0);
            minus[j] = Complex64::new(-1.0, 0.0);
            let mixed = (d2(&plus)? - d2(&minus)?) * Complex64::new(0.25, 0.0);
            out[j][i] = mixed.clone();
            out[i][j] = mixed;
        }
    }
    Ok(out)
}

/// `Gamma^k_ij`, stored as `data[k][i][j]` flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    dim: usize,
    data: Vec<Complex64>,
}

impl Christoffels {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// `Gamma^k_ij v^i w^j`.
    pub fn contract(&self, v: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.get(k, i, j) * v[i] * w[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest `|Gamma^k_ij - Gamma^k_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).norm());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn christoffels_from_jet(jet: &MetricJet) -> Christoffels {
    let n = jet.g.nrows();
    let mut data = vec![ZERO; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for l in 0..n {
                    acc += jet.ginv[(k, l)] * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                }
                let val = acc * 0.5;
                data[(k * n + i) * n + j] = val;
                data[(k * n + j) * n + i] = val;
            }
        }
    }
    Christoffels { dim: n, data }
}

/// Christoffel symbols `Gamma^k_ij = g^kl (d_i g_jl + d_j g_il - d_l g_ij) / 2`.
pub fn christoffels(metric: &ChartMetric, p: &[Complex64]) -> Result<Christoffels> {
    Ok(christoffels_from_jet(&metric_jet(metric, p)?))
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Curvature data at one chart point.
#[derive(Debug, Clone)]
pub struct Riemann {
    dim: usize,
    g: Matrix,
    ginv: Matrix,
    /// `lowered[a][b][c][d] = <R(d_c, d_d) d_b, d_a>`.
    lowered: Vec<Complex64>,
}

impl Riemann {
    pub fn at(metric: &ChartMetric, p: &[Complex64]) -> Result<Self> {
        let jet = metric_jet(metric, p)?;
        let gamma = christoffels_from_jet(&jet);
        let ddg = second_derivatives(metric, p)?;
        let n = metric.dim;
        // Lowered Christoffels Gamma_{f,ad} = g_fe Gamma^e_ad.
        let mut low = vec![ZERO; n * n * n];
        for f in 0..n {
            for a in 0..n {
                for d in 0..n {
                    let mut acc = ZERO;
                    for e in 0..n {
                        acc += jet.g[(f, e)] * gamma.get(e, a, d);
                    }
                    low[(f * n + a) * n + d] = acc;
                }
            }
        }
        let lg = |f: usize, a: usize, d: usize| low[(f * n + a) * n + d];
        let mut lowered = vec![ZERO; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let second = (ddg[b][c][(a, d)] + ddg[a][d][(b, c)] - ddg[b][d][(a, c)] - ddg[a][c][(b, d)]) * 0.5;
                        let mut quad = ZERO;
                        for e in 0..n {
                            quad += gamma.get(e, b, c) * lg(e, a, d) - gamma.get(e, b, d) * lg(e, a, c);
                        }
                        lowered[((a * n + b) * n + c) * n + d] = second + quad;
                    }
                }
            }
        }
        Ok(Self { dim: n, g: jet.g, ginv: jet.ginv, lowered })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Matrix {
        &self.g
    }

    fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let n = self.dim;
        self.lowered[((a * n + b) * n + c) * n + d]
    }

    /// `<R(X,Y)Z, T>` without the extra sign.
    pub fn inner_form(&self, x: &[Complex64], y: &[Complex64], z: &[Complex64], t: &[Complex64]) -> Complex64 {
        let n = self.dim;
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let e = self.entry(a, b, c, d);
                        if e != ZERO {
                            acc += e * t[a] * z[b] * x[c] * y[d];
                        }
                    }
                }
            }
        }
        acc
    }

    /// The (0,4) tensor `R(X,Y,Z,T) = -<R(X,Y)Z, T>`.
    pub fn tensor(&self, x: &[Complex64], y: &[Complex64], z: &[Complex64], t: &[Complex64]) -> Complex64 {
        -self.inner_form(x, y, z, t)
    }

    /// The (1,3) operator `R(U,V)W` as a coordinate vector.
    pub fn operator(&self, u: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let lowered: Vec<Complex64> = (0..n)
            .map(|a| {
                let mut acc = ZERO;
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            acc += self.entry(a, b, c, d) * w[b] * u[c] * v[d];
                        }
                    }
                }
                acc
            })
            .collect();
        (0..n)
            .map(|r| (0..n).map(|a| self.ginv[(r, a)] * lowered[a]).sum())
            .collect()
    }

    /// Sectional curvature of `span(V, W)`.
    pub fn sectional(&self, v: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        let vv = quadratic(&self.g, v, v);
        let ww = quadratic(&self.g, w, w);
        let vw = quadratic(&self.g, v, w);
        let gram = vv * ww - vw * vw;
        let scale = max_abs(&self.g).powi(2) * euclid_sq(v) * euclid_sq(w);
        if !(gram.norm() > PLANE_THRESHOLD * scale) {
            return Err(Error::DegeneratePlane(gram));
        }
        Ok(self.inner_form(v, w, w, v) / gram)
    }
}

/// Relative Gram-determinant threshold for nondegenerate planes.
pub const PLANE_THRESHOLD: f64 = 1e-8;

/// `R(V1, V2, V3, V4)` in the (0,4) convention.
pub fn curvature_tensor(
    metric: &ChartMetric,
    p: &[Complex64],
    v1: &[Complex64],
    v2: &[Complex64],
    v3: &[Complex64],
    v4: &[Complex64],
) -> Result<Complex64> {
    for v in [v1, v2, v3, v4] {
        check_len(v, metric.dim)?;
    }
    Ok(Riemann::at(metric, p)?.tensor(v1, v2, v3, v4))
}

/// The (1,3) curvature `R(U, V) W`.
pub fn curvature_operator(metric: &ChartMetric, p: &[Complex64], u: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    for x in [u, v, w] {
        check_len(x, metric.dim)?;
    }
    Ok(Riemann::at(metric, p)?.operator(u, v, w))
}

/// A sectional-curvature evaluation together with its plane.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: ChartPoint,
    pub plane: (Vec<Complex64>, Vec<Complex64>),
    pub curvature: Complex64,
    pub gram_det: Complex64,
}

pub fn sectional_curvature(metric: &ChartMetric, p: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Result<CurvatureSample> {
    check_len(v, metric.dim)?;
    check_len(w, metric.dim)?;
    let r = Riemann::at(metric, p)?;
    let curvature = r.sectional(v, w)?;
    let g = r.metric();
    let gram_det = quadratic(g, v, v) * quadratic(g, w, w) - quadratic(g, v, w).powi(2);
    Ok(CurvatureSample {
        point: ChartPoint::new(p.to_vec()),
        plane: (v.to_vec(), w.to_vec()),
        curvature,
        gram_det,
    })
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GeodesicSample {
    pub t: f64,
    pub point: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
    /// Parallel-transported vectors, in the order they were supplied.
    pub transported: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub samples: Vec<GeodesicSample>,
    /// Set when a step would leave the chart domain; `samples` is then partial.
    pub exited_domain: bool,
}

impl GeodesicTrajectory {
    pub fn last(&self) -> &GeodesicSample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

/// RK4 on `x'' + Gamma(x)(x', x') = 0` with a real time parameter.
pub fn geodesic_integrate(metric: &ChartMetric, p0: &[Complex64], v0: &[Complex64], t_end: f64, step: f64) -> Result<GeodesicTrajectory> {
    geodesic_integrate_with_transport(metric, p0, v0, &[], t_end, step)
}

/// As [`geodesic_integrate`], also transporting `fields` by `W' + Gamma(x)(x', W) = 0`.
pub fn geodesic_integrate_with_transport(
    metric: &ChartMetric,
    p0: &[Complex64],
    v0: &[Complex64],
    fields: &[Vec<Complex64>],
    t_end: f64,
    step: f64,
) -> Result<GeodesicTrajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument("geodesic step must be positive"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument("geodesic end time must be finite and non-negative"));
    }
    let n = metric.dim;
    check_len(p0, n)?;
    check_len(v0, n)?;
    for f in fields {
        check_len(f, n)?;
    }
    if !metric.contains(p0) {
        return Err(Error::OutsideDomain);
    }
    let blocks = 2 + fields.len();
    let mut state: Vec<Complex64> = Vec::with_capacity(blocks * n);
    state.extend_from_slice(p0);
    state.extend_from_slice(v0);
    for f in fields {
        state.extend_from_slice(f);
    }

    let rhs = |s: &[Complex64]| -> Result<Vec<Complex64>> {
        let x = &s[..n];
        let v = &s[n..2 * n];
        let gamma = christoffels(metric, x)?;
        let mut out = Vec::with_capacity(s.len());
        out.extend_from_slice(v);
        out.extend(gamma.contract(v, v).into_iter().map(|z| -z));
        for b in 2..blocks {
            out.extend(gamma.contract(v, &s[b * n..(b + 1) * n]).into_iter().map(|z| -z));
        }
        Ok(out)
    };

    let steps = ((t_end / step) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut samples = vec![to_sample(0.0, &state, n, blocks)];
    let mut exited = false;
    for k in 0..steps {
        match rk4_step(&rhs, &state, h) {
            Ok(next) if metric.contains(&next[..n]) => {
                state = next;
                samples.push(to_sample((k + 1) as f64 * h, &state, n, blocks));
            }
            Ok(_) | Err(Error::OutsideDomain) | Err(Error::SingularMetric(_)) => {
                exited = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GeodesicTrajectory { samples, exited_domain: exited })
}

fn to_sample(t: f64, s: &[Complex64], n: usize, blocks: usize) -> GeodesicSample {
    GeodesicSample {
        t,
        point: s[..n].to_vec(),
        velocity: s[n..2 * n].to_vec(),
        transported: (2..blocks).map(|b| s[b * n..(b + 1) * n].to_vec()).collect(),
    }
}

fn rk4_step<F>(rhs: &F, s: &[Complex64], h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let add = |a: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> { a.iter().zip(k).map(|(x, y)| x + y * c).collect() };
    let k1 = rhs(s)?;
    let k2 = rhs(&add(s, &k1, h / 2.0))?;
    let k3 = rhs(&add(s, &k2, h / 2.0))?;
    let k4 = rhs(&add(s, &k3, h))?;
    Ok((0..s.len())
        .map(|i| s[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
        .collect())
}

/// Max-norm of `x'' + Gamma(x)(x', x')` for a curve sampled at `t + k h`, `|k| <= 2`.
pub fn geodesic_residual<F>(metric: &ChartMetric, curve: F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let x: Vec<Vec<Complex64>> = (-2..=2).map(|k| curve(t + k as f64 * h)).collect();
    for xi in &x {
        check_len(xi, metric.dim)?;
    }
    let n = metric.dim;
    let vel: Vec<Complex64> = (0..n).map(|i| (x[0][i] - 8.0 * x[1][i] + 8.0 * x[3][i] - x[4][i]) / (12.0 * h)).collect();
    let acc: Vec<Complex64> = (0..n)
        .map(|i| (-x[0][i] + 16.0 * x[1][i] - 30.0 * x[2][i] + 16.0 * x[3][i] - x[4][i]) / (12.0 * h * h))
        .collect();
    let gamma = christoffels(metric, &x[2])?;
    let corr = gamma.contract(&vel, &vel);
    Ok(acc.iter().zip(&corr).map(|(a, c)| (a + c).norm()).fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Holomorphy
// ---------------------------------------------------------------------------

/// Largest Cauchy-Riemann defect `|d g_ij / d conj(z_k)|` at `p`.
///
/// The four-point estimate `D(h) = (f(p+h) - f(p-h) + i f(p+ih) - i f(p-ih)) / 4h`
/// has leading error `h^2 f'''(p) / 6`; one Richardson step `(4 D(h) - D(2h)) / 3`
/// removes it.
pub fn holomorphy_residual(metric: &ChartMetric, p: &[Complex64]) -> Result<f64> {
    if metric.field != ScalarField::Complex {
        return Err(Error::RealChart);
    }
    let n = metric.dim;
    let h = metric.steps.first_step;
    let eval = |q: &[Complex64]| metric.flat_components(q);
    let stencil = |h: f64| {
        let w = 0.25 / h;
        let hc = Complex64::new(h, 0.0);
        [(hc, Complex64::from(w)), (-hc, Complex64::from(-w)), (I * h, I * w), (-I * h, -I * w)]
    };
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let e = basis(n, k);
        let fine = combine(&eval, p, &e, &stencil(h))?;
        let coarse = combine(&eval, p, &e, &stencil(2.0 * h))?;
        worst = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| ((4.0 * f - c) / 3.0).norm())
            .fold(worst, f64::max);
    }
    Ok(worst)
}
