//! `H^3` and `G` as symmetric spaces of `PSL(2,C)`.
//!
//! Base points are `x1 = (0, 0, 1)` in the upper half-space and `x2 = (i, -i)`
//! in `G`, the line fixed by `SO(2,C)`. The Cartan decompositions are
//!
//! * `sl = su(2) + i su(2)` (skew-Hermitian + Hermitian) for `H^3`,
//! * `sl = o(2,C) + (Sym n sl)` (antisymmetric + symmetric) for `G`.
//!
//! `beta_i(A) = A . x_i`, and differentials are taken by finite differences
//! along `t -> A exp(tV)`: real central differences on the half-space chart,
//! complex Cauchy stencils on `G`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cx_linear::{ComplexMat2, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::geodesic_space::{g_action, g_chart_metric_in, GChart, GeodesicLine};
use crate::hrm_kernel::{derivative_1d, directional_derivative, quadratic, ChartMetric, Riemann, ScalarField};
use crate::rng::SampleRng;
use crate::sl2_lie::{
    algebraic_curvature, algebraic_sectional_curvature, bracket, exp_sl2, hrm_metric, PslElement, Sl2Vector, H, X, Y,
};

const STEP: f64 = 1e-5;
const SPLIT_TOL: f64 = 1e-10;
const SCALING_PAIRS: usize = 6;

/// A point `(x, y, t)` of the upper half-space, `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl H3Point {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite("half-space point"));
        }
        if t <= 0.0 {
            return Err(Error::NotInHalfSpace(t));
        }
        Ok(Self { x, y, t })
    }

    pub fn chart(&self) -> Vec<Complex64> {
        [self.x, self.y, self.t].iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    fn from_chart(p: &[Complex64]) -> Result<Self> {
        Self::new(p[0].re, p[1].re, p[2].re)
    }
}

/// `(dx^2 + dy^2 + dt^2) / t^2` on `{t > 0}`.
pub fn h3_metric_chart() -> ChartMetric {
    ChartMetric::new(
        3,
        ScalarField::Real,
        |p| DMatrix::identity(3, 3) * Complex64::new(1.0 / (p[2].re * p[2].re), 0.0),
        |p| p[2].re > 0.0,
    )
}

#[derive(Debug, Clone, Copy)]
struct Quat {
    w: f64,
    i: f64,
    j: f64,
    k: f64,
}

impl Quat {
    fn complex(z: Complex64) -> Self {
        Self { w: z.re, i: z.im, j: 0.0, k: 0.0 }
    }

    fn add(self, o: Self) -> Self {
        Self { w: self.w + o.w, i: self.i + o.i, j: self.j + o.j, k: self.k + o.k }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            w: self.w * o.w - self.i * o.i - self.j * o.j - self.k * o.k,
            i: self.w * o.i + self.i * o.w + self.j * o.k - self.k * o.j,
            j: self.w * o.j - self.i * o.k + self.j * o.w + self.k * o.i,
            k: self.w * o.k + self.i * o.j - self.j * o.i + self.k * o.w,
        }
    }

    fn inverse(self) -> Self {
        let n = self.w * self.w + self.i * self.i + self.j * self.j + self.k * self.k;
        Self { w: self.w / n, i: -self.i / n, j: -self.j / n, k: -self.k / n }
    }
}

/// `q -> (aq + b)(cq + d)^-1` with `q = x + y i + t j`.
pub fn h3_action(a: &PslElement, p: &H3Point) -> H3Point {
    let m = a.rep();
    let q = Quat { w: p.x, i: p.y, j: p.t, k: 0.0 };
    let num = Quat::complex(m.a).mul(q).add(Quat::complex(m.b));
    let den = Quat::complex(m.c).mul(q).add(Quat::complex(m.d));
    let r = num.mul(den.inverse());
    H3Point { x: r.w, y: r.i, t: r.j }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymSpace {
    H3,
    Geodesics,
}

pub const ALL_SPACES: [SymSpace; 2] = [SymSpace::H3, SymSpace::Geodesics];

pub fn base_h3() -> H3Point {
    H3Point { x: 0.0, y: 0.0, t: 1.0 }
}

pub fn base_line() -> GeodesicLine {
    GeodesicLine::finite(I, -I).expect("i and -i are distinct")
}

/// `V = h + m` for the Cartan decomposition of `which`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanSplit {
    pub which: SymSpace,
    pub h_part: Sl2Vector,
    pub m_part: Sl2Vector,
}

pub fn cartan_split(v: &Sl2Vector, which: SymSpace) -> CartanSplit {
    let m = *v.mat();
    let star = match which {
        SymSpace::H3 => m.dagger(),
        SymSpace::Geodesics => m.transpose(),
    };
    CartanSplit {
        which,
        h_part: Sl2Vector::project((m - star) * 0.5),
        m_part: Sl2Vector::project((m + star) * 0.5),
    }
}

/// Orthonormal basis of `m_i` for `<,> = Kill/8`; real span for `H^3`, complex span for `G`.
pub fn m_basis(which: SymSpace) -> &'static [Sl2Vector] {
    match which {
        SymSpace::H3 => &[H, X, Y],
        SymSpace::Geodesics => &[H, X],
    }
}

pub fn sample_m(which: SymSpace, rng: &mut SampleRng) -> Sl2Vector {
    m_basis(which).iter().fold(Sl2Vector::zero(), |acc, e| {
        let c = match which {
            SymSpace::H3 => Complex64::new(rng.normal(), 0.0),
            SymSpace::Geodesics => rng.complex_normal(),
        };
        acc.add(&e.scale(c))
    })
}

/// A stabilizer element of the base point: `SU(2)` for `H^3`, `SO(2,C)` for `G`.
pub fn sample_stabilizer(which: SymSpace, rng: &mut SampleRng) -> PslElement {
    let gen = match which {
        SymSpace::H3 => Sl2Vector::from_coords(
            Complex64::new(0.0, rng.normal()),
            Complex64::new(0.0, rng.normal()),
            Complex64::new(0.0, rng.normal()),
        ),
        SymSpace::Geodesics => Sl2Vector::project(ComplexMat2::new(ZERO, ONE, -ONE, ZERO)).scale(rng.complex_normal() * 0.5),
    };
    exp_sl2(&gen)
}

/// Depending on the space, a half-space point or a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymPoint {
    H3(H3Point),
    Line(GeodesicLine),
}

pub fn beta_eval(which: SymSpace, a: &PslElement) -> SymPoint {
    act(which, a, &base_point(which))
}

pub fn base_point(which: SymSpace) -> SymPoint {
    match which {
        SymSpace::H3 => SymPoint::H3(base_h3()),
        SymSpace::Geodesics => SymPoint::Line(base_line()),
    }
}

fn act(which: SymSpace, a: &PslElement, p: &SymPoint) -> SymPoint {
    match (which, p) {
        (SymSpace::H3, SymPoint::H3(q)) => SymPoint::H3(h3_action(a, q)),
        (SymSpace::Geodesics, SymPoint::Line(l)) => SymPoint::Line(g_action(a, l)),
        _ => unreachable!("point kind always matches the space"),
    }
}

/// The chart in which a point of `X_i` and its tangent vectors are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymChart {
    HalfSpace,
    G(GChart),
}

impl SymChart {
    pub fn adapted(p: &SymPoint) -> Self {
        match p {
            SymPoint::H3(_) => Self::HalfSpace,
            SymPoint::Line(l) => Self::G(GChart::adapted(l)),
        }
    }

    /// The standard metric of `X_i` (curvature `-1`) in this chart.
    pub fn metric(self) -> ChartMetric {
        match self {
            Self::HalfSpace => h3_metric_chart(),
            Self::G(c) => g_chart_metric_in(c),
        }
    }

    pub fn field(self) -> ScalarField {
        match self {
            Self::HalfSpace => ScalarField::Real,
            Self::G(_) => ScalarField::Complex,
        }
    }

    pub fn coords(self, p: &SymPoint) -> Result<Vec<Complex64>> {
        match (self, p) {
            (Self::HalfSpace, SymPoint::H3(q)) => Ok(q.chart()),
            (Self::G(c), SymPoint::Line(l)) => Ok(c.coords(l)?.to_vec()),
            _ => Err(Error::WrongChart("symmetric-space")),
        }
    }

    pub fn point(self, c: &[Complex64]) -> Result<SymPoint> {
        match self {
            Self::HalfSpace => Ok(SymPoint::H3(H3Point::from_chart(c)?)),
            Self::G(g) => Ok(SymPoint::Line(g.line_from(c)?)),
        }
    }
}

/// A tangent vector of `X_i` in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartTangent {
    pub chart: SymChart,
    pub point: Vec<Complex64>,
    pub vector: Vec<Complex64>,
}

fn field_of(which: SymSpace) -> ScalarField {
    match which {
        SymSpace::H3 => ScalarField::Real,
        SymSpace::Geodesics => ScalarField::Complex,
    }
}

/// `d/dt beta_i(A exp(tV))` at `t = 0`, in the chart adapted to `beta_i(A)`.
pub fn beta_differential(which: SymSpace, a: &PslElement, v: &Sl2Vector) -> Result<ChartTangent> {
    let chart = SymChart::adapted(&beta_eval(which, a));
    beta_differential_in(which, a, v, chart)
}

pub fn beta_differential_in(which: SymSpace, a: &PslElement, v: &Sl2Vector, chart: SymChart) -> Result<ChartTangent> {
    let point = chart.coords(&beta_eval(which, a))?;
    let curve = |t: Complex64| chart.coords(&beta_eval(which, &a.mul(&exp_sl2(&v.scale(t)))));
    let vector = derivative_1d(curve, field_of(which), STEP)?;
    Ok(ChartTangent { chart, point, vector })
}

/// `d_p M (w)` for the action of `M` on `X_i`, with both ends in adapted charts.
pub fn action_differential(which: SymSpace, m: &PslElement, at: &ChartTangent) -> Result<ChartTangent> {
    let p = at.chart.point(&at.point)?;
    let image = act(which, m, &p);
    let chart = SymChart::adapted(&image);
    let map = |c: &[Complex64]| chart.coords(&act(which, m, &at.chart.point(c)?));
    let vector = directional_derivative(map, &at.point, &at.vector, field_of(which), STEP)?;
    Ok(ChartTangent { chart, point: chart.coords(&image)?, vector })
}

/// Gram matrix at `beta_i(A)` of the push-forward of `<,>` restricted to
/// `(L_A)_* m_i`: `G = F^-T M F^-1` with `F` the images of the basis.
pub fn pushforward_metric(which: SymSpace, a: &PslElement) -> Result<(SymChart, Vec<Complex64>, DMatrix<Complex64>)> {
    let basis = m_basis(which);
    let n = basis.len();
    let chart = SymChart::adapted(&beta_eval(which, a));
    let mut cols = Vec::with_capacity(n);
    let mut point = Vec::new();
    for e in basis {
        let t = beta_differential_in(which, a, e, chart)?;
        point = t.point;
        cols.push(t.vector);
    }
    let f = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let gram = DMatrix::from_fn(n, n, |i, j| hrm_metric(&basis[i], &basis[j]));
    let f_inv = f.try_inverse().ok_or(Error::Singular)?;
    Ok((chart, point, f_inv.transpose() * gram * f_inv))
}

/// Largest `|g(d beta(L_A V), d beta(L_A W)) - 4 <V, W>|` over seeded `V, W in m_i`,
/// relative to `max(1, |4 <V, W>|)`.
pub fn scaling_isometry_check(which: SymSpace, a: &PslElement, seed: u64) -> Result<f64> {
    scaling_isometry_check_with(which, a, &mut SampleRng::new(seed))
}

pub fn scaling_isometry_check_with(which: SymSpace, a: &PslElement, rng: &mut SampleRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..SCALING_PAIRS {
        let (v, w) = (sample_m(which, rng), sample_m(which, rng));
        let dv = beta_differential(which, a, &v)?;
        let dw = beta_differential_in(which, a, &w, dv.chart)?;
        let lhs = dv.chart.metric().inner(&dv.point, &dv.vector, &dw.vector)?;
        let rhs = hrm_metric(&v, &w) * 4.0;
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    Ok(worst)
}

/// `g_i = (1/4)` standard metric: the push-forward of `<,>|m_i`, curvature `-4`.
pub fn symmetric_metric(which: SymSpace) -> (ChartMetric, Vec<Complex64>) {
    let base = base_point(which);
    let chart = SymChart::adapted(&base);
    let coords = chart.coords(&base).expect("base point lies in its adapted chart");
    (chart.metric().scaled(Complex64::new(0.25, 0.0)), coords)
}

fn m_residual(which: SymSpace, v: &Sl2Vector) -> f64 {
    cartan_split(v, which).h_part.max_norm()
}

fn tangent_at_base(which: SymSpace, v: &Sl2Vector) -> Result<Vec<Complex64>> {
    Ok(beta_differential(which, &PslElement::identity(), v)?.vector)
}

fn require_m(which: SymSpace, vs: &[&Sl2Vector]) -> Result<()> {
    for v in vs {
        let r = m_residual(which, v);
        if r >= SPLIT_TOL * v.max_norm().max(1.0) {
            return Err(Error::NotInComplement(r));
        }
    }
    Ok(())
}

/// Residual of `R(U_x, V_x) W_x = -d beta([[U, V], W])` for the kernel curvature of `g_i`,
/// relative to `max(1, |rhs|)`.
pub fn symmetric_curvature_check(which: SymSpace, u: &Sl2Vector, v: &Sl2Vector, w: &Sl2Vector) -> Result<f64> {
    require_m(which, &[u, v, w])?;
    let (g, p) = symmetric_metric(which);
    let r = Riemann::at(&g, &p)?;
    let lhs = r.operator(&tangent_at_base(which, u)?, &tangent_at_base(which, v)?, &tangent_at_base(which, w)?);
    let rhs: Vec<Complex64> = tangent_at_base(which, &bracket(&bracket(u, v), w))?.into_iter().map(|z| -z).collect();
    let scale = rhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

/// Sectional curvature of `g_i` on the plane `d beta(span(U, V))`.
pub fn symmetric_sectional_curvature(which: SymSpace, u: &Sl2Vector, v: &Sl2Vector) -> Result<Complex64> {
    require_m(which, &[u, v])?;
    let (g, p) = symmetric_metric(which);
    Riemann::at(&g, &p)?.sectional(&tangent_at_base(which, u)?, &tangent_at_base(which, v)?)
}

/// The five quantities of the curvature computation for an orthonormal pair
/// `V, W in m_i`, all equal to `-1`:
/// `K_PSL(V,W)`, `<R(V,W)W, V>`, `-<[[V,W],W], V>/4`,
/// `g_i(R^X(V_x,W_x)W_x, V_x)/4`, `K^{g_i}(V_x, W_x)/4`.
pub fn curvature_chain(which: SymSpace, v: &Sl2Vector, w: &Sl2Vector) -> Result<[Complex64; 5]> {
    require_m(which, &[v, w])?;
    let quarter = Complex64::new(0.25, 0.0);
    let k_psl = algebraic_sectional_curvature(v, w)?;
    let algebraic = hrm_metric(&algebraic_curvature(v, w, w), v);
    let brackets = -quarter * hrm_metric(&bracket(&bracket(v, w), w), v);
    let (g, p) = symmetric_metric(which);
    let r = Riemann::at(&g, &p)?;
    let (vx, wx) = (tangent_at_base(which, v)?, tangent_at_base(which, w)?);
    let rx = r.operator(&vx, &wx, &wx);
    let kernel = quarter * quadratic(r.metric(), &rx, &vx);
    let sectional = quarter * r.sectional(&vx, &wx)?;
    Ok([k_psl, algebraic, brackets, kernel, sectional])
}

/// Orthonormalizes a seeded pair in `m_i`; `None` if the draw is ill-conditioned.
pub fn orthonormal_pair(which: SymSpace, rng: &mut SampleRng) -> Option<(Sl2Vector, Sl2Vector)> {
    let (v, w) = (sample_m(which, rng), sample_m(which, rng));
    let vv = hrm_metric(&v, &v);
    if vv.norm() < 0.1 * v.max_norm().powi(2) {
        return None;
    }
    let v = v.scale(vv.sqrt().inv());
    let w = w.sub(&v.scale(hrm_metric(&w, &v)));
    let ww = hrm_metric(&w, &w);
    if ww.norm() < 0.1 * w.max_norm().powi(2) {
        return None;
    }
    Some((v, w.scale(ww.sqrt().inv())))
}
