use num_complex::Complex64;

use crate::cx_linear::{bilinear_slice, f_map, mat2_bilinear, ComplexMat2, ComplexVec, ONE, ZERO};
use crate::error::{Error, Result};
use crate::geodesic_space::{
    g_action, g_chart_metric, g_chart_metric_in, mobius_apply, q_membership, rot_pi, rot_pi_pullback_check_with, sample_line,
    BoundaryPoint, GChart, GeodesicLine,
};
use crate::harness::Suite;
use crate::hrm_kernel::{
    curvature_tensor, geodesic_integrate, geodesic_integrate_with_transport, geodesic_residual, holomorphy_residual, jacobian,
    max_abs, pullback_metric, sectional_curvature, Matrix, Riemann, ScalarField,
};
use crate::rng::SampleRng;
use crate::sl2_lie::{
    adjoint, algebraic_sectional_curvature, bracket, exp_sl2, hrm_metric, isometry_action, isometry_pushforward, killing, metric_at,
    metric_at_right, psl_distance, sl2_chart_coords, sl2_chart_embed, sl2_chart_metric, sl2_chart_tangent, PslElement, Sl2Vector,
    TangentAtGroup, X,
};
use crate::space_forms::{flat_metric, quadric_chart, quadric_frame, quadric_sample_with, x3_to_sl2, QuadricPoint};
use crate::symmetric_spaces::{
    action_differential, beta_differential, beta_eval, cartan_split, curvature_chain, h3_action, h3_metric_chart,
    orthonormal_pair, pushforward_metric, sample_m, sample_stabilizer, scaling_isometry_check_with, symmetric_curvature_check,
    symmetric_sectional_curvature, H3Point, SymPoint, SymSpace, ALL_SPACES,
};

pub(crate) type CheckFn = fn(&mut SampleRng, usize) -> Result<f64>;

/// A named residual battery with its default tolerance.
#[derive(Clone, Copy)]
pub(crate) struct CheckSpec {
    pub suite: Suite,
    pub name: &'static str,
    pub tolerance: f64,
    pub run: CheckFn,
}

const REDRAWS: usize = 1000;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_over(samples: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let r = f()?;
        if r.is_nan() {
            return Err(Error::NonFinite("residual"));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// First draw accepted by `accept`, within a fixed budget.
fn redraw<T>(mut draw: impl FnMut() -> T, accept: impl Fn(&T) -> bool) -> Result<T> {
    for _ in 0..REDRAWS {
        let x = draw();
        if accept(&x) {
            return Ok(x);
        }
    }
    Err(Error::SampleExhausted)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn matrix_rel(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / (1.0 + max_abs(b))
}

fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_sl2(rng: &mut SampleRng) -> Sl2Vector {
    Sl2Vector::from_coords(rng.complex_normal(), rng.complex_normal(), rng.complex_normal())
}

fn random_psl(rng: &mut SampleRng, scale: f64) -> PslElement {
    exp_sl2(&random_sl2(rng).scale(scale.into()))
}

fn random_cvec(rng: &mut SampleRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| rng.complex_normal()).collect()
}

fn well_conditioned_pair(v: &Sl2Vector, w: &Sl2Vector) -> bool {
    let gram = hrm_metric(v, v) * hrm_metric(w, w) - hrm_metric(v, w).powi(2);
    gram.norm() > 0.05 * (v.mat().frobenius() * w.mat().frobenius()).powi(2)
}

fn sl2_pair(rng: &mut SampleRng) -> Result<(Sl2Vector, Sl2Vector)> {
    redraw(|| (random_sl2(rng), random_sl2(rng)), |(v, w)| well_conditioned_pair(v, w))
}

fn chart_pair(g: &Matrix, rng: &mut SampleRng, n: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    redraw(
        || (random_cvec(rng, n), random_cvec(rng, n)),
        |(v, w)| {
            let gram = crate::hrm_kernel::quadratic(g, v, v) * crate::hrm_kernel::quadratic(g, w, w)
                - crate::hrm_kernel::quadratic(g, v, w).powi(2);
            let e: f64 = v.iter().chain(w).map(|z| z.norm_sqr()).sum::<f64>() / 2.0;
            gram.norm() > 0.05 * (max_abs(g) * e).powi(2)
        },
    )
}

// ---------------------------------------------------------------------------
// lie-identities
// ---------------------------------------------------------------------------

fn jacobi(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (m, a, b) = (random_sl2(rng), random_sl2(rng), random_sl2(rng));
        let j = bracket(&m, &bracket(&a, &b)).add(&bracket(&a, &bracket(&b, &m))).add(&bracket(&b, &bracket(&m, &a)));
        Ok(j.max_norm())
    })
}

/// `ad(M)` in the basis `(diag(1,-1), E12, E21)`, read off matrix entries.
fn ad_matrix(m: &Sl2Vector) -> [[Complex64; 3]; 3] {
    let basis = [
        ComplexMat2::diag(ONE, -ONE),
        ComplexMat2::new(ZERO, ONE, ZERO, ZERO),
        ComplexMat2::new(ZERO, ZERO, ONE, ZERO),
    ];
    let mut out = [[ZERO; 3]; 3];
    for (j, e) in basis.iter().enumerate() {
        let r = *m.mat() * *e - *e * *m.mat();
        out[0][j] = r.a;
        out[1][j] = r.b;
        out[2][j] = r.c;
    }
    out
}

fn killing_trace(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (m, k) = (random_sl2(rng), random_sl2(rng));
        let (am, ak) = (ad_matrix(&m), ad_matrix(&k));
        let mut tr = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                tr += am[i][j] * ak[j][i];
            }
        }
        Ok(rel(killing(&m, &k), tr))
    })
}

fn killing_ad_invariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (w, u, v) = (random_sl2(rng), random_sl2(rng), random_sl2(rng));
        Ok((killing(&bracket(&w, &u), &v) + killing(&u, &bracket(&w, &v))).norm())
    })
}

fn bracket_norm(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (a, b) = (random_sl2(rng), random_sl2(rng));
        let br = bracket(&a, &b);
        let lhs = hrm_metric(&br, &br);
        let rhs = -4.0 * hrm_metric(&a, &a) * hrm_metric(&b, &b) + 4.0 * hrm_metric(&a, &b).powi(2);
        Ok((lhs - rhs).norm())
    })
}

fn exp_taylor(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let m = random_sl2(rng);
        let target = 2.0 * rng.uniform();
        let m = m.scale((target / m.mat().frobenius()).into());
        let mut term = ComplexMat2::identity();
        let mut sum = term;
        for k in 1..20 {
            term = term * *m.mat() * (1.0 / k as f64);
            sum = sum + term;
        }
        Ok(exp_sl2(&m).rep().dist(&sum).max((exp_sl2(&m).rep().det() - ONE).norm()))
    })
}

fn adjoint_derivative(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let t = 1e-3;
    max_over(n, || {
        let (v, m) = (random_sl2(rng), random_sl2(rng));
        let lhs = adjoint(&exp_sl2(&v.scale(t.into())), &m);
        let rhs = m.add(&bracket(&v, &m).scale(t.into()));
        Ok(lhs.sub(&rhs).max_norm() / (t * t * v.max_norm().powi(2) * m.max_norm()))
    })
}

fn ad_invariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let (m, k) = (random_sl2(rng), random_sl2(rng));
        Ok(rel(killing(&adjoint(&a, &m), &adjoint(&a, &k)), killing(&m, &k)))
    })
}

fn f_map_quadratic(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let z = ComplexVec::new(random_cvec(rng, 4))?;
        let f = f_map(&z)?;
        Ok((mat2_bilinear(&f, &f) - bilinear_slice(z.as_slice(), z.as_slice())).norm().max((-f.det() - bilinear_slice(z.as_slice(), z.as_slice())).norm()))
    })
}

fn f_map_polarization(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (u, v) = (ComplexVec::new(random_cvec(rng, 4))?, ComplexVec::new(random_cvec(rng, 4))?);
        Ok((mat2_bilinear(&f_map(&u)?, &f_map(&v)?) - bilinear_slice(u.as_slice(), v.as_slice())).norm())
    })
}

fn f_map_linearity(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (u, v) = (ComplexVec::new(random_cvec(rng, 4))?, ComplexVec::new(random_cvec(rng, 4))?);
        let lam = rng.complex_normal();
        let lhs = f_map(&(&u.scale(lam) + &v))?;
        let rhs = f_map(&u)? * lam + f_map(&v)?;
        Ok(lhs.dist(&rhs) / (1.0 + lam.norm()))
    })
}

// ---------------------------------------------------------------------------
// psl-curvature
// ---------------------------------------------------------------------------

fn algebraic_sectional(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (v, w) = sl2_pair(rng)?;
        Ok((algebraic_sectional_curvature(&v, &w)? + ONE).norm())
    })
}

/// A group element in the `(a, b, c)` chart together with two left-translated tangents.
fn sl2_chart_sample(rng: &mut SampleRng) -> Result<(PslElement, [Complex64; 3], Sl2Vector, Sl2Vector)> {
    let a = redraw(|| random_psl(rng, 0.3), |a| a.rep().a.norm() > 0.3)?;
    let p = sl2_chart_coords(&a)?;
    let (u, v) = sl2_pair(rng)?;
    Ok((a, p, u, v))
}

fn translated(a: &PslElement, v: &Sl2Vector) -> [Complex64; 3] {
    sl2_chart_tangent(&(*a.rep() * *v.mat()))
}

fn chart_sectional(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    max_over(n, || {
        let (a, p, u, v) = sl2_chart_sample(rng)?;
        Ok((sectional_curvature(&g, &p, &translated(&a, &u), &translated(&a, &v))?.curvature + ONE).norm())
    })
}

fn metric_left_right(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let u = TangentAtGroup::left_translate(a, &random_sl2(rng));
        let v = TangentAtGroup::left_translate(a, &random_sl2(rng));
        Ok(rel(metric_at(&a, &u, &v)?, metric_at_right(&a, &u, &v)?))
    })
}

fn isometry_action_check(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (a, b, base) = (random_psl(rng, 0.5), random_psl(rng, 0.5), random_psl(rng, 0.5));
        let u = TangentAtGroup::left_translate(base, &random_sl2(rng));
        let v = TangentAtGroup::left_translate(base, &random_sl2(rng));
        let before = metric_at(&base, &u, &v)?;
        let image = isometry_action(&a, &b, &base);
        let after = metric_at(&image, &isometry_pushforward(&a, &b, &u), &isometry_pushforward(&a, &b, &v))?;
        Ok(rel(after, before))
    })
}

fn one_parameter_residual(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    max_over(n, || {
        let (a, _, u, _) = sl2_chart_sample(rng)?;
        let v = u.scale(0.5.into());
        let curve = |t: f64| sl2_chart_coords(&a.mul(&exp_sl2(&v.scale(t.into())))).map(|c| c.to_vec()).unwrap_or_default();
        geodesic_residual(&g, curve, 0.0, 1e-3)
    })
}

fn one_parameter_rk4(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    let id = PslElement::identity();
    let p = sl2_chart_coords(&id)?;
    max_over(n, || {
        let v = random_sl2(rng);
        let v = v.scale((0.5 / v.mat().frobenius()).into());
        let traj = geodesic_integrate(&g, &p, &translated(&id, &v), 1.0, 5e-3)?;
        if traj.exited_domain {
            return Err(Error::OutsideDomain);
        }
        Ok(sl2_chart_embed(&traj.last().point).dist(exp_sl2(&v).rep()))
    })
}

fn curvature_symmetries(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    max_over(n, || {
        let (_, p, _, _) = sl2_chart_sample(rng)?;
        let r = Riemann::at(&g, &p)?;
        let vs: Vec<Vec<Complex64>> = (0..4).map(|_| random_cvec(rng, 3)).collect();
        let (a, b, cc, d) = (&vs[0], &vs[1], &vs[2], &vs[3]);
        let base = r.tensor(a, b, cc, d);
        let scale = base.norm().max(1.0);
        let e1 = (base + r.tensor(b, a, cc, d)).norm();
        let e2 = (base + r.tensor(a, b, d, cc)).norm();
        let e3 = (base - r.tensor(cc, d, a, b)).norm();
        let e4 = (curvature_tensor(&g, &p, a, b, cc, d)? - base).norm();
        Ok(e1.max(e2).max(e3).max(e4) / scale)
    })
}

/// Left-invariant direction of Frobenius norm `size` that is far from the null cone.
fn non_null(rng: &mut SampleRng, size: f64) -> Result<Sl2Vector> {
    let u = redraw(|| random_sl2(rng), |u| hrm_metric(u, u).norm() > 0.2 * u.mat().frobenius().powi(2))?;
    Ok(u.scale((size / u.mat().frobenius()).into()))
}

fn energy_conservation(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    max_over(n, || {
        let (a, p, _, _) = sl2_chart_sample(rng)?;
        let v0 = translated(&a, &non_null(rng, 0.3)?);
        let e0 = g.inner(&p, &v0, &v0)?;
        let traj = geodesic_integrate(&g, &p, &v0, 1.0, 1e-2)?;
        let mut worst: f64 = 0.0;
        for s in &traj.samples {
            let e = g.inner(&s.point, &s.velocity, &s.velocity)?;
            worst = worst.max((e - e0).norm() / e0.norm());
        }
        Ok(worst)
    })
}

fn parallel_transport(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = sl2_chart_metric();
    max_over(n, || {
        let (a, p, _, _) = sl2_chart_sample(rng)?;
        let v0 = translated(&a, &non_null(rng, 0.3)?);
        let (e, f) = (non_null(rng, 1.0)?, non_null(rng, 1.0)?);
        let fields = vec![translated(&a, &e).to_vec(), translated(&a, &f).to_vec()];
        let ip0 = g.inner(&p, &fields[0], &fields[1])?;
        let traj = geodesic_integrate_with_transport(&g, &p, &v0, &fields, 1.0, 5e-3)?;
        let mut worst: f64 = 0.0;
        for s in &traj.samples {
            worst = worst.max(rel(g.inner(&s.point, &s.transported[0], &s.transported[1])?, ip0));
        }
        Ok(worst)
    })
}

// ---------------------------------------------------------------------------
// g-space
// ---------------------------------------------------------------------------

fn line_coords(line: &GeodesicLine) -> Result<[Complex64; 2]> {
    GChart::FiniteFinite.coords(line)
}

fn g_curvature(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = g_chart_metric();
    max_over(n, || {
        let p = line_coords(&sample_line(rng))?;
        let (v, w) = chart_pair(&g.components(&p)?, rng, 2)?;
        Ok((sectional_curvature(&g, &p, &v, &w)?.curvature + ONE).norm())
    })
}

fn g_invariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = g_chart_metric();
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let line = sample_line(rng);
        let chart = GChart::adapted(&g_action(&a, &line));
        let map = |x: &[Complex64]| Ok(chart.coords(&g_action(&a, &GChart::FiniteFinite.line_from(x)?))?.to_vec());
        let p = line_coords(&line)?;
        let pulled = pullback_metric(&g_chart_metric_in(chart), map, &p, ScalarField::Complex, 1e-5)?;
        Ok(matrix_rel(&pulled, &g.components(&p)?))
    })
}

fn g_holomorphy(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = g_chart_metric();
    max_over(n, || holomorphy_residual(&g, &line_coords(&sample_line(rng))?))
}

fn g_mobius_composition(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (a, b) = (random_psl(rng, 0.5), random_psl(rng, 0.5));
        let p = BoundaryPoint::Finite(rng.complex_normal());
        let lhs = mobius_apply(&a.mul(&b), &p);
        let rhs = mobius_apply(&a, &mobius_apply(&b, &p));
        let inf = mobius_apply(&a.mul(&b), &BoundaryPoint::Infinity).chordal(&mobius_apply(&a, &mobius_apply(&b, &BoundaryPoint::Infinity)));
        Ok(lhs.chordal(&rhs).max(inf))
    })
}

fn g_spanning_pair(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = g_chart_metric();
    max_over(n, || {
        let p = line_coords(&sample_line(rng))?;
        let (v, w) = chart_pair(&g.components(&p)?, rng, 2)?;
        let k0 = sectional_curvature(&g, &p, &v, &w)?.curvature;
        let [a, b, cc, d] = redraw(|| [rng.complex_normal(), rng.complex_normal(), rng.complex_normal(), rng.complex_normal()], |m| {
            (m[0] * m[3] - m[1] * m[2]).norm() > 0.3
        })?;
        let v2: Vec<_> = (0..2).map(|i| a * v[i] + b * w[i]).collect();
        let w2: Vec<_> = (0..2).map(|i| cc * v[i] + d * w[i]).collect();
        Ok((sectional_curvature(&g, &p, &v2, &w2)?.curvature - k0).norm())
    })
}

// ---------------------------------------------------------------------------
// quadrics
// ---------------------------------------------------------------------------

fn dim_for(i: usize) -> usize {
    2 + i % 2
}

fn quadric_sample_residual(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let mut i = 0;
    max_over(n, || {
        i += 1;
        Ok(quadric_sample_with(rng, dim_for(i))?.residual())
    })
}

fn quadric_frame_tangency(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let mut i = 0;
    max_over(n, || {
        i += 1;
        Ok(quadric_frame(&quadric_sample_with(rng, dim_for(i))?)?.max_tangency_residual())
    })
}

fn quadric_frame_orthonormality(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let mut i = 0;
    max_over(n, || {
        i += 1;
        let gram = quadric_frame(&quadric_sample_with(rng, dim_for(i))?)?.gram();
        let k = gram.nrows();
        if gram.determinant().norm() <= 1e-6 {
            return Ok(f64::MAX);
        }
        Ok((gram - Matrix::identity(k, k)).iter().map(|z| z.norm()).fold(0.0, f64::max))
    })
}

fn flat_model(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let dim = 2 + (rng.next_u64() % 3) as usize;
        let g = flat_metric(dim);
        let p = random_cvec(rng, dim);
        let (v, w) = chart_pair(&g.components(&p)?, rng, dim)?;
        let gamma = crate::hrm_kernel::christoffels(&g, &p)?.max_abs();
        let k = sectional_curvature(&g, &p, &v, &w)?.curvature.norm();
        Ok(gamma.max(k))
    })
}

fn quadric_curvature_at(p: &QuadricPoint, scale: Complex64) -> Result<Complex64> {
    let chart = quadric_chart(p, scale)?;
    let frame = quadric_frame(p)?;
    let v = chart.to_chart_tangent(&frame.vectors[0])?;
    let w = chart.to_chart_tangent(&frame.vectors[1])?;
    Ok(sectional_curvature(&chart.metric, &chart.base_coords(), &v, &w)?.curvature)
}

fn x2_curvature(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || Ok((quadric_curvature_at(&quadric_sample_with(rng, 2)?, ONE)? + ONE).norm()))
}

fn x3_curvature(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || Ok((quadric_curvature_at(&quadric_sample_with(rng, 3)?, ONE)? + ONE).norm()))
}

fn quadric_scaled_curvature(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let mut i = 0;
    max_over(n, || {
        i += 1;
        let p = quadric_sample_with(rng, dim_for(i))?;
        let mut worst: f64 = 0.0;
        for k in [c(-4.0, 0.0), c(-1.0, 0.0), c(0.0, 2.0)] {
            worst = worst.max((quadric_curvature_at(&p, -ONE / k)? - k).norm() / k.norm());
        }
        Ok(worst)
    })
}

fn quadric_scaling_law(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let p = quadric_sample_with(rng, 2)?;
        let base = quadric_curvature_at(&p, ONE)?;
        let mut worst: f64 = 0.0;
        for lam in [c(2.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)] {
            worst = worst.max((quadric_curvature_at(&p, lam)? - base / lam).norm());
        }
        Ok(worst)
    })
}

fn quadric_holomorphy(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let mut i = 0;
    max_over(n, || {
        i += 1;
        let chart = quadric_chart(&quadric_sample_with(rng, dim_for(i))?, ONE)?;
        holomorphy_residual(&chart.metric, &chart.base_coords())
    })
}

fn f_image_unimodular(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || Ok((f_map(quadric_sample_with(rng, 3)?.z())?.det() - ONE).norm()))
}

fn f_slice_trace_free(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut z = quadric_sample_with(rng, 2)?.z().clone().into_inner();
        z.push(ZERO);
        let a = x3_to_sl2(&QuadricPoint::new(ComplexVec::new(z)?)?)?;
        Ok(a.rep().trace().norm())
    })
}

fn x3_sl2_isometry(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let target = sl2_chart_metric();
    max_over(n, || {
        let p = redraw(|| quadric_sample_with(rng, 3), |p| p.as_ref().map(|p| f_map(p.z()).map(|m| m.a.norm() > 0.3).unwrap_or(false)).unwrap_or(true))??;
        let chart = quadric_chart(&p, ONE)?;
        let map = |u: &[Complex64]| -> Result<Vec<Complex64>> {
            let m = f_map(&chart.embed(u)?)?;
            Ok(vec![m.a, m.b, m.c])
        };
        let u = chart.base_coords();
        let pulled = pullback_metric(&target, map, &u, ScalarField::Complex, 1e-5)?;
        Ok(matrix_rel(&pulled, &chart.metric.components(&u)?))
    })
}

// ---------------------------------------------------------------------------
// rotpi-cover
// ---------------------------------------------------------------------------

fn rotpi_membership(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let m = rot_pi(&sample_line(rng))?;
        if !q_membership(&m, 1e-10) {
            return Ok(f64::MAX);
        }
        let r = m.rep();
        Ok(r.trace().norm().max((r.det() - ONE).norm()).max(psl_distance(&m.mul(&m), &PslElement::identity())))
    })
}

fn rotpi_fixes_endpoints(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let line = sample_line(rng);
        let m = rot_pi(&line)?;
        let (p, q) = line.endpoints();
        Ok(mobius_apply(&m, &p).chordal(&p).max(mobius_apply(&m, &q).chordal(&q)))
    })
}

fn rotpi_equivariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let line = sample_line(rng);
        let lhs = rot_pi(&g_action(&a, &line))?;
        let rhs = a.mul(&rot_pi(&line)?).mul(&a.inverse());
        Ok(psl_distance(&lhs, &rhs))
    })
}

fn rotpi_reversal(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let line = sample_line(rng);
        Ok(psl_distance(&rot_pi(&line)?, &rot_pi(&line.reversed())?))
    })
}

fn rotpi_local_isometry(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || rot_pi_pullback_check_with(&sample_line(rng), rng))
}

fn rotpi_infinite_endpoint(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let i = crate::cx_linear::I;
    max_over(n, || {
        let p = rng.complex_normal();
        let fwd = rot_pi(&GeodesicLine::new(BoundaryPoint::Finite(p), BoundaryPoint::Infinity)?)?;
        let bwd = rot_pi(&GeodesicLine::new(BoundaryPoint::Infinity, BoundaryPoint::Finite(p))?)?;
        let fwd_limit = PslElement::new(ComplexMat2::new(-i, 2.0 * i * p, ZERO, i))?;
        let bwd_limit = PslElement::new(ComplexMat2::new(i, -2.0 * i * p, ZERO, -i))?;
        Ok(psl_distance(&fwd, &fwd_limit).max(psl_distance(&bwd, &bwd_limit)) / (1.0 + p.norm()))
    })
}

fn x2_chain_isometry(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = g_chart_metric();
    max_over(n, || {
        let p = line_coords(&sample_line(rng))?;
        let chain = |x: &[Complex64]| Ok(crate::cx_linear::f_map_inverse(rot_pi(&GChart::FiniteFinite.line_from(x)?)?.rep()).into_inner());
        let z = chain(&p)?;
        let on_slice = z[3].norm().max((bilinear_slice(&z[..3], &z[..3]) + ONE).norm());
        let j = jacobian(chain, &p, ScalarField::Complex, 1e-5)?;
        Ok(matrix_rel(&(j.transpose() * &j), &g.components(&p)?).max(on_slice))
    })
}

// ---------------------------------------------------------------------------
// symmetric-scaling
// ---------------------------------------------------------------------------

fn random_h3(rng: &mut SampleRng) -> Result<H3Point> {
    H3Point::new(rng.normal(), rng.normal(), rng.uniform_in(0.3, 2.0))
}

fn h3_action_isometry(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = h3_metric_chart();
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let p = random_h3(rng)?.chart();
        let map = |x: &[Complex64]| Ok(h3_action(&a, &H3Point::new(x[0].re, x[1].re, x[2].re)?).chart());
        let pulled = pullback_metric(&g, map, &p, ScalarField::Real, 1e-5)?;
        Ok(matrix_rel(&pulled, &g.components(&p)?))
    })
}

fn h3_action_closed_form(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        let p = random_h3(rng)?;
        let m = a.rep();
        let z = c(p.x, p.y);
        let den = (m.c * z + m.d).norm_sqr() + m.c.norm_sqr() * p.t * p.t;
        let zp = ((m.a * z + m.b) * (m.c * z + m.d).conj() + m.a * m.c.conj() * p.t * p.t) / den;
        let q = h3_action(&a, &p);
        if q.t <= 0.0 {
            return Ok(f64::MAX);
        }
        Ok((q.x - zp.re).abs().max((q.y - zp.im).abs()).max((q.t - p.t / den).abs()))
    })
}

fn sym_distance(a: &SymPoint, b: &SymPoint) -> f64 {
    match (a, b) {
        (SymPoint::H3(p), SymPoint::H3(q)) => (p.x - q.x).abs().max((p.y - q.y).abs()).max((p.t - q.t).abs()),
        (SymPoint::Line(l), SymPoint::Line(m)) => l.distance(m),
        _ => f64::MAX,
    }
}

fn act(which: SymSpace, a: &PslElement, p: &SymPoint) -> SymPoint {
    match p {
        SymPoint::H3(q) => SymPoint::H3(h3_action(a, q)),
        SymPoint::Line(l) => {
            debug_assert_eq!(which, SymSpace::Geodesics);
            SymPoint::Line(g_action(a, l))
        }
    }
}

fn beta_equivariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let (a, b) = (random_psl(rng, 0.5), random_psl(rng, 0.5));
            worst = worst.max(sym_distance(&beta_eval(which, &a.mul(&b)), &act(which, &a, &beta_eval(which, &b))));
        }
        Ok(worst)
    })
}

fn beta_stabilizer(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let id = PslElement::identity();
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let s = sample_stabilizer(which, rng);
            worst = worst.max(sym_distance(&beta_eval(which, &s), &beta_eval(which, &id)));
            let h = cartan_split(&random_sl2(rng), which).h_part;
            let t = beta_differential(which, &id, &h)?;
            worst = worst.max(t.vector.iter().map(|z| z.norm()).fold(0.0, f64::max) / h.max_norm().max(1.0));
        }
        Ok(worst)
    })
}

fn cartan_brackets(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let s = cartan_split(&random_sl2(rng), which);
            let m2 = cartan_split(&random_sl2(rng), which).m_part;
            worst = worst.max(cartan_split(&bracket(&s.h_part, &s.m_part), which).h_part.max_norm());
            worst = worst.max(cartan_split(&bracket(&s.m_part, &m2), which).m_part.max_norm());
        }
        Ok(worst)
    })
}

fn cartan_reconstruction(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let v = random_sl2(rng);
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let s = cartan_split(&v, which);
            worst = worst.max(s.h_part.add(&s.m_part).sub(&v).max_norm());
        }
        Ok(worst)
    })
}

fn m1_positive_definite(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let v = sample_m(SymSpace::H3, rng);
        let q = hrm_metric(&v, &v);
        if q.re <= 0.0 {
            return Ok(f64::MAX);
        }
        Ok(q.im.abs() / q.norm())
    })
}

fn beta_ad_equivariance(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let id = PslElement::identity();
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let m = sample_stabilizer(which, rng);
            let v = sample_m(which, rng);
            let lhs = beta_differential(which, &id, &adjoint(&m, &v))?;
            let rhs = action_differential(which, &m, &beta_differential(which, &id, &v)?)?;
            if lhs.chart != rhs.chart {
                return Err(Error::WrongChart("adapted"));
            }
            let scale = rhs.vector.iter().map(|z| z.norm()).fold(1.0, f64::max);
            worst = worst.max(vec_dist(&lhs.vector, &rhs.vector) / scale);
        }
        Ok(worst)
    })
}

fn scaling_h3(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        scaling_isometry_check_with(SymSpace::H3, &a, rng)
    })
}

fn scaling_g(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let a = random_psl(rng, 0.5);
        scaling_isometry_check_with(SymSpace::Geodesics, &a, rng)
    })
}

fn scaling_base_norm(_rng: &mut SampleRng, _n: usize) -> Result<f64> {
    let t = beta_differential(SymSpace::Geodesics, &PslElement::identity(), &X)?;
    let norm = t.chart.metric().inner(&t.point, &t.vector, &t.vector)?;
    let chart = GChart::FiniteInverted;
    let zero_inf = GeodesicLine::new(BoundaryPoint::Finite(ZERO), BoundaryPoint::Infinity)?;
    let curve = |s: Complex64| Ok(chart.coords(&g_action(&exp_sl2(&X.scale(s)), &zero_inf))?.to_vec());
    let v = crate::hrm_kernel::derivative_1d(curve, ScalarField::Complex, 1e-5)?;
    let at_zero_inf = g_chart_metric_in(chart).inner(&[ZERO, ZERO], &v, &v)?;
    let expected = 4.0 * hrm_metric(&X, &X);
    Ok((norm - expected).norm().max((at_zero_inf - expected).norm()))
}

fn metric_well_posedness(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let a = random_psl(rng, 0.5);
            let b = a.mul(&sample_stabilizer(which, rng));
            let (ca, pa, ga) = pushforward_metric(which, &a)?;
            let (cb, pb, gb) = pushforward_metric(which, &b)?;
            if ca != cb || vec_dist(&pa, &pb) > 1e-10 {
                return Ok(f64::MAX);
            }
            worst = worst.max(matrix_rel(&ga, &gb));
        }
        Ok(worst)
    })
}

// ---------------------------------------------------------------------------
// symmetric-curvature
// ---------------------------------------------------------------------------

fn h3_curvature(rng: &mut SampleRng, n: usize) -> Result<f64> {
    let g = h3_metric_chart();
    let p = H3Point::new(0.0, 0.0, 1.0)?.chart();
    max_over(n, || {
        let (v, w) = redraw(
            || ((0..3).map(|_| c(rng.normal(), 0.0)).collect::<Vec<_>>(), (0..3).map(|_| c(rng.normal(), 0.0)).collect::<Vec<_>>()),
            |(v, w)| {
                let (vv, ww, vw) = (bilinear_slice(v, v), bilinear_slice(w, w), bilinear_slice(v, w));
                (vv * ww - vw * vw).norm() > 0.05 * (vv * ww).norm()
            },
        )?;
        Ok((sectional_curvature(&g, &p, &v, &w)?.curvature + ONE).norm())
    })
}

fn curvature_formula(which: SymSpace, rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (u, v, w) = (sample_m(which, rng), sample_m(which, rng), sample_m(which, rng));
        symmetric_curvature_check(which, &u, &v, &w)
    })
}

fn curvature_formula_h3(rng: &mut SampleRng, n: usize) -> Result<f64> {
    curvature_formula(SymSpace::H3, rng, n)
}

fn curvature_formula_g(rng: &mut SampleRng, n: usize) -> Result<f64> {
    curvature_formula(SymSpace::Geodesics, rng, n)
}

fn curvature_formula_antisymmetry(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let (u, w) = (sample_m(which, rng), sample_m(which, rng));
            worst = worst.max(symmetric_curvature_check(which, &u, &u, &w)?);
        }
        Ok(worst)
    })
}

fn minus_four(which: SymSpace, rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let (v, w) = redraw(|| orthonormal_pair(which, rng), Option::is_some)?.expect("accepted draws are Some");
        Ok((symmetric_sectional_curvature(which, &v, &w)? + c(4.0, 0.0)).norm())
    })
}

fn g1_minus_four(rng: &mut SampleRng, n: usize) -> Result<f64> {
    minus_four(SymSpace::H3, rng, n)
}

fn g2_minus_four(rng: &mut SampleRng, n: usize) -> Result<f64> {
    minus_four(SymSpace::Geodesics, rng, n)
}

fn curvature_chain_check(rng: &mut SampleRng, n: usize) -> Result<f64> {
    max_over(n, || {
        let mut worst: f64 = 0.0;
        for which in ALL_SPACES {
            let (v, w) = redraw(|| orthonormal_pair(which, rng), Option::is_some)?.expect("accepted draws are Some");
            for value in curvature_chain(which, &v, &w)? {
                worst = worst.max((value + ONE).norm());
            }
        }
        Ok(worst)
    })
}

macro_rules! checks {
    ($suite:expr; $($name:literal => $f:ident @ $tol:expr),* $(,)?) => {
        vec![$(CheckSpec { suite: $suite, name: $name, tolerance: $tol, run: $f }),*]
    };
}

pub(crate) fn checks_for(suite: Suite) -> Vec<CheckSpec> {
    match suite {
        Suite::LieIdentities => checks![suite;
            "jacobi" => jacobi @ 1e-12,
            "killing-trace-ad" => killing_trace @ 1e-12,
            "killing-ad-invariance" => killing_ad_invariance @ 1e-11,
            "bracket-norm" => bracket_norm @ 1e-10,
            "exp-taylor" => exp_taylor @ 1e-11,
            "adjoint-derivative" => adjoint_derivative @ 10.0,
            "adjoint-invariance" => ad_invariance @ 1e-11,
            "f-map-quadratic" => f_map_quadratic @ 1e-13,
            "f-map-polarization" => f_map_polarization @ 1e-13,
            "f-map-linearity" => f_map_linearity @ 1e-14,
        ],
        Suite::PslCurvature => checks![suite;
            "algebraic-sectional" => algebraic_sectional @ 1e-9,
            "chart-sectional" => chart_sectional @ 1e-5,
            "metric-left-right" => metric_left_right @ 1e-12,
            "isometry-action" => isometry_action_check @ 1e-11,
            "one-parameter-geodesic" => one_parameter_residual @ 1e-6,
            "one-parameter-rk4" => one_parameter_rk4 @ 1e-6,
            "curvature-symmetries" => curvature_symmetries @ 1e-8,
            "energy-conservation" => energy_conservation @ 1e-8,
            "parallel-transport" => parallel_transport @ 1e-7,
        ],
        Suite::GSpace => checks![suite;
            "g-curvature" => g_curvature @ 1e-6,
            "g-invariance" => g_invariance @ 1e-9,
            "g-holomorphy" => g_holomorphy @ 1e-8,
            "g-mobius-composition" => g_mobius_composition @ 1e-10,
            "g-spanning-pair" => g_spanning_pair @ 1e-7,
        ],
        Suite::Quadrics => checks![suite;
            "quadric-sample-residual" => quadric_sample_residual @ 1e-12,
            "quadric-frame-tangency" => quadric_frame_tangency @ 1e-10,
            "quadric-frame-orthonormality" => quadric_frame_orthonormality @ 1e-10,
            "flat-model" => flat_model @ 1e-10,
            "x2-curvature" => x2_curvature @ 1e-5,
            "x3-curvature" => x3_curvature @ 1e-5,
            "quadric-scaled-curvature" => quadric_scaled_curvature @ 1e-5,
            "quadric-scaling-law" => quadric_scaling_law @ 1e-6,
            "quadric-holomorphy" => quadric_holomorphy @ 1e-8,
            "f-image-unimodular" => f_image_unimodular @ 1e-10,
            "f-slice-trace-free" => f_slice_trace_free @ 1e-12,
            "x3-sl2-isometry" => x3_sl2_isometry @ 1e-9,
        ],
        Suite::RotpiCover => checks![suite;
            "rotpi-membership" => rotpi_membership @ 1e-10,
            "rotpi-fixes-endpoints" => rotpi_fixes_endpoints @ 1e-10,
            "rotpi-equivariance" => rotpi_equivariance @ 1e-9,
            "rotpi-reversal" => rotpi_reversal @ 1e-12,
            "rotpi-local-isometry" => rotpi_local_isometry @ 1e-7,
            "rotpi-infinite-endpoint" => rotpi_infinite_endpoint @ 1e-12,
            "x2-chain-isometry" => x2_chain_isometry @ 1e-8,
        ],
        Suite::SymmetricScaling => checks![suite;
            "h3-action-isometry" => h3_action_isometry @ 1e-8,
            "h3-action-closed-form" => h3_action_closed_form @ 1e-12,
            "beta-equivariance" => beta_equivariance @ 1e-10,
            "beta-stabilizer" => beta_stabilizer @ 1e-9,
            "cartan-brackets" => cartan_brackets @ 1e-12,
            "cartan-reconstruction" => cartan_reconstruction @ 1e-13,
            "m1-positive-definite" => m1_positive_definite @ 1e-14,
            "beta-ad-equivariance" => beta_ad_equivariance @ 1e-8,
            "scaling-h3" => scaling_h3 @ 1e-6,
            "scaling-g" => scaling_g @ 1e-6,
            "scaling-base-norm" => scaling_base_norm @ 1e-9,
            "metric-well-posedness" => metric_well_posedness @ 1e-8,
        ],
        Suite::SymmetricCurvature => checks![suite;
            "h3-curvature" => h3_curvature @ 1e-7,
            "curvature-formula-h3" => curvature_formula_h3 @ 1e-6,
            "curvature-formula-g" => curvature_formula_g @ 1e-6,
            "curvature-formula-antisymmetry" => curvature_formula_antisymmetry @ 1e-8,
            "g1-curvature-minus-four" => g1_minus_four @ 1e-5,
            "g2-curvature-minus-four" => g2_minus_four @ 1e-5,
            "curvature-chain" => curvature_chain_check @ 1e-6,
        ],
        Suite::All => Suite::CONCRETE.iter().flat_map(|s| checks_for(*s)).collect(),
    }
}
