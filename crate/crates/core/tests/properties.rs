use holoform::cx_linear::{bilinear_cn, f_map, f_map_inverse, mat2_bilinear, ComplexVec};
use holoform::geodesic_space::{g_action, mobius_apply, q_membership, rot_pi, BoundaryPoint, GeodesicLine};
use holoform::rng::SampleRng;
use holoform::sl2_lie::{adjoint, bracket, exp_sl2, hrm_metric, killing, psl_distance, PslElement, Sl2Vector};
use holoform::space_forms::quadric_from_direction;
use holoform::symmetric_spaces::{cartan_split, ALL_SPACES};
use num_complex::Complex64;
use proptest::prelude::*;

fn cx() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn sl2() -> impl Strategy<Value = Sl2Vector> {
    (cx(), cx(), cx()).prop_map(|(h, x, y)| Sl2Vector::from_coords(h, x, y))
}

fn psl() -> impl Strategy<Value = PslElement> {
    sl2().prop_map(|v| exp_sl2(&v.scale(0.4.into())))
}

fn cvec(n: usize) -> impl Strategy<Value = ComplexVec> {
    proptest::collection::vec(cx(), n).prop_map(|v| ComplexVec::new(v).unwrap())
}

fn line() -> impl Strategy<Value = GeodesicLine> {
    (cx(), cx()).prop_filter("separated endpoints", |(a, b)| (a - b).norm() > 0.2).prop_map(|(a, b)| GeodesicLine::finite(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bracket_is_antisymmetric(a in sl2(), b in sl2()) {
        prop_assert!(bracket(&a, &b).add(&bracket(&b, &a)).max_norm() < 1e-13);
    }

    #[test]
    fn killing_is_eight_times_metric(a in sl2(), b in sl2()) {
        prop_assert!((killing(&a, &b) - 8.0 * hrm_metric(&a, &b)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_preserves_metric(g in psl(), a in sl2(), b in sl2()) {
        let lhs = hrm_metric(&adjoint(&g, &a), &adjoint(&g, &b));
        prop_assert!((lhs - hrm_metric(&a, &b)).norm() < 1e-11 * (1.0 + hrm_metric(&a, &b).norm()));
    }

    #[test]
    fn psl_distance_ignores_sign(g in psl()) {
        prop_assert_eq!(psl_distance(&g, &g.neg()), 0.0);
    }

    #[test]
    fn f_map_is_an_isometry(u in cvec(4), v in cvec(4)) {
        let lhs = mat2_bilinear(&f_map(&u).unwrap(), &f_map(&v).unwrap());
        prop_assert!((lhs - bilinear_cn(&u, &v).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn f_map_inverts(u in cvec(4)) {
        let back = f_map_inverse(&f_map(&u).unwrap());
        prop_assert!((&back - &u).norm() < 1e-14);
    }

    #[test]
    fn rescaled_directions_land_on_quadric(w in cvec(3)) {
        prop_assume!(bilinear_cn(&w, &w).unwrap().norm() > 1e-3);
        prop_assert!(quadric_from_direction(&w).unwrap().residual() < 1e-12);
    }

    #[test]
    fn mobius_is_an_action(a in psl(), b in psl(), z in cx()) {
        let p = BoundaryPoint::Finite(z);
        let lhs = mobius_apply(&a.mul(&b), &p);
        let rhs = mobius_apply(&a, &mobius_apply(&b, &p));
        prop_assert!(lhs.chordal(&rhs) < 1e-12);
    }

    #[test]
    fn rot_pi_is_an_involution_in_q(l in line()) {
        let m = rot_pi(&l).unwrap();
        prop_assert!(q_membership(&m, 1e-10));
        prop_assert!(psl_distance(&m.mul(&m), &PslElement::identity()) < 1e-10);
    }

    #[test]
    fn rot_pi_is_equivariant(a in psl(), l in line()) {
        let lhs = rot_pi(&g_action(&a, &l)).unwrap();
        let rhs = a.mul(&rot_pi(&l).unwrap()).mul(&a.inverse());
        prop_assert!(psl_distance(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn cartan_parts_reassemble(v in sl2()) {
        for which in ALL_SPACES {
            let s = cartan_split(&v, which);
            prop_assert!(s.h_part.add(&s.m_part).sub(&v).max_norm() < 1e-13);
        }
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>()) {
        let mut a = SampleRng::for_stream(seed, "x");
        let mut b = SampleRng::for_stream(seed, "x");
        for _ in 0..8 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
