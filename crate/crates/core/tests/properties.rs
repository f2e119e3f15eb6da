//! Property tests for the algebraic layer: structural identities that must
//! hold for arbitrary inputs, not just the seeded samples of the check
//! suite.

use liepoisson::algebra::{
    bracket_so3, compose_se3, exp_so3, hat, vee, Se3Element, ROTATION_TOL,
};
use liepoisson::poisson::{
    casimirs_se3, casimirs_so3, lp_bracket_se3, lp_bracket_so3, BracketSign, Se3Dual, SmoothFn,
};
use liepoisson::{
    integrate_reduced, HeavyTopRotorParams, IntegratorSpec, ReducedState, RigidBodyParams,
    RigidBodyRotorParams, SystemDef, Vec3,
};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-5.0f64..5.0).prop_map(|[x, y, z]| Vec3::new(x, y, z))
}

fn inertia() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(0.1f64..10.0).prop_map(|[x, y, z]| Vec3::new(x, y, z))
}

fn unit_axis() -> impl Strategy<Value = Vec3> {
    vec3()
        .prop_filter("axis away from zero", |v| v.norm() > 0.3)
        .prop_map(|v| v / v.norm())
}

proptest! {
    #[test]
    fn hat_vee_round_trips(v in vec3()) {
        let m = hat(&v);
        prop_assert!((m + m.transpose()).amax() == 0.0);
        prop_assert_eq!(vee(&m).unwrap(), v);
    }

    #[test]
    fn hat_encodes_the_cross_product(a in vec3(), b in vec3()) {
        prop_assert!((hat(&a) * b - a.cross(&b)).amax() < 1e-12);
        prop_assert!((bracket_so3(&a, &b) - a.cross(&b)).amax() == 0.0);
    }

    #[test]
    fn exp_so3_lands_on_rotations(xi in vec3()) {
        let r = exp_so3(&xi);
        prop_assert!(r.defect() <= ROTATION_TOL);
    }

    #[test]
    fn exp_so3_is_additive_along_an_axis(axis in unit_axis(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lhs = exp_so3(&(a * axis)).compose(&exp_so3(&(b * axis)));
        let rhs = exp_so3(&((a + b) * axis));
        prop_assert!((lhs.matrix() - rhs.matrix()).amax() < 1e-12);
    }

    #[test]
    fn rotations_preserve_lengths_and_casimirs(xi in vec3(), v in vec3()) {
        let r = exp_so3(&xi);
        prop_assert!((r.apply(&v).norm() - v.norm()).abs() < 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn so3_bracket_is_antisymmetric_pointwise(p in vec3(), a in vec3(), b in vec3()) {
        let f = SmoothFn::linear(a);
        let g = SmoothFn::linear(b);
        let fg = lp_bracket_so3(&f, &g, &p, BracketSign::Minus);
        let gf = lp_bracket_so3(&g, &f, &p, BracketSign::Minus);
        prop_assert!(fg + gf == 0.0);
    }

    #[test]
    fn casimirs_commute_with_everything(p in vec3(), gp in vec3(), a in vec3(), b in vec3()) {
        for c in casimirs_so3() {
            let f = SmoothFn::linear(a);
            let r = lp_bracket_so3(&c, &f, &p, BracketSign::Minus);
            prop_assert!(r.abs() < 1e-12 * (1.0 + p.norm_squared() * a.norm()));
        }
        let q = Se3Dual::new(p, gp);
        for c in casimirs_se3() {
            let f = SmoothFn::linear(Se3Dual::new(a, b));
            let r = lp_bracket_se3(&c, &f, &q, BracketSign::Minus);
            let scale = 1.0 + (p.norm() + gp.norm()).powi(2) * (a.norm() + b.norm());
            prop_assert!(r.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn rigid_body_legendre_round_trips(i in inertia(), omega in vec3()) {
        let params = RigidBodyParams::new(i).unwrap();
        let back = params.velocity(&params.momentum(&omega));
        prop_assert!((back - omega).amax() < 1e-12 * (1.0 + omega.amax()));
    }

    #[test]
    fn rotor_legendre_round_trips(li in inertia(), ji in inertia(), omega in vec3(), ad in vec3()) {
        let params = RigidBodyRotorParams::new(li, ji).unwrap();
        let (pi, ell) = params.momenta(&omega, &ad);
        let (om2, ad2) = params.velocities(&pi, &ell);
        prop_assert!((om2 - omega).amax() < 1e-11 * (1.0 + omega.amax()));
        prop_assert!((ad2 - ad).amax() < 1e-11 * (1.0 + ad.amax() + omega.amax()));
    }

    #[test]
    fn heavy_top_rotor_legendre_round_trips(
        li in inertia(),
        j1 in 0.1f64..10.0,
        j2 in 0.1f64..10.0,
        omega in vec3(),
        td in prop::array::uniform2(-5.0f64..5.0),
    ) {
        let params = HeavyTopRotorParams::new(li, [j1, j2], 1.0, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let (pi, ell) = params.momenta(&omega, &td);
        let (om2, td2) = params.velocities(&pi, &ell);
        prop_assert!((om2 - omega).amax() < 1e-11 * (1.0 + omega.amax()));
        prop_assert!((td2[0] - td[0]).abs() < 1e-11 * (1.0 + td[0].abs() + omega.amax()));
        prop_assert!((td2[1] - td[1]).abs() < 1e-11 * (1.0 + td[1].abs() + omega.amax()));
    }

    #[test]
    fn se3_composition_is_associative(x1 in vec3(), x2 in vec3(), x3 in vec3(), v1 in vec3(), v2 in vec3(), v3 in vec3()) {
        let g1 = Se3Element { rot: exp_so3(&x1), trans: v1 };
        let g2 = Se3Element { rot: exp_so3(&x2), trans: v2 };
        let g3 = Se3Element { rot: exp_so3(&x3), trans: v3 };
        let lhs = compose_se3(&compose_se3(&g1, &g2), &g3);
        let rhs = compose_se3(&g1, &compose_se3(&g2, &g3));
        prop_assert!((lhs.rot.matrix() - rhs.rot.matrix()).amax() < 1e-12);
        prop_assert!((lhs.trans - rhs.trans).amax() < 1e-11 * (1.0 + v1.norm() + v2.norm() + v3.norm()));
    }

    #[test]
    fn splitting_preserves_heavy_top_casimirs(
        pi in vec3(),
        gamma in vec3(),
        h in 1e-4f64..0.05,
    ) {
        let sys = SystemDef::HeavyTop(heavy_top_params());
        let x0 = ReducedState::HeavyTop { pi, gamma };
        let spec = IntegratorSpec::splitting(h, 20.0 * h);
        let traj = integrate_reduced(&sys, None, &x0, &spec).unwrap();
        let c1_0 = gamma.norm_squared();
        let c2_0 = pi.dot(&gamma);
        let scale = 1.0 + c1_0.abs().max(c2_0.abs());
        for s in &traj.states {
            if let ReducedState::HeavyTop { pi: p, gamma: g } = s {
                prop_assert!((g.norm_squared() - c1_0).abs() < 1e-12 * scale);
                prop_assert!((p.dot(g) - c2_0).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn vee_rejects_non_skew_matrices(v in vec3(), bump in 1e-6f64..1.0) {
        let mut m = hat(&v);
        m[(0, 0)] += bump;
        prop_assert!(vee(&m).is_err());
    }
}

fn heavy_top_params() -> liepoisson::HeavyTopParams {
    liepoisson::HeavyTopParams::new(Vec3::new(1.0, 1.5, 2.0), 2.0, Vec3::new(0.0, 0.0, 1.0))
        .unwrap()
}
