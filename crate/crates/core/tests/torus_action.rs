use std::f64::consts::PI;

use proptest::prelude::*;
use sobolev_lab::diffeo::{
    action_partial, builtin_family, compose, jacobian_field, DiffeoFamily, FamilyKind, FamilyParams, GroupParam,
};
use sobolev_lab::norms::{norm_power, sobolev_norm};
use sobolev_lab::probe::derivative_check;
use sobolev_lab::synth::synth_field;
use sobolev_lab::{DiscreteField, GridSpec, SobolevIndex};

fn family(kind: FamilyKind) -> sobolev_lab::diffeo::BuiltinFamily {
    builtin_family(kind, &FamilyParams::default()).unwrap()
}

#[test]
fn translation_by_pi_flips_a_sine() {
    let grid = GridSpec::torus(32).unwrap();
    let fam = family(FamilyKind::Translation);
    let s = DiscreteField::scalar_from_fn(grid, |x| x[0].sin());
    let a = GroupParam::for_family(&fam, vec![PI, 0.0]).unwrap();
    let out = compose(&s, &fam, &a).unwrap();
    assert!(out.max_abs_diff(&s.scale(-1.0)).unwrap() <= 1e-13);
    let zero = GroupParam::zero(&fam);
    assert_eq!(compose(&s, &fam, &zero).unwrap(), s);
}

#[test]
fn action_partial_of_a_sine_is_a_cosine() {
    let grid = GridSpec::torus(32).unwrap();
    let fam = family(FamilyKind::Translation);
    let s = DiscreteField::scalar_from_fn(grid, |x| x[0].sin());
    let d = action_partial(&s, &fam, &GroupParam::zero(&fam), 0).unwrap();
    let c = DiscreteField::scalar_from_fn(grid, |x| x[0].cos());
    assert!(d.max_abs_diff(&c).unwrap() <= 1e-12);
}

#[test]
fn first_derivative_residual_is_second_order_for_smooth_fields() {
    let grid = GridSpec::torus(64).unwrap();
    let idx = SobolevIndex::unchecked(3, 2.0).unwrap();
    for kind in [FamilyKind::Translation, FamilyKind::ShearBump] {
        let fam = family(kind);
        let eta = synth_field(9.0, 4, grid, 2).unwrap();
        let r = derivative_check(&fam, &eta, &GroupParam::zero(&fam), 0, &idx, 1, &[1e-2, 3e-3, 1e-3]).unwrap();
        assert!(r.order >= 1.8, "{kind:?}: {}", r.order);
    }
}

#[test]
fn shear_bump_jacobians_stay_orientation_preserving() {
    let grid = GridSpec::torus(32).unwrap();
    let fam = family(FamilyKind::ShearBump);
    let a = GroupParam::for_family(&fam, vec![0.6 * fam.radius(), 0.0]).unwrap();
    let jac = jacobian_field(&fam, &a, &grid).unwrap();
    assert!(jac.values().iter().all(|v| v.is_finite()));
    for x in grid.points().iter().step_by(7) {
        let j = fam.jacobian(a.coords(), *x);
        assert!(j[0][0] * j[1][1] - j[0][1] * j[1][0] > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translations_preserve_norms(a0 in -3.0f64..3.0, a1 in -3.0f64..3.0, seed in 0u64..1000) {
        let grid = GridSpec::torus(32).unwrap();
        let fam = family(FamilyKind::Translation);
        let eta = synth_field(6.0, seed, grid, 2).unwrap();
        let a = GroupParam::for_family(&fam, vec![a0, a1]).unwrap();
        let moved = compose(&eta, &fam, &a).unwrap();
        let idx = SobolevIndex::new(2, 4.0).unwrap();
        let (n0, n1) = (norm_power(&eta, &idx).unwrap(), norm_power(&moved, &idx).unwrap());
        prop_assert!((n0 - n1).abs() <= 1e-10 * n0);
    }

    #[test]
    fn composition_is_linear(s in -2.0f64..2.0, seed in 0u64..1000) {
        let grid = GridSpec::torus(32).unwrap();
        let fam = family(FamilyKind::ShearBump);
        let a = GroupParam::for_family(&fam, vec![0.2, -0.1]).unwrap();
        let (f, g) = (synth_field(6.0, seed, grid, 2).unwrap(), synth_field(6.0, seed + 1, grid, 2).unwrap());
        let lhs = compose(&f.axpy(s, &g).unwrap(), &fam, &a).unwrap();
        let rhs = compose(&f, &fam, &a).unwrap().axpy(s, &compose(&g, &fam, &a).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-11);
    }

    #[test]
    fn norms_are_homogeneous(c in -3.0f64..3.0, seed in 0u64..1000) {
        let grid = GridSpec::torus(32).unwrap();
        let f = synth_field(5.0, seed, grid, 2).unwrap();
        let idx = SobolevIndex::unchecked(1, 4.0).unwrap();
        let n = sobolev_norm(&f, &idx, 0).unwrap();
        prop_assert!((sobolev_norm(&f.scale(c), &idx, 0).unwrap() - c.abs() * n).abs() <= 1e-12 * n.max(1.0));
    }
}
