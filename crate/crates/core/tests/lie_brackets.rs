mod common;

use common::{rel_err, Frozen};
use proptest::prelude::*;
use soaring::dynamics::{BirdWindParams, ForceModel, WindCouplingSign};
use soaring::lie::fixtures::{self, RandomSmoothField};
use soaring::lie::{
    bad_bracket_check, larc_rank, lie_bracket, nested_bracket, BracketOptions, ConstantField, DiffScheme,
    FdScheme, FieldSet, FormalBracket, JacobianOptions, LarcOptions,
};

const X0: [f64; 7] = [0.0, 0.0, 10.0, 14.0, 0.6, 1.4, -0.1];

fn frozen_fields(x: &[f64], sign: WindCouplingSign) -> FieldSet {
    let p = BirdWindParams::default();
    let forces = ForceModel::frozen_at(x[3], &p).unwrap();
    fixtures::soaring_fields(p, sign, forces).unwrap()
}

fn f_b() -> FormalBracket {
    FormalBracket::ad(1, 1)
}

#[test]
fn closed_form_brackets_at_initial_point() {
    let fields = frozen_fields(&X0, WindCouplingSign::Positive);
    let oracle = Frozen::at(X0[3], BirdWindParams::default().cl_fixed);
    let opts = BracketOptions::default();
    let v1 = nested_bracket(&f_b(), &fields, &X0, &opts).unwrap();
    assert!(rel_err(&v1, &oracle.f_b(&X0)) < 1e-12);
    let v2 = nested_bracket(&FormalBracket::ad(2, 1), &fields, &X0, &opts).unwrap();
    let e = rel_err(&v2, &oracle.f_f_b(&X0));
    assert!(e < 1e-10, "relative error {e:e}");
}

#[test]
fn closed_form_brackets_at_perturbed_points() {
    let mut x = X0;
    for i in 0..20 {
        let t = i as f64;
        x[0] = 3.0 * (0.7 * t).sin();
        x[2] = 10.0 + 6.0 * (1.3 * t).sin();
        x[3] = 14.0 + 5.0 * (0.9 * t).cos();
        x[4] = 0.6 * (1.1 * t + 0.4).sin();
        x[5] = 1.4 + 2.0 * (0.5 * t).sin();
        x[6] = -0.1 + 0.8 * (1.7 * t).cos();
        let fields = frozen_fields(&x, WindCouplingSign::Positive);
        let oracle = Frozen::at(x[3], BirdWindParams::default().cl_fixed);
        let v = nested_bracket(&FormalBracket::ad(2, 1), &fields, &x, &BracketOptions::default()).unwrap();
        let e = rel_err(&v, &oracle.f_f_b(&x));
        assert!(e < 1e-10, "state {x:?}: relative error {e:e}");
    }
}

#[test]
fn taylor_and_finite_differences_agree_to_depth_six() {
    let p = BirdWindParams::default();
    let fields = fixtures::soaring_fields(p, WindCouplingSign::Positive, ForceModel::AirspeedDependent).unwrap();
    let fd = BracketOptions {
        scheme: DiffScheme::FiniteDifference(FdScheme::default()),
        ..Default::default()
    };
    for b in fixtures::soaring_completed_brackets() {
        let a = nested_bracket(&b, &fields, &X0, &BracketOptions::default()).unwrap();
        let c = nested_bracket(&b, &fields, &X0, &fd).unwrap();
        assert!(rel_err(&c, &a) < 1e-4, "{b}: {:e}", rel_err(&c, &a));
    }
}

#[test]
fn soaring_rank_and_bad_bracket() {
    let p = BirdWindParams::default();
    let fields = fixtures::soaring_fields(p, WindCouplingSign::Positive, ForceModel::AirspeedDependent).unwrap();
    let opts = LarcOptions::default();
    let full = larc_rank(&fixtures::soaring_completed_brackets(), &fields, &X0, &opts).unwrap();
    assert_eq!(full.rank, 7);
    assert!(full.full_rank);
    let printed = larc_rank(&fixtures::soaring_printed_brackets(), &fields, &X0, &opts).unwrap();
    assert_eq!(printed.rank, 6);

    let bad = fixtures::soaring_bad_bracket();
    let s = bad_bracket_check(&fields, &X0, &bad, &fixtures::soaring_completed_brackets(), &opts).unwrap();
    assert!(s.nonvanishing && s.in_span && !s.required_for_span);
    assert!((s.vector[4] - 0.457_859).abs() < 1e-5 && (s.vector[5] + 0.055_661_1).abs() < 1e-6);
    let s = bad_bracket_check(&fields, &X0, &bad, &fixtures::soaring_printed_brackets(), &opts).unwrap();
    assert!(!s.in_span && s.required_for_span);
}

#[test]
fn frozen_forces_singular_values() {
    let fields = frozen_fields(&X0, WindCouplingSign::Positive);
    let r = larc_rank(&fixtures::soaring_completed_brackets(), &fields, &X0, &LarcOptions::default()).unwrap();
    let expect = [1.6338, 1.3721, 1.0021, 1.0, 0.6646, 0.04793, 2.796e-4];
    for (a, b) in r.singular_values.iter().zip(expect) {
        assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
    }
}

#[test]
fn ground_robot_is_full_rank_everywhere() {
    let fields = fixtures::ground_robot_fields().unwrap();
    for th in [0.0, 0.7, 2.0, -3.0] {
        let r = larc_rank(&fixtures::ground_robot_brackets(), &fields, &[1.0, -2.0, th], &LarcOptions::default())
            .unwrap();
        assert_eq!(r.rank, 3);
        let v = &r.vectors[2];
        // [b1, b2] = (sin θ, −cos θ, 0)
        assert!((v[0] - th.sin()).abs() < 1e-12 && (v[1] + th.cos()).abs() < 1e-12);
    }
}

#[test]
fn obstruction_example() {
    let fields = fixtures::obstruction_fields().unwrap();
    let opts = BracketOptions::default();
    let fb = nested_bracket(&f_b(), &fields, &[0.0, 0.0], &opts).unwrap();
    assert_eq!(fb, vec![0.0, 0.0]);
    let bad = nested_bracket(&fixtures::obstruction_bad_bracket(), &fields, &[0.0, 0.0], &opts).unwrap();
    assert!((bad[0]).abs() < 1e-12 && (bad[1] - 2.0).abs() < 1e-12);
    let r = larc_rank(&fixtures::obstruction_brackets(), &fields, &[0.0, 0.0], &LarcOptions::default()).unwrap();
    assert_eq!((r.rank, r.rank_without_bad), (2, 1));
}

#[test]
fn zero_field_gives_rank_zero() {
    let fields = FieldSet::new(Box::new(ConstantField(vec![0.0; 3])), vec![Box::new(ConstantField(vec![0.0; 3]))])
        .unwrap();
    let r = larc_rank(&[FormalBracket::Control(1), f_b()], &fields, &[0.0; 3], &LarcOptions::default()).unwrap();
    assert_eq!(r.rank, 0);
    assert!(!r.diagnostics.is_empty());
}

#[test]
fn depth_and_dimension_errors() {
    let fields = fixtures::obstruction_fields().unwrap();
    let deep = FormalBracket::ad(6, 1);
    assert!(nested_bracket(&deep, &fields, &[0.0, 0.0], &BracketOptions::default()).is_err());
    assert!(nested_bracket(&f_b(), &fields, &[0.0; 3], &BracketOptions::default()).is_err());
    assert!(nested_bracket(&FormalBracket::Control(2), &fields, &[0.0; 2], &BracketOptions::default()).is_err());
}

fn smooth(n: usize, seed: u64) -> FieldSet {
    FieldSet::new(
        Box::new(RandomSmoothField::seeded(n, seed)),
        vec![
            Box::new(RandomSmoothField::seeded(n, seed.wrapping_add(1))),
            Box::new(RandomSmoothField::seeded(n, seed.wrapping_add(2))),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antisymmetry(seed in 0u64..1000, x in prop::collection::vec(-1.5f64..1.5, 3)) {
        let fields = smooth(3, seed);
        let opts = BracketOptions::default();
        let ab = FormalBracket::bracket(FormalBracket::Drift, FormalBracket::Control(1));
        let ba = FormalBracket::bracket(FormalBracket::Control(1), FormalBracket::Drift);
        let u = nested_bracket(&ab, &fields, &x, &opts).unwrap();
        let v = nested_bracket(&ba, &fields, &x, &opts).unwrap();
        for (p, q) in u.iter().zip(&v) {
            prop_assert!((p + q).abs() < 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn jacobi_identity(seed in 0u64..1000, x in prop::collection::vec(-1.5f64..1.5, 3)) {
        let fields = smooth(3, seed);
        let opts = BracketOptions::default();
        let (f, b1, b2) = (FormalBracket::Drift, FormalBracket::Control(1), FormalBracket::Control(2));
        let br = FormalBracket::bracket;
        let terms = [
            br(f.clone(), br(b1.clone(), b2.clone())),
            br(b1.clone(), br(b2.clone(), f.clone())),
            br(b2, br(f, b1)),
        ];
        let vs: Vec<Vec<f64>> = terms.iter().map(|t| nested_bracket(t, &fields, &x, &opts).unwrap()).collect();
        let scale: f64 = vs.iter().flatten().map(|c| c.abs()).fold(1.0, f64::max);
        for i in 0..3 {
            prop_assert!((vs[0][i] + vs[1][i] + vs[2][i]).abs() < 1e-11 * scale);
        }
    }

    #[test]
    fn taylor_matches_jacobian_bracket(seed in 0u64..1000, x in prop::collection::vec(-1.0f64..1.0, 4)) {
        let f = RandomSmoothField::seeded(4, seed);
        let g = RandomSmoothField::seeded(4, seed + 17);
        let fd = lie_bracket(&f, &g, &x, &JacobianOptions::default()).unwrap();
        let fields = FieldSet::new(Box::new(f), vec![Box::new(g)]).unwrap();
        let t = nested_bracket(&FormalBracket::ad(1, 1), &fields, &x, &BracketOptions::default()).unwrap();
        let scale: f64 = t.iter().map(|c| c.abs()).fold(1.0, f64::max);
        for (p, q) in t.iter().zip(&fd) {
            prop_assert!((p - q).abs() < 1e-6 * scale);
        }
    }
}
