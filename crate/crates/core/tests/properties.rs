use std::sync::Arc;

use ftl_arena::adversaries::SourceSpec;
use ftl_arena::engine::run_game;
use ftl_arena::learners::{AbProd, AbProdParams, Ftl, Ftrl, LearnerKind, LearnerSpec, OnlineLearner};
use ftl_arena::{ConstraintSet, Vector};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const EPS: f64 = 1e-9;

fn vec_strategy(d: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-5.0..5.0f64, d).prop_map(Vector::from_vec)
}

/// Symmetric positive definite `Q` with eigenvalues in `[0.2, 5]`.
fn spd(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(-1.0..1.0f64, d * d), prop::collection::vec(0.2..5.0f64, d)).prop_filter_map(
        "full rank",
        move |(a, eig)| {
            let a = DMatrix::from_vec(d, d, a);
            let qr = a.qr();
            let r = qr.r();
            if (0..d).any(|i| r[(i, i)].abs() < 1e-3) {
                return None;
            }
            let u = qr.q();
            let q = &u * DMatrix::from_diagonal(&DVector::from_vec(eig)) * u.transpose();
            Some((&q + q.transpose()) * 0.5)
        },
    )
}

fn any_set() -> impl Strategy<Value = ConstraintSet> {
    prop_oneof![
        (0.2..3.0f64).prop_map(|r| ConstraintSet::ball(r, 3).unwrap()),
        spd(3).prop_map(|q| ConstraintSet::ellipsoid(q).unwrap()),
        Just(ConstraintSet::simplex(3).unwrap()),
        prop::collection::vec(vec_strategy(3), 4..8)
            .prop_filter_map("polytope", |v| ConstraintSet::polytope(v).ok()),
    ]
}

fn smooth_set() -> impl Strategy<Value = ConstraintSet> {
    prop_oneof![
        (0.2..3.0f64).prop_map(|r| ConstraintSet::ball(r, 3).unwrap()),
        spd(3).prop_map(|q| ConstraintSet::ellipsoid(q).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn support_is_positively_homogeneous(set in any_set(), theta in vec_strategy(3), c in 0.01..50.0f64) {
        let a = set.support(&(&theta * c)).unwrap().value;
        let b = c * set.support(&theta).unwrap().value;
        prop_assert!((a - b).abs() <= EPS * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn support_is_subadditive(set in any_set(), x in vec_strategy(3), y in vec_strategy(3)) {
        let lhs = set.support(&(&x + &y)).unwrap().value;
        let rhs = set.support(&x).unwrap().value + set.support(&y).unwrap().value;
        prop_assert!(lhs <= rhs + EPS * (1.0 + rhs.abs()));
    }

    #[test]
    fn maximizer_attains_the_support_and_lies_in_the_set(set in any_set(), theta in vec_strategy(3)) {
        let s = set.support(&theta).unwrap();
        prop_assert!(set.contains(&s.maximizer));
        prop_assert!((s.maximizer.dot(&theta) - s.value).abs() <= EPS * (1.0 + s.value.abs()));
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(set in smooth_set(), x in vec_strategy(3), y in vec_strategy(3)) {
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        prop_assert!(set.contains(&px));
        let ppx = set.project(&px).unwrap();
        prop_assert!((ppx - &px).norm() <= 1e-7 * (1.0 + px.norm()));
        prop_assert!((px - py).norm() <= (x - y).norm() + 1e-7);
    }

    #[test]
    fn ftl_is_invariant_to_loss_scaling(set in smooth_set(), seed in any::<u64>(), c in 0.05..20.0f64) {
        let set = Arc::new(set);
        let mut rng_src = SourceSpec::stochastic(0.2).build(3, seed, 0).unwrap();
        let fs: Vec<Vector> = (0..30).map(|_| rng_src.next_loss()).collect();
        let (mut a, mut b) = (Ftl::new(set.clone()), Ftl::new(set.clone()));
        for f in &fs {
            let (wa, wb) = (a.predict().unwrap(), b.predict().unwrap());
            prop_assert!((wa - wb).norm() <= 1e-9);
            a.observe(f).unwrap();
            b.observe(&(f * c)).unwrap();
        }
    }

    #[test]
    fn learners_stay_in_the_set(set in smooth_set(), seed in any::<u64>(), kind in prop_oneof![
        Just(LearnerKind::Ftl), Just(LearnerKind::Ftrl), Just(LearnerKind::Abprod)
    ]) {
        let set = Arc::new(set);
        let source = SourceSpec::stochastic(0.1);
        let m = source.declared_bound(3).unwrap();
        let mut l = LearnerSpec::new(kind).build(&set, Some(60), m).unwrap();
        let mut src = source.build(3, seed, 0).unwrap();
        let trace = run_game(l.as_mut(), &mut src, 60, false).unwrap();
        for r in &trace.rounds {
            prop_assert!(set.contains(&r.w), "{:?} left the set", kind);
        }
    }

    #[test]
    fn abprod_mixing_stays_strictly_inside_unit_interval(seed in any::<u64>(), l in 0.0..0.5f64) {
        let set = Arc::new(ConstraintSet::ball(1.0, 3).unwrap());
        let n = 200;
        let a = Box::new(Ftl::new(set.clone()));
        let b = Box::new(Ftrl::new(set.clone()).unwrap());
        let mut ab = AbProd::new(a, b, set.clone(), n, 1.0 + l, AbProdParams::default()).unwrap();
        let mut src = SourceSpec::stochastic(l).build(3, seed, 0).unwrap();
        for _ in 0..n {
            ab.predict().unwrap();
            let f = src.next_loss();
            ab.observe(&f).unwrap();
            let alpha = ab.mixing();
            prop_assert!(ab.weight_a() > 0.0 && alpha > 0.0 && alpha < 1.0, "alpha {alpha}");
        }
    }
}
