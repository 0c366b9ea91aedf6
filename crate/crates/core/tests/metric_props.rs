use gelfand_core::metric::{gh_bound, gh_exact, hausdorff_linf, FiniteMetricSpace};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn points(max: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 1..=max)
}

fn space(vecs: &[Vec<f64>]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_linf((0..vecs.len()).map(|i| i.to_string()).collect(), vecs)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hausdorff_is_symmetric(a in points(12, 3), b in points(12, 3)) {
        prop_assert_eq!(hausdorff_linf(&a, &b).unwrap(), hausdorff_linf(&b, &a).unwrap());
    }

    #[test]
    fn hausdorff_vanishes_exactly_on_equal_sets(a in points(12, 3), b in points(12, 3)) {
        prop_assert_eq!(hausdorff_linf(&a, &a).unwrap(), 0.0);
        let mut shuffled = a.clone();
        shuffled.reverse();
        shuffled.push(a[0].clone());
        prop_assert_eq!(hausdorff_linf(&a, &shuffled).unwrap(), 0.0);
        let same = a.iter().all(|x| b.contains(x)) && b.iter().all(|y| a.contains(y));
        prop_assert_eq!(hausdorff_linf(&a, &b).unwrap() == 0.0, same);
    }

    #[test]
    fn gh_exact_axioms_and_bracket(a in points(6, 2), b in points(6, 2), seed in any::<u64>()) {
        let (x, y) = (space(&a), space(&b));
        let xy = gh_exact(&x, &y).unwrap();
        prop_assert_eq!(xy, gh_exact(&y, &x).unwrap());
        prop_assert_eq!(gh_exact(&x, &x).unwrap(), 0.0);
        prop_assert!(xy >= (x.diameter() - y.diameter()).abs() / 2.0);
        let bound = gh_bound(&x, &y, seed).unwrap();
        prop_assert!(bound.lower <= xy && xy <= bound.upper, "{:?} vs {}", bound, xy);
    }
}
