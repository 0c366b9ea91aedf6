use gelfand_core::budget::{cascade, epsilon2, GeometryConstants};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn geometry(n: usize) -> GeometryConstants {
    if n == 1 {
        GeometryConstants::new(1, std::f64::consts::PI, std::f64::consts::PI, 2.0).unwrap()
    } else {
        GeometryConstants::new(2, 2.0, std::f64::consts::PI, 2.0 * std::f64::consts::PI).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn epsilon2_increases_with_eps1(h in 1e-4..0.5f64, gamma in 1e-3..1.0f64, e in 1e-4..1.0f64, grow in 1.001..10.0f64, n in 1usize..=2) {
        let gc = geometry(n);
        let a = epsilon2(h, 1.0, gamma, e, &gc).unwrap();
        let b = epsilon2(h, 1.0, gamma, e * grow, &gc).unwrap();
        prop_assert!(b.ln > a.ln, "{:?} {:?}", a, b);
    }

    #[test]
    fn epsilon2_increases_as_gamma_shrinks(h in 1e-4..0.5f64, gamma in 1e-3..1.0f64, e in 1e-4..1.0f64, shrink in 1.001..10.0f64, n in 1usize..=2) {
        let gc = geometry(n);
        let a = epsilon2(h, 1.0, gamma, e, &gc).unwrap();
        let b = epsilon2(h, 1.0, gamma / shrink, e, &gc).unwrap();
        prop_assert!(b.ln > a.ln, "{:?} {:?}", a, b);
    }

    #[test]
    fn cascade_logs_are_finite(eta in 0.01..0.99f64, n in 1usize..=2) {
        let c = cascade(eta, &geometry(n)).unwrap();
        for v in [c.ln.eps_star, c.ln.eps, c.ln.gamma, c.ln.eps2_0, c.ln.h] {
            prop_assert!(v.is_finite());
        }
        for m in [c.ln.eps1, c.ln.lambda_j, c.ln.j, c.ln.delta] {
            prop_assert!(m.top.is_finite() && m.top >= 0.0 && m.sign != 0, "{:?}", m);
        }
        prop_assert!(c.ln.delta.sign < 0 && c.ln.eps1.sign < 0);
        prop_assert!(c.ln.lambda_j.sign > 0 && c.ln.j.sign > 0);
    }
}
