use std::f64::consts::PI;

use gelfand_core::algebra::{default_time_step, h22_norm, sobolev_norm, wave_trace, FourierVector};
use gelfand_core::forward::{build_disk_model, build_interval_model, make_partition, ModelManifold, SpectralDataset};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

const J: usize = 10;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, J)
}

fn build(disk: bool) -> (ModelManifold, SpectralDataset) {
    if disk {
        build_disk_model(1.0, J).unwrap()
    } else {
        build_interval_model(PI, J).unwrap()
    }
}

fn model(disk: bool) -> SpectralDataset {
    build(disk).1
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn wave_trace_is_linear(v in coeffs(), w in coeffs(), a in -2.0..2.0f64, b in -2.0..2.0f64, disk in any::<bool>()) {
        let ds = model(disk);
        let dt = default_time_step(&ds, J);
        let mix = FourierVector::new(v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect());
        let fv = wave_trace(&FourierVector::new(v), &ds, 1.0, dt).unwrap();
        let fw = wave_trace(&FourierVector::new(w), &ds, 1.0, dt).unwrap();
        let fm = wave_trace(&mix, &ds, 1.0, dt).unwrap();
        let lin = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect::<Vec<_>>();
        prop_assert!(max_abs_diff(&fm.values, &lin(&fv.values, &fw.values)) < 1e-12);
        prop_assert!(max_abs_diff(&fm.dt2, &lin(&fv.dt2, &fw.dt2)) < 1e-12 * (1.0 + ds.modes[J - 1].lambda));
        if let (Some(m), Some(x), Some(y)) = (&fm.d2, &fv.d2, &fw.d2) {
            prop_assert!(max_abs_diff(m, &lin(x, y)) < 1e-11 * (1.0 + ds.modes[J - 1].lambda));
        }
    }

    #[test]
    fn traces_are_even_in_time(v in coeffs(), disk in any::<bool>()) {
        let ds = model(disk);
        let f = wave_trace(&FourierVector::new(v), &ds, 1.5, default_time_step(&ds, J)).unwrap();
        let half = (f.steps() / 2) as i64;
        let s = f.steps();
        for node in 0..f.nodes() {
            for m in 1..=half {
                prop_assert!((f.value(node, m) - f.value(node, -m)).abs() < 1e-12);
                let (p, q) = (node * s + (half + m) as usize, node * s + (half - m) as usize);
                prop_assert!((f.dt1[p] + f.dt1[q]).abs() < 1e-10);
                prop_assert!((f.dt2[p] - f.dt2[q]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn h22_converges_when_time_step_halves(v in coeffs(), a in 0.3..1.5f64, disk in any::<bool>()) {
        let (m, ds) = build(disk);
        let part = make_partition(&m, 0.9).unwrap();
        let dt = PI / (8.0 * ds.modes[J - 1].lambda.sqrt());
        let v = FourierVector::new(v);
        let coarse = wave_trace(&v, &ds, a, dt).unwrap();
        let fine = wave_trace(&v, &ds, a, dt / 2.0).unwrap();
        for k in 0..=part.len() {
            let nodes = part.subset_nodes(k);
            let (c, f) = (h22_norm(&coarse, &nodes, a).unwrap(), h22_norm(&fine, &nodes, a).unwrap());
            prop_assert!((c - f).abs() <= 0.01 * f.max(1e-300), "k {} coarse {} fine {}", k, c, f);
        }
    }

    #[test]
    fn sobolev_norm_grows_with_s(v in coeffs(), s1 in 1.0..3.0f64, s2 in 1.0..3.0f64) {
        let ds = model(false);
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let v = FourierVector::new(v);
        prop_assert!(sobolev_norm(&v, &ds, lo).unwrap() <= sobolev_norm(&v, &ds, hi).unwrap() * (1.0 + 1e-15));
    }
}
