use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use gelfand_core::forward::{build_disk_model, make_partition};
use gelfand_core::slicing::{
    accept_candidates, build_rstar, build_rstar_naive, enumerate_betas, rstar_to_metric_space, BoundaryDistanceFn,
    ReconstructionParams, Route, SliceKey, SliceVolumes, TrueSlices,
};
use gelfand_core::Result;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Pseudo-random slice volumes in `[0, scale)`, fixed by the seed.
struct Hashed {
    seed: u64,
    scale: f64,
}

impl SliceVolumes for Hashed {
    fn slice_volumes(&self, keys: &[SliceKey], _budget: usize) -> Result<Vec<f64>> {
        Ok(keys
            .iter()
            .map(|k| {
                let mut h = DefaultHasher::new();
                self.seed.hash(&mut h);
                k.hash(&mut h);
                (h.finish() >> 11) as f64 / (1u64 << 53) as f64 * self.scale
            })
            .collect())
    }
}

const CELLS: usize = 2;

/// Interval-shaped parameters with both routes reachable.
fn params() -> ReconstructionParams {
    ReconstructionParams::new(1, 0.2, 2.0, 0, PI).unwrap()
}

fn value_set(fs: &[BoundaryDistanceFn]) -> BTreeSet<Vec<u64>> {
    fs.iter().map(|f| f.values.iter().map(|v| v.to_bits()).collect()).collect()
}

fn check_certificates(fs: &[BoundaryDistanceFn], p: &ReconstructionParams) {
    for f in fs {
        let levels = &f.beta[1..];
        match f.route {
            Route::Interior => {
                assert_eq!(f.beta[0], 0);
                assert!(levels.iter().all(|&b| b as f64 * p.eta > p.i0 / 2.0), "{f:?}");
            }
            Route::Boundary => {
                assert_eq!(f.beta[0], 1);
                let min = *levels.iter().min().unwrap();
                assert!(min as f64 * p.eta <= p.i0 / 2.0, "{f:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn factorized_build_matches_naive(seed in any::<u64>(), scale in 0.5..3.0f64) {
        let p = params();
        let src = Hashed { seed, scale: scale * p.epsilon };
        let fast = build_rstar(&src, CELLS, &p).unwrap();
        let slow = build_rstar_naive(&src, CELLS, &p).unwrap();
        prop_assert_eq!(fast.functions, slow.functions);
    }

    #[test]
    fn candidate_order_does_not_matter(seed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let p = params();
        let src = Hashed { seed, scale: 2.0 * p.epsilon };
        let cands: Vec<_> = enumerate_betas(&p, CELLS).collect();
        let mut shuffled = cands.clone();
        // Fisher-Yates driven by a splitmix sequence
        let mut s = shuffle_seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            shuffled.swap(i, ((z ^ (z >> 31)) % (i as u64 + 1)) as usize);
        }
        let a = accept_candidates(cands, &src, &p).unwrap();
        let b = accept_candidates(shuffled, &src, &p).unwrap();
        prop_assert_eq!(a.functions, b.functions);
    }

    #[test]
    fn stricter_threshold_gives_subset(seed in any::<u64>(), e1 in 0.05..0.5f64, e2 in 0.05..0.5f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let src = Hashed { seed, scale: 0.5 };
        let (mut pl, mut ph) = (params(), params());
        pl.epsilon = lo;
        ph.epsilon = hi;
        let loose = value_set(&build_rstar(&src, CELLS, &pl).unwrap().functions);
        let strict = value_set(&build_rstar(&src, CELLS, &ph).unwrap().functions);
        prop_assert!(strict.is_subset(&loose));
    }

    #[test]
    fn accepted_routes_carry_their_certificate(seed in any::<u64>()) {
        let p = params();
        let r = build_rstar(&Hashed { seed, scale: 2.0 * p.epsilon }, CELLS, &p).unwrap();
        check_certificates(&r.functions, &p);
    }

    #[test]
    fn reconstructed_space_is_a_metric(seed in any::<u64>()) {
        let p = params();
        let r = build_rstar(&Hashed { seed, scale: 2.0 * p.epsilon }, CELLS, &p).unwrap();
        prop_assume!(!r.functions.is_empty());
        let x = rstar_to_metric_space(&r.functions, p.eta).unwrap();
        prop_assert_eq!(x.metric_defect(), 0.0);
    }
}

#[test]
fn disk_certificates_on_true_volumes() {
    let (model, _) = build_disk_model(1.0, 4).unwrap();
    let part = make_partition(&model, 0.9).unwrap();
    let p = ReconstructionParams::new(2, 0.9, 8.0, 0, model.diameter).unwrap();
    let r = build_rstar(&TrueSlices::new(&model, &part), part.len(), &p).unwrap();
    assert!(!r.functions.is_empty());
    check_certificates(&r.functions, &p);
    assert_eq!(rstar_to_metric_space(&r.functions, p.eta).unwrap().metric_defect(), 0.0);
}
