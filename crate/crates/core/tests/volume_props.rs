use std::f64::consts::PI;
use std::sync::OnceLock;

use gelfand_core::forward::{
    build_disk_model, build_interval_model, make_partition, BoundaryPartition, DistanceTable, ModelManifold, Region,
    SpectralDataset,
};
use gelfand_core::projection::SolverConfig;
use gelfand_core::volume::{VolumeOracle, VolumeParams};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

const J: usize = 32;

struct Interval {
    model: ModelManifold,
    ds: SpectralDataset,
    part: BoundaryPartition,
}

fn interval() -> &'static Interval {
    static CELL: OnceLock<Interval> = OnceLock::new();
    CELL.get_or_init(|| {
        let (model, ds) = build_interval_model(PI, J).unwrap();
        let part = make_partition(&model, 0.4).unwrap();
        Interval { model, ds, part }
    })
}

fn params() -> VolumeParams {
    VolumeParams {
        j: J,
        big_lambda: 1.0,
        gamma: 1.0,
        eps1: 0.05,
        c0: 1.0,
        c0_prime: 1e-6,
        solver: SolverConfig::default(),
    }
}

fn oracle() -> &'static VolumeOracle<'static> {
    static CELL: OnceLock<VolumeOracle<'static>> = OnceLock::new();
    CELL.get_or_init(|| {
        let iv = interval();
        VolumeOracle::new(&iv.ds, &iv.part, params(), iv.model.diameter).unwrap()
    })
}

fn radii(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mesh_volumes_obey_inclusion_exclusion(a in radii(8), b in radii(8)) {
        let (model, _) = build_disk_model(1.0, 4).unwrap();
        let part = make_partition(&model, 1.2).unwrap();
        let n = part.len() + 1;
        let (a, b): (Vec<f64>, Vec<f64>) = (a.into_iter().cycle().take(n).collect(), b.into_iter().cycle().take(n).collect());
        let table = DistanceTable::new(&model, &part);
        let (ra, rb) = (Region::Influence(a.clone()), Region::Influence(b.clone()));
        let union = table.volume(&Region::Union(vec![ra.clone(), rb.clone()]));
        let inter = table.volume(&Region::Intersection(vec![ra.clone(), rb.clone()]));
        prop_assert!((table.volume(&ra) + table.volume(&rb) - union - inter).abs() < 1e-9);
        let max: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        prop_assert!((table.volume(&Region::Influence(max)) - union).abs() < 1e-9);
    }

    #[test]
    fn approximate_volume_stays_in_range(a in radii(3)) {
        let o = oracle();
        let r = o.vol_a(&a).unwrap();
        prop_assert!(r.vol_a >= -r.tolerance && r.vol_a <= PI + r.tolerance, "{:?}", r);
    }

    #[test]
    fn approximate_volume_is_monotone(a in radii(3), bump in 0.0..1.0f64, k in 0usize..3) {
        let o = oracle();
        let mut b = a.clone();
        b[k] += bump;
        let (ra, rb) = (o.vol_a(&a).unwrap(), o.vol_a(&b).unwrap());
        prop_assert!(ra.vol_a <= rb.vol_a + 2.0 * ra.tolerance.max(rb.tolerance) + 1e-9, "{:?} {:?}", ra, rb);
    }

    #[test]
    fn repeated_evaluation_is_bit_identical(a in radii(3)) {
        let iv = interval();
        let fresh = VolumeOracle::new(&iv.ds, &iv.part, params(), iv.model.diameter).unwrap();
        let first = fresh.vol_a(&a).unwrap();
        prop_assert_eq!(first.vol_a.to_bits(), fresh.vol_a(&a).unwrap().vol_a.to_bits());
        prop_assert_eq!(first.vol_a.to_bits(), oracle().vol_a(&a).unwrap().vol_a.to_bits());
    }
}
