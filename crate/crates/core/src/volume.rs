//! Approximate volumes of domains of influence and of the sliced sets built
//! from them by inclusion–exclusion.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::algebra::{default_time_step, FourierVector};
use crate::forward::{BoundaryPartition, SpectralDataset};
use crate::projection::{build_thresholds, minimize_with_cache, ConstraintThresholds, GramCache, SolverConfig};
use crate::{Error, Result};

/// Cache keys snap radii to multiples of η / `KEY_GRID`.
pub const KEY_GRID: f64 = 16.0;

/// Radii per boundary subset (`Alpha`, index 0 is ∂M) or integer slice
/// levels in units of η (`Beta`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiIndex {
    Alpha(Vec<f64>),
    Beta { b0: u8, levels: Vec<u32> },
}

/// Parameters of the projection behind every volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeParams {
    #[serde(rename = "J")]
    pub j: usize,
    pub big_lambda: f64,
    pub gamma: f64,
    pub eps1: f64,
    pub c0: f64,
    pub c0_prime: f64,
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub key: Vec<i64>,
    pub alpha: Vec<f64>,
    pub vol_a: f64,
    pub iterations: usize,
    /// Bound on the error in `vol_a` caused by inexact minimisation.
    pub tolerance: f64,
    pub clamped: bool,
}

/// Memoised volumes keyed by the snapped index.
#[derive(Default)]
pub struct VolumeCache {
    map: Mutex<BTreeMap<Vec<i64>, VolumeReport>>,
    negative_slices: AtomicUsize,
}

impl VolumeCache {
    pub fn get(&self, key: &[i64]) -> Option<VolumeReport> {
        self.map.lock().unwrap().get(key).cloned()
    }

    fn insert(&self, r: VolumeReport) {
        self.map.lock().unwrap().insert(r.key.clone(), r);
    }

    /// All reports in key order.
    pub fn reports(&self) -> Vec<VolumeReport> {
        self.map.lock().unwrap().values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slice volumes that came out negative and were clamped to zero.
    pub fn negative_slices(&self) -> usize {
        self.negative_slices.load(Ordering::Relaxed)
    }
}

/// `‖φ₁^a‖_{C⁰(∂M)}^{−2}`.
pub fn approx_manifold_volume(ds: &SpectralDataset) -> Result<f64> {
    let first = ds.modes.first().ok_or(Error::Empty("dataset has no modes"))?;
    let top = first.trace.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::arg("ds", "first trace vanishes on the boundary"));
    }
    Ok(1.0 / (top * top))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub value: f64,
    pub raw: f64,
    pub terms: usize,
}

/// Approximate volumes for one dataset, partition and parameter set.
pub struct VolumeOracle<'a> {
    ds: SpectralDataset,
    part: &'a BoundaryPartition,
    thr: ConstraintThresholds,
    params: VolumeParams,
    grams: GramCache,
    cache: VolumeCache,
    prefactor: f64,
    diameter: f64,
}

impl<'a> VolumeOracle<'a> {
    pub fn new(ds: &SpectralDataset, part: &'a BoundaryPartition, params: VolumeParams, diameter: f64) -> Result<Self> {
        params.solver.validate()?;
        if params.j < 1 || params.j > ds.len() {
            return Err(Error::Config {
                field: "J".into(),
                reason: format!("need 1 <= J <= {} modes, got {}", ds.len(), params.j),
            });
        }
        let ds = ds.truncated(params.j);
        let thr = build_thresholds(
            params.j,
            params.big_lambda,
            params.gamma,
            params.eps1,
            ds.provenance.delta,
            &ds,
            params.c0,
            params.c0_prime,
        )?;
        let grams = GramCache::new(&ds, part, params.j, default_time_step(&ds, params.j));
        let prefactor = approx_manifold_volume(&ds)?;
        Ok(VolumeOracle { ds, part, thr, params, grams, cache: VolumeCache::default(), prefactor, diameter })
    }

    pub fn cache(&self) -> &VolumeCache {
        &self.cache
    }

    pub fn thresholds(&self) -> &ConstraintThresholds {
        &self.thr
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn eta(&self) -> f64 {
        self.part.eta
    }

    /// Snaps α to the key grid, clamps to `[0, D]` and drops components
    /// already covered by the ∂M radius.
    pub fn canonical(&self, alpha: &[f64]) -> Result<(Vec<i64>, Vec<f64>)> {
        if alpha.len() != self.part.len() + 1 {
            return Err(Error::Shape { expected: self.part.len() + 1, got: alpha.len() });
        }
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("alpha", "components must be finite"));
        }
        let unit = self.part.eta / KEY_GRID;
        let mut key: Vec<i64> =
            alpha.iter().map(|&v| (v.clamp(0.0, self.diameter) / unit).round() as i64).collect();
        for k in 1..key.len() {
            if key[k] <= key[0] {
                key[k] = 0;
            }
        }
        let snapped = key.iter().map(|&q| q as f64 * unit).collect();
        Ok((key, snapped))
    }

    pub fn vol_a(&self, alpha: &[f64]) -> Result<VolumeReport> {
        let (key, snapped) = self.canonical(alpha)?;
        if let Some(r) = self.cache.get(&key) {
            return Ok(r);
        }
        let r = self.compute(key, snapped)?;
        self.cache.insert(r.clone());
        Ok(r)
    }

    fn compute(&self, key: Vec<i64>, alpha: Vec<f64>) -> Result<VolumeReport> {
        let u = FourierVector::basis(0, self.params.j);
        let m = minimize_with_cache(&u, &self.thr, &self.ds, self.part, &alpha, &self.params.solver, &self.grams)?;
        let b: Vec<f64> = u.coeffs.iter().zip(&m.w.coeffs).map(|(a, c)| a - c).collect();
        let sum: f64 = b.iter().map(|x| x * x).sum();
        let raw = self.prefactor * sum;
        let value = raw.clamp(0.0, self.prefactor);
        let tolerance = self.prefactor * (m.gap + 2.0 * m.gap.sqrt() * sum.sqrt());
        Ok(VolumeReport {
            key,
            alpha,
            vol_a: value,
            iterations: m.iterations,
            tolerance,
            clamped: value != raw,
        })
    }

    /// Computes every uncached index, in parallel when enabled.
    pub fn prefetch(&self, alphas: &[Vec<f64>]) -> Result<()> {
        let mut todo: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
        for a in alphas {
            let (key, snapped) = self.canonical(a)?;
            if self.cache.get(&key).is_none() {
                todo.insert(key, snapped);
            }
        }
        let jobs: Vec<(Vec<i64>, Vec<f64>)> = todo.into_iter().collect();
        #[cfg(feature = "parallel")]
        let done: Vec<Result<VolumeReport>> = {
            use rayon::prelude::*;
            jobs.into_par_iter().map(|(k, a)| self.compute(k, a)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let done: Vec<Result<VolumeReport>> = jobs.into_iter().map(|(k, a)| self.compute(k, a)).collect();
        for r in done {
            self.cache.insert(r?);
        }
        Ok(())
    }

    /// Volume of a union of domains of influence via the componentwise maximum.
    pub fn vol_union(&self, alphas: &[&[f64]]) -> Result<VolumeReport> {
        let first = alphas.first().ok_or(Error::Empty("vol_union needs at least one index"))?;
        let mut top = first.to_vec();
        for a in &alphas[1..] {
            if a.len() != top.len() {
                return Err(Error::Shape { expected: top.len(), got: a.len() });
            }
            for (t, v) in top.iter_mut().zip(a.iter()) {
                *t = t.max(*v);
            }
        }
        self.vol_a(&top)
    }

    /// Index terms of the interior slice `⋂_S M(Γ_i, β_iη) − ⋃_S M(Γ_i, (β_i−2)η)`
    /// as `(sign, α)` pairs.
    pub fn inner_terms(&self, levels: &[u32], budget: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        if levels.len() != self.part.len() {
            return Err(Error::Shape { expected: self.part.len(), got: levels.len() });
        }
        let eta = self.part.eta;
        let support: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] > 0).collect();
        if support.len() > budget {
            return Err(Error::SizeCap { what: "slice support", size: support.len(), cap: budget });
        }
        let mut terms = Vec::with_capacity(1 << support.len());
        for mask in 0u32..(1u32 << support.len()) {
            let mut alpha = vec![0.0; levels.len() + 1];
            for (bit, &i) in support.iter().enumerate() {
                let b = levels[i] as f64;
                alpha[i + 1] = if mask & (1 << bit) != 0 { b * eta } else { ((b - 2.0) * eta).max(0.0) };
            }
            let sign = if mask == 0 { -1.0 } else if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
            terms.push((sign, alpha));
        }
        Ok(terms)
    }

    /// Index terms of `M(Γ_k, β_kη) ∩ M(Γ_i, β_iη) − M(∂M, (β_k−2)η) ∪ M(Γ_i, (β_i−2)η)`.
    pub fn boundary_terms(&self, k: usize, i: usize, bk: u32, bi: u32) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.part.len();
        if k == i {
            return Err(Error::arg("beta", "slice indices k and i must differ"));
        }
        if k == 0 || i == 0 || k > n || i > n {
            return Err(Error::arg("beta", format!("slice indices must lie in 1..={n}")));
        }
        let eta = self.part.eta;
        let inner_k = ((bk as f64 - 2.0) * eta).max(0.0);
        let inner_i = ((bi as f64 - 2.0) * eta).max(0.0);
        let idx = |a0: f64, ak: f64, ai: f64| {
            let mut a = vec![0.0; n + 1];
            a[0] = a0;
            a[k] = ak;
            a[i] = ai;
            a
        };
        let (ok, oi) = (bk as f64 * eta, bi as f64 * eta);
        Ok(vec![
            (1.0, idx(inner_k, ok, inner_i)),
            (1.0, idx(inner_k, 0.0, oi)),
            (-1.0, idx(inner_k, ok, oi)),
            (-1.0, idx(inner_k, 0.0, inner_i)),
        ])
    }

    fn combine(&self, terms: &[(f64, Vec<f64>)]) -> Result<SliceReport> {
        let mut raw = 0.0;
        for (sign, a) in terms {
            raw += sign * self.vol_a(a)?.vol_a;
        }
        if raw < 0.0 {
            self.cache.negative_slices.fetch_add(1, Ordering::Relaxed);
        }
        Ok(SliceReport { value: raw.max(0.0), raw, terms: terms.len() })
    }

    /// Volume of the interior slice of β⟨l⟩; `budget` caps the support size
    /// at `L + 1`.
    pub fn vol_slice_inner(&self, levels: &[u32], budget: usize) -> Result<SliceReport> {
        let terms = self.inner_terms(levels, budget)?;
        self.combine(&terms)
    }

    pub fn vol_slice_boundary(&self, k: usize, i: usize, bk: u32, bi: u32) -> Result<SliceReport> {
        let terms = self.boundary_terms(k, i, bk, bi)?;
        self.combine(&terms)
    }
}
