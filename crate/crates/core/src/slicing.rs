//! Candidate boundary distance functions from slice-volume tests.
//!
//! A multi-index β assigns each boundary cell Γ_i a level β_i; the candidate
//! r_β takes the value β_iη on Γ_i. Interior candidates (β₀ = 0) need every
//! slice β⟨l⟩ to carry volume, boundary-layer candidates (β₀ = 1) need every
//! pair slice β[k,i] with k the minimising index.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::forward::{BoundaryPartition, DistanceTable, ModelManifold, Region};
use crate::metric::FiniteMetricSpace;
use crate::volume::VolumeOracle;
use crate::{Error, Result};

/// Dedup grid for candidate value vectors, in units of η.
pub const DEDUP_GRID: f64 = 1024.0;

/// Unit-ball volume coefficient used for `ε = c_n ηⁿ / 2`.
pub fn ball_constant(n: usize) -> Result<f64> {
    match n {
        1 => Ok(2.0),
        2 => Ok(std::f64::consts::PI),
        _ => Err(Error::arg("n", format!("dimension must be 1 or 2, got {n}"))),
    }
}

fn default_max_points() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionParams {
    pub eta: f64,
    /// Volume acceptance threshold.
    pub epsilon: f64,
    pub i0: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub c_n: f64,
    /// Cap on the number of accepted candidates.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

impl ReconstructionParams {
    /// Parameters with the default threshold `c_n ηⁿ / 2`.
    pub fn new(n: usize, eta: f64, i0: f64, l: usize, diameter: f64) -> Result<Self> {
        let c_n = ball_constant(n)?;
        Ok(ReconstructionParams {
            eta,
            epsilon: c_n * eta.powi(n as i32) / 2.0,
            i0,
            l,
            diameter,
            c_n,
            max_points: default_max_points(),
        })
    }

    pub fn validate(&self, cells: usize) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::Config { field: field.into(), reason });
        for (name, v) in [("eta", self.eta), ("epsilon", self.epsilon), ("i0", self.i0), ("D", self.diameter)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, format!("must be positive, got {v}"));
            }
        }
        if self.eta >= 1.0f64.min(self.i0 / 8.0) {
            return bad("eta", format!("need eta < min(1, i0/8) = {}", 1.0f64.min(self.i0 / 8.0)));
        }
        if self.l >= cells {
            return bad("L", format!("need L < N = {cells}, got {}", self.l));
        }
        if self.max_points == 0 {
            return bad("max_points", "must be positive".into());
        }
        Ok(())
    }

    /// Largest level tested, `⌊2 + D/η⌋`.
    pub fn max_level(&self) -> u32 {
        (2.0 + self.diameter / self.eta + 1e-9).floor() as u32
    }

    fn interior_level(&self, b: u32) -> bool {
        b as f64 * self.eta > self.i0 / 2.0
    }

    fn layer_level(&self, b: u32) -> bool {
        b as f64 * self.eta <= self.i0 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Interior,
    Boundary,
}

/// A candidate multi-index; `beta[0]` is β₀.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub beta: Vec<u32>,
    pub route: Route,
}

impl Candidate {
    /// Index of the minimal level, ties to the lowest index (1-based).
    pub fn min_index(&self) -> usize {
        let mut k = 1;
        for i in 2..self.beta.len() {
            if self.beta[i] < self.beta[k] {
                k = i;
            }
        }
        k
    }
}

/// Slices whose volumes decide acceptance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SliceKey {
    /// Levels for cells `1..=N`, nonzero only on `1..=L` and one `l`.
    Inner(Vec<u32>),
    Boundary { k: usize, i: usize, bk: u32, bi: u32 },
}

/// Something that can measure slices.
pub trait SliceVolumes: Sync {
    fn slice_volumes(&self, slices: &[SliceKey], budget: usize) -> Result<Vec<f64>>;
}

impl SliceVolumes for VolumeOracle<'_> {
    fn slice_volumes(&self, slices: &[SliceKey], budget: usize) -> Result<Vec<f64>> {
        let mut alphas = Vec::new();
        for s in slices {
            let terms = match s {
                SliceKey::Inner(levels) => self.inner_terms(levels, budget)?,
                SliceKey::Boundary { k, i, bk, bi } => self.boundary_terms(*k, *i, *bk, *bi)?,
            };
            alphas.extend(terms.into_iter().map(|(_, a)| a));
        }
        self.prefetch(&alphas)?;
        slices
            .iter()
            .map(|s| match s {
                SliceKey::Inner(levels) => self.vol_slice_inner(levels, budget),
                SliceKey::Boundary { k, i, bk, bi } => self.vol_slice_boundary(*k, *i, *bk, *bi),
            })
            .map(|r| r.map(|r| r.value))
            .collect()
    }
}

/// Slice volumes measured directly on the model geometry.
pub struct TrueSlices<'a> {
    table: DistanceTable<'a>,
    eta: f64,
    cells: usize,
}

impl<'a> TrueSlices<'a> {
    pub fn new(model: &'a ModelManifold, part: &'a BoundaryPartition) -> Self {
        TrueSlices { table: DistanceTable::new(model, part), eta: part.eta, cells: part.len() }
    }

    fn ball(&self, k: usize, r: f64) -> Region {
        let mut a = vec![0.0; self.cells + 1];
        a[k] = r.max(0.0);
        Region::Influence(a)
    }

    /// The slice as a set, following its literal definition.
    pub fn region(&self, s: &SliceKey) -> Region {
        let eta = self.eta;
        match s {
            SliceKey::Inner(levels) => {
                let support: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] > 0).collect();
                let outer = support.iter().map(|&i| self.ball(i + 1, levels[i] as f64 * eta)).collect();
                let inner = support.iter().map(|&i| self.ball(i + 1, (levels[i] as f64 - 2.0) * eta)).collect();
                Region::Difference(Box::new(Region::Intersection(outer)), Box::new(Region::Union(inner)))
            }
            SliceKey::Boundary { k, i, bk, bi } => {
                let (bk, bi) = (*bk as f64, *bi as f64);
                let outer = Region::Intersection(vec![self.ball(*k, bk * eta), self.ball(*i, bi * eta)]);
                let inner = Region::Union(vec![self.ball(0, (bk - 2.0) * eta), self.ball(*i, (bi - 2.0) * eta)]);
                Region::Difference(Box::new(outer), Box::new(inner))
            }
        }
    }
}

impl SliceVolumes for TrueSlices<'_> {
    fn slice_volumes(&self, slices: &[SliceKey], _budget: usize) -> Result<Vec<f64>> {
        Ok(slices.iter().map(|s| self.table.volume(&self.region(s))).collect())
    }
}

/// Lazily streams every candidate that satisfies the level preconditions of
/// its route: interior candidates with all levels above `i₀/(2η)`, then
/// boundary candidates whose minimal level lies at or below it.
pub fn enumerate_betas(params: &ReconstructionParams, cells: usize) -> impl Iterator<Item = Candidate> + '_ {
    let top = params.max_level();
    let routes = [(0u32, Route::Interior), (1u32, Route::Boundary)];
    routes.into_iter().flat_map(move |(b0, route)| {
        Odometer::new(cells, top).filter_map(move |levels| {
            let mut beta = Vec::with_capacity(cells + 1);
            beta.push(b0);
            beta.extend(levels);
            let cand = Candidate { beta, route };
            let ok = match route {
                Route::Interior => cand.beta[1..].iter().all(|&b| params.interior_level(b)),
                Route::Boundary => params.layer_level(cand.beta[cand.min_index()]),
            };
            ok.then_some(cand)
        })
    })
}

struct Odometer {
    digits: Vec<u32>,
    top: u32,
    done: bool,
}

impl Odometer {
    fn new(len: usize, top: u32) -> Self {
        Odometer { digits: vec![1; len], top, done: len == 0 || top == 0 }
    }
}

impl Iterator for Odometer {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.digits.clone();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.digits[i] < self.top {
                self.digits[i] += 1;
                break;
            }
            self.digits[i] = 1;
        }
        Some(out)
    }
}

/// Slices a candidate must pass.
pub fn needed_slices(cand: &Candidate, l_budget: usize) -> Vec<SliceKey> {
    let n = cand.beta.len() - 1;
    match cand.route {
        Route::Interior => (l_budget + 1..=n)
            .map(|l| {
                let mut levels = vec![0; n];
                levels[..l_budget].copy_from_slice(&cand.beta[1..=l_budget]);
                levels[l - 1] = cand.beta[l];
                SliceKey::Inner(levels)
            })
            .collect(),
        Route::Boundary => {
            let k = cand.min_index();
            (1..=n)
                .filter(|&i| i != k)
                .map(|i| SliceKey::Boundary { k, i, bk: cand.beta[k], bi: cand.beta[i] })
                .collect()
        }
    }
}

/// Applies the acceptance clause of the candidate's route.
pub fn accept_beta(cand: &Candidate, vols: &BTreeMap<SliceKey, f64>, params: &ReconstructionParams) -> Result<bool> {
    let levels_ok = match cand.route {
        Route::Interior => cand.beta[0] == 0 && cand.beta[1..].iter().all(|&b| params.interior_level(b)),
        Route::Boundary => cand.beta[0] == 1 && params.layer_level(cand.beta[cand.min_index()]),
    };
    if !levels_ok {
        return Ok(false);
    }
    for s in needed_slices(cand, params.l) {
        let v = vols.get(&s).ok_or_else(|| Error::Missing(format!("slice volume {s:?}")))?;
        if *v < params.epsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistanceFn {
    pub beta: Vec<u32>,
    pub values: Vec<f64>,
    pub route: Route,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RstarStats {
    pub slices: usize,
    pub accepted_interior: usize,
    pub accepted_boundary: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rstar {
    pub functions: Vec<BoundaryDistanceFn>,
    pub stats: RstarStats,
}

/// Per-slot allowed levels; the accepted set is their Cartesian product.
struct Block {
    route: Route,
    slots: Vec<Vec<u32>>,
}

fn product_len(slots: &[Vec<u32>]) -> usize {
    slots.iter().fold(1usize, |acc, s| acc.saturating_mul(s.len()))
}

/// Builds ℛ* by exploiting that each acceptance clause is a conjunction of
/// per-slot tests once the shared levels (β₁..β_L, or k and β_k) are fixed.
pub fn build_rstar(source: &dyn SliceVolumes, cells: usize, params: &ReconstructionParams) -> Result<Rstar> {
    params.validate(cells)?;
    let top = params.max_level();
    let l = params.l;
    let interior: Vec<u32> = (1..=top).filter(|&b| params.interior_level(b)).collect();
    let layer: Vec<u32> = (1..=top).filter(|&b| params.layer_level(b)).collect();

    let mut keys = BTreeSet::new();
    let prefixes: Vec<Vec<u32>> = if interior.is_empty() {
        Vec::new()
    } else {
        Odometer::new(l, interior.len() as u32)
            .map(|d| d.iter().map(|&x| interior[x as usize - 1]).collect())
            .chain((l == 0).then(Vec::new))
            .collect()
    };
    let inner_key = |prefix: &[u32], slot: usize, b: u32| {
        let mut levels = vec![0; cells];
        levels[..l].copy_from_slice(prefix);
        levels[slot - 1] = b;
        SliceKey::Inner(levels)
    };
    for prefix in &prefixes {
        for slot in l + 1..=cells {
            for &b in &interior {
                keys.insert(inner_key(prefix, slot, b));
            }
        }
    }
    for k in 1..=cells {
        for &bk in &layer {
            for i in (1..=cells).filter(|&i| i != k) {
                for bi in bk..=top {
                    if i < k && bi == bk {
                        continue;
                    }
                    keys.insert(SliceKey::Boundary { k, i, bk, bi });
                }
            }
        }
    }
    let keys: Vec<SliceKey> = keys.into_iter().collect();
    let values = source.slice_volumes(&keys, l + 1)?;
    let vols: BTreeMap<SliceKey, f64> = keys.into_iter().zip(values).collect();
    let pass = |s: &SliceKey| vols.get(s).is_some_and(|&v| v >= params.epsilon);

    let mut blocks = Vec::new();
    for prefix in &prefixes {
        let mut slots: Vec<Vec<u32>> = prefix.iter().map(|&b| vec![b]).collect();
        for slot in l + 1..=cells {
            slots.push(interior.iter().copied().filter(|&b| pass(&inner_key(prefix, slot, b))).collect());
        }
        blocks.push(Block { route: Route::Interior, slots });
    }
    for k in 1..=cells {
        for &bk in &layer {
            let slots = (1..=cells)
                .map(|i| {
                    if i == k {
                        return vec![bk];
                    }
                    let lo = if i < k { bk + 1 } else { bk };
                    (lo..=top).filter(|&bi| pass(&SliceKey::Boundary { k, i, bk, bi })).collect()
                })
                .collect();
            blocks.push(Block { route: Route::Boundary, slots });
        }
    }
    let total = blocks.iter().fold(0usize, |acc, b| acc.saturating_add(product_len(&b.slots)));
    if total > params.max_points {
        return Err(Error::SizeCap { what: "accepted candidates", size: total, cap: params.max_points });
    }

    let mut stats = RstarStats { slices: vols.len(), ..Default::default() };
    let mut out: BTreeMap<Vec<i64>, BoundaryDistanceFn> = BTreeMap::new();
    for block in &blocks {
        if product_len(&block.slots) == 0 {
            continue;
        }
        let b0 = u32::from(block.route == Route::Boundary);
        let mut idx = vec![0usize; cells];
        loop {
            let mut beta = vec![b0];
            beta.extend(idx.iter().enumerate().map(|(i, &j)| block.slots[i][j]));
            match block.route {
                Route::Interior => stats.accepted_interior += 1,
                Route::Boundary => stats.accepted_boundary += 1,
            }
            insert_dedup(&mut out, &mut stats, beta, block.route, params.eta);
            let mut i = cells;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < block.slots[i].len() {
                    break;
                }
                idx[i] = 0;
            }
            if idx.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    Ok(Rstar { functions: out.into_values().collect(), stats })
}

fn insert_dedup(
    out: &mut BTreeMap<Vec<i64>, BoundaryDistanceFn>,
    stats: &mut RstarStats,
    beta: Vec<u32>,
    route: Route,
    eta: f64,
) {
    let values: Vec<f64> = beta[1..].iter().map(|&b| b as f64 * eta).collect();
    let key: Vec<i64> = values.iter().map(|v| (v * DEDUP_GRID / eta).round() as i64).collect();
    match out.get(&key) {
        // Interior representatives win so the kept β does not depend on order.
        Some(prev) if prev.route <= route => stats.duplicates += 1,
        Some(_) => {
            stats.duplicates += 1;
            out.insert(key, BoundaryDistanceFn { beta, values, route });
        }
        None => {
            out.insert(key, BoundaryDistanceFn { beta, values, route });
        }
    }
}

/// Reference construction: test every enumerated candidate in turn.
pub fn build_rstar_naive(source: &dyn SliceVolumes, cells: usize, params: &ReconstructionParams) -> Result<Rstar> {
    params.validate(cells)?;
    accept_candidates(enumerate_betas(params, cells).collect(), source, params)
}

/// Tests each candidate of an arbitrary stream and keeps one function per value vector.
pub fn accept_candidates(cands: Vec<Candidate>, source: &dyn SliceVolumes, params: &ReconstructionParams) -> Result<Rstar> {
    let keys: BTreeSet<SliceKey> = cands.iter().flat_map(|c| needed_slices(c, params.l)).collect();
    let keys: Vec<SliceKey> = keys.into_iter().collect();
    let values = source.slice_volumes(&keys, params.l + 1)?;
    let vols: BTreeMap<SliceKey, f64> = keys.into_iter().zip(values).collect();
    let mut stats = RstarStats { slices: vols.len(), ..Default::default() };
    let mut out = BTreeMap::new();
    for c in cands {
        if accept_beta(&c, &vols, params)? {
            match c.route {
                Route::Interior => stats.accepted_interior += 1,
                Route::Boundary => stats.accepted_boundary += 1,
            }
            if stats.accepted_interior + stats.accepted_boundary > params.max_points {
                return Err(Error::SizeCap { what: "accepted candidates", size: params.max_points + 1, cap: params.max_points });
            }
            insert_dedup(&mut out, &mut stats, c.beta, c.route, params.eta);
        }
    }
    Ok(Rstar { functions: out.into_values().collect(), stats })
}

/// Lattice used for the distance unit of X.
const UNIT_GRID: f64 = 4_294_967_296.0;

/// The finite metric space X: accepted functions under the L∞ distance over cells.
///
/// Distances are whole numbers of level steps times η rounded to a multiple of
/// 2⁻³², so sums of distances are exact and the triangle inequality holds in
/// floating point without slack.
pub fn rstar_to_metric_space(rstar: &[BoundaryDistanceFn], eta: f64) -> Result<FiniteMetricSpace> {
    if rstar.is_empty() {
        return Err(Error::Empty("no accepted boundary distance functions"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::arg("eta", format!("must be positive, got {eta}")));
    }
    let unit = (eta * UNIT_GRID).round() / UNIT_GRID;
    let labels = rstar
        .iter()
        .map(|f| f.beta.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    let steps = |a: &BoundaryDistanceFn, b: &BoundaryDistanceFn| {
        a.beta[1..].iter().zip(&b.beta[1..]).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0)
    };
    let dist = rstar.iter().map(|a| rstar.iter().map(|b| steps(a, b) as f64 * unit).collect()).collect();
    FiniteMetricSpace::new(labels, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{build_interval_model, make_partition};
    use std::f64::consts::PI;

    #[test]
    fn level_range_and_routes() {
        let p = ReconstructionParams::new(1, 0.5, 8.0, 0, PI).unwrap();
        assert_eq!(p.max_level(), 8);
        assert_eq!(p.epsilon, 0.5);
        let c: Vec<Candidate> = enumerate_betas(&p, 2).collect();
        assert!(c.iter().all(|c| c.route == Route::Boundary));
        assert_eq!(c.len(), 64);
        assert!(c.len() <= 4 * (2.0 + 2.0 * PI).powi(2) as usize);
        let q = ReconstructionParams { i0: 1e-9, eta: 0.5, ..p.clone() };
        assert!(enumerate_betas(&q, 2).all(|c| c.route == Route::Interior));
        let wide = ReconstructionParams { eta: 0.9, i0: 8.0, diameter: 0.8, ..p };
        assert_eq!(wide.max_level(), 2);
    }

    #[test]
    fn validate_rejects_coarse_eta() {
        let p = ReconstructionParams::new(1, 0.6, 4.0, 0, PI).unwrap();
        assert!(matches!(p.validate(2), Err(Error::Config { .. })));
    }

    #[test]
    fn accept_thresholds() {
        let p = ReconstructionParams::new(1, 0.5, 8.0, 0, PI).unwrap();
        let c = Candidate { beta: vec![1, 2, 6], route: Route::Boundary };
        let key = needed_slices(&c, 0);
        assert_eq!(key, vec![SliceKey::Boundary { k: 1, i: 2, bk: 2, bi: 6 }]);
        let mut vols = BTreeMap::new();
        assert!(accept_beta(&c, &vols, &p).is_err());
        vols.insert(key[0].clone(), 2.0 * p.epsilon);
        assert!(accept_beta(&c, &vols, &p).unwrap());
        vols.insert(key[0].clone(), 0.99 * p.epsilon);
        assert!(!accept_beta(&c, &vols, &p).unwrap());
    }

    #[test]
    fn true_slice_examples() {
        let (m, _) = build_interval_model(PI, 2).unwrap();
        let part = make_partition(&m, 0.5).unwrap();
        let t = TrueSlices::new(&m, &part);
        let v = t.slice_volumes(&[SliceKey::Inner(vec![4, 0])], 1).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
        // x in [0.5, 1) with π − x in [π − 1 − 0.5, π − 1 + 0.5)
        let v = t.slice_volumes(&[SliceKey::Boundary { k: 1, i: 2, bk: 2, bi: 5 }], 1).unwrap();
        let lo = 0.5f64.max(PI - 2.5);
        let hi = 1.0f64.min(PI - 1.5);
        assert!((v[0] - (hi - lo).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn factorized_matches_naive_on_true_volumes() {
        let (m, _) = build_interval_model(PI, 2).unwrap();
        for eta in [0.4, 0.2] {
            let part = make_partition(&m, eta).unwrap();
            let t = TrueSlices::new(&m, &part);
            let p = ReconstructionParams::new(1, eta, 8.0, 0, PI).unwrap();
            let a = build_rstar(&t, part.len(), &p).unwrap();
            let b = build_rstar_naive(&t, part.len(), &p).unwrap();
            assert_eq!(a.functions, b.functions);
            assert!(!a.functions.is_empty());
        }
    }

    #[test]
    fn metric_space_examples() {
        assert!(rstar_to_metric_space(&[], 0.5).is_err());
        let f = |b: u32| BoundaryDistanceFn { beta: vec![1, 2, b], values: vec![1.0, 0.5 * b as f64], route: Route::Boundary };
        let x = rstar_to_metric_space(&[f(4), f(5)], 0.5).unwrap();
        assert_eq!(x.dist[0][1], 0.5);
        assert_eq!(x.dist[0][0], 0.0);
    }
}
