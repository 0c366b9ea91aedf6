//! Hausdorff and Gromov–Hausdorff distances between finite sets and spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest side for which [`gh_exact`] runs its exhaustive search.
pub const GH_EXACT_MAX: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Shape { expected: n, got: dist.len() });
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Points of ℝ^N under the max norm.
    pub fn from_linf(labels: Vec<String>, vecs: &[Vec<f64>]) -> Self {
        let dist = vecs.iter().map(|a| vecs.iter().map(|b| linf(a, b)).collect()).collect();
        FiniteMetricSpace { labels, dist }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().flatten().cloned().fold(0.0, f64::max)
    }

    pub fn eccentricities(&self) -> Vec<f64> {
        self.dist.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect()
    }

    /// Largest violation of symmetry, zero diagonal and the triangle inequality.
    pub fn metric_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(self.dist[i][i].abs());
            for j in 0..n {
                worst = worst.max((self.dist[i][j] - self.dist[j][i]).abs());
                worst = worst.max(-self.dist[i][j]);
                for k in 0..n {
                    worst = worst.max(self.dist[i][k] - self.dist[i][j] - self.dist[j][k]);
                }
            }
        }
        worst
    }
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Hausdorff distance between two finite subsets of ℝ^N with the max norm.
pub fn hausdorff_linf(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("hausdorff_linf needs two nonempty sets"));
    }
    let dim = a[0].len();
    if let Some(bad) = a.iter().chain(b).find(|v| v.len() != dim) {
        return Err(Error::Shape { expected: dim, got: bad.len() });
    }
    let one_way = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| linf(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_way(a, b).max(one_way(b, a)))
}

/// Distortion of the relation given as `(x, y)` index pairs.
pub fn distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(c, e) in &pairs[i + 1..] {
            d = d.max((x.dist[a][c] - y.dist[b][e]).abs());
        }
    }
    d
}

/// Exact Gromov–Hausdorff distance by branch and bound over correspondences.
///
/// Every correspondence contains one of the form `graph(f) ∪ graph(g)ᵀ` with
/// `f: X → Y`, `g: Y → X`, and distortion only grows with the relation, so
/// the search runs over such pairs of maps.
pub fn gh_exact(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    for s in [x, y] {
        if s.len() > GH_EXACT_MAX {
            return Err(Error::SizeCap { what: "gh_exact space size", size: s.len(), cap: GH_EXACT_MAX });
        }
        if s.is_empty() {
            return Err(Error::Empty("gh_exact needs nonempty spaces"));
        }
    }
    let mut best = f64::INFINITY;
    let mut pairs = Vec::with_capacity(x.len() + y.len());
    search(x, y, &mut pairs, 0.0, &mut best);
    Ok(0.5 * best)
}

fn search(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    pairs: &mut Vec<(usize, usize)>,
    current: f64,
    best: &mut f64,
) {
    let step = pairs.len();
    if step == x.len() + y.len() {
        *best = best.min(current);
        return;
    }
    let options: Vec<(usize, usize)> = if step < x.len() {
        (0..y.len()).map(|b| (step, b)).collect()
    } else {
        let b = step - x.len();
        (0..x.len()).map(|a| (a, b)).collect()
    };
    for (a, b) in options {
        let mut d = current;
        for &(c, e) in pairs.iter() {
            d = d.max((x.dist[a][c] - y.dist[b][e]).abs());
            if d >= *best {
                break;
            }
        }
        if d < *best {
            pairs.push((a, b));
            search(x, y, pairs, d, best);
            pairs.pop();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhBound {
    pub lower: f64,
    pub upper: f64,
}

/// Budget of distortion evaluations for the randomized upper bound.
const GH_SEARCH_BUDGET: usize = 4_000_000;

/// Lower and upper bounds on the Gromov–Hausdorff distance.
///
/// The lower bound is half the Hausdorff distance between the eccentricity
/// value sets, which dominates the diameter bound. The upper bound is exact
/// for small spaces and otherwise comes from seeded greedy starts refined by
/// local search.
pub fn gh_bound(x: &FiniteMetricSpace, y: &FiniteMetricSpace, seed: u64) -> Result<GhBound> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("gh_bound needs nonempty spaces"));
    }
    let ex = x.eccentricities();
    let ey = y.eccentricities();
    let diam = 0.5 * (x.diameter() - y.diameter()).abs();
    let one_way = |p: &[f64], q: &[f64]| {
        p.iter()
            .map(|a| q.iter().map(|b| (a - b).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let ecc = 0.5 * one_way(&ex, &ey).max(one_way(&ey, &ex));
    let lower = diam.max(ecc);
    let upper = if x.len() <= GH_EXACT_MAX && y.len() <= GH_EXACT_MAX {
        gh_exact(x, y)?
    } else {
        0.5 * heuristic_distortion(x, y, &ex, &ey, seed)
    };
    Ok(GhBound { lower: lower.min(upper), upper })
}

fn heuristic_distortion(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    ex: &[f64],
    ey: &[f64],
    seed: u64,
) -> f64 {
    let nearest = |v: f64, pool: &[f64]| {
        (0..pool.len())
            .min_by(|&i, &j| (pool[i] - v).abs().total_cmp(&(pool[j] - v).abs()))
            .unwrap_or(0)
    };
    let mut starts: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    if x.len() == y.len() {
        starts.push(((0..x.len()).collect(), (0..y.len()).collect()));
    }
    starts.push((
        ex.iter().map(|&v| nearest(v, ey)).collect(),
        ey.iter().map(|&v| nearest(v, ex)).collect(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        starts.push((
            (0..x.len()).map(|_| rng.random_range(0..y.len())).collect(),
            (0..y.len()).map(|_| rng.random_range(0..x.len())).collect(),
        ));
    }
    let rel = |f: &[usize], g: &[usize]| -> Vec<(usize, usize)> {
        f.iter().enumerate().map(|(a, &b)| (a, b)).chain(g.iter().enumerate().map(|(b, &a)| (a, b))).collect()
    };
    let size = x.len() + y.len();
    let cost = size * size;
    let mut budget = GH_SEARCH_BUDGET / cost.max(1);
    let mut best = f64::INFINITY;
    for (mut f, mut g) in starts {
        let mut cur = distortion(x, y, &rel(&f, &g));
        // first-improvement sweeps over single reassignments
        let mut improved = true;
        while improved && budget > 0 {
            improved = false;
            for a in 0..f.len() {
                for b in 0..y.len() {
                    if budget == 0 || b == f[a] {
                        continue;
                    }
                    budget -= 1;
                    let old = f[a];
                    f[a] = b;
                    let d = distortion(x, y, &rel(&f, &g));
                    if d < cur {
                        cur = d;
                        improved = true;
                    } else {
                        f[a] = old;
                    }
                }
            }
            for b in 0..g.len() {
                for a in 0..x.len() {
                    if budget == 0 || a == g[b] {
                        continue;
                    }
                    budget -= 1;
                    let old = g[b];
                    g[b] = a;
                    let d = distortion(x, y, &rel(&f, &g));
                    if d < cur {
                        cur = d;
                        improved = true;
                    } else {
                        g[b] = old;
                    }
                }
            }
        }
        best = best.min(cur);
    }
    best
}

/// Context recorded alongside an evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub eta: f64,
    pub delta: f64,
    #[serde(rename = "J")]
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub hausdorff: Option<f64>,
    pub gh_lower: Option<f64>,
    pub gh_upper: Option<f64>,
    pub n_points: usize,
    pub n_truth: usize,
    pub eta: f64,
    pub delta: f64,
    #[serde(rename = "J")]
    pub j: usize,
}

/// Compares accepted value vectors with the sampled ground truth.
///
/// Both sets live in ℝ^N with the max norm, so their Hausdorff distance also
/// bounds the Gromov–Hausdorff distance from above.
pub fn evaluate_run(
    rstar: &[Vec<f64>],
    truth_values: &[Vec<f64>],
    truth: &FiniteMetricSpace,
    meta: RunMeta,
    seed: u64,
) -> Result<EvalReport> {
    let mut report = EvalReport {
        status: "ok".into(),
        reason: None,
        hausdorff: None,
        gh_lower: None,
        gh_upper: None,
        n_points: rstar.len(),
        n_truth: truth.len(),
        eta: meta.eta,
        delta: meta.delta,
        j: meta.j,
    };
    if rstar.is_empty() {
        report.status = "failure".into();
        report.reason = Some("reconstruction is empty".into());
        return Ok(report);
    }
    let h = hausdorff_linf(rstar, truth_values)?;
    let labels = (0..rstar.len()).map(|i| format!("r{i}")).collect();
    let xs = FiniteMetricSpace::from_linf(labels, rstar);
    let b = gh_bound(&xs, truth, seed)?;
    let upper = b.upper.min(h);
    report.hausdorff = Some(h);
    report.gh_lower = Some(b.lower.min(upper));
    report.gh_upper = Some(upper);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: Vec<Vec<f64>>) -> FiniteMetricSpace {
        let labels = (0..d.len()).map(|i| i.to_string()).collect();
        FiniteMetricSpace::new(labels, d).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![vec![0.0]];
        let b = vec![vec![1.0]];
        assert_eq!(hausdorff_linf(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_linf(&a, &b).unwrap(), 1.0);
        let a = vec![vec![0.0, 0.0], vec![2.0, 2.0]];
        let b = vec![vec![1.0, 1.0]];
        assert_eq!(hausdorff_linf(&a, &b).unwrap(), 1.0);
        assert!(hausdorff_linf(&[], &b).is_err());
    }

    #[test]
    fn gh_examples() {
        let two = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let one = space(vec![vec![0.0]]);
        assert_eq!(gh_exact(&two, &one).unwrap(), 0.5);
        assert_eq!(gh_exact(&one, &one).unwrap(), 0.0);
        assert_eq!(gh_exact(&two, &two).unwrap(), 0.0);
    }

    #[test]
    fn gh_exact_size_cap() {
        let big = FiniteMetricSpace::from_linf(
            (0..7).map(|i| i.to_string()).collect(),
            &(0..7).map(|i| vec![i as f64]).collect::<Vec<_>>(),
        );
        assert!(matches!(gh_exact(&big, &big), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn bound_identity_and_diameter() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![(i * i) as f64 * 0.1]).collect();
        let x = FiniteMetricSpace::from_linf((0..10).map(|i| i.to_string()).collect(), &pts);
        let b = gh_bound(&x, &x, 1).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let three = space(vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        let unit = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(gh_bound(&three, &unit, 0).unwrap().lower >= 1.0);
    }

    #[test]
    fn empty_run_is_failure_record() {
        let t = FiniteMetricSpace::from_linf(vec!["a".into()], &[vec![0.0]]);
        let r = evaluate_run(&[], &[vec![0.0]], &t, RunMeta { eta: 0.1, delta: 0.0, j: 8 }, 0).unwrap();
        assert_eq!(r.status, "failure");
        assert!(r.hausdorff.is_none());
    }
}
