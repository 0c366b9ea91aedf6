use std::f64::consts::PI;

use super::{BoundaryPartition, Cell, ModelKind, ModelManifold};
use crate::metric::FiniteMetricSpace;

/// A set built from domains of influence.
///
/// `Influence(α)` is `⋃_{k: α_k > 0} {x : d(x, Γ_k) < α_k}` with `Γ₀ = ∂M`.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Influence(Vec<f64>),
    Union(Vec<Region>),
    Intersection(Vec<Region>),
    Difference(Box<Region>, Box<Region>),
}

impl Region {
    fn contains(&self, dist: &dyn Fn(usize) -> f64) -> bool {
        match self {
            Region::Influence(a) => a.iter().enumerate().any(|(k, &ak)| ak > 0.0 && dist(k) < ak),
            Region::Union(rs) => rs.iter().any(|r| r.contains(dist)),
            Region::Intersection(rs) => rs.iter().all(|r| r.contains(dist)),
            Region::Difference(a, b) => a.contains(dist) && !b.contains(dist),
        }
    }

    fn radii(&self, out: &mut Vec<f64>) {
        match self {
            Region::Influence(a) => out.extend(a.iter().copied().filter(|&v| v > 0.0)),
            Region::Union(rs) | Region::Intersection(rs) => rs.iter().for_each(|r| r.radii(out)),
            Region::Difference(a, b) => {
                a.radii(out);
                b.radii(out);
            }
        }
    }
}

/// Distance from an interior point to Γ_k (`k = 0` is the whole boundary).
pub(crate) fn distance_to_subset(
    model: &ModelManifold,
    part: &BoundaryPartition,
    k: usize,
    p: [f64; 2],
) -> f64 {
    if k == 0 {
        model.distance_to_boundary(p)
    } else {
        distance_to_cell(model, &part.cells[k - 1], p)
    }
}

fn distance_to_cell(model: &ModelManifold, cell: &Cell, p: [f64; 2]) -> f64 {
    match model.kind {
        ModelKind::Interval { .. } => {
            let q = model.boundary.points[cell.nodes[0]];
            (p[0] - q[0]).abs()
        }
        ModelKind::Disk { radius } => {
            let r = p[0].hypot(p[1]);
            let a0 = cell.start / radius;
            let span = cell.length / radius;
            let rel = (p[1].atan2(p[0]) - a0).rem_euclid(2.0 * PI);
            if r == 0.0 || rel <= span {
                (radius - r).max(0.0)
            } else {
                let e0 = model.boundary_point(0, cell.start);
                let e1 = model.boundary_point(0, cell.start + cell.length);
                (p[0] - e0[0]).hypot(p[1] - e0[1]).min((p[0] - e1[0]).hypot(p[1] - e1[1]))
            }
        }
        ModelKind::Rectangle { lx, ly } => {
            let per = 2.0 * (lx + ly);
            let (s0, s1) = (cell.start, cell.start + cell.length);
            let mut cuts = vec![s0];
            for shift in [0.0, per] {
                for c in [0.0, lx, lx + ly, 2.0 * lx + ly] {
                    let s = c + shift;
                    if s > s0 && s < s1 {
                        cuts.push(s);
                    }
                }
            }
            cuts.push(s1);
            cuts.sort_by(f64::total_cmp);
            cuts.windows(2)
                .map(|w| {
                    segment_distance(p, model.boundary_point(0, w[0]), model.boundary_point(0, w[1]))
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Volume of a region. On the interval the measure is exact (the region is a
/// finite union of intervals); on surfaces it is interior mesh quadrature.
pub fn true_region_volume(model: &ModelManifold, part: &BoundaryPartition, region: &Region) -> f64 {
    match model.kind {
        ModelKind::Interval { length } => {
            let mut cuts = vec![0.0, length];
            let mut radii = Vec::new();
            region.radii(&mut radii);
            for r in radii {
                for c in [r, length - r] {
                    if c > 0.0 && c < length {
                        cuts.push(c);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.windows(2)
                .filter(|w| {
                    let p = [0.5 * (w[0] + w[1]), 0.0];
                    region.contains(&|k| distance_to_subset(model, part, k, p))
                })
                .map(|w| w[1] - w[0])
                .sum()
        }
        _ => DistanceTable::new(model, part).volume(region),
    }
}

pub fn true_volume(model: &ModelManifold, part: &BoundaryPartition, alpha: &[f64]) -> f64 {
    true_region_volume(model, part, &Region::Influence(alpha.to_vec()))
}

/// Interior-node distances to every Γ_k, reused across many volume queries.
pub struct DistanceTable<'a> {
    model: &'a ModelManifold,
    part: &'a BoundaryPartition,
    /// Row-major `nodes × (N + 1)`.
    dist: Vec<f64>,
}

impl<'a> DistanceTable<'a> {
    pub fn new(model: &'a ModelManifold, part: &'a BoundaryPartition) -> Self {
        let cols = part.len() + 1;
        let dist = match model.kind {
            ModelKind::Interval { .. } => Vec::new(),
            _ => model
                .interior
                .points
                .iter()
                .flat_map(|&p| (0..cols).map(move |k| distance_to_subset(model, part, k, p)))
                .collect(),
        };
        DistanceTable { model, part, dist }
    }

    pub fn volume(&self, region: &Region) -> f64 {
        if self.dist.is_empty() {
            return true_region_volume(self.model, self.part, region);
        }
        let cols = self.part.len() + 1;
        self.model
            .interior
            .weights
            .iter()
            .enumerate()
            .filter(|(i, _)| region.contains(&|k| self.dist[i * cols + k]))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Sampled image of the manifold under x ↦ r_x at partition resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub points: Vec<[f64; 2]>,
    /// `values[p][i] = d(x_p, Γ_{i+1})`.
    pub values: Vec<Vec<f64>>,
    pub space: FiniteMetricSpace,
}

pub fn true_boundary_distances(
    model: &ModelManifold,
    part: &BoundaryPartition,
    spacing: f64,
) -> crate::Result<GroundTruth> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(crate::Error::arg("sample_spacing", format!("must be positive, got {spacing}")));
    }
    let points = sample_grid(model, spacing);
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|&p| (1..=part.len()).map(|k| distance_to_subset(model, part, k, p)).collect())
        .collect();
    let labels = points
        .iter()
        .map(|p| match model.n {
            1 => format!("x={:.6}", p[0]),
            _ => format!("x=({:.6},{:.6})", p[0], p[1]),
        })
        .collect();
    let space = FiniteMetricSpace::from_linf(labels, &values);
    Ok(GroundTruth { points, values, space })
}

fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    if hi - v[n] > 1e-9 * h {
        v.push(hi);
    }
    v
}

fn sample_grid(model: &ModelManifold, h: f64) -> Vec<[f64; 2]> {
    match model.kind {
        ModelKind::Interval { length } => axis(0.0, length, h).into_iter().map(|x| [x, 0.0]).collect(),
        ModelKind::Rectangle { lx, ly } => {
            let xs = axis(0.0, lx, h);
            let ys = axis(0.0, ly, h);
            ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect()
        }
        ModelKind::Disk { radius } => {
            let m = (radius / h + 1e-9).floor() as i64;
            let mut out = Vec::new();
            for j in -m..=m {
                for i in -m..=m {
                    let p = [i as f64 * h, j as f64 * h];
                    if p[0].hypot(p[1]) <= radius * (1.0 + 1e-12) {
                        out.push(p);
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{build_disk_model, build_interval_model, build_rectangle_model, make_partition};

    #[test]
    fn interval_examples() {
        let (m, _) = build_interval_model(PI, 4).unwrap();
        let p = make_partition(&m, 0.4).unwrap();
        assert!((true_volume(&m, &p, &[0.0, 1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(true_volume(&m, &p, &[0.0, 0.0, 0.0]), 0.0);
        assert!((true_volume(&m, &p, &[PI, 0.0, 0.0]) - PI).abs() < 1e-12);
        let gt = true_boundary_distances(&m, &p, 0.5).unwrap();
        let i = gt.points.iter().position(|q| (q[0] - 1.0).abs() < 1e-12).unwrap();
        assert!((gt.values[i][0] - 1.0).abs() < 1e-12);
        assert!((gt.values[i][1] - (PI - 1.0)).abs() < 1e-12);
        assert_eq!(gt.values[0].iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
    }

    #[test]
    fn whole_manifold_on_surfaces() {
        let (m, _) = build_rectangle_model(1.0, 1.0, 4).unwrap();
        let p = make_partition(&m, 0.9).unwrap();
        let mut a = vec![0.0; p.len() + 1];
        a[0] = m.diameter;
        assert!((true_volume(&m, &p, &a) - 1.0).abs() < 1e-9);
        let (m, _) = build_disk_model(1.0, 4).unwrap();
        let p = make_partition(&m, 0.9).unwrap();
        let mut a = vec![0.0; p.len() + 1];
        a[0] = m.diameter;
        assert!((true_volume(&m, &p, &a) / PI - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disk_cell_distance_inside_arc() {
        let (m, _) = build_disk_model(1.0, 4).unwrap();
        let p = make_partition(&m, 1.0).unwrap();
        let c = &p.cells[0];
        let mid = c.start + 0.5 * c.length;
        let q = m.boundary_point(0, mid);
        let x = [0.5 * q[0], 0.5 * q[1]];
        assert!((distance_to_subset(&m, &p, 1, x) - 0.5).abs() < 1e-12);
    }
}
