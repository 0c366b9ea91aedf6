use serde::{Deserialize, Serialize};

use super::{ModelKind, ModelManifold};
use crate::{Error, Result};

/// One boundary subset Γ_i: a contiguous run of boundary nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub nodes: Vec<usize>,
    pub measure: f64,
    pub diameter: f64,
    pub component: usize,
    /// Arclength interval covered by the cell, `start..start + length`.
    pub start: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    pub eta: f64,
    pub cells: Vec<Cell>,
    pub node_count: usize,
}

impl BoundaryPartition {
    /// Number of subsets N, excluding the whole boundary Γ₀.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Node indices of Γ_k, where `k = 0` is the whole boundary.
    pub fn subset_nodes(&self, k: usize) -> Vec<usize> {
        if k == 0 {
            (0..self.node_count).collect()
        } else {
            self.cells[k - 1].nodes.clone()
        }
    }
}

/// Equally spaced centres in arclength with spacing in `[η/2, 0.9η]`, which
/// is a maximal η/2-separated set; cells are their arclength Voronoi regions.
/// On curves η may not exceed half the boundary length.
pub fn make_partition(model: &ModelManifold, eta: f64) -> Result<BoundaryPartition> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::arg("eta", format!("must be positive, got {eta}")));
    }
    let b = &model.boundary;
    if model.n == 2 && eta > 0.5 * b.perimeter[0] {
        return Err(Error::arg(
            "eta",
            format!("must not exceed half the boundary length {}, got {eta}", 0.5 * b.perimeter[0]),
        ));
    }
    if model.n == 1 {
        let cells = (0..2)
            .map(|i| Cell {
                nodes: vec![i],
                measure: b.weights[i],
                diameter: 0.0,
                component: i,
                start: 0.0,
                length: 0.0,
            })
            .collect();
        return Ok(BoundaryPartition { eta, cells, node_count: 2 });
    }

    let per = b.perimeter[0];
    let ideal = (per / (0.9 * eta)).ceil() as usize;
    let count = ideal.min((2.0 * per / eta).floor() as usize).max(1);
    let sigma = per / count as f64;
    let mut nodes: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, &s) in b.arclength.iter().enumerate() {
        let c = ((s / sigma).floor() as usize).min(count - 1);
        nodes[c].push(i);
    }
    let mut cells = Vec::with_capacity(count);
    for (c, idx) in nodes.into_iter().enumerate() {
        if idx.is_empty() {
            return Err(Error::Resolution {
                reason: format!(
                    "cell {c} has no boundary node; need more than {} nodes for eta = {eta}",
                    b.weights.len()
                ),
            });
        }
        let lo = idx.iter().map(|&i| b.arclength[i] - 0.5 * b.weights[i]).fold(f64::INFINITY, f64::min);
        let measure: f64 = idx.iter().map(|&i| b.weights[i]).sum();
        let diameter = arc_diameter(model, lo, measure);
        let need_ball = eta / 3.0;
        if diameter > eta || measure < need_ball {
            let h = b.weights.iter().cloned().fold(0.0, f64::max);
            return Err(Error::Resolution {
                reason: format!(
                    "cell {c} has diameter {diameter:.4} and measure {measure:.4} at eta = {eta}; \
                     boundary node spacing {h:.4} must be at most {:.4}",
                    0.1 * eta
                ),
            });
        }
        cells.push(Cell { nodes: idx, measure, diameter, component: 0, start: lo, length: measure });
    }
    Ok(BoundaryPartition { eta, cells, node_count: b.weights.len() })
}

/// Extrinsic diameter of a boundary arc.
fn arc_diameter(model: &ModelManifold, start: f64, len: f64) -> f64 {
    match model.kind {
        ModelKind::Interval { .. } => 0.0,
        ModelKind::Disk { radius } => 2.0 * radius * (0.5 * len / radius).min(std::f64::consts::FRAC_PI_2).sin(),
        ModelKind::Rectangle { lx, ly } => {
            let per = 2.0 * (lx + ly);
            let mut pts = vec![model.boundary_point(0, start), model.boundary_point(0, start + len)];
            for corner in [0.0, lx, lx + ly, 2.0 * lx + ly, per] {
                for shift in [0.0, per] {
                    let s = corner + shift;
                    if s > start && s < start + len {
                        pts.push(model.boundary_point(0, s));
                    }
                }
            }
            let mut d: f64 = 0.0;
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
                }
            }
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{build_disk_model, build_interval_model, build_rectangle_model};
    use std::f64::consts::PI;

    #[test]
    fn interval_partition_is_endpoints() {
        let (m, _) = build_interval_model(PI, 4).unwrap();
        let p = make_partition(&m, 0.3).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.cells[0].nodes, vec![0]);
        assert_eq!(p.cells[1].nodes, vec![1]);
    }

    #[test]
    fn unit_square_cells() {
        let (m, _) = build_rectangle_model(1.0, 1.0, 4).unwrap();
        let p = make_partition(&m, 1.0).unwrap();
        assert!((4..=8).contains(&p.len()));
        assert!(p.cells.iter().all(|c| c.diameter <= 1.0));
        let mut all: Vec<usize> = p.cells.iter().flat_map(|c| c.nodes.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..m.boundary.weights.len()).collect::<Vec<_>>());
    }

    #[test]
    fn disk_half_circumference_scale() {
        let (m, _) = build_disk_model(1.0, 4).unwrap();
        let p = make_partition(&m, PI).unwrap();
        assert!(p.len() >= 2);
    }

    #[test]
    fn too_fine_eta_reports_resolution() {
        let (m, _) = build_disk_model(1.0, 4).unwrap();
        assert!(matches!(make_partition(&m, 0.005), Err(Error::Resolution { .. })));
    }
}
