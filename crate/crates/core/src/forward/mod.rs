//! Analytic model manifolds, their exact Neumann boundary spectral data,
//! perturbation of that data, boundary partitions and mesh oracles.

pub mod bessel;
mod oracle;
mod partition;
mod perturb;

pub use oracle::{DistanceTable, 
    true_boundary_distances, true_region_volume, true_volume, GroundTruth, Region,
};
pub use partition::{make_partition, BoundaryPartition, Cell};
pub use perturb::{perturb_dataset, perturb_dataset_with_fields, TraceField};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometry of a model manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
    Disk { radius: f64 },
}

/// Mesh resolution used when building a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshResolution {
    /// Interior cells per unit length (interval, rectangle) or radial cells (disk).
    pub interior: usize,
    /// Total boundary quadrature nodes for curves.
    pub boundary: usize,
}

impl Default for MeshResolution {
    fn default() -> Self {
        MeshResolution { interior: 2048, boundary: 512 }
    }
}

/// Metadata bounds carried for the parameter budget only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricBounds {
    pub k1: f64,
    pub k2: f64,
    pub i0: f64,
    pub r0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorMesh {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Arclength coordinate of each node within its component.
    pub arclength: Vec<f64>,
    pub component: Vec<usize>,
    /// Length of each component (zero for point components).
    pub perimeter: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelManifold {
    pub kind: ModelKind,
    pub n: usize,
    pub diameter: f64,
    pub volume: f64,
    pub boundary_volume: f64,
    pub interior: InteriorMesh,
    pub boundary: BoundaryMesh,
    pub bounds: GeometricBounds,
}

/// Identifies the analytic eigenfunction behind a mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Interval { k: usize },
    Rectangle { kx: usize, ky: usize },
    /// `root` is the zero of `J_m'` (zero for the constant mode).
    Disk { m: usize, s: usize, sine: bool, root: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub lambda: f64,
    pub trace: Vec<f64>,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ModeLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub delta: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDataset {
    pub n: usize,
    pub boundary_nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub arclength: Vec<f64>,
    pub component: Vec<usize>,
    pub perimeter: Vec<f64>,
    pub modes: Vec<Mode>,
    pub provenance: Provenance,
}

impl SpectralDataset {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.provenance.delta == 0.0
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Keeps the first `j` modes.
    pub fn truncated(&self, j: usize) -> SpectralDataset {
        let mut out = self.clone();
        out.modes.truncate(j);
        out
    }
}

fn check_j(j: usize) -> Result<()> {
    if j < 2 {
        return Err(Error::arg("J", format!("need at least 2 modes, got {j}")));
    }
    Ok(())
}

fn check_len(field: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::arg(field, format!("must be positive, got {v}")));
    }
    Ok(())
}

pub fn build_interval_model(length: f64, j: usize) -> Result<(ModelManifold, SpectralDataset)> {
    build_interval_model_with(length, j, MeshResolution::default())
}

pub fn build_interval_model_with(
    length: f64,
    j: usize,
    res: MeshResolution,
) -> Result<(ModelManifold, SpectralDataset)> {
    check_len("length", length)?;
    check_j(j)?;
    let m = res.interior.max(16);
    let h = length / m as f64;
    let interior = InteriorMesh {
        points: (0..m).map(|i| [(i as f64 + 0.5) * h, 0.0]).collect(),
        weights: vec![h; m],
    };
    let boundary = BoundaryMesh {
        points: vec![[0.0, 0.0], [length, 0.0]],
        weights: vec![1.0, 1.0],
        arclength: vec![0.0, 0.0],
        component: vec![0, 1],
        perimeter: vec![0.0, 0.0],
    };
    let model = ModelManifold {
        kind: ModelKind::Interval { length },
        n: 1,
        diameter: length,
        volume: length,
        boundary_volume: 2.0,
        interior,
        boundary,
        bounds: GeometricBounds { k1: 0.0, k2: 0.0, i0: length / 2.0, r0: length / 2.0 },
    };
    let labels = (0..j).map(|k| ModeLabel::Interval { k }).collect();
    let ds = model.dataset_from_labels(labels);
    Ok((model, ds))
}

pub fn build_rectangle_model(lx: f64, ly: f64, j: usize) -> Result<(ModelManifold, SpectralDataset)> {
    build_rectangle_model_with(lx, ly, j, MeshResolution { interior: 128, boundary: 512 })
}

pub fn build_rectangle_model_with(
    lx: f64,
    ly: f64,
    j: usize,
    res: MeshResolution,
) -> Result<(ModelManifold, SpectralDataset)> {
    check_len("lx", lx)?;
    check_len("ly", ly)?;
    check_j(j)?;
    let scale = lx.max(ly);
    let nx = ((res.interior as f64 * lx / scale).round() as usize).max(4);
    let ny = ((res.interior as f64 * ly / scale).round() as usize).max(4);
    let (hx, hy) = (lx / nx as f64, ly / ny as f64);
    let mut points = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            points.push([(ix as f64 + 0.5) * hx, (iy as f64 + 0.5) * hy]);
        }
    }
    let interior = InteriorMesh { weights: vec![hx * hy; points.len()], points };

    let perimeter = 2.0 * (lx + ly);
    let sides = [lx, ly, lx, ly];
    let mut bpts = Vec::new();
    let mut bw = Vec::new();
    let mut arc = Vec::new();
    let mut s0 = 0.0;
    for (side, &len) in sides.iter().enumerate() {
        let cnt = ((res.boundary as f64 * len / perimeter).round() as usize).max(2);
        let hs = len / cnt as f64;
        for i in 0..cnt {
            let t = (i as f64 + 0.5) * hs;
            let p = match side {
                0 => [t, 0.0],
                1 => [lx, t],
                2 => [lx - t, ly],
                _ => [0.0, ly - t],
            };
            bpts.push(p);
            bw.push(hs);
            arc.push(s0 + t);
        }
        s0 += len;
    }
    let nb = bpts.len();
    let boundary = BoundaryMesh {
        points: bpts,
        weights: bw,
        arclength: arc,
        component: vec![0; nb],
        perimeter: vec![perimeter],
    };
    let model = ModelManifold {
        kind: ModelKind::Rectangle { lx, ly },
        n: 2,
        diameter: lx.hypot(ly),
        volume: lx * ly,
        boundary_volume: perimeter,
        interior,
        boundary,
        bounds: GeometricBounds { k1: 0.0, k2: 0.0, i0: lx.min(ly) / 2.0, r0: lx.min(ly) / 2.0 },
    };

    // enumerate lattice modes until at least j fall below the cutoff
    let mut cutoff = (4.0 * PI * j as f64 / (lx * ly)).max(1.0) * 1.5;
    let labels = loop {
        let kxm = ((cutoff.sqrt() * lx / PI).floor() as usize) + 1;
        let kym = ((cutoff.sqrt() * ly / PI).floor() as usize) + 1;
        let mut cand: Vec<(f64, usize, usize)> = Vec::new();
        for kx in 0..=kxm {
            for ky in 0..=kym {
                let lam = rect_lambda(lx, ly, kx, ky);
                if lam <= cutoff {
                    cand.push((lam, kx, ky));
                }
            }
        }
        if cand.len() >= j {
            // equal eigenvalues ordered with kx varying fastest: (1,0) before (0,1)
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
            break cand
                .into_iter()
                .take(j)
                .map(|(_, kx, ky)| ModeLabel::Rectangle { kx, ky })
                .collect::<Vec<_>>();
        }
        cutoff *= 1.5;
    };
    let ds = model.dataset_from_labels(labels);
    Ok((model, ds))
}

fn rect_lambda(lx: f64, ly: f64, kx: usize, ky: usize) -> f64 {
    let a = kx as f64 * PI / lx;
    let b = ky as f64 * PI / ly;
    a * a + b * b
}

pub fn build_disk_model(radius: f64, j: usize) -> Result<(ModelManifold, SpectralDataset)> {
    build_disk_model_with(radius, j, MeshResolution { interior: 96, boundary: 512 })
}

pub fn build_disk_model_with(
    radius: f64,
    j: usize,
    res: MeshResolution,
) -> Result<(ModelManifold, SpectralDataset)> {
    check_len("radius", radius)?;
    check_j(j)?;
    let nr = res.interior.max(4);
    let nt = 4 * nr;
    let (hr, ht) = (radius / nr as f64, 2.0 * PI / nt as f64);
    let mut points = Vec::with_capacity(nr * nt);
    let mut weights = Vec::with_capacity(nr * nt);
    for ir in 0..nr {
        let r = (ir as f64 + 0.5) * hr;
        for it in 0..nt {
            let th = (it as f64 + 0.5) * ht;
            points.push([r * th.cos(), r * th.sin()]);
            weights.push(r * hr * ht);
        }
    }
    let interior = InteriorMesh { points, weights };
    let nb = res.boundary.max(8);
    let hb = 2.0 * PI / nb as f64;
    let mut bpts = Vec::with_capacity(nb);
    let mut arc = Vec::with_capacity(nb);
    for k in 0..nb {
        let th = (k as f64 + 0.5) * hb;
        bpts.push([radius * th.cos(), radius * th.sin()]);
        arc.push(radius * th);
    }
    let boundary = BoundaryMesh {
        points: bpts,
        weights: vec![radius * hb; nb],
        arclength: arc,
        component: vec![0; nb],
        perimeter: vec![2.0 * PI * radius],
    };
    let model = ModelManifold {
        kind: ModelKind::Disk { radius },
        n: 2,
        diameter: 2.0 * radius,
        volume: PI * radius * radius,
        boundary_volume: 2.0 * PI * radius,
        interior,
        boundary,
        bounds: GeometricBounds {
            k1: 0.0,
            k2: 1.0 / radius,
            i0: radius,
            r0: radius,
        },
    };

    // Weyl: λ_J ≈ 4J/R², so the J-th root sits near 2√J
    let mut xmax = 2.0 * (j as f64).sqrt() + 4.0;
    let labels = loop {
        let mut cand: Vec<(f64, usize, usize, bool)> = vec![(0.0, 0, 0, false)];
        let mut m = 0;
        while (m as f64) < xmax {
            let zs = bessel::bessel_j_prime_zeros(m, xmax)?;
            if zs.is_empty() && m > 0 {
                break;
            }
            for (s, &x) in zs.iter().enumerate() {
                cand.push((x, m, s + 1, false));
                if m > 0 {
                    cand.push((x, m, s + 1, true));
                }
            }
            m += 1;
        }
        if cand.len() >= j {
            cand.sort_by(|a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3))
            });
            break cand
                .into_iter()
                .take(j)
                .map(|(root, m, s, sine)| ModeLabel::Disk { m, s, sine, root })
                .collect::<Vec<_>>();
        }
        xmax *= 1.5;
    };
    let ds = model.dataset_from_labels(labels);
    Ok((model, ds))
}

/// Disk eigenfunction normalisation `N` with `∫ (N J_m(kr) cos mθ)² = 1`.
fn disk_norm(radius: f64, m: usize, root: f64) -> f64 {
    if root == 0.0 {
        return 1.0 / (PI.sqrt() * radius);
    }
    let jm = bessel::bessel_j(m, root);
    let cm = if m == 0 { 2.0 * PI } else { PI };
    let mr = m as f64 / root;
    let radial = 0.5 * radius * radius * (1.0 - mr * mr) * jm * jm;
    1.0 / (cm * radial).sqrt()
}

impl ModelManifold {
    pub fn lambda_of(&self, label: &ModeLabel) -> f64 {
        match (&self.kind, label) {
            (ModelKind::Interval { length }, ModeLabel::Interval { k }) => {
                let w = *k as f64 * PI / length;
                w * w
            }
            (ModelKind::Rectangle { lx, ly }, ModeLabel::Rectangle { kx, ky }) => {
                rect_lambda(*lx, *ly, *kx, *ky)
            }
            (ModelKind::Disk { radius }, ModeLabel::Disk { root, .. }) => {
                let w = root / radius;
                w * w
            }
            _ => panic!("mode label does not match model kind"),
        }
    }

    /// Interior value of the eigenfunction named by `label` at `p`.
    pub fn eigenfunction(&self, label: &ModeLabel, p: [f64; 2]) -> f64 {
        match (&self.kind, label) {
            (ModelKind::Interval { length }, ModeLabel::Interval { k }) => {
                if *k == 0 {
                    1.0 / length.sqrt()
                } else {
                    (2.0 / length).sqrt() * (*k as f64 * PI * p[0] / length).cos()
                }
            }
            (ModelKind::Rectangle { lx, ly }, ModeLabel::Rectangle { kx, ky }) => {
                let (a, b) = rect_factors(*lx, *ly, *kx, *ky);
                a * b
                    * (*kx as f64 * PI * p[0] / lx).cos()
                    * (*ky as f64 * PI * p[1] / ly).cos()
            }
            (ModelKind::Disk { radius }, ModeLabel::Disk { m, sine, root, .. }) => {
                let nrm = disk_norm(*radius, *m, *root);
                if *root == 0.0 {
                    return nrm;
                }
                let r = p[0].hypot(p[1]);
                let th = p[1].atan2(p[0]);
                let ang = if *sine { (*m as f64 * th).sin() } else { (*m as f64 * th).cos() };
                nrm * bessel::bessel_j(*m, root * r / radius) * ang
            }
            _ => panic!("mode label does not match model kind"),
        }
    }

    /// Boundary trace with first and second tangential derivatives.
    fn boundary_mode(&self, label: &ModeLabel) -> (Vec<f64>, Option<Vec<f64>>, Option<Vec<f64>>) {
        let pts = &self.boundary.points;
        match (&self.kind, label) {
            (ModelKind::Interval { .. }, _) => {
                (pts.iter().map(|p| self.eigenfunction(label, *p)).collect(), None, None)
            }
            (ModelKind::Rectangle { lx, ly }, ModeLabel::Rectangle { kx, ky }) => {
                let (fa, fb) = rect_factors(*lx, *ly, *kx, *ky);
                let a = *kx as f64 * PI / lx;
                let b = *ky as f64 * PI / ly;
                let per = [*lx, *ly, *lx, *ly];
                let mut tr = Vec::with_capacity(pts.len());
                let mut d1 = Vec::with_capacity(pts.len());
                let mut d2 = Vec::with_capacity(pts.len());
                for (idx, p) in pts.iter().enumerate() {
                    let (cx, sx) = ((a * p[0]).cos(), (a * p[0]).sin());
                    let (cy, sy) = ((b * p[1]).cos(), (b * p[1]).sin());
                    let v = fa * fb * cx * cy;
                    let dx = -fa * fb * a * sx * cy;
                    let dy = -fa * fb * b * cx * sy;
                    let side = rect_side(self.boundary.arclength[idx], &per);
                    let (t1, t2) = match side {
                        0 => (dx, -a * a * v),
                        1 => (dy, -b * b * v),
                        2 => (-dx, -a * a * v),
                        _ => (-dy, -b * b * v),
                    };
                    tr.push(v);
                    d1.push(t1);
                    d2.push(t2);
                }
                (tr, Some(d1), Some(d2))
            }
            (ModelKind::Disk { radius }, ModeLabel::Disk { m, sine, root, .. }) => {
                let nrm = disk_norm(*radius, *m, *root);
                let amp = if *root == 0.0 { nrm } else { nrm * bessel::bessel_j(*m, *root) };
                let mf = *m as f64;
                let mut tr = Vec::with_capacity(pts.len());
                let mut d1 = Vec::with_capacity(pts.len());
                let mut d2 = Vec::with_capacity(pts.len());
                for p in pts {
                    let th = p[1].atan2(p[0]);
                    let (c, s) = ((mf * th).cos(), (mf * th).sin());
                    let (v, dv) = if *sine {
                        (amp * s, amp * mf / radius * c)
                    } else {
                        (amp * c, -amp * mf / radius * s)
                    };
                    tr.push(v);
                    d1.push(dv);
                    d2.push(-mf * mf / (radius * radius) * v);
                }
                (tr, Some(d1), Some(d2))
            }
            _ => panic!("mode label does not match model kind"),
        }
    }

    fn dataset_from_labels(&self, labels: Vec<ModeLabel>) -> SpectralDataset {
        let modes = labels
            .iter()
            .map(|l| {
                let (trace, d1, d2) = self.boundary_mode(l);
                Mode { lambda: self.lambda_of(l), trace, d1, d2, label: Some(*l) }
            })
            .collect();
        SpectralDataset {
            n: self.n,
            boundary_nodes: self
                .boundary
                .points
                .iter()
                .map(|p| p[..self.n].to_vec())
                .collect(),
            weights: self.boundary.weights.clone(),
            arclength: self.boundary.arclength.clone(),
            component: self.boundary.component.clone(),
            perimeter: self.boundary.perimeter.clone(),
            modes,
            provenance: Provenance { delta: 0.0, seed: None },
        }
    }

    /// Distance from an interior point to the whole boundary.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        match self.kind {
            ModelKind::Interval { length } => p[0].min(length - p[0]).max(0.0),
            ModelKind::Rectangle { lx, ly } => {
                p[0].min(lx - p[0]).min(p[1]).min(ly - p[1]).max(0.0)
            }
            ModelKind::Disk { radius } => (radius - p[0].hypot(p[1])).max(0.0),
        }
    }

    /// Point on the boundary at arclength `s` of component `comp`.
    pub fn boundary_point(&self, comp: usize, s: f64) -> [f64; 2] {
        match self.kind {
            ModelKind::Interval { length } => {
                if comp == 0 {
                    [0.0, 0.0]
                } else {
                    [length, 0.0]
                }
            }
            ModelKind::Rectangle { lx, ly } => {
                let per = 2.0 * (lx + ly);
                let s = s.rem_euclid(per);
                if s <= lx {
                    [s, 0.0]
                } else if s <= lx + ly {
                    [lx, s - lx]
                } else if s <= 2.0 * lx + ly {
                    [lx - (s - lx - ly), ly]
                } else {
                    [0.0, ly - (s - 2.0 * lx - ly)]
                }
            }
            ModelKind::Disk { radius } => {
                let th = s / radius;
                [radius * th.cos(), radius * th.sin()]
            }
        }
    }

    /// Samples a function on the interior quadrature mesh.
    pub fn sample_interior(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.interior.points.iter().map(|p| f(*p)).collect()
    }
}

fn rect_factors(lx: f64, ly: f64, kx: usize, ky: usize) -> (f64, f64) {
    let a = if kx == 0 { (1.0 / lx).sqrt() } else { (2.0 / lx).sqrt() };
    let b = if ky == 0 { (1.0 / ly).sqrt() } else { (2.0 / ly).sqrt() };
    (a, b)
}

fn rect_side(s: f64, per: &[f64; 4]) -> usize {
    let mut acc = 0.0;
    for (i, len) in per.iter().enumerate() {
        acc += len;
        if s < acc {
            return i;
        }
    }
    3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let (m, ds) = build_interval_model(PI, 4).unwrap();
        let lam = ds.lambdas();
        for (a, b) in lam.iter().zip([0.0, 1.0, 4.0, 9.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((ds.modes[0].trace[0] - PI.powf(-0.5)).abs() < 1e-15);
        assert!((ds.modes[1].trace[1] + (2.0 / PI).sqrt()).abs() < 1e-15);
        let w: f64 = m.interior.weights.iter().sum();
        assert!((w - PI).abs() < 1e-12);
        let (_, ds1) = build_interval_model(1.0, 2).unwrap();
        assert!((ds1.modes[1].lambda - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_interval_model(0.0, 4).is_err());
        assert!(build_interval_model(1.0, 1).is_err());
        assert!(build_rectangle_model(-1.0, 1.0, 4).is_err());
        assert!(build_disk_model(0.0, 4).is_err());
    }

    #[test]
    fn rectangle_order_and_count() {
        let (_, ds) = build_rectangle_model(PI, PI, 4).unwrap();
        let labels: Vec<_> = ds.modes.iter().map(|m| m.label.unwrap()).collect();
        assert_eq!(
            labels,
            vec![
                ModeLabel::Rectangle { kx: 0, ky: 0 },
                ModeLabel::Rectangle { kx: 1, ky: 0 },
                ModeLabel::Rectangle { kx: 0, ky: 1 },
                ModeLabel::Rectangle { kx: 1, ky: 1 },
            ]
        );
        let (_, ds) = build_rectangle_model(PI, PI, 1000).unwrap();
        assert_eq!(ds.modes.iter().filter(|m| m.lambda <= 1.0).count(), 3);
        let (_, ds) = build_rectangle_model(1.0, 1.0, 2).unwrap();
        assert!(ds.modes[0].trace.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn disk_constant_mode_and_scaling() {
        let (_, d1) = build_disk_model(1.0, 2).unwrap();
        assert_eq!(d1.modes[0].lambda, 0.0);
        assert!((d1.modes[0].trace[3] - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((d1.modes[1].lambda - 3.389_957_716_671_888).abs() < 1e-9);
        let (_, d2) = build_disk_model(2.0, 2).unwrap();
        assert!((d2.modes[1].lambda - d1.modes[1].lambda / 4.0).abs() < 1e-12);
    }

    #[test]
    fn interior_weights_match_volume() {
        let (m, _) = build_rectangle_model(2.0, 1.0, 4).unwrap();
        let w: f64 = m.interior.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-9);
        let (m, _) = build_disk_model(1.5, 4).unwrap();
        let w: f64 = m.interior.weights.iter().sum();
        assert!((w / m.volume - 1.0).abs() < 1e-6);
    }
}
