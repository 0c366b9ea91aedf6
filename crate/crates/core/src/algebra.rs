//! Spectral Sobolev norms, boundary wave traces and the space-time norm of
//! traces over Γ × [−a, a].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::forward::{ModelManifold, SpectralDataset};
use crate::{Error, Result};

/// Coefficients of `Σ v_j φ_j` in the orthonormal eigenbasis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierVector {
    pub coeffs: Vec<f64>,
}

impl FourierVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        FourierVector { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        FourierVector { coeffs: vec![0.0; len] }
    }

    /// The unit vector `e_{j+1}` (zero-based `j`).
    pub fn basis(j: usize, len: usize) -> Self {
        let mut v = Self::zeros(len);
        v.coeffs[j] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn check_fits(v: &FourierVector, ds: &SpectralDataset) -> Result<()> {
    if v.len() > ds.len() {
        return Err(Error::Shape { expected: ds.len(), got: v.len() });
    }
    if v.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::arg("v", "coefficients must be finite"));
    }
    Ok(())
}

/// `(Σ_j (1 + λ_j^s) v_j²)^{1/2}`.
pub fn sobolev_norm(v: &FourierVector, ds: &SpectralDataset, s: f64) -> Result<f64> {
    if !(1.0..=3.0).contains(&s) {
        return Err(Error::arg("s", format!("order must lie in [1, 3], got {s}")));
    }
    check_fits(v, ds)?;
    Ok(v.coeffs
        .iter()
        .zip(&ds.modes)
        .map(|(c, m)| (1.0 + m.lambda.max(0.0).powf(s)) * c * c)
        .sum::<f64>()
        .sqrt())
}

/// Default time step `π/(8√λ_J)` for the first `j` modes.
pub fn default_time_step(ds: &SpectralDataset, j: usize) -> f64 {
    let top = ds.modes[..j.min(ds.len())].iter().map(|m| m.lambda).fold(0.0, f64::max);
    if top > 0.0 {
        PI / (8.0 * top.sqrt())
    } else {
        0.1
    }
}

/// Wave trace `Σ v_j cos(√λ_j t) φ_j` and its derivatives on boundary nodes
/// at times `m Δt`, `|m| ≤ ⌈T/Δt⌉`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTimeField {
    pub n: usize,
    pub dt: f64,
    /// Time nodes, symmetric about zero.
    pub times: Vec<f64>,
    /// Boundary measure weights of the nodes.
    pub weights: Vec<f64>,
    /// Node-major grids of shape `nodes × times`.
    pub values: Vec<f64>,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
    pub dt1: Vec<f64>,
    pub dt2: Vec<f64>,
}

impl BoundaryTimeField {
    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    /// Index of time node `t = m Δt`.
    fn offset(&self) -> usize {
        self.steps() / 2
    }

    pub fn value(&self, node: usize, m: i64) -> f64 {
        self.values[node * self.steps() + (self.offset() as i64 + m) as usize]
    }

    pub fn max_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn scaled(&self, c: f64) -> BoundaryTimeField {
        let sc = |v: &Vec<f64>| v.iter().map(|x| c * x).collect::<Vec<_>>();
        BoundaryTimeField {
            n: self.n,
            dt: self.dt,
            times: self.times.clone(),
            weights: self.weights.clone(),
            values: sc(&self.values),
            d1: self.d1.as_ref().map(sc),
            d2: self.d2.as_ref().map(sc),
            dt1: sc(&self.dt1),
            dt2: sc(&self.dt2),
        }
    }
}

pub fn wave_trace(v: &FourierVector, ds: &SpectralDataset, t_max: f64, dt: f64) -> Result<BoundaryTimeField> {
    check_fits(v, ds)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::arg("T", format!("must be positive, got {t_max}")));
    }
    let j = v.len();
    let top = ds.modes[..j].iter().map(|m| m.lambda).fold(0.0, f64::max);
    if !(dt > 0.0) || dt * top.sqrt() > PI / 4.0 * (1.0 + 1e-12) {
        return Err(Error::arg("dt", format!("time step {dt} violates the guard pi/(4 sqrt(lambda_J))")));
    }
    let modes = &ds.modes[..j];
    let need_tangential = ds.n == 2;
    if need_tangential && modes.iter().any(|m| m.d1.is_none() || m.d2.is_none()) {
        return Err(Error::Missing("tangential derivative arrays for a surface dataset".into()));
    }
    let half = (t_max / dt - 1e-9).ceil().max(1.0) as i64;
    let times: Vec<f64> = (-half..=half).map(|m| m as f64 * dt).collect();
    let nt = times.len();
    let omega: Vec<f64> = modes.iter().map(|m| m.lambda.max(0.0).sqrt()).collect();
    let mut cos = vec![0.0; nt * j];
    let mut sin = vec![0.0; nt * j];
    for (m, &t) in times.iter().enumerate() {
        for (q, &w) in omega.iter().enumerate() {
            cos[m * j + q] = (w * t).cos();
            sin[m * j + q] = (w * t).sin();
        }
    }
    let nodes = ds.node_count();
    let mut values = vec![0.0; nodes * nt];
    let mut dt1 = vec![0.0; nodes * nt];
    let mut dt2 = vec![0.0; nodes * nt];
    let mut d1 = need_tangential.then(|| vec![0.0; nodes * nt]);
    let mut d2 = need_tangential.then(|| vec![0.0; nodes * nt]);
    let mut a0 = vec![0.0; j];
    let mut a1 = vec![0.0; j];
    let mut a2 = vec![0.0; j];
    let mut g1 = vec![0.0; j];
    let mut g2 = vec![0.0; j];
    for x in 0..nodes {
        for q in 0..j {
            let c = v.coeffs[q];
            a0[q] = c * modes[q].trace[x];
            a1[q] = -c * omega[q] * modes[q].trace[x];
            a2[q] = -c * omega[q] * omega[q] * modes[q].trace[x];
            if need_tangential {
                g1[q] = c * modes[q].d1.as_ref().unwrap()[x];
                g2[q] = c * modes[q].d2.as_ref().unwrap()[x];
            }
        }
        for m in 0..nt {
            let cr = &cos[m * j..(m + 1) * j];
            let sr = &sin[m * j..(m + 1) * j];
            let idx = x * nt + m;
            values[idx] = dot(&a0, cr);
            dt1[idx] = dot(&a1, sr);
            dt2[idx] = dot(&a2, cr);
            if let (Some(d1), Some(d2)) = (d1.as_mut(), d2.as_mut()) {
                d1[idx] = dot(&g1, cr);
                d2[idx] = dot(&g2, cr);
            }
        }
    }
    Ok(BoundaryTimeField { n: ds.n, dt, times, weights: ds.weights.clone(), values, d1, d2, dt1, dt2 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weights `w_m` with `Σ_m w_m g(mΔt) = ∫_{−a}^{a} ĝ(t) dt`, where `ĝ` is the
/// piecewise-linear interpolant of `g` on the grid `mΔt`.
///
/// When `a` is a grid point this is the trapezoidal rule.
pub fn time_weights(dt: f64, a: f64) -> Vec<(i64, f64)> {
    if a <= 0.0 {
        return Vec::new();
    }
    let top = (a / dt).ceil() as i64;
    let mut out = Vec::with_capacity(2 * top as usize + 1);
    for m in -top..=top {
        let c = m as f64 * dt;
        let w = hat_integral(c, dt, -a, a);
        if w > 0.0 {
            out.push((m, w));
        }
    }
    out
}

fn hat_integral(c: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    // rising half on [c − h, c]
    let (p, q) = ((c - h).max(lo), c.min(hi));
    if q > p {
        total += ((q - c + h).powi(2) - (p - c + h).powi(2)) / (2.0 * h);
    }
    // falling half on [c, c + h]
    let (p, q) = (c.max(lo), (c + h).min(hi));
    if q > p {
        total += ((c + h - p).powi(2) - (c + h - q).powi(2)) / (2.0 * h);
    }
    total
}

/// `(∫_{−a}^{a} ‖u‖²_{H²(Γ)} + ‖∂_t u‖²_{L²(Γ)} + ‖∂_t² u‖²_{L²(Γ)} dt)^{1/2}`.
///
/// On point boundaries `H²(Γ)` is the absolute value at the point.
pub fn h22_norm(field: &BoundaryTimeField, subset: &[usize], a: f64) -> Result<f64> {
    if a > field.max_time() * (1.0 + 1e-12) {
        return Err(Error::arg("a", format!("window {a} exceeds field horizon {}", field.max_time())));
    }
    if let Some(&bad) = subset.iter().find(|&&x| x >= field.nodes()) {
        return Err(Error::Shape { expected: field.nodes(), got: bad + 1 });
    }
    let nt = field.steps();
    let off = field.offset() as i64;
    let mut total = 0.0;
    for (m, w) in time_weights(field.dt, a) {
        let col = (off + m) as usize;
        let mut g = 0.0;
        for &x in subset {
            let idx = x * nt + col;
            let mut s = field.values[idx].powi(2) + field.dt1[idx].powi(2) + field.dt2[idx].powi(2);
            if let (Some(d1), Some(d2)) = (&field.d1, &field.d2) {
                s += d1[idx].powi(2) + d2[idx].powi(2);
            }
            g += field.weights[x] * s;
        }
        total += w * g;
    }
    Ok(total.sqrt())
}

/// First Fourier coefficients of interior samples, `a_j = Σ w(x) u(x) φ_j(x)`.
pub fn project_samples(u: &[f64], model: &ModelManifold, ds: &SpectralDataset) -> Result<FourierVector> {
    let mesh = &model.interior;
    if u.len() != mesh.weights.len() {
        return Err(Error::Shape { expected: mesh.weights.len(), got: u.len() });
    }
    let coeffs = ds
        .modes
        .iter()
        .map(|m| {
            let label = m.label.ok_or_else(|| Error::Missing("mode label for interior evaluation".into()))?;
            Ok(mesh
                .points
                .iter()
                .zip(&mesh.weights)
                .zip(u)
                .map(|((p, w), uv)| w * uv * model.eigenfunction(&label, *p))
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FourierVector { coeffs })
}
