use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use crate::algebra::time_weights;
use crate::forward::{BoundaryPartition, SpectralDataset};

type Temporal = Arc<(DMatrix<f64>, DMatrix<f64>)>;
type FormKey = (usize, u64);

/// Gram matrices `Q` with `vᵀ Q v = ‖W(v)‖²` over `Γ_k × [−a, a]`, built with
/// exactly the quadrature used by [`crate::algebra::h22_norm`].
///
/// `Q = S ∘ Tc + P ∘ (Ts + Tcc)` where `S`, `P` are spatial inner products of
/// traces over `Γ_k` and `Tc`, `Ts`, `Tcc` are weighted time sums of
/// `cos·cos`, `ω ω sin·sin` and `ω² ω² cos·cos`.
pub struct GramCache {
    j: usize,
    dt: f64,
    omega: Vec<f64>,
    spatial: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    temporal: Mutex<HashMap<u64, Temporal>>,
    forms: Mutex<HashMap<FormKey, Arc<DMatrix<f64>>>>,
}

impl GramCache {
    pub fn new(ds: &SpectralDataset, part: &BoundaryPartition, j: usize, dt: f64) -> Self {
        let modes = &ds.modes[..j];
        let omega = modes.iter().map(|m| m.lambda.max(0.0).sqrt()).collect();
        let spatial = (0..=part.len())
            .map(|k| {
                let nodes = part.subset_nodes(k);
                let mut s = DMatrix::zeros(j, j);
                let mut p = DMatrix::zeros(j, j);
                for &x in &nodes {
                    let w = ds.weights[x];
                    for a in 0..j {
                        let ta = modes[a].trace[x];
                        let ga = modes[a].d1.as_ref().map_or(0.0, |d| d[x]);
                        let ha = modes[a].d2.as_ref().map_or(0.0, |d| d[x]);
                        for b in 0..=a {
                            let tb = modes[b].trace[x];
                            let gb = modes[b].d1.as_ref().map_or(0.0, |d| d[x]);
                            let hb = modes[b].d2.as_ref().map_or(0.0, |d| d[x]);
                            p[(a, b)] += w * ta * tb;
                            s[(a, b)] += w * (ta * tb + ga * gb + ha * hb);
                        }
                    }
                }
                symmetrize(&mut s);
                symmetrize(&mut p);
                (s, p)
            })
            .collect();
        GramCache {
            j,
            dt,
            omega,
            spatial,
            temporal: Mutex::new(HashMap::new()),
            forms: Mutex::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.j
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    /// Quadratic form of the trace norm over `Γ_k × [−a, a]`.
    pub fn form(&self, k: usize, a: f64) -> Arc<DMatrix<f64>> {
        let key = (k, a.to_bits());
        if let Some(q) = self.forms.lock().unwrap().get(&key) {
            return q.clone();
        }
        let (tc, tsum) = &*self.temporal(a);
        let (s, p) = &self.spatial[k];
        let q = Arc::new(s.component_mul(tc) + p.component_mul(tsum));
        self.forms.lock().unwrap().entry(key).or_insert(q).clone()
    }

    fn temporal(&self, a: f64) -> Temporal {
        if let Some(t) = self.temporal.lock().unwrap().get(&a.to_bits()) {
            return t.clone();
        }
        let j = self.j;
        let mut tc = DMatrix::zeros(j, j);
        let mut tsum = DMatrix::zeros(j, j);
        let mut c = vec![0.0; j];
        let mut s = vec![0.0; j];
        for (m, w) in time_weights(self.dt, a) {
            let t = m as f64 * self.dt;
            for q in 0..j {
                c[q] = (self.omega[q] * t).cos();
                s[q] = (self.omega[q] * t).sin();
            }
            for a_ in 0..j {
                let (wa, ca, sa) = (self.omega[a_], c[a_], s[a_]);
                for b in 0..=a_ {
                    let (wb, cb, sb) = (self.omega[b], c[b], s[b]);
                    tc[(a_, b)] += w * ca * cb;
                    tsum[(a_, b)] += w * (wa * wb * sa * sb + wa * wa * wb * wb * ca * cb);
                }
            }
        }
        symmetrize(&mut tc);
        symmetrize(&mut tsum);
        let t = Arc::new((tc, tsum));
        self.temporal.lock().unwrap().entry(a.to_bits()).or_insert(t).clone()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for a in 0..n {
        for b in 0..a {
            m[(b, a)] = m[(a, b)];
        }
    }
}
