use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Provenance, SpectralDataset};
use crate::{Error, Result};

/// Highest trigonometric order of an injected trace field.
pub const FIELD_ORDER: usize = 8;

/// Fraction of δ that the certified field norm is scaled to.
const FIELD_FILL: f64 = 0.9;

/// Smooth perturbation added to one boundary trace.
///
/// On a curve of length `period` the field is
/// `Σ_m a_m cos(ω_m s) + b_m sin(ω_m s)` with `ω_m = 2πm/period`; on point
/// components it is a constant per component.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceField {
    pub period: Vec<f64>,
    /// `coeffs[component][m] = (a_m, b_m)`.
    pub coeffs: Vec<Vec<(f64, f64)>>,
}

impl TraceField {
    /// Value, first and second arclength derivative at `s` on `component`.
    pub fn eval(&self, component: usize, s: f64) -> (f64, f64, f64) {
        let per = self.period[component];
        let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for (m, &(a, b)) in self.coeffs[component].iter().enumerate() {
            if m == 0 {
                f += a;
                continue;
            }
            let w = 2.0 * PI * m as f64 / per;
            let (c, sn) = ((w * s).cos(), (w * s).sin());
            f += a * c + b * sn;
            d1 += w * (-a * sn + b * c);
            d2 += -w * w * (a * c + b * sn);
        }
        (f, d1, d2)
    }

    /// Certified bound on sup + Lipschitz constant + second-derivative sup.
    pub fn certified_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.period)
            .map(|(cs, &per)| {
                cs.iter()
                    .enumerate()
                    .map(|(m, &(a, b))| {
                        let w = if m == 0 { 0.0 } else { 2.0 * PI * m as f64 / per };
                        a.hypot(b) * (1.0 + w + w * w)
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

pub fn perturb_dataset(ds: &SpectralDataset, delta: f64, seed: u64) -> Result<SpectralDataset> {
    perturb_dataset_with_fields(ds, delta, seed).map(|(d, _)| d)
}

/// Perturbs exact data into a δ-approximation and returns the injected
/// trace fields (`None` for modes left untouched).
pub fn perturb_dataset_with_fields(
    ds: &SpectralDataset,
    delta: f64,
    seed: u64,
) -> Result<(SpectralDataset, Vec<Option<TraceField>>)> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::arg("delta", format!("must be nonnegative, got {delta}")));
    }
    if !ds.is_exact() {
        return Err(Error::arg("ds", "perturbation needs exact data"));
    }
    let jn = ds.len();
    if delta == 0.0 {
        return Ok((ds.clone(), vec![None; jn]));
    }
    let jmax = jn.min((1.0 / delta).floor() as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ds.clone();
    out.provenance = Provenance { delta, seed: Some(seed) };

    // eigenvalue shifts, one per eigenspace, keeping the ordering intact
    let roots: Vec<f64> = ds.modes.iter().map(|m| m.lambda.max(0.0).sqrt()).collect();
    let groups = eigen_groups(&ds.lambdas());
    for (g, range) in groups.iter().enumerate() {
        let draw: f64 = rng.random_range(-1.0..1.0);
        if g == 0 || range.end > jmax {
            continue;
        }
        let here = roots[range.start];
        let prev = roots[groups[g - 1].start];
        let next = groups.get(g + 1).map(|r| roots[r.start]).unwrap_or(f64::INFINITY);
        let room = delta.min(0.5 * (here - prev)).min(0.5 * (next - here)) * 0.999;
        let shifted = here + room * draw;
        for j in range.clone() {
            out.modes[j].lambda = shifted * shifted;
        }
    }

    let comps = ds.perimeter.len();
    let mut fields = vec![None; jn];
    for (j, slot) in fields.iter_mut().enumerate().take(jmax) {
        let order = if j == 0 || ds.n == 1 { 0 } else { FIELD_ORDER };
        let mut coeffs: Vec<Vec<(f64, f64)>> = (0..comps)
            .map(|_| {
                (0..=order)
                    .map(|m| {
                        let a = rng.random_range(-1.0..1.0);
                        let b = if m == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                        (a, b)
                    })
                    .collect()
            })
            .collect();
        if j == 0 {
            // φ₁ stays constant across the boundary
            let c = coeffs[0][0].0;
            for cs in coeffs.iter_mut() {
                cs[0].0 = c;
            }
        }
        let mut field = TraceField { period: ds.perimeter.clone(), coeffs };
        let norm = field.certified_norm();
        if norm > 0.0 {
            let scale = FIELD_FILL * delta / norm;
            for cs in field.coeffs.iter_mut() {
                for c in cs.iter_mut() {
                    c.0 *= scale;
                    c.1 *= scale;
                }
            }
        }
        let mode = &mut out.modes[j];
        for i in 0..ds.node_count() {
            let (f, f1, f2) = field.eval(ds.component[i], ds.arclength[i]);
            mode.trace[i] += f;
            if let Some(d) = mode.d1.as_mut() {
                d[i] += f1;
            }
            if let Some(d) = mode.d2.as_mut() {
                d[i] += f2;
            }
        }
        *slot = Some(field);
    }
    Ok((out, fields))
}

/// Consecutive index ranges sharing one eigenvalue.
pub(crate) fn eigen_groups(lambdas: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for j in 1..=lambdas.len() {
        let split = j == lambdas.len() || {
            let (a, b) = (lambdas[j - 1], lambdas[j]);
            (b - a).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0)
        };
        if split {
            out.push(start..j);
            start = j;
        }
    }
    out
}
