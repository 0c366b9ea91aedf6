//! Constrained projection onto the admissible wave space and the resulting
//! approximation of `χ_{M_α} u`.

mod gram;
mod solver;

pub use gram::GramCache;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{default_time_step, h22_norm, wave_trace, FourierVector};
use crate::forward::{BoundaryPartition, SpectralDataset};
use crate::{Error, Result};
use solver::{barrier_minimize, Constraint, Quadratic};

/// Caps defining the admissible set for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintThresholds {
    pub h1_bound: f64,
    pub h22_bound: f64,
    pub j: usize,
    pub lambda_j: f64,
    pub big_lambda: f64,
    pub gamma: f64,
    pub eps1: f64,
    pub delta: f64,
    pub c0: f64,
    pub c0_prime: f64,
    /// Whether `‖v‖ ≤ 1` is imposed, which happens for perturbed data.
    pub unit_ball: bool,
}

impl ConstraintThresholds {
    /// Indices `k` with `α_k > 0`; index 0 is the whole boundary.
    pub fn active_set(alpha: &[f64]) -> Vec<usize> {
        alpha.iter().enumerate().filter(|(_, &a)| a > 0.0).map(|(k, _)| k).collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_thresholds(
    j: usize,
    big_lambda: f64,
    gamma: f64,
    eps1: f64,
    delta: f64,
    ds: &SpectralDataset,
    c0: f64,
    c0_prime: f64,
) -> Result<ConstraintThresholds> {
    for (name, v) in [("Lambda", big_lambda), ("gamma", gamma), ("eps1", eps1), ("C0", c0), ("C0_prime", c0_prime)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config { field: name.into(), reason: format!("must be positive, got {v}") });
        }
    }
    if !(delta >= 0.0) {
        return Err(Error::arg("delta", format!("must be nonnegative, got {delta}")));
    }
    if j == 0 || j > ds.len() {
        return Err(Error::Shape { expected: ds.len(), got: j });
    }
    let lambda_j = ds.modes[j - 1].lambda;
    let base = 3.0 * c0 * big_lambda * gamma.powi(-3);
    let h1_sq = base * base + 3.0 * lambda_j.sqrt() * delta;
    let h22 = eps1 + c0_prime * j as f64 * lambda_j.powf(1.5) * delta;
    Ok(ConstraintThresholds {
        h1_bound: h1_sq.sqrt(),
        h22_bound: h22,
        j,
        lambda_j,
        big_lambda,
        gamma,
        eps1,
        delta,
        c0,
        c0_prime,
        unit_ball: delta > 0.0,
    })
}

/// Margin of one constraint; positive means satisfied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub feasible: bool,
    pub slacks: Vec<Slack>,
}

fn slack(name: String, value: f64, bound: f64) -> Slack {
    Slack { name, value, bound, margin: bound - value }
}

/// Direct membership test: H¹ cap, one trace cap per active Γ_k and the unit
/// ball when it is imposed.
pub fn check_membership(
    v: &FourierVector,
    thr: &ConstraintThresholds,
    ds: &SpectralDataset,
    part: &BoundaryPartition,
    alpha: &[f64],
) -> Result<Membership> {
    if alpha.len() != part.len() + 1 {
        return Err(Error::Shape { expected: part.len() + 1, got: alpha.len() });
    }
    let h1 = v
        .coeffs
        .iter()
        .zip(&ds.modes)
        .map(|(c, m)| (1.0 + m.lambda) * c * c)
        .sum::<f64>()
        .sqrt();
    let mut slacks = vec![slack("h1".into(), h1, thr.h1_bound)];
    if thr.unit_ball {
        slacks.push(slack("unit_ball".into(), v.l2_norm(), 1.0));
    }
    let active = ConstraintThresholds::active_set(alpha);
    if !active.is_empty() {
        let horizon = active.iter().map(|&k| alpha[k]).fold(0.0, f64::max);
        let field = wave_trace(v, ds, horizon, default_time_step(ds, v.len()))?;
        for &k in &active {
            let n = h22_norm(&field, &part.subset_nodes(k), alpha[k])?;
            slacks.push(slack(format!("trace[{k}]"), n, thr.h22_bound));
        }
    }
    let feasible = slacks.iter().all(|s| s.margin >= 0.0);
    Ok(Membership { feasible, slacks })
}

/// Barrier-method settings. Stage `s` uses weight
/// `penalty0 · penalty_growth^s` on the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub stages: usize,
    pub penalty0: f64,
    pub penalty_growth: f64,
    pub iters_per_stage: usize,
    /// Initial Newton step length before backtracking.
    pub step: f64,
    /// Stopping threshold on half the squared Newton decrement.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { stages: 12, penalty0: 1.0, penalty_growth: 6.0, iters_per_stage: 500, step: 1.0, tol: 1e-8 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, r: String| Err(Error::Config { field: format!("solver.{f}"), reason: r });
        if self.stages == 0 {
            return bad("stages", "must be at least 1".into());
        }
        if !(self.penalty0 > 0.0) {
            return bad("penalty0", format!("must be positive, got {}", self.penalty0));
        }
        if !(self.penalty_growth > 1.0) {
            return bad("penalty_growth", format!("must exceed 1, got {}", self.penalty_growth));
        }
        if self.iters_per_stage == 0 {
            return bad("iters_per_stage", "must be at least 1".into());
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return bad("step", format!("must lie in (0, 1], got {}", self.step));
        }
        if !(self.tol > 0.0) {
            return bad("tol", format!("must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

/// Result of one constrained projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    pub w: FourierVector,
    pub iterations: usize,
    pub objective: f64,
    /// Bound on the objective suboptimality.
    pub gap: f64,
}

/// Solves `min ‖w − u‖²` over the admissible set, returning a feasible point.
pub fn minimize_over_u(
    u: &FourierVector,
    thr: &ConstraintThresholds,
    ds: &SpectralDataset,
    part: &BoundaryPartition,
    alpha: &[f64],
    cfg: &SolverConfig,
) -> Result<FourierVector> {
    let grams = GramCache::new(ds, part, u.len(), default_time_step(ds, u.len()));
    minimize_with_cache(u, thr, ds, part, alpha, cfg, &grams).map(|m| m.w)
}

/// As [`minimize_over_u`], reusing Gram matrices across calls.
#[allow(clippy::too_many_arguments)]
pub fn minimize_with_cache(
    u: &FourierVector,
    thr: &ConstraintThresholds,
    ds: &SpectralDataset,
    part: &BoundaryPartition,
    alpha: &[f64],
    cfg: &SolverConfig,
    grams: &GramCache,
) -> Result<Minimizer> {
    cfg.validate()?;
    let j = u.len();
    if j != grams.dim() || j > ds.len() {
        return Err(Error::Shape { expected: grams.dim(), got: j });
    }
    if alpha.len() != part.len() + 1 {
        return Err(Error::Shape { expected: part.len() + 1, got: alpha.len() });
    }
    let target = DVector::from_column_slice(&u.coeffs);
    let objective0 = target.norm_squared();
    if thr.h1_bound == 0.0 {
        return Ok(Minimizer { w: FourierVector::zeros(j), iterations: 0, objective: objective0, gap: 0.0 });
    }
    let h1_diag: Vec<f64> = ds.modes[..j].iter().map(|m| 1.0 + m.lambda).collect();
    let ones = vec![1.0; j];
    let active = ConstraintThresholds::active_set(alpha);
    let forms: Vec<_> = active.iter().map(|&k| grams.form(k, alpha[k])).collect();
    let mut cons = vec![Constraint { form: Quadratic::Diagonal(&h1_diag), cap: thr.h1_bound.powi(2) }];
    if thr.unit_ball {
        cons.push(Constraint { form: Quadratic::Diagonal(&ones), cap: 1.0 });
    }
    for q in &forms {
        cons.push(Constraint { form: Quadratic::Dense(q), cap: thr.h22_bound.powi(2) });
    }
    let inside = |w: &DVector<f64>| cons.iter().all(|c| c.value(w) <= c.cap);
    let (w, iterations, gap) = if inside(&target) {
        (target.clone(), 0, 0.0)
    } else {
        let sol = barrier_minimize(&target, &cons, cfg)?;
        (sol.w, sol.iterations, sol.gap)
    };

    // feasibility step against the direct quadrature path
    let mut w = FourierVector::new(w.iter().copied().collect());
    if iterations > 0 {
        let report = check_membership(&w, thr, ds, part, alpha)?;
        let shrink = report
            .slacks
            .iter()
            .filter(|s| s.value > 0.0)
            .map(|s| s.bound / s.value)
            .fold(1.0_f64, f64::min);
        if shrink < 1.0 {
            let s = shrink * (1.0 - 1e-12);
            w.coeffs.iter_mut().for_each(|c| *c *= s);
        }
    }
    let objective: f64 = w.coeffs.iter().zip(&u.coeffs).map(|(a, b)| (a - b).powi(2)).sum();
    if objective > objective0 + 1e-9 {
        return Ok(Minimizer { w: FourierVector::zeros(j), iterations, objective: objective0, gap });
    }
    Ok(Minimizer { w, iterations, objective, gap })
}

/// `b_j = a_j − c_j`.
pub fn cutoff_projection(u: &FourierVector, u_min: &FourierVector) -> Result<FourierVector> {
    if u.len() != u_min.len() {
        return Err(Error::Shape { expected: u.len(), got: u_min.len() });
    }
    Ok(FourierVector::new(u.coeffs.iter().zip(&u_min.coeffs).map(|(a, c)| a - c).collect()))
}
