use nalgebra::{DMatrix, DVector};

use super::SolverConfig;
use crate::{Error, Result};

/// A constraint `wᵀ A w ≤ cap`.
pub(crate) enum Quadratic<'a> {
    Diagonal(&'a [f64]),
    Dense(&'a DMatrix<f64>),
}

pub(crate) struct Constraint<'a> {
    pub form: Quadratic<'a>,
    pub cap: f64,
}

impl Constraint<'_> {
    fn apply(&self, w: &DVector<f64>) -> DVector<f64> {
        match &self.form {
            Quadratic::Diagonal(d) => DVector::from_iterator(w.len(), w.iter().zip(d.iter()).map(|(x, h)| x * h)),
            Quadratic::Dense(q) => *q * w,
        }
    }

    pub fn value(&self, w: &DVector<f64>) -> f64 {
        w.dot(&self.apply(w))
    }

    fn add_hessian(&self, h: &mut DMatrix<f64>, scale: f64) {
        match &self.form {
            Quadratic::Diagonal(d) => {
                for (i, v) in d.iter().enumerate() {
                    h[(i, i)] += scale * v;
                }
            }
            Quadratic::Dense(q) => *h += *q * scale,
        }
    }
}

const ROUNDOFF: f64 = 1e-13;
const MIN_STEP: f64 = 1e-8;

pub(crate) struct Solution {
    pub w: DVector<f64>,
    pub iterations: usize,
    /// Bound on the objective suboptimality, `m/t` at the last stage.
    pub gap: f64,
}

/// Minimises `‖w − a‖²` over the constraints with a log-barrier interior
/// point method, starting from the origin.
///
/// Stage `s` minimises `t_s ‖w − a‖² − Σ log(cap_i − wᵀA_i w)` by damped
/// Newton steps, with `t_s = penalty0 · penalty_growth^s`.
pub(crate) fn barrier_minimize(a: &DVector<f64>, cons: &[Constraint], cfg: &SolverConfig) -> Result<Solution> {
    let n = a.len();
    let mut w = DVector::zeros(n);
    if cons.iter().any(|c| !(c.cap > 0.0)) {
        return Err(Error::Solver("origin is not strictly feasible".into()));
    }
    let m = cons.len() as f64;
    let mut t = cfg.penalty0;
    let mut iterations = 0;
    let barrier = |w: &DVector<f64>, t: f64| -> Option<f64> {
        let mut v = t * (w - a).norm_squared();
        for c in cons {
            let s = c.cap - c.value(w);
            if !(s > 0.0) {
                return None;
            }
            v -= s.ln();
        }
        Some(v)
    };
    for stage in 0..cfg.stages {
        if stage > 0 {
            t *= cfg.penalty_growth;
        }
        for _ in 0..cfg.iters_per_stage {
            iterations += 1;
            let mut grad = (&w - a) * (2.0 * t);
            let mut hess = DMatrix::identity(n, n) * (2.0 * t);
            for c in cons {
                let aw = c.apply(&w);
                let s = c.cap - w.dot(&aw);
                grad += &aw * (2.0 / s);
                c.add_hessian(&mut hess, 2.0 / s);
                hess.ger(4.0 / (s * s), &aw, &aw, 1.0);
            }
            let chol = match hess.clone().cholesky() {
                Some(ch) => ch,
                None => {
                    let ridge = 1e-12 * hess.diagonal().amax().max(1.0);
                    (hess + DMatrix::identity(n, n) * ridge)
                        .cholesky()
                        .ok_or_else(|| Error::Solver("barrier Hessian not positive definite".into()))?
                }
            };
            let dir = -chol.solve(&grad);
            let slope = grad.dot(&dir);
            let f0 = barrier(&w, t).expect("iterate stays strictly feasible");
            // Below ROUNDOFF·|f| the Armijo test only sees cancellation noise.
            if -slope * 0.5 <= cfg.tol.max(ROUNDOFF * f0.abs()) {
                break;
            }
            let mut step = cfg.step;
            let mut moved = false;
            while step > 1e-14 {
                let trial = &w + &dir * step;
                if let Some(f1) = barrier(&trial, t) {
                    if f1 <= f0 + 0.25 * step * slope {
                        w = trial;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved || step < MIN_STEP {
                break;
            }
        }
    }
    Ok(Solution { w, iterations, gap: m / t })
}
