//! Parameter formulas: the unique-continuation error ε₂ and the cascade
//! η → (ε, γ, h, ε₁, λ_J, J, δ).
//!
//! The cascade is doubly exponential, so every output is carried as its
//! natural logarithm in a [`Magnitude`], a value of the form
//! `sign · exp^depth(top)`.

use std::f64::consts::{LN_10, LN_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest argument with a finite `f64` exponential.
const EXP_MAX: f64 = 709.0;

/// `sign · exp(exp(…exp(top)))` with `depth` exponentials; at depth 0 the
/// value is `sign · top` with `top ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    pub sign: i8,
    pub depth: u8,
    pub top: f64,
}

impl Magnitude {
    pub fn from_f64(x: f64) -> Self {
        let sign = if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 };
        Magnitude { sign, depth: 0, top: x.abs() }
    }

    /// `sign · exp(x)`, staying at depth 0 when representable.
    fn exp_signed(sign: i8, x: f64) -> Self {
        if x <= EXP_MAX {
            Magnitude::from_f64(sign as f64 * x.exp())
        } else {
            Magnitude { sign, depth: 1, top: x }
        }
    }

    /// Nearest `f64`; overflow gives ±∞.
    pub fn to_f64(&self) -> f64 {
        let s = self.sign as f64;
        match self.depth {
            0 => s * self.top,
            1 => s * self.top.exp(),
            _ => s * f64::INFINITY,
        }
    }

    pub fn is_finite_f64(&self) -> bool {
        self.to_f64().is_finite()
    }

    /// `ln |value|`.
    pub fn ln_abs(&self) -> Magnitude {
        match self.depth {
            0 => Magnitude::from_f64(self.top.ln()),
            1 => Magnitude::from_f64(self.top),
            d => Magnitude { sign: 1, depth: d - 1, top: self.top },
        }
    }

    /// `log₁₀ |value|` as an `f64` (∞ for towers).
    pub fn log10_abs(&self) -> f64 {
        self.ln_abs().to_f64() / LN_10
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign < 0 { "-" } else { "" };
        match self.depth {
            0 => write!(f, "{}{:.6e}", sign, self.top),
            d => {
                write!(f, "{sign}")?;
                for _ in 0..d {
                    write!(f, "exp(")?;
                }
                if self.top.abs() < 1e6 {
                    write!(f, "{:.6}", self.top)?;
                } else {
                    write!(f, "{:.6e}", self.top)?;
                }
                for _ in 0..d {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Evaluates `a + hc·exp(hl) + ec·exp(L1)` where `L1 ≥ 6·exp(hl)` dominates
/// whenever it is large.
fn combine(a: f64, hc: f64, hl: f64, ec: f64, l1: Magnitude) -> Magnitude {
    let small_l1 = l1.depth == 0 && l1.to_f64() <= EXP_MAX;
    if small_l1 && hl <= EXP_MAX {
        return Magnitude::from_f64(a + hc * hl.exp() + ec * l1.to_f64().exp());
    }
    if ec != 0.0 {
        let sign = if ec > 0.0 { 1 } else { -1 };
        let lc = ec.abs().ln();
        return match (l1.depth, l1.sign) {
            (0, _) => {
                let x = l1.to_f64();
                let r = (a * (-x).exp() + hc * (hl - x).exp()) / ec;
                Magnitude { sign, depth: 1, top: x + lc + r.ln_1p() }
            }
            (1, 1) => {
                let tau = l1.top;
                Magnitude { sign, depth: 2, top: tau + (lc * (-tau).exp()).ln_1p() }
            }
            (d, _) => Magnitude { sign, depth: d + 1, top: l1.top },
        };
    }
    let sign = if hc > 0.0 { 1 } else { -1 };
    let r = a * (-hl).exp() / hc;
    Magnitude::exp_signed(sign, hl + hc.abs().ln() + r.ln_1p())
}

fn default_one() -> f64 {
    1.0
}

/// Geometric bounds and the stand-ins for non-explicit constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConstants {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub i0: f64,
    pub r0: f64,
    pub vol_m: f64,
    pub vol_boundary: f64,
    #[serde(rename = "C0", default = "default_one")]
    pub c0: f64,
    #[serde(rename = "C0_prime", default = "default_one")]
    pub c0_prime: f64,
    #[serde(rename = "C3", default = "default_one")]
    pub c3: f64,
    #[serde(rename = "C4", default = "default_one")]
    pub c4: f64,
    #[serde(rename = "C5", default = "default_one")]
    pub c5: f64,
    pub c_n: f64,
    #[serde(rename = "Lambda", default = "default_one")]
    pub big_lambda: f64,
    /// Number of coordinate-slicing subsets.
    #[serde(rename = "L", default)]
    pub l: usize,
    /// Prefactor of the eigenvalue bound for λ_J.
    #[serde(rename = "C_D", default = "default_one")]
    pub c_d: f64,
}

impl GeometryConstants {
    /// Unit interval-like defaults for dimension `n` with the given sizes.
    pub fn new(n: usize, d: f64, vol_m: f64, vol_boundary: f64) -> Result<Self> {
        let c_n = crate::slicing::ball_constant(n)?;
        Ok(GeometryConstants {
            n,
            t: d,
            d,
            k1: 1.0,
            k2: 1.0,
            i0: 1.0,
            r0: 1.0,
            vol_m,
            vol_boundary,
            c0: 1.0,
            c0_prime: 1.0,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            c_n,
            big_lambda: 1.0,
            l: 0,
            c_d: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config { field: "n".into(), reason: "must be at least 1".into() });
        }
        let fields = [
            ("T", self.t),
            ("D", self.d),
            ("K1", self.k1),
            ("K2", self.k2),
            ("i0", self.i0),
            ("r0", self.r0),
            ("vol_m", self.vol_m),
            ("vol_boundary", self.vol_boundary),
            ("C0", self.c0),
            ("C0_prime", self.c0_prime),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("c_n", self.c_n),
            ("Lambda", self.big_lambda),
            ("C_D", self.c_d),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config { field: name.into(), reason: format!("must be positive, got {v}") });
            }
        }
        Ok(())
    }

    /// `ω_{n−1}`-style constant in `N ≤ vol(∂M) 4^{n−1} η^{1−n} / c_{n−1}`.
    fn cell_constant(&self) -> f64 {
        let lower = if self.n == 1 { 1.0 } else { crate::slicing::ball_constant(self.n - 1).unwrap_or(1.0) };
        self.vol_boundary * 4f64.powi(self.n as i32 - 1) / lower
    }

    /// Weyl constant `C_W` in `J ≈ C_W λ^{n/2}`.
    fn weyl_constant(&self) -> f64 {
        self.c_n * self.vol_m / (2.0 * std::f64::consts::PI).powi(self.n as i32)
    }
}

/// `ε₂` and its logarithm; `overflow` marks an infinite value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Epsilon2 {
    pub value: f64,
    pub ln: f64,
    pub overflow: bool,
}

/// `C₃^{1/3} h^{−2/9} e^{h^{−C₄n}} (Λγ^{−3} + h^{−1/2}ε₁) / ln(1 + h^{3/2}γ^{−3}Λ/ε₁)^{1/6}
///  + C₅Λγ^{−3}h^{1/(3n+3)}`.
pub fn epsilon2(h: f64, big_lambda: f64, gamma: f64, eps1: f64, gc: &GeometryConstants) -> Result<Epsilon2> {
    for (name, v) in [("h", h), ("Lambda", big_lambda), ("gamma", gamma), ("eps1", eps1)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::arg("epsilon2", format!("{name} must be positive, got {v}")));
        }
    }
    if h >= 1.0 {
        return Err(Error::arg("h", format!("must be below 1, got {h}")));
    }
    let n = gc.n as f64;
    let lg3 = -3.0 * gamma.ln();
    let inner = (1.5 * h.ln() + lg3 + (big_lambda / eps1).ln()).exp().ln_1p();
    let sum = (big_lambda.ln() + lg3).exp() + eps1 / h.sqrt();
    let ln_first = gc.c3.ln() / 3.0 - 2.0 / 9.0 * h.ln() + (-gc.c4 * n * h.ln()).exp() + sum.ln() - inner.ln() / 6.0;
    let ln_second = gc.c5.ln() + big_lambda.ln() + lg3 + h.ln() / (3.0 * n + 3.0);
    let (hi, lo) = if ln_first > ln_second { (ln_first, ln_second) } else { (ln_second, ln_first) };
    let ln = if hi.is_infinite() { hi } else { hi + (lo - hi).exp().ln_1p() };
    let value = ln.exp();
    Ok(Epsilon2 { value, ln, overflow: value.is_infinite() })
}

/// Cascade outputs as logarithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogParameters {
    pub eps_star: f64,
    pub eps: f64,
    pub gamma: f64,
    pub eps2_0: f64,
    pub h: f64,
    pub eps1: Magnitude,
    pub lambda_j: Magnitude,
    #[serde(rename = "J")]
    pub j: Magnitude,
    pub delta: Magnitude,
}

/// Cascade outputs as doubles; underflowed entries are 0 and overflowed
/// entries +∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub eta: f64,
    pub eps: f64,
    pub gamma: f64,
    pub h: f64,
    pub eps1: f64,
    pub lambda_j: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub eta: f64,
    #[serde(rename = "N")]
    pub n_cells: f64,
    pub ln: LogParameters,
    pub values: ParameterSet,
    /// Some output fell outside the double range.
    pub underflow: bool,
}

/// `γ = (ε² / (32 C₅² Λ²))^{n+1}`.
pub fn gamma_from_eps(eps: f64, gc: &GeometryConstants) -> f64 {
    ln_gamma(eps.ln(), gc).exp()
}

fn ln_gamma(ln_eps: f64, gc: &GeometryConstants) -> f64 {
    (gc.n as f64 + 1.0) * (2.0 * ln_eps - 32f64.ln() - 2.0 * gc.c5.ln() - 2.0 * gc.big_lambda.ln())
}

/// Runs the chain ε_* → ε → γ → ε₂(0) → h → ε₁ → λ_J → J → δ in log form.
pub fn cascade(eta: f64, gc: &GeometryConstants) -> Result<Cascade> {
    gc.validate()?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::arg("eta", format!("must lie in (0, 1), got {eta}")));
    }
    let n = gc.n as f64;
    let ln_n_cells = gc.cell_constant().ln() + (1.0 - n) * eta.ln();
    let ln_eps_star = gc.c_n.ln() + n * eta.ln() - LN_2;
    let ln_eps = ln_eps_star - (gc.l as f64 + 2.0) * LN_2 - gc.vol_m.ln();
    let lg = ln_gamma(ln_eps, gc);
    let ln_e20 = 2.0 * ln_eps - 64f64.ln() - ln_n_cells;
    let lh = (3.0 * n + 3.0) * (ln_e20 + 3.0 * lg - LN_2 - gc.c5.ln() - gc.big_lambda.ln());
    // h^{-C₄n} = exp(hl)
    let hl = -gc.c4 * n * lh;
    let c1 = -18.0 * lg - 6.0 * lh + 6.0 * 128f64.ln() + 6.0 * ln_n_cells + 2.0 * gc.c3.ln() - 12.0 * ln_eps;
    let l1 = combine(c1, 6.0, hl, 0.0, Magnitude::from_f64(0.0));
    let a_eps1 = 1.5 * lh - 3.0 * lg;
    let a_lam = gc.c_d.ln() - 12.0 * lh;
    let a_j = gc.weyl_constant().ln() + 0.5 * n * a_lam;
    let a_delta = 2.0 * ln_eps - 128f64.ln() - ln_n_cells + lh + a_eps1 - gc.c3.ln() / 3.0 + 3.0 * lg
        - gc.c0_prime.ln()
        - a_j
        - 1.5 * a_lam;
    let ln = LogParameters {
        eps_star: ln_eps_star,
        eps: ln_eps,
        gamma: lg,
        eps2_0: ln_e20,
        h: lh,
        eps1: combine(a_eps1, 0.0, hl, -1.0, l1),
        lambda_j: combine(a_lam, 0.0, hl, 8.0, l1),
        j: combine(a_j, 0.0, hl, 4.0 * n, l1),
        delta: combine(a_delta, -1.0, hl, -(13.0 + 4.0 * n), l1),
    };
    let exp_m = |m: &Magnitude| match m.to_f64() {
        x if x.is_finite() => x.exp(),
        x if x > 0.0 => f64::INFINITY,
        _ => 0.0,
    };
    let values = ParameterSet {
        eta,
        eps: ln_eps.exp(),
        gamma: lg.exp(),
        h: lh.exp(),
        eps1: exp_m(&ln.eps1),
        lambda_j: exp_m(&ln.lambda_j),
        j: exp_m(&ln.j).ceil(),
        delta: exp_m(&ln.delta),
    };
    let underflow = [values.gamma, values.h, values.eps1, values.delta].contains(&0.0)
        || [values.lambda_j, values.j].iter().any(|v| v.is_infinite());
    Ok(Cascade { eta, n_cells: ln_n_cells.exp(), ln, values, underflow })
}

/// `C₁ (ln |ln δ|)^{−C₂}`.
pub fn stability_rhs(delta: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < (-1.0f64).exp()) {
        return Err(Error::arg("delta", format!("need 0 < delta < 1/e, got {delta}")));
    }
    Ok(c1 * delta.ln().abs().ln().powf(-c2))
}

/// [`stability_rhs`] for a δ known only through its logarithm.
pub fn stability_rhs_ln(ln_delta: &Magnitude, c1: f64, c2: f64) -> Result<f64> {
    if !(ln_delta.sign < 0 && ln_delta.to_f64() < -1.0) {
        return Err(Error::arg("delta", format!("need ln delta < -1, got {ln_delta}")));
    }
    let lnln = ln_delta.ln_abs();
    if lnln.depth > 0 {
        // (e^x)^{−C₂} underflows for any tower
        let x = lnln.ln_abs().to_f64();
        return Ok(c1 * (-c2 * x).exp());
    }
    Ok(c1 * lnln.to_f64().powf(-c2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gc(n: usize) -> GeometryConstants {
        GeometryConstants::new(n, 3.0, 3.0, 2.0).unwrap()
    }

    #[test]
    fn gamma_example() {
        let g = gamma_from_eps(0.1, &gc(2));
        let want = (0.01f64 / 32.0).powi(3);
        assert!((g / want - 1.0).abs() < 1e-12);
        assert_eq!(format!("{g:.2e}"), "3.05e-11");
    }

    #[test]
    fn epsilon2_hand_value() {
        let e = epsilon2(0.5, 1.0, 1.0, 1.0, &gc(1)).unwrap();
        let want = 2f64.powf(2.0 / 9.0) * 1f64.exp().powi(2) * (1.0 + 2f64.sqrt())
            / (1.0 + 2f64.powf(-1.5)).ln().powf(1.0 / 6.0)
            + 2f64.powf(-1.0 / 6.0);
        assert!((e.value / want - 1.0).abs() < 1e-12, "{} vs {want}", e.value);
    }

    #[test]
    fn stability_examples() {
        let e = std::f64::consts::E;
        assert!((stability_rhs((-e).exp(), 2.0, 3.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((stability_rhs((-e * e).exp(), 2.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(stability_rhs(0.5, 1.0, 1.0).is_err());
        let m = Magnitude::from_f64(-e * e);
        assert!((stability_rhs_ln(&m, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn realistic_eta_underflows() {
        let c = cascade(0.5, &gc(1)).unwrap();
        assert!(c.underflow);
        assert_eq!(c.values.delta, 0.0);
        assert!(c.ln.delta.sign < 0);
        assert!(cascade(1.0, &gc(1)).is_err());
    }

    #[test]
    fn magnitude_display_and_logs() {
        let m = Magnitude { sign: -1, depth: 2, top: 5.0 };
        assert_eq!(m.to_string(), "-exp(exp(5.000000))");
        assert_eq!(m.ln_abs(), Magnitude { sign: 1, depth: 1, top: 5.0 });
        assert_eq!(Magnitude::from_f64(-2.0).to_f64(), -2.0);
        assert!((Magnitude { sign: 1, depth: 1, top: 3.0 }.log10_abs() - 3.0 / LN_10).abs() < 1e-15);
    }
}
