//! Bessel functions of the first kind and zeros of their derivatives.

use crate::{Error, Result};

/// Values `J_0(x), …, J_nmax(x)` by Miller's backward recurrence,
/// normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let start = 2 * ((top + 20 + (160.0 * top as f64).sqrt() as usize) / 2);
    let (mut jp, mut j) = (0.0_f64, 1e-280_f64);
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        // j holds J_k, jp holds J_{k+1}
        let jm = 2.0 * k as f64 / ax * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        // j is now J_{k-1}
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j;
        }
        if idx % 2 == 0 && idx > 0 {
            sum += 2.0 * j;
        }
    }
    sum += j;
    for v in out.iter_mut() {
        *v /= sum;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

pub fn bessel_j(m: usize, x: f64) -> f64 {
    bessel_j_all(m, x)[m]
}

/// Derivative `J_m'(x)`.
pub fn bessel_j_prime(m: usize, x: f64) -> f64 {
    let v = bessel_j_all(m + 1, x);
    if m == 0 {
        -v[1]
    } else {
        0.5 * (v[m - 1] - v[m + 1])
    }
}

/// Positive zeros of `J_m'` below `xmax`, found by scanning intervals of
/// width 0.1 and bisecting to full double precision.
pub fn bessel_j_prime_zeros(m: usize, xmax: f64) -> Result<Vec<f64>> {
    const STEP: f64 = 0.1;
    let mut roots = Vec::new();
    // the first zero of J_m' exceeds m for m >= 1
    let mut lo = if m == 0 { 0.05 } else { (0.5 * m as f64).max(0.05) };
    let mut flo = bessel_j_prime(m, lo);
    while lo < xmax {
        let hi = lo + STEP;
        let fhi = bessel_j_prime(m, hi);
        if flo == 0.0 {
            roots.push(lo);
        } else if flo.signum() != fhi.signum() && fhi != 0.0 {
            let r = bisect(m, lo, hi, flo)?;
            if r < xmax {
                roots.push(r);
            }
        }
        lo = hi;
        flo = fhi;
    }
    Ok(roots)
}

fn bisect(m: usize, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    let (a, b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = bessel_j_prime(m, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if hi - lo < 1e-10 {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::RootFinding { order: m, lo: a, hi: b })
    }
}
