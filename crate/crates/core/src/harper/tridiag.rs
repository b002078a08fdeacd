//! Symmetric tridiagonal eigenvalues.
//!
//! Two independent routes: implicit QL with Wilkinson shifts for the full
//! spectrum, and Sturm-sequence counting for the number of eigenvalues below
//! a given value.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`), ascending.
pub fn eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::invalid(format!("off-diagonal has {} entries for a {n}x{n} matrix", off.len())));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenFailure(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure(0));
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues strictly below `x` (Sylvester inertia of `T − x`).
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = a - x - coupling;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_laplacian_closed_form() {
        let n = 50;
        let ev = eigenvalues(&vec![0.0; n], &vec![-1.0; n - 1]).unwrap();
        let mut exact: Vec<f64> = (1..=n).map(|k| -2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn two_by_two() {
        let ev = eigenvalues(&[1.0, 3.0], &[1.0]).unwrap();
        let s = 2f64.sqrt();
        assert!((ev[0] - (2.0 - s)).abs() < 1e-14);
        assert!((ev[1] - (2.0 + s)).abs() < 1e-14);
    }

    #[test]
    fn decoupled_blocks() {
        let ev = eigenvalues(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ev, vec![-1.0, 2.0, 3.0]);
        assert_eq!(eigenvalues(&[], &[]).unwrap(), Vec::<f64>::new());
        assert!(eigenvalues(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn sturm_count_agrees_with_ql() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| 4.0 * (2.0 * PI * 0.618_033_988_7 * i as f64).cos()).collect();
        let off = vec![-1.0; n - 1];
        let ev = eigenvalues(&diag, &off).unwrap();
        for x in [-5.0, -3.3, -1.0, 0.0, 0.4, 2.7, 5.0] {
            let by_ql = ev.iter().filter(|&&v| v < x).count();
            assert_eq!(count_below(&diag, &off, x), by_ql, "x = {x}");
        }
        // Trace is preserved.
        let trace: f64 = diag.iter().sum();
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-9);
    }
}
