//! Conditional-sum-of-squares recursion and its analytic gradient.
//!
//! Parameters are packed as `[intercept, ar_1..ar_p, ma_1..ma_q]` and the
//! innovation recursion is
//! `e_t = z_t - c - sum_i ar_i z_{t-i} + sum_j ma_j e_{t-j}` for `t >= p`,
//! with innovations before `p` taken as zero.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) fn innovations(z: &[f64], p: usize, intercept: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let m = z.len();
    if m <= p {
        return Vec::new();
    }
    let mut e = Vec::with_capacity(m - p);
    for t in p..m {
        let mut v = z[t] - intercept;
        for (i, a) in ar.iter().enumerate() {
            v -= a * z[t - 1 - i];
        }
        for (j, b) in ma.iter().enumerate() {
            // e index k corresponds to time p + k
            if t > p + j {
                v += b * e[t - p - j - 1];
            }
        }
        e.push(v);
    }
    e
}

/// Sum of squared innovations, writing `d css / d params` into `grad`.
pub(crate) fn css_with_gradient(z: &[f64], p: usize, q: usize, params: &[f64], grad: &mut [f64]) -> f64 {
    let npar = 1 + p + q;
    debug_assert_eq!(params.len(), npar);
    let intercept = params[0];
    let ar = &params[1..1 + p];
    let ma = &params[1 + p..];
    let m = z.len();
    let neff = m - p;
    let mut e = vec![0.0; neff];
    // de[k * npar + j] = d e_{p+k} / d param_j
    let mut de = vec![0.0; neff * npar];
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut css = 0.0;
    for k in 0..neff {
        let t = p + k;
        let mut v = z[t] - intercept;
        for (i, a) in ar.iter().enumerate() {
            v -= a * z[t - 1 - i];
        }
        let (done, row) = de.split_at_mut(k * npar);
        let row = &mut row[..npar];
        row[0] = -1.0;
        for i in 0..p {
            row[1 + i] = -z[t - 1 - i];
        }
        for j in 0..q {
            row[1 + p + j] = if k > j { e[k - j - 1] } else { 0.0 };
        }
        for (j, b) in ma.iter().enumerate() {
            if k > j {
                v += b * e[k - j - 1];
                let prev = &done[(k - j - 1) * npar..(k - j) * npar];
                for (r, pv) in row.iter_mut().zip(prev) {
                    *r += b * pv;
                }
            }
        }
        e[k] = v;
        css += v * v;
        for (g, r) in grad.iter_mut().zip(row.iter()) {
            *g += 2.0 * v * r;
        }
    }
    css
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_central_differences() {
        let z: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0 + 0.1 * i as f64 % 1.3).collect();
        let (p, q) = (2, 2);
        let params = [0.05, 0.3, -0.2, 0.4, 0.1];
        let mut g = vec![0.0; 5];
        css_with_gradient(&z, p, q, &params, &mut g);
        let mut scratch = vec![0.0; 5];
        for j in 0..5 {
            let h = 1e-6;
            let mut up = params;
            let mut dn = params;
            up[j] += h;
            dn[j] -= h;
            let fd = (css_with_gradient(&z, p, q, &up, &mut scratch) - css_with_gradient(&z, p, q, &dn, &mut scratch)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * fd.abs().max(1.0), "param {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn objective_matches_innovations() {
        let z = [0.3, -0.1, 0.8, 0.2, -0.5, 0.4, 0.0, 0.9];
        let params = [0.1, 0.5, -0.3];
        let mut g = [0.0; 3];
        let css = css_with_gradient(&z, 1, 1, &params, &mut g);
        let e = innovations(&z, 1, 0.1, &[0.5], &[-0.3]);
        assert_eq!(e.len(), 7);
        assert!((css - e.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-14);
    }
}
