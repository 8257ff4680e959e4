//! Box-constrained BFGS with Armijo backtracking.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct Settings {
    pub max_iter: usize,
    pub gtol: f64,
    /// Gradient level accepted when the line search can make no further progress.
    pub stall_gtol: f64,
}

/// Minimizes `objective`, which returns the value and writes the gradient.
/// Non-finite values are treated as `+inf` so the line search backs off.
pub(crate) fn minimize<F>(mut objective: F, x0: &[f64], lower: &[f64], upper: &[f64], s: &Settings) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let project = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut g = vec![0.0; n];
    let mut f = objective(&x, &mut g);
    if !f.is_finite() {
        return Minimum { x, iterations: 0, converged: false };
    }
    let mut h = identity(n);
    let mut fresh_h = true;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for iter in 0..s.max_iter {
        let pg = projected_grad_norm(&x, &g, lower, upper);
        if pg <= s.gtol {
            return Minimum { x, iterations: iter, converged: true };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect();
        if dot(&d, &g) >= 0.0 {
            h = identity(n);
            fresh_h = true;
            d = g.iter().map(|v| -v).collect();
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            project(&mut x_new);
            let moved: f64 = (0..n).map(|i| g[i] * (x_new[i] - x[i])).sum();
            f_new = objective(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= f + 1e-4 * moved && moved < 0.0 {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if !fresh_h {
                h = identity(n);
                fresh_h = true;
                continue;
            }
            return Minimum { x, iterations: iter, converged: pg <= s.stall_gtol };
        }
        let sv: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let yv: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&sv, &yv);
        if sy > 1e-12 * norm(&sv) * norm(&yv) {
            if fresh_h {
                let scale = sy / dot(&yv, &yv);
                for v in h.iter_mut() {
                    *v *= scale;
                }
            }
            bfgs_update(&mut h, &sv, &yv, sy);
            fresh_h = false;
        }
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut g, &mut g_new);
        f = f_new;
    }
    let converged = projected_grad_norm(&x, &g, lower, upper) <= s.gtol;
    Minimum { x, iterations: s.max_iter, converged }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    crate::math::sqrt(dot(a, a))
}

fn projected_grad_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Inverse-Hessian update `H <- (I - r s y') H (I - r y s') + r s s'`, `r = 1/s'y`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += (1.0 + r * yhy) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
