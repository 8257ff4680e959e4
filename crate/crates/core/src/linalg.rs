//! Least squares on small dense designs.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::sqrt;

pub(crate) struct OlsFit {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Diagonal of `(X'X)^-1`.
    pub inv_gram_diag: Vec<f64>,
}

impl OlsFit {
    pub fn nobs(&self) -> usize {
        self.residuals.len()
    }

    pub fn std_error(&self, j: usize) -> f64 {
        let dof = (self.nobs() - self.coef.len()) as f64;
        sqrt(self.rss / dof * self.inv_gram_diag[j])
    }
}

/// Ordinary least squares through a Householder QR of the column-equilibrated
/// design. `design` is row-major, one regressor row per observation.
pub(crate) fn ols(design: &[f64], ncols: usize, y: &[f64]) -> Result<OlsFit> {
    let nrows = y.len();
    debug_assert_eq!(design.len(), nrows * ncols);
    if nrows <= ncols {
        return Err(Error::degenerate(format!(
            "{nrows} observations cannot identify {ncols} coefficients"
        )));
    }
    let mut x = DMatrix::from_row_slice(nrows, ncols, design);
    let mut norms = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let n = x.column(j).norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::numerical(format!("regressor column {j} is zero or non-finite")));
        }
        x.column_mut(j).scale_mut(1.0 / n);
        norms.push(n);
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let rmax = (0..ncols).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(j) = (0..ncols).find(|&j| r[(j, j)].abs() <= 1e-10 * rmax) {
        return Err(Error::numerical(format!("regressors are collinear (column {j})")));
    }
    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, ncols).into_owned();
    let beta_scaled = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::numerical("triangular solve failed"))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(ncols, ncols))
        .ok_or_else(|| Error::numerical("triangular inverse failed"))?;

    let coef: Vec<f64> = (0..ncols).map(|j| beta_scaled[j] / norms[j]).collect();
    let fitted = &x * &beta_scaled;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|e| e * e).sum();
    let inv_gram_diag = (0..ncols)
        .map(|j| r_inv.row(j).norm_squared() / (norms[j] * norms[j]))
        .collect();
    Ok(OlsFit {
        coef,
        residuals,
        rss,
        inv_gram_diag,
    })
}
