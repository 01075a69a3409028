//! Affine finite-size extrapolation `EL_n ~ gamma n - A`.
//!
//! `A` is chosen to minimise the variance over the window of
//! `(EL_n + A) / n`. With `x = 1/n` and `y = EL_n / n` that variance is
//! `Var(y) + 2A Cov(x, y) + A^2 Var(x)`, minimised at
//! `A = -Cov(x, y) / Var(x)`; `gamma` is then the window mean of
//! `(EL_n + A) / n`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub gamma_hat: f64,
    pub a_hat: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Variance of `(EL_n + A) / n` at the optimum.
    pub residual_variance: f64,
}

/// Fits `(n, EL_n)` points; needs at least three distinct `n`.
pub fn fit_affine(points: &[(usize, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fit window needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().all(|p| p.0 == points[0].0) {
        return Err(Error::InvalidArgument("degenerate fit window: all n equal".into()));
    }
    let count = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(n, v)| v / n as f64).collect();
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let (mut var_x, mut cov) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        var_x += (x - mean_x) * (x - mean_x);
        cov += (x - mean_x) * (y - mean_y);
    }
    let a_hat = -cov / var_x;
    let corrected: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y + a_hat * x).collect();
    let gamma_hat = corrected.iter().sum::<f64>() / count;
    let residual_variance = corrected
        .iter()
        .map(|c| (c - gamma_hat) * (c - gamma_hat))
        .sum::<f64>()
        / count;
    let n_min = points.iter().map(|p| p.0).min().unwrap_or(0);
    let n_max = points.iter().map(|p| p.0).max().unwrap_or(0);
    Ok(FitResult {
        gamma_hat,
        a_hat,
        n_min,
        n_max,
        residual_variance,
    })
}

/// Checks `1 <= n_min < n_max <= available`.
pub fn check_window(n_min: usize, n_max: usize, available: usize) -> Result<()> {
    if n_min == 0 || n_min >= n_max {
        return Err(Error::InvalidArgument(format!(
            "fit window {n_min}:{n_max} must satisfy 1 <= min < max"
        )));
    }
    if n_max > available {
        return Err(Error::InvalidArgument(format!(
            "fit window ends at {n_max} but the curve stops at {available}"
        )));
    }
    if n_max - n_min + 1 < 3 {
        return Err(Error::InvalidArgument("fit window needs at least 3 points".into()));
    }
    Ok(())
}
