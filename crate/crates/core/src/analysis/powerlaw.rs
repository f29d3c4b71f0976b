//! Straight-line fits in log-log space, `ln y = exponent · ln x + intercept`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    pub exponent_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub point_count: usize,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.exponent * x.ln()).exp()
    }
}

fn logs(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                Ok((x.ln(), y.ln()))
            } else {
                Err(Error::NonPositiveData(format!("point ({x}, {y})")))
            }
        })
        .collect()
}

/// Unweighted least squares on `(ln x, ln y)`.
pub fn fit_powerlaw(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let w = vec![1.0; points.len()];
    fit_powerlaw_weighted(points, &w)
}

/// Weighted least squares on `(ln x, ln y)`. Only relative weights matter:
/// the residual variance is estimated from the data, so equal weights give
/// the unweighted fit exactly.
pub fn fit_powerlaw_weighted(points: &[(f64, f64)], weights: &[f64]) -> Result<PowerLawFit> {
    let pts = logs(points)?;
    if weights.len() != pts.len() {
        return Err(Error::DimensionMismatch("one weight per point".into()));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let mean_w = weights.iter().sum::<f64>() / weights.len() as f64;
    let w: Vec<f64> = weights.iter().map(|v| v / mean_w).collect();
    let sw: f64 = w.iter().sum();
    let mx = pts.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = pts.iter().zip(&w).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.0 - mx).powi(2))
        .sum();
    let syy: f64 = pts
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.1 - my).powi(2))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = pts
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.0 - mx) * (p.1 - my))
        .sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rss: f64 = pts
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let n = pts.len();
    let s2 = rss / (n - 2) as f64;
    Ok(PowerLawFit {
        exponent,
        intercept,
        exponent_stderr: (s2 / sxx).sqrt(),
        intercept_stderr: (s2 * (1.0 / sw + mx * mx / sxx)).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - rss / syy } else { 1.0 },
        point_count: n,
    })
}

/// Inverse-variance weights for `ln y` given standard errors of `y`.
pub fn log_weights(y: &[f64], y_stderr: &[f64]) -> Result<Vec<f64>> {
    if y.len() != y_stderr.len() {
        return Err(Error::DimensionMismatch("one stderr per value".into()));
    }
    y.iter()
        .zip(y_stderr)
        .map(|(v, s)| {
            if *v > 0.0 && *s > 0.0 {
                Ok((v / s).powi(2))
            } else {
                Err(Error::NonPositiveData(format!("value {v} with stderr {s}")))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub stderr: f64,
    pub resamples: usize,
    pub failed: usize,
}

/// Bootstrap over disorder realizations. Each resample draws `realizations`
/// indices with replacement and hands them to `statistic`; resamples whose
/// statistic fails are counted and skipped.
pub fn bootstrap_realizations<F>(
    realizations: usize,
    resamples: usize,
    seed: u64,
    statistic: F,
) -> Result<BootstrapSummary>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    if realizations < 2 || resamples < 2 {
        return Err(Error::InsufficientData(
            "bootstrap needs at least 2 realizations and resamples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    let mut failed = 0;
    let mut idx = vec![0usize; realizations];
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..realizations);
        }
        match statistic(&idx) {
            Ok(v) if v.is_finite() => values.push(v),
            _ => failed += 1,
        }
    }
    if values.len() < 2 {
        return Err(Error::NonConvergence(format!(
            "{failed} of {resamples} bootstrap resamples failed"
        )));
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(BootstrapSummary {
        mean,
        stderr: var.sqrt(),
        resamples,
        failed,
    })
}
