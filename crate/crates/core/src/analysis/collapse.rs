//! Data-collapse test: one power law through the pooled points of several
//! series, and a check that no series sits systematically off it.

use serde::{Deserialize, Serialize};

use super::powerlaw::{fit_powerlaw, PowerLawFit};
use super::rescale::ScalingPoint;
use crate::error::{Error, Result};

/// Absolute floor on residual means in log space, so that exact data with
/// rounding noise still count as collapsed.
const RESIDUAL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseGroup {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResidual {
    pub label: String,
    pub count: usize,
    /// Mean of `ln y − fit(ln x)` over the group.
    pub mean: f64,
    pub stderr: f64,
    pub consistent: bool,
    /// Separate fit of the group, when it has at least three points.
    pub fit: Option<PowerLawFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub fit: PowerLawFit,
    pub rms_log_residual: f64,
    pub groups: Vec<GroupResidual>,
    pub collapsed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `g_R` against α.
    Rate,
    /// `f_R` against α.
    Fraction,
}

pub fn collapse_quality(groups: &[CollapseGroup]) -> Result<CollapseReport> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    let pooled: Vec<(f64, f64)> = groups
        .iter()
        .flat_map(|g| g.points.iter().copied())
        .collect();
    let fit = fit_powerlaw(&pooled)?;
    let resid = |&(x, y): &(f64, f64)| y.ln() - fit.intercept - fit.exponent * x.ln();
    let n = pooled.len() as f64;
    let rss: f64 = pooled.iter().map(|p| resid(p).powi(2)).sum();
    let rms_log_residual = (rss / n).sqrt();
    let pooled_sd = (rss / (n - 2.0)).sqrt();

    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        if g.points.is_empty() {
            return Err(Error::InsufficientData(format!(
                "group '{}' is empty",
                g.label
            )));
        }
        let r: Vec<f64> = g.points.iter().map(resid).collect();
        let m = r.len() as f64;
        let mean = r.iter().sum::<f64>() / m;
        let sd = if r.len() > 1 {
            (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            pooled_sd
        };
        let stderr = sd / m.sqrt();
        out.push(GroupResidual {
            label: g.label.clone(),
            count: r.len(),
            mean,
            stderr,
            consistent: mean.abs() <= 2.0 * stderr + RESIDUAL_FLOOR,
            fit: if g.points.len() >= 3 {
                fit_powerlaw(&g.points).ok()
            } else {
                None
            },
        });
    }
    Ok(CollapseReport {
        fit,
        rms_log_residual,
        collapsed: out.iter().all(|g| g.consistent),
        groups: out,
    })
}

/// Group scaling points by a label and pick the observable.
pub fn scaling_groups(
    groups: &[(String, Vec<ScalingPoint>)],
    observable: Observable,
) -> Vec<CollapseGroup> {
    groups
        .iter()
        .map(|(label, pts)| CollapseGroup {
            label: label.clone(),
            points: pts
                .iter()
                .map(|p| match observable {
                    Observable::Rate => (p.alpha, p.g_r),
                    Observable::Fraction => (p.alpha, p.f_r),
                })
                .collect(),
        })
        .collect()
}
