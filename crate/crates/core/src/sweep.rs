//! α sweeps: simulate each point, fit its saturation curve, map it onto
//! `(α, g_R, f_R)` and extract the exponents `1/δ` and `γ`.
//!
//! All points share the master seed, so every point sees the same frozen
//! configurations (positions are stored in units of `a`). Points in SI are
//! simulated at their α and their fitted rate is converted back to s⁻¹, so
//! they reach the scaling plane through the physical rescaling route.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::powerlaw::bootstrap_realizations;
use crate::analysis::saturation::half_rise_guess;
use crate::analysis::{
    collapse_quality, fit_powerlaw, fit_saturation, rescale, BootstrapSummary, CollapseGroup,
    CollapseReport, PowerLawFit, RescaleContext, RunRecord, SaturationFit, ScalingPoint,
};
use crate::error::{Error, Result};
use crate::params::{nondimensionalize, ModelParams, PhysicalParams};
use crate::quantum::disorder::average_curves;
use crate::quantum::{
    disorder_average, BasisChoice, DisorderRun, EnsembleGeometry, ExcitationTrajectory,
    PropagationOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepPoint {
    Alpha {
        alpha: f64,
    },
    /// SI inputs: density in m^-d, Rabi frequency in rad/s.
    Physical {
        density: f64,
        rabi_frequency: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGroup {
    pub label: String,
    pub points: Vec<SweepPoint>,
}

/// Output times `τ_i = span · τ_c · i / (points − 1)`, `i = 0..points`, with
/// `τ_c = α^{-2p/(2p+d)}` the superatom time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub span: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            span: 60.0,
            points: 200,
        }
    }
}

impl TimeGrid {
    pub fn times(&self, alpha: f64, d: u32, p: u32) -> Vec<f64> {
        let tau_c = alpha.powf(-2.0 * p as f64 / (2 * p + d) as f64);
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.span * tau_c * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub dimension: u32,
    pub interaction_exponent: u32,
    pub atom_count: usize,
    pub realizations: usize,
    pub geometry: EnsembleGeometry,
    pub basis: BasisChoice,
    pub options: PropagationOptions,
    pub time_grid: TimeGrid,
    pub master_seed: u64,
    pub r_min: f64,
    /// `C_p` in J m^p; required when any point is physical.
    pub interaction_coefficient: Option<f64>,
    pub groups: Vec<SweepGroup>,
    /// Bootstrap resamples over realizations; zero disables.
    pub bootstrap_resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub group: String,
    pub index: usize,
    pub point: SweepPoint,
    pub alpha: f64,
    pub fit: SaturationFit,
    pub scaling: ScalingPoint,
    pub max_excitations: usize,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub max_top_sector_population: f64,
    pub trajectory: ExcitationTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBootstrap {
    pub inverse_delta: BootstrapSummary,
    pub gamma: BootstrapSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
    /// `f_R` against α over all points.
    pub inverse_delta: PowerLawFit,
    /// `g_R` against α over all points.
    pub gamma: PowerLawFit,
    /// Present with at least two groups.
    pub collapse_fraction: Option<CollapseReport>,
    pub collapse_rate: Option<CollapseReport>,
    pub bootstrap: Option<SweepBootstrap>,
}

struct Resolved {
    group: String,
    index: usize,
    point: SweepPoint,
    alpha: f64,
    /// E_c in joules for physical points.
    energy: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.groups.iter().map(|g| g.points.len()).sum();
        if total == 0 {
            return Err(Error::Config("sweep has no points".into()));
        }
        if total < 3 {
            return Err(Error::Config(format!(
                "sweep needs at least 3 points for an exponent fit, got {total}"
            )));
        }
        if self.realizations < 1 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if self.time_grid.points < 4
            || !(self.time_grid.span > 0.0 && self.time_grid.span.is_finite())
        {
            return Err(Error::Config(
                "time grid needs span > 0 and at least 4 points".into(),
            ));
        }
        let physical = self
            .groups
            .iter()
            .flat_map(|g| &g.points)
            .any(|p| matches!(p, SweepPoint::Physical { .. }));
        if physical && self.interaction_coefficient.is_none() {
            return Err(Error::Config(
                "physical sweep points need an interaction coefficient".into(),
            ));
        }
        Ok(())
    }

    fn resolve(&self) -> Result<Vec<Resolved>> {
        let mut out = Vec::new();
        for g in &self.groups {
            for (index, point) in g.points.iter().enumerate() {
                let (alpha, energy) = match *point {
                    SweepPoint::Alpha { alpha } => (alpha, None),
                    SweepPoint::Physical {
                        density,
                        rabi_frequency,
                    } => {
                        let phys = self.physical(density, rabi_frequency);
                        let model = nondimensionalize(&phys)?;
                        (model.alpha, Some(phys.characteristic_energy()))
                    }
                };
                ModelParams::new(self.dimension, self.interaction_exponent, alpha, 0.0)?;
                out.push(Resolved {
                    group: g.label.clone(),
                    index,
                    point: *point,
                    alpha,
                    energy,
                });
            }
        }
        Ok(out)
    }

    fn physical(&self, density: f64, rabi_frequency: f64) -> PhysicalParams {
        PhysicalParams {
            rabi_frequency,
            laser_detuning: 0.0,
            density,
            interaction_coefficient: self.interaction_coefficient.unwrap_or(f64::NAN),
            dimension: self.dimension,
            interaction_exponent: self.interaction_exponent,
            atom_number: self.atom_count as u64,
        }
    }

    fn disorder_run(&self, alpha: f64) -> Result<DisorderRun> {
        Ok(DisorderRun {
            params: ModelParams::new(self.dimension, self.interaction_exponent, alpha, 0.0)?,
            atom_count: self.atom_count,
            geometry: self.geometry.clone(),
            realizations: self.realizations,
            basis: self.basis,
            times: self
                .time_grid
                .times(alpha, self.dimension, self.interaction_exponent),
            options: self.options,
            master_seed: self.master_seed,
            r_min: self.r_min,
        })
    }
}

fn fit_curve(times: &[f64], f_r: &[f64], atoms: usize) -> Result<SaturationFit> {
    let counts: Vec<f64> = f_r.iter().map(|f| f * atoms as f64).collect();
    fit_saturation(times, &counts, half_rise_guess(times, &counts))
}

fn scaling_point(spec: &SweepSpec, r: &Resolved, fit: &SaturationFit) -> Result<ScalingPoint> {
    let run_id = format!("{}/{}", r.group, r.index);
    let n = spec.atom_count as f64;
    match (r.point, r.energy) {
        (
            SweepPoint::Physical {
                density,
                rabi_frequency,
            },
            Some(energy),
        ) => {
            let record = RunRecord::Physical {
                density,
                rabi_frequency,
                atom_number: n,
                rate: fit.rate * energy / crate::params::constants::HBAR,
                saturation: fit.saturation,
            };
            let ctx = RescaleContext::Physical {
                interaction_coefficient: spec.interaction_coefficient.unwrap_or(f64::NAN),
                dimension: spec.dimension,
                interaction_exponent: spec.interaction_exponent,
            };
            rescale(&run_id, &record, &ctx)
        }
        _ => {
            let record = RunRecord::Dimensionless {
                alpha: r.alpha,
                atom_number: n,
                rate: fit.rate,
                saturation: fit.saturation,
            };
            let ctx = RescaleContext::Dimensionless {
                dimension: spec.dimension,
                interaction_exponent: spec.interaction_exponent,
            };
            rescale(&run_id, &record, &ctx)
        }
    }
}

fn exponent_fits(points: &[ScalingPoint]) -> Result<(PowerLawFit, PowerLawFit)> {
    let f: Vec<(f64, f64)> = points.iter().map(|p| (p.alpha, p.f_r)).collect();
    let g: Vec<(f64, f64)> = points.iter().map(|p| (p.alpha, p.g_r)).collect();
    Ok((fit_powerlaw(&f)?, fit_powerlaw(&g)?))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let resolved = spec.resolve()?;

    let simulated: Vec<Result<(PointResult, Vec<Vec<f64>>)>> = resolved
        .par_iter()
        .map(|r| {
            let run = spec.disorder_run(r.alpha)?;
            let result = disorder_average(&run)?;
            let fit = fit_curve(&run.times, &result.trajectory.f_r_mean, spec.atom_count)?;
            let scaling = scaling_point(spec, r, &fit)?;
            let point = PointResult {
                group: r.group.clone(),
                index: r.index,
                point: r.point,
                alpha: r.alpha,
                fit,
                scaling,
                max_excitations: result
                    .reports
                    .iter()
                    .map(|x| x.max_excitations)
                    .max()
                    .unwrap_or(0),
                max_norm_drift: result.max_norm_drift(),
                max_energy_drift: result.max_energy_drift(),
                max_top_sector_population: result
                    .reports
                    .iter()
                    .map(|x| x.top_sector_population)
                    .fold(0.0, f64::max),
                trajectory: result.trajectory,
            };
            Ok((point, result.per_realization))
        })
        .collect();
    let mut points = Vec::with_capacity(simulated.len());
    let mut curves = Vec::with_capacity(simulated.len());
    for s in simulated {
        let (p, c) = s?;
        points.push(p);
        curves.push(c);
    }

    let scaling: Vec<ScalingPoint> = points.iter().map(|p| p.scaling.clone()).collect();
    let (inverse_delta, gamma) = exponent_fits(&scaling)?;

    let labels: Vec<&str> = spec
        .groups
        .iter()
        .filter(|g| !g.points.is_empty())
        .map(|g| g.label.as_str())
        .collect();
    let (collapse_fraction, collapse_rate) = if labels.len() >= 2 {
        let groups = |pick: fn(&ScalingPoint) -> f64| -> Vec<CollapseGroup> {
            labels
                .iter()
                .map(|label| CollapseGroup {
                    label: label.to_string(),
                    points: points
                        .iter()
                        .filter(|p| p.group == *label)
                        .map(|p| (p.scaling.alpha, pick(&p.scaling)))
                        .collect(),
                })
                .collect()
        };
        (
            Some(collapse_quality(&groups(|s| s.f_r))?),
            Some(collapse_quality(&groups(|s| s.g_r))?),
        )
    } else {
        (None, None)
    };

    let bootstrap = if spec.bootstrap_resamples > 0 && spec.realizations >= 2 {
        Some(bootstrap(spec, &resolved, &points, &curves)?)
    } else {
        None
    };

    Ok(SweepResult {
        points,
        inverse_delta,
        gamma,
        collapse_fraction,
        collapse_rate,
        bootstrap,
    })
}

/// Refit every point on a resampled set of realizations.
fn bootstrap(
    spec: &SweepSpec,
    resolved: &[Resolved],
    points: &[PointResult],
    curves: &[Vec<Vec<f64>>],
) -> Result<SweepBootstrap> {
    let refit = |idx: &[usize]| -> Result<(PowerLawFit, PowerLawFit)> {
        let mut scaling = Vec::with_capacity(points.len());
        for ((r, p), c) in resolved.iter().zip(points).zip(curves) {
            let picked: Vec<Vec<f64>> = idx.iter().map(|&i| c[i].clone()).collect();
            let avg = average_curves(&p.trajectory.times, &picked);
            let fit = fit_curve(&p.trajectory.times, &avg.f_r_mean, spec.atom_count)?;
            scaling.push(scaling_point(spec, r, &fit)?);
        }
        exponent_fits(&scaling)
    };
    // Same seed for both statistics, so they see the same resamples.
    let seed = crate::ensemble::mix_seed(spec.master_seed, u64::MAX);
    let inverse_delta =
        bootstrap_realizations(spec.realizations, spec.bootstrap_resamples, seed, |idx| {
            refit(idx).map(|f| f.0.exponent)
        })?;
    let gamma = bootstrap_realizations(spec.realizations, spec.bootstrap_resamples, seed, |idx| {
        refit(idx).map(|f| f.1.exponent)
    })?;
    Ok(SweepBootstrap {
        inverse_delta,
        gamma,
    })
}
