//! Averages over independent frozen configurations.
//!
//! Realization `k` uses the seed `mix_seed(master_seed, k)`. Realizations
//! run on the rayon pool; their results are collected in index order before
//! the mean and standard error are formed, so the output does not depend on
//! the number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{BasisSpec, DEFAULT_FULL_CAP};
use super::hamiltonian::build_hamiltonian;
use super::propagate::{
    propagate_with, ExcitationTrajectory, ManyBodyState, Method, Propagation, PropagationOptions,
};
use crate::ensemble::{
    mix_seed, sample_gaussian_cloud_with, sample_open_line, sample_uniform_with, AtomConfiguration,
    SamplerOptions, DEFAULT_R_MIN,
};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::superatom;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleGeometry {
    /// Unit-density periodic box, the bulk stand-in.
    Periodic,
    GaussianCloud {
        sigmas: Vec<f64>,
    },
    OpenLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BasisChoice {
    Full,
    Truncated {
        max_excitations: usize,
    },
    /// Raise the excitation cutoff until the highest retained sector never
    /// holds more than `tol` probability. `start` defaults to a superatom
    /// estimate.
    Adaptive {
        start: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRun {
    pub params: ModelParams,
    pub atom_count: usize,
    pub geometry: EnsembleGeometry,
    pub realizations: usize,
    pub basis: BasisChoice,
    pub times: Vec<f64>,
    pub options: PropagationOptions,
    pub master_seed: u64,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
}

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub index: usize,
    pub seed: u64,
    pub max_excitations: usize,
    pub dimension: usize,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub top_sector_population: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderResult {
    pub trajectory: ExcitationTrajectory,
    pub reports: Vec<RealizationReport>,
    /// `f_R(τ)` of every realization, in index order.
    pub per_realization: Vec<Vec<f64>>,
}

impl DisorderResult {
    pub fn max_norm_drift(&self) -> f64 {
        self.reports
            .iter()
            .map(|r| r.norm_drift)
            .fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.reports
            .iter()
            .map(|r| r.energy_drift)
            .fold(0.0, f64::max)
    }
}

impl DisorderRun {
    pub fn realization_seed(&self, k: usize) -> u64 {
        mix_seed(self.master_seed, k as u64)
    }

    pub fn configuration(&self, seed: u64) -> Result<AtomConfiguration> {
        let opts = SamplerOptions {
            r_min: self.r_min,
            ..SamplerOptions::default()
        };
        let d = self.params.dimension as usize;
        match &self.geometry {
            EnsembleGeometry::Periodic => sample_uniform_with(self.atom_count, d, seed, opts),
            EnsembleGeometry::GaussianCloud { sigmas } => {
                if sigmas.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "{} sigmas for a {d}-dimensional model",
                        sigmas.len()
                    )));
                }
                sample_gaussian_cloud_with(self.atom_count, sigmas, seed, opts)
            }
            EnsembleGeometry::OpenLine => {
                if d != 1 {
                    return Err(Error::DimensionMismatch("open_line needs d = 1".into()));
                }
                sample_open_line(self.atom_count, seed, opts)
            }
        }
    }

    /// Propagate realization `k` from the all-ground state.
    pub fn run_realization(&self, k: usize) -> Result<(Propagation, RealizationReport)> {
        let seed = self.realization_seed(k);
        let wrap = |source: Error| Error::Realization {
            index: k,
            seed,
            source: Box::new(source),
        };
        let config = self.configuration(seed).map_err(wrap)?;
        let (prop, spec) = propagate_configuration(
            &config,
            &self.params,
            self.basis,
            &self.times,
            &self.options,
        )
        .map_err(wrap)?;
        let report = RealizationReport {
            index: k,
            seed,
            max_excitations: spec.max_excitations(),
            dimension: spec.dimension() as usize,
            norm_drift: prop.norm_drift,
            energy_drift: prop.energy_drift,
            top_sector_population: prop.top_sector_population,
            method: prop.method,
        };
        Ok((prop, report))
    }
}

/// Superatom guess for the excitation cutoff: twice the expected number of
/// excitations plus one.
pub fn initial_cutoff(params: &ModelParams, atoms: usize) -> usize {
    let expected = if params.alpha > 0.0 {
        superatom::superatom_estimate(params.alpha, params.dimension, params.interaction_exponent)
            .map(|e| e.f_sat.min(1.0))
            .unwrap_or(1.0)
    } else {
        0.0
    };
    ((2.0 * atoms as f64 * expected).ceil() as usize + 1).clamp(1, atoms)
}

fn spec_for(atoms: usize, cutoff: usize) -> BasisSpec {
    if cutoff >= atoms && atoms <= DEFAULT_FULL_CAP {
        BasisSpec::full(atoms)
    } else {
        BasisSpec::truncated(atoms, cutoff.min(atoms))
    }
}

/// Propagate one configuration from the all-ground state with the requested
/// basis choice. Returns the basis that was finally used.
pub fn propagate_configuration(
    config: &AtomConfiguration,
    params: &ModelParams,
    choice: BasisChoice,
    times: &[f64],
    options: &PropagationOptions,
) -> Result<(Propagation, BasisSpec)> {
    let atoms = config.len();
    let run = |spec: BasisSpec| -> Result<Propagation> {
        let h = build_hamiltonian(config, params, spec)?;
        let start = ManyBodyState::all_ground(h.basis());
        propagate_with(&h, &start, times, options)
    };
    match choice {
        BasisChoice::Full => {
            let spec = BasisSpec::full(atoms);
            Ok((run(spec)?, spec))
        }
        BasisChoice::Truncated { max_excitations } => {
            let spec = BasisSpec::truncated(atoms, max_excitations);
            Ok((run(spec)?, spec))
        }
        BasisChoice::Adaptive { start } => {
            let mut cutoff = start
                .unwrap_or_else(|| initial_cutoff(params, atoms))
                .clamp(1, atoms);
            loop {
                let spec = spec_for(atoms, cutoff);
                let prop = run(spec)?;
                if cutoff >= atoms || prop.top_sector_population <= options.tol {
                    return Ok((prop, spec));
                }
                cutoff += 1;
            }
        }
    }
}

pub fn disorder_average(run: &DisorderRun) -> Result<DisorderResult> {
    run.params.validate()?;
    if run.realizations < 1 {
        return Err(Error::InvalidParameter(
            "need at least one realization".into(),
        ));
    }
    let outcomes: Vec<Result<(Propagation, RealizationReport)>> = (0..run.realizations)
        .into_par_iter()
        .map(|k| run.run_realization(k))
        .collect();

    let mut reports = Vec::with_capacity(run.realizations);
    let mut curves = Vec::with_capacity(run.realizations);
    for outcome in outcomes {
        let (prop, report) = outcome?;
        curves.push(prop.trajectory.f_r_mean);
        reports.push(report);
    }
    let trajectory = average_curves(&run.times, &curves);
    Ok(DisorderResult {
        trajectory,
        reports,
        per_realization: curves,
    })
}

/// Mean and standard error of the mean, pointwise, summed in index order.
pub fn average_curves(times: &[f64], curves: &[Vec<f64>]) -> ExcitationTrajectory {
    let r = curves.len();
    let mut mean = vec![0.0; times.len()];
    let mut stderr = vec![0.0; times.len()];
    for (i, (m, s)) in mean.iter_mut().zip(stderr.iter_mut()).enumerate() {
        let mu = curves.iter().map(|c| c[i]).sum::<f64>() / r as f64;
        *m = mu;
        if r > 1 {
            let var = curves.iter().map(|c| (c[i] - mu).powi(2)).sum::<f64>() / (r - 1) as f64;
            *s = (var / r as f64).sqrt();
        }
    }
    ExcitationTrajectory {
        times: times.to_vec(),
        f_r_mean: mean,
        f_r_stderr: stderr,
        realization_count: r,
    }
}
