//! Fitting pipeline: saturation curves, rescaling to universal variables,
//! log-log exponents and data collapse.

pub mod collapse;
pub mod data;
pub mod powerlaw;
pub mod rescale;
pub mod saturation;

pub use collapse::{
    collapse_quality, scaling_groups, CollapseGroup, CollapseReport, GroupResidual, Observable,
};
pub use data::{read_external_runs, ExternalRun};
pub use powerlaw::{
    bootstrap_realizations, fit_powerlaw, fit_powerlaw_weighted, log_weights, BootstrapSummary,
    PowerLawFit,
};
pub use rescale::{rescale, Provenance, RescaleContext, RunRecord, ScalingPoint};
pub use saturation::{fit_saturation, half_rise_guess, EarlyRate, SaturationFit, SaturationGuess};

use serde::Serialize;

/// A published exponent kept for annotating reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceExponent {
    pub name: &'static str,
    pub dimension: u32,
    pub value: f64,
    pub uncertainty: Option<f64>,
    pub origin: &'static str,
}

pub const REFERENCE_EXPONENTS: &[ReferenceExponent] = &[
    ReferenceExponent {
        name: "1/delta",
        dimension: 3,
        value: 0.45,
        uncertainty: Some(0.01),
        origin: "experiment",
    },
    ReferenceExponent {
        name: "1/delta",
        dimension: 3,
        value: 0.404,
        uncertainty: None,
        origin: "numerics, 100 atoms",
    },
    ReferenceExponent {
        name: "gamma",
        dimension: 3,
        value: 1.25,
        uncertainty: Some(0.03),
        origin: "experiment",
    },
    ReferenceExponent {
        name: "gamma",
        dimension: 3,
        value: 1.15,
        uncertainty: None,
        origin: "numerics, 100 atoms",
    },
    ReferenceExponent {
        name: "1/delta",
        dimension: 1,
        value: 0.16,
        uncertainty: Some(0.01),
        origin: "experiment",
    },
    ReferenceExponent {
        name: "gamma",
        dimension: 1,
        value: 1.08,
        uncertainty: Some(0.01),
        origin: "experiment",
    },
    ReferenceExponent {
        name: "1/delta",
        dimension: 1,
        value: 0.150,
        uncertainty: None,
        origin: "numerics, 100 atoms",
    },
    ReferenceExponent {
        name: "gamma",
        dimension: 1,
        value: 1.06,
        uncertainty: None,
        origin: "numerics, 100 atoms",
    },
];
