//! Map fitted `(R, N_sat)` of a run onto the universal variables
//! `(α, g_R, f_R)`, with `g_R = ħR / (N E_c)` and `f_R = N_sat / N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{constants, nondimensionalize, PhysicalParams};

/// A fitted run, either in SI or already dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "units", rename_all = "snake_case")]
pub enum RunRecord {
    Physical {
        /// m^-d.
        density: f64,
        /// rad/s.
        rabi_frequency: f64,
        atom_number: f64,
        /// Initial excitation rate, s^-1.
        rate: f64,
        /// Saturated number of Rydberg atoms.
        saturation: f64,
    },
    Dimensionless {
        alpha: f64,
        atom_number: f64,
        /// Rate in units of `E_c / ħ`.
        rate: f64,
        saturation: f64,
    },
}

/// What the run values are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "units", rename_all = "snake_case")]
pub enum RescaleContext {
    Physical {
        /// `C_p` in J m^p.
        interaction_coefficient: f64,
        dimension: u32,
        interaction_exponent: u32,
    },
    Dimensionless {
        dimension: u32,
        interaction_exponent: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub run_id: String,
    pub density: Option<f64>,
    pub rabi_frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub alpha: f64,
    pub g_r: f64,
    pub f_r: f64,
    pub provenance: Provenance,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveData(format!("{name} = {v}")))
    }
}

pub fn rescale(run_id: &str, run: &RunRecord, context: &RescaleContext) -> Result<ScalingPoint> {
    match (run, context) {
        (
            RunRecord::Physical {
                density,
                rabi_frequency,
                atom_number,
                rate,
                saturation,
            },
            RescaleContext::Physical {
                interaction_coefficient,
                dimension,
                interaction_exponent,
            },
        ) => {
            for (name, v) in [
                ("density", *density),
                ("rabi_frequency", *rabi_frequency),
                ("atom_number", *atom_number),
                ("rate", *rate),
                ("saturation", *saturation),
            ] {
                positive(name, v)?;
            }
            let phys = PhysicalParams {
                rabi_frequency: *rabi_frequency,
                laser_detuning: 0.0,
                density: *density,
                interaction_coefficient: *interaction_coefficient,
                dimension: *dimension,
                interaction_exponent: *interaction_exponent,
                atom_number: atom_number.round().max(1.0) as u64,
            };
            let model = nondimensionalize(&phys)?;
            let energy = phys.characteristic_energy();
            Ok(ScalingPoint {
                alpha: model.alpha,
                g_r: constants::HBAR * rate / (atom_number * energy),
                f_r: saturation / atom_number,
                provenance: Provenance {
                    run_id: run_id.to_string(),
                    density: Some(*density),
                    rabi_frequency: Some(*rabi_frequency),
                },
            })
        }
        (
            RunRecord::Dimensionless {
                alpha,
                atom_number,
                rate,
                saturation,
            },
            RescaleContext::Dimensionless { .. },
        ) => {
            for (name, v) in [
                ("alpha", *alpha),
                ("atom_number", *atom_number),
                ("rate", *rate),
                ("saturation", *saturation),
            ] {
                positive(name, v)?;
            }
            Ok(ScalingPoint {
                alpha: *alpha,
                g_r: rate / atom_number,
                f_r: saturation / atom_number,
                provenance: Provenance {
                    run_id: run_id.to_string(),
                    density: None,
                    rabi_frequency: None,
                },
            })
        }
        _ => Err(Error::UnitMismatch(
            "physical and dimensionless inputs cannot be mixed".into(),
        )),
    }
}
