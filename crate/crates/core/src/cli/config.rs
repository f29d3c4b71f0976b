//! Declarative run configuration. Physical inputs are strings with explicit
//! units and are converted to SI exactly once, in the `resolve_*` methods.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::DEFAULT_R_MIN;
use crate::error::{Error, Result};
use crate::params::{nondimensionalize, ModelParams, PhysicalParams};
use crate::quantum::{BasisChoice, EnsembleGeometry, Method, PropagationOptions};
use crate::sweep::{SweepGroup, SweepPoint, TimeGrid};
use crate::units::{parse_quantity, Quantity};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eos: Option<EosSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse: Option<CollapseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lda: Option<LdaSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dimension: u32,
    #[serde(default = "default_p")]
    pub interaction_exponent: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_frequency: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser_detuning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_coefficient: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_number: Option<u64>,
}

fn default_p() -> u32 {
    6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Periodic,
    GaussianCloud,
    OpenLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub atoms: usize,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default = "periodic")]
    pub geometry: GeometryKind,
    /// Cloud widths in units of `a`, for `gaussian_cloud`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
}

fn one() -> usize {
    1
}

fn periodic() -> GeometryKind {
    GeometryKind::Periodic
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    Full,
    Truncated,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub mode: BasisMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_excitations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

/// Exactly one of `t_max` (units of ħ/E_c), `duration` (SI, needs a
/// physical model) or `span` (multiples of the superatom time) sets the end
/// of the grid, which starts at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Either explicit `values` or `count` points from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosSection {
    pub alpha: Axis,
    pub delta: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn items(&self) -> Vec<&str> {
        match self {
            OneOrMany::One(s) => vec![s.as_str()],
            OneOrMany::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

/// A sweep group lists either `alpha` values or physical points. For the
/// latter `density` and `rabi_frequency` are each a single value or a list;
/// a single value is repeated, two lists are paired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_frequency: Option<OneOrMany>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub bootstrap: usize,
    #[serde(default)]
    pub group: Vec<GroupSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Density,
    RabiFrequency,
    AtomNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSection {
    /// CSV with columns `n, omega, N, time, N_R` and a units row. Relative
    /// paths are taken from the config file's directory.
    pub data: String,
    #[serde(default = "by_density")]
    pub group_by: GroupBy,
}

fn by_density() -> GroupBy {
    GroupBy::Density
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    PowerLaw,
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaSection {
    /// Gaussian widths with units, one per cloud axis.
    pub sigmas: Vec<String>,
    pub atom_number: f64,
    #[serde(default = "power_law")]
    pub law: LawKind,
    /// Peak couplings. When absent, the single value follows from the model's
    /// Rabi frequency and coefficient at the cloud's peak density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_peak: Option<Vec<f64>>,
    /// Dimensionless detuning at the peak, mean-field law only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_peak: Option<f64>,
}

fn power_law() -> LawKind {
    LawKind::PowerLaw
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Unit errors become config errors naming the offending field.
fn quantity(text: &str, kind: Quantity, field: &str) -> Result<f64> {
    parse_quantity(text, kind).map_err(|e| config_err(format!("{field}: {e}")))
}

impl RunConfig {
    /// Read TOML, or a JSON manifest written by a previous run (its `config`
    /// member is used).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let inner = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(inner)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        };
        config.check_schema()?;
        Ok(config)
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.check_schema()?;
        Ok(config)
    }

    fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&ModelSection> {
        self.model
            .as_ref()
            .ok_or_else(|| config_err("missing [model] section"))
    }

    pub fn ensemble(&self) -> Result<&EnsembleSection> {
        self.ensemble
            .as_ref()
            .ok_or_else(|| config_err("missing [ensemble] section"))
    }

    pub fn resolve_basis(&self) -> Result<BasisChoice> {
        let Some(b) = &self.basis else {
            return Ok(BasisChoice::Adaptive { start: None });
        };
        match (b.mode, b.max_excitations) {
            (BasisMode::Full, None) => Ok(BasisChoice::Full),
            (BasisMode::Full, Some(_)) => Err(config_err(
                "basis.max_excitations has no meaning for a full basis",
            )),
            (BasisMode::Truncated, Some(k)) => Ok(BasisChoice::Truncated { max_excitations: k }),
            (BasisMode::Truncated, None) => {
                Err(config_err("truncated basis needs basis.max_excitations"))
            }
            (BasisMode::Adaptive, start) => Ok(BasisChoice::Adaptive { start }),
        }
    }

    pub fn resolve_propagation(&self) -> PropagationOptions {
        let defaults = PropagationOptions::with_tol(1e-6);
        let Some(p) = &self.propagation else {
            return defaults;
        };
        PropagationOptions {
            tol: p.tol.unwrap_or(defaults.tol),
            method: p.method.unwrap_or(defaults.method),
            dense_cap: p.dense_cap.unwrap_or(defaults.dense_cap),
            krylov_dim: p.krylov_dim.unwrap_or(defaults.krylov_dim),
            max_steps: p.max_steps.unwrap_or(defaults.max_steps),
        }
    }

    pub fn resolve_geometry(&self) -> Result<EnsembleGeometry> {
        let e = self.ensemble()?;
        match (e.geometry, &e.sigmas) {
            (GeometryKind::Periodic, None) => Ok(EnsembleGeometry::Periodic),
            (GeometryKind::OpenLine, None) => Ok(EnsembleGeometry::OpenLine),
            (GeometryKind::GaussianCloud, Some(s)) => {
                Ok(EnsembleGeometry::GaussianCloud { sigmas: s.clone() })
            }
            (GeometryKind::GaussianCloud, None) => {
                Err(config_err("gaussian_cloud needs ensemble.sigmas"))
            }
            (_, Some(_)) => Err(config_err("ensemble.sigmas only applies to gaussian_cloud")),
        }
    }

    pub fn r_min(&self) -> f64 {
        self.ensemble
            .as_ref()
            .and_then(|e| e.r_min)
            .unwrap_or(DEFAULT_R_MIN)
    }
}

impl ModelSection {
    fn has_physical(&self) -> bool {
        self.rabi_frequency.is_some() || self.density.is_some() || self.laser_detuning.is_some()
    }

    pub fn interaction_coefficient_si(&self) -> Result<Option<f64>> {
        self.interaction_coefficient
            .as_deref()
            .map(|c| {
                quantity(
                    c,
                    Quantity::InteractionCoefficient(self.interaction_exponent),
                    "model.interaction_coefficient",
                )
            })
            .transpose()
    }

    pub fn density_si(&self, text: &str, field: &str) -> Result<f64> {
        quantity(text, Quantity::Density(Some(self.dimension)), field)
    }

    /// Dimensionless parameters, plus the SI set when the model was given
    /// physically. `atoms` fills in a missing `atom_number`.
    pub fn resolve(&self, atoms: u64) -> Result<(ModelParams, Option<PhysicalParams>)> {
        match (self.alpha, self.has_physical()) {
            (Some(_), true) => Err(config_err(
                "model: give either alpha/delta or physical rabi_frequency/density, not both",
            )),
            (Some(alpha), false) => Ok((
                ModelParams::new(
                    self.dimension,
                    self.interaction_exponent,
                    alpha,
                    self.delta.unwrap_or(0.0),
                )?,
                None,
            )),
            (None, _) => {
                if self.delta.is_some() {
                    return Err(config_err(
                        "model.delta needs model.alpha; use laser_detuning with physical inputs",
                    ));
                }
                let need = |v: &Option<String>, name: &str| {
                    v.clone().ok_or_else(|| {
                        config_err(format!("model.{name} is required without model.alpha"))
                    })
                };
                let phys = PhysicalParams {
                    rabi_frequency: quantity(
                        &need(&self.rabi_frequency, "rabi_frequency")?,
                        Quantity::AngularFrequency,
                        "model.rabi_frequency",
                    )?,
                    laser_detuning: match &self.laser_detuning {
                        Some(t) => quantity(t, Quantity::AngularFrequency, "model.laser_detuning")?,
                        None => 0.0,
                    },
                    density: self.density_si(&need(&self.density, "density")?, "model.density")?,
                    interaction_coefficient: self.interaction_coefficient_si()?.ok_or_else(
                        || {
                            config_err(
                                "model.interaction_coefficient is required without model.alpha",
                            )
                        },
                    )?,
                    dimension: self.dimension,
                    interaction_exponent: self.interaction_exponent,
                    atom_number: self.atom_number.unwrap_or(atoms),
                };
                Ok((nondimensionalize(&phys)?, Some(phys)))
            }
        }
    }
}

impl TimeSection {
    /// Dimensionless output times from zero.
    pub fn resolve(&self, params: &ModelParams, phys: Option<&PhysicalParams>) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(config_err("time.points must be at least 2"));
        }
        let end = match (self.t_max, &self.duration, self.span) {
            (Some(t), None, None) => t,
            (None, Some(text), None) => {
                let phys =
                    phys.ok_or_else(|| config_err("time.duration needs a physical model"))?;
                quantity(text, Quantity::Time, "time.duration")? / phys.natural_units().time
            }
            (None, None, Some(span)) => {
                if !(params.alpha > 0.0) {
                    return Err(config_err("time.span needs alpha > 0"));
                }
                let grid = TimeGrid {
                    span,
                    points: self.points,
                };
                return Ok(grid.times(params.alpha, params.dimension, params.interaction_exponent));
            }
            _ => {
                return Err(config_err(
                    "time: give exactly one of t_max, duration, span",
                ))
            }
        };
        if !(end > 0.0 && end.is_finite()) {
            return Err(config_err(format!(
                "time grid end must be positive, got {end}"
            )));
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points).map(|i| end * i as f64 / last).collect())
    }
}

impl Axis {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let v = match (&self.values, self.from, self.to, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Err(config_err(format!("{name}.count must be positive")));
                }
                if n == 1 {
                    vec![a]
                } else {
                    let last = (n - 1) as f64;
                    match self.spacing.unwrap_or(Spacing::Linear) {
                        Spacing::Linear => (0..n).map(|i| a + (b - a) * i as f64 / last).collect(),
                        Spacing::Log => {
                            if !(a > 0.0 && b > 0.0) {
                                return Err(config_err(format!(
                                    "{name}: log spacing needs positive bounds"
                                )));
                            }
                            let (la, lb) = (a.ln(), b.ln());
                            let mut v: Vec<f64> = (0..n)
                                .map(|i| (la + (lb - la) * i as f64 / last).exp())
                                .collect();
                            // Endpoints exactly as written.
                            v[0] = a;
                            v[n - 1] = b;
                            v
                        }
                    }
                }
            }
            _ => {
                return Err(config_err(format!(
                    "{name}: give either values or from/to/count"
                )))
            }
        };
        if v.is_empty() {
            return Err(config_err(format!("{name} is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(config_err(format!("{name} has non-finite entries")));
        }
        Ok(v)
    }
}

impl GroupSection {
    pub fn resolve(&self, model: &ModelSection) -> Result<SweepGroup> {
        let points = match (&self.alpha, &self.density, &self.rabi_frequency) {
            (Some(a), None, None) => a.iter().map(|&alpha| SweepPoint::Alpha { alpha }).collect(),
            (None, Some(n), Some(w)) => {
                let n = n.items();
                let w = w.items();
                let count = match (n.len(), w.len()) {
                    (1, k) | (k, 1) => k,
                    (a, b) if a == b => a,
                    (a, b) => {
                        return Err(config_err(format!(
                            "group '{}': {a} densities cannot be paired with {b} Rabi frequencies",
                            self.label
                        )))
                    }
                };
                (0..count)
                    .map(|i| {
                        Ok(SweepPoint::Physical {
                            density: model.density_si(
                                n[if n.len() == 1 { 0 } else { i }],
                                "sweep.group.density",
                            )?,
                            rabi_frequency: quantity(
                                w[if w.len() == 1 { 0 } else { i }],
                                Quantity::AngularFrequency,
                                "sweep.group.rabi_frequency",
                            )?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            _ => {
                return Err(config_err(format!(
                    "group '{}': give alpha, or both density and rabi_frequency",
                    self.label
                )))
            }
        };
        Ok(SweepGroup {
            label: self.label.clone(),
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"
schema_version = 1
seed = 3

[model]
dimension = 3
rabi_frequency = "154 kHz"
density = "3.2e19 m^-3"
interaction_coefficient = "1.7e19 au"

[ensemble]
atoms = 4
realizations = 2

[time]
span = 10
points = 5
"#;

    #[test]
    fn physical_model_resolves_through_units() {
        let c = RunConfig::parse_toml(SIM).unwrap();
        let (m, phys) = c.model().unwrap().resolve(4).unwrap();
        assert!(m.alpha > 4e-8 && m.alpha < 8e-8, "{}", m.alpha);
        assert_eq!(phys.unwrap().atom_number, 4);
    }

    #[test]
    fn unknown_keys_and_bad_schema_are_rejected() {
        assert!(matches!(
            RunConfig::parse_toml("schema_version = 1\nsed = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse_toml("schema_version = 2\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn overconstrained_model_is_rejected() {
        let text = SIM.replace("dimension = 3", "dimension = 3\nalpha = 0.1");
        let c = RunConfig::parse_toml(&text).unwrap();
        assert!(matches!(
            c.model().unwrap().resolve(4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn missing_units_are_a_config_error() {
        let text = SIM.replace("\"154 kHz\"", "\"154\"");
        let c = RunConfig::parse_toml(&text).unwrap();
        assert!(matches!(
            c.model().unwrap().resolve(4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn axes() {
        let a = Axis {
            values: None,
            from: Some(1e-6),
            to: Some(1e-2),
            count: Some(5),
            spacing: Some(Spacing::Log),
        };
        let v = a.values("alpha").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[2] / 1e-4 - 1.0).abs() < 1e-12);
        assert_eq!((v[0], v[4]), (1e-6, 1e-2));
        let bad = Axis {
            values: Some(vec![1.0]),
            from: Some(1.0),
            ..a
        };
        assert!(bad.values("alpha").is_err());
    }

    #[test]
    fn sweep_groups_broadcast_single_values() {
        let model = RunConfig::parse_toml(SIM).unwrap().model.unwrap();
        let g = GroupSection {
            label: "omega".into(),
            alpha: None,
            density: Some(OneOrMany::One("1e19 m^-3".into())),
            rabi_frequency: Some(OneOrMany::Many(vec!["1 MHz".into(), "2 MHz".into()])),
        };
        let r = g.resolve(&model).unwrap();
        assert_eq!(r.points.len(), 2);
        let mismatched = GroupSection {
            density: Some(OneOrMany::Many(vec!["1e19 m^-3".into(); 3])),
            ..g
        };
        assert!(mismatched.resolve(&model).is_err());
    }

    #[test]
    fn time_grid_forms() {
        let c = RunConfig::parse_toml(SIM).unwrap();
        let (m, phys) = c.model().unwrap().resolve(4).unwrap();
        let t = c.time.as_ref().unwrap().resolve(&m, phys.as_ref()).unwrap();
        assert_eq!(t.len(), 5);
        let d = TimeSection {
            t_max: None,
            duration: Some("1 us".into()),
            span: None,
            points: 3,
        };
        let t = d.resolve(&m, phys.as_ref()).unwrap();
        assert!((t[2] * phys.unwrap().natural_units().time / 1e-6 - 1.0).abs() < 1e-12);
        assert!(d.resolve(&m, None).is_err());
    }
}
