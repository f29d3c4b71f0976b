//! Local density approximation over a Gaussian cloud.
//!
//! Each point of the cloud is treated as a homogeneous gas at the local
//! density, so `α(r) = α_peak (n(0)/n(r))^{p/d}`. Writing the cloud in
//! whitened radius `ρ` (with `n(r) = n(0) e^{-ρ²/2}`), the number-weighted
//! average reduces to a one-dimensional integral over the chi distribution
//! with `D` degrees of freedom, `D` being the number of cloud axes. For the
//! power law `f = α^{1/δ}` it has the closed form `s^{-D/2} α_peak^{1/δ}`
//! with `s = 1 − (p/d)(1/δ) = d/(2p+d)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::eos_solve;
use crate::params::check_exponents;
use crate::quadrature::{integrate_to_infinity, QuadOptions};
use crate::superatom::blockade_radius;

/// Gaussian cloud in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    /// Standard deviations along each axis, m. One to three entries.
    pub sigmas: Vec<f64>,
    pub atom_number: f64,
}

impl CloudSpec {
    pub fn new(sigmas: Vec<f64>, atom_number: f64) -> Result<Self> {
        let cloud = Self {
            sigmas,
            atom_number,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.sigmas.len() > 3 {
            return Err(Error::InvalidParameter(format!(
                "a cloud has 1 to 3 axes, got {}",
                self.sigmas.len()
            )));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "cloud sigmas must be positive".into(),
            ));
        }
        if !(self.atom_number > 0.0) || !self.atom_number.is_finite() {
            return Err(Error::InvalidParameter(
                "atom number must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.sigmas.len()
    }

    /// `N / ((2π)^{D/2} Π σ)`, in m^-D.
    pub fn peak_density(&self) -> f64 {
        let volume: f64 = self.sigmas.iter().product();
        self.atom_number / ((2.0 * PI).powf(0.5 * self.dimension() as f64) * volume)
    }

    pub fn density(&self, r: &[f64]) -> f64 {
        let rho2: f64 = r
            .iter()
            .zip(&self.sigmas)
            .map(|(x, s)| (x / s).powi(2))
            .sum();
        self.peak_density() * (-0.5 * rho2).exp()
    }
}

/// Transverse-integrated line density `n₁(z)` of a cloud, `z` being the last
/// axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineDensity {
    /// `N / (√(2π) σ_z)`, m^-1.
    pub peak: f64,
    pub sigma: f64,
    pub atom_number: f64,
}

impl LineDensity {
    pub fn at(&self, z: f64) -> f64 {
        self.peak * (-0.5 * (z / self.sigma).powi(2)).exp()
    }

    pub fn as_cloud(&self) -> CloudSpec {
        CloudSpec {
            sigmas: vec![self.sigma],
            atom_number: self.atom_number,
        }
    }
}

pub fn effective_line_density(cloud: &CloudSpec) -> Result<LineDensity> {
    cloud.validate()?;
    let sigma = *cloud.sigmas.last().expect("validated");
    Ok(LineDensity {
        peak: cloud.atom_number / ((2.0 * PI).sqrt() * sigma),
        sigma,
        atom_number: cloud.atom_number,
    })
}

/// Local scaling law used inside the cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LocalLaw {
    /// `f = α^{1/δ}`.
    PowerLaw,
    /// Full equation of state with `Δ(r) = Δ_peak (n(0)/n(r))^{p/d}`.
    MeanField { delta_peak: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LdaWarning {
    /// The blockade radius at the peak exceeds the thinnest cloud axis, so the
    /// local density approximation is not justified.
    BlockadeExceedsCloud { xi_m: f64, min_sigma_m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaResult {
    pub alpha_peak: f64,
    /// Cloud-averaged Rydberg fraction.
    pub f_r: f64,
    /// `f_r / α_peak^{1/δ}`.
    pub prefactor: f64,
    /// Closed-form prefactor, power-law mode only.
    pub closed_form: Option<f64>,
    pub quadrature_error: f64,
    pub warnings: Vec<LdaWarning>,
}

/// `(1 − (p/d)(1/δ))^{-D/2}` for a `D`-axis Gaussian cloud.
pub fn closed_form_prefactor(cloud_axes: usize, d: u32, p: u32) -> Result<f64> {
    check_exponents(d, p)?;
    let s = 1.0 - (p as f64 / d as f64) * 2.0 * d as f64 / (2 * p + d) as f64;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "divergent cloud wings, s = {s}"
        )));
    }
    Ok(s.powf(-0.5 * cloud_axes as f64))
}

/// Power-law LDA average.
pub fn lda_average(cloud: &CloudSpec, alpha_peak: f64, d: u32, p: u32) -> Result<LdaResult> {
    lda_average_with(cloud, alpha_peak, d, p, LocalLaw::PowerLaw)
}

/// LDA average with a chosen local law. A three-axis cloud analysed with
/// `d = 1` is first reduced to its line density along the last axis.
pub fn lda_average_with(
    cloud: &CloudSpec,
    alpha_peak: f64,
    d: u32,
    p: u32,
    law: LocalLaw,
) -> Result<LdaResult> {
    check_exponents(d, p)?;
    cloud.validate()?;
    if !(alpha_peak > 0.0) || !alpha_peak.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha_peak must be positive, got {alpha_peak}"
        )));
    }
    let cloud = if cloud.dimension() != d as usize && d == 1 {
        effective_line_density(cloud)?.as_cloud()
    } else {
        cloud.clone()
    };
    if cloud.dimension() != d as usize {
        return Err(Error::DimensionMismatch(format!(
            "{}-axis cloud for a {d}-dimensional analysis",
            cloud.dimension()
        )));
    }

    let k = p as f64 / d as f64;
    let inv_delta = 2.0 * d as f64 / (2 * p + d) as f64;
    let axes = cloud.dimension() as i32;
    let opts = QuadOptions::default();
    let weight = |rho: f64| rho.powi(axes - 1) * (-0.5 * rho * rho).exp();

    let norm = integrate_to_infinity(weight, 0.0, opts)?;
    let (num, closed_form) = match law {
        LocalLaw::PowerLaw => {
            let scale = alpha_peak.powf(inv_delta);
            let s = 1.0 - k * inv_delta;
            let num = integrate_to_infinity(
                |rho| scale * rho.powi(axes - 1) * (-0.5 * s * rho * rho).exp(),
                0.0,
                opts,
            )?;
            (num, Some(closed_form_prefactor(axes as usize, d, p)?))
        }
        LocalLaw::MeanField { delta_peak } => {
            let mut failure = None;
            let num = integrate_to_infinity(
                |rho| {
                    let w = weight(rho);
                    if w == 0.0 {
                        return 0.0;
                    }
                    let stretch = (0.5 * k * rho * rho).exp();
                    if !stretch.is_finite() {
                        // Infinitely strong local drive saturates the fraction.
                        return w;
                    }
                    match eos_solve(alpha_peak * stretch, delta_peak * stretch, d, p) {
                        Ok(sol) => sol.f_r * w,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    }
                },
                0.0,
                opts,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            (num, None)
        }
    };
    let f_r = num.value / norm.value;
    let quadrature_error =
        f_r * (num.error / num.value.abs().max(f64::MIN_POSITIVE) + norm.error / norm.value);

    let mut warnings = Vec::new();
    let spacing = cloud.peak_density().powf(-1.0 / d as f64);
    let xi_m = blockade_radius(alpha_peak, d, p)? * spacing;
    let min_sigma_m = cloud.sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    if xi_m > min_sigma_m {
        warnings.push(LdaWarning::BlockadeExceedsCloud { xi_m, min_sigma_m });
    }

    Ok(LdaResult {
        alpha_peak,
        f_r,
        prefactor: f_r / alpha_peak.powf(inv_delta),
        closed_form,
        quadrature_error,
        warnings,
    })
}

/// The local law at a single density: the homogeneous reference the cloud
/// average is compared with.
pub fn local_fraction(alpha: f64, d: u32, p: u32, law: LocalLaw) -> Result<f64> {
    check_exponents(d, p)?;
    match law {
        LocalLaw::PowerLaw => Ok(alpha.powf(2.0 * d as f64 / (2 * p + d) as f64)),
        LocalLaw::MeanField { delta_peak } => Ok(eos_solve(alpha, delta_peak, d, p)?.f_r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn peak_density_normalization() {
        let cloud = CloudSpec::new(vec![8.6e-6, 8.6e-6, 100e-6], 1e5).unwrap();
        // ∫ n = N, via a separable product of 1d integrals.
        let total: f64 = cloud
            .sigmas
            .iter()
            .map(|s| {
                integrate(
                    |x| (-0.5 * (x / s).powi(2)).exp(),
                    -12.0 * s,
                    12.0 * s,
                    QuadOptions::default(),
                )
                .unwrap()
                .value
            })
            .product::<f64>()
            * cloud.peak_density();
        assert!(rel(total, 1e5) < 1e-12);
    }

    #[test]
    fn three_dimensional_prefactor() {
        let cloud = CloudSpec::new(vec![1e-5, 2e-5, 3e-4], 1e5).unwrap();
        let r = lda_average(&cloud, 1e-6, 3, 6).unwrap();
        let expected = 5f64.powf(1.5);
        assert!(rel(r.prefactor, expected) < 1e-10, "{}", r.prefactor);
        assert!(rel(r.closed_form.unwrap(), expected) < 1e-15);
    }

    #[test]
    fn homogeneous_gas_has_unit_ratio() {
        let alpha = 3e-4;
        let f = local_fraction(alpha, 3, 6, LocalLaw::PowerLaw).unwrap();
        assert!(rel(f / alpha.powf(0.4), 1.0) < 1e-14);
    }

    #[test]
    fn exponent_is_preserved() {
        let cloud = CloudSpec::new(vec![1e-5, 1e-5, 1e-4], 1e5).unwrap();
        let a = lda_average(&cloud, 1e-7, 3, 6).unwrap().f_r;
        let b = lda_average(&cloud, 1e-5, 3, 6).unwrap().f_r;
        let slope = (b / a).ln() / 100f64.ln();
        assert!((slope - 0.4).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn mean_field_mode_is_the_capped_power_law_at_zero_detuning() {
        let cloud = CloudSpec::new(vec![1e-5, 1e-5, 1e-5], 1e4).unwrap();
        let alpha = 1e-6;
        let mf =
            lda_average_with(&cloud, alpha, 3, 6, LocalLaw::MeanField { delta_peak: 0.0 }).unwrap();
        assert!(mf.closed_form.is_none());
        // In the wings α(r) > 1 and the local fraction is capped at 1.
        let opts = QuadOptions::default();
        let capped = |rho: f64| {
            let f = (alpha.powf(0.4) * (0.4 * rho * rho).exp()).min(1.0);
            f * rho * rho * (-0.5 * rho * rho).exp()
        };
        let edge = (2.0 * 1e6f64.ln() / 2.0).sqrt();
        let num = integrate(capped, 0.0, edge, opts).unwrap().value
            + integrate(capped, edge, 60.0, opts).unwrap().value;
        let den = (PI / 2.0).sqrt();
        assert!(rel(mf.f_r, num / den) < 1e-8, "{} vs {}", mf.f_r, num / den);
        assert!(mf.prefactor < 5f64.powf(1.5));
        let detuned =
            lda_average_with(&cloud, 1e-6, 3, 6, LocalLaw::MeanField { delta_peak: 1e-3 }).unwrap();
        assert!(detuned.f_r > mf.f_r);
    }

    #[test]
    fn line_density_example() {
        let cloud = CloudSpec::new(vec![8.6e-6, 8.6e-6, 100e-6], 1e5).unwrap();
        let line = effective_line_density(&cloud).unwrap();
        assert!(rel(line.peak, 3.989_422_804e8) < 1e-9);
        assert_eq!(line.at(30e-6), line.at(-30e-6));
        let total = integrate(|z| line.at(z), -2e-3, 2e-3, QuadOptions::default())
            .unwrap()
            .value;
        assert!(rel(total, 1e5) < 1e-10);
    }

    #[test]
    fn one_dimensional_analysis_of_a_cigar() {
        let cloud = CloudSpec::new(vec![8.6e-6, 8.6e-6, 100e-6], 1e5).unwrap();
        let r = lda_average(&cloud, 1e-9, 1, 6).unwrap();
        assert!(rel(r.prefactor, closed_form_prefactor(1, 1, 6).unwrap()) < 1e-10);
    }

    #[test]
    fn warns_when_blockade_exceeds_cloud() {
        let tight = CloudSpec::new(vec![1e-7, 1e-7, 1e-7], 10.0).unwrap();
        let r = lda_average(&tight, 1e-8, 3, 6).unwrap();
        assert!(matches!(
            r.warnings.as_slice(),
            [LdaWarning::BlockadeExceedsCloud { .. }]
        ));
        let wide = CloudSpec::new(vec![1e-4, 1e-4, 1e-4], 1e6).unwrap();
        assert!(lda_average(&wide, 1.0, 3, 6).unwrap().warnings.is_empty());
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(CloudSpec::new(vec![], 1.0).is_err());
        assert!(CloudSpec::new(vec![1.0, -1.0], 1.0).is_err());
        assert!(CloudSpec::new(vec![1.0], 0.0).is_err());
        let c = CloudSpec::new(vec![1.0, 1.0], 1.0).unwrap();
        assert!(lda_average(&c, 1e-3, 3, 6).is_err());
    }
}
