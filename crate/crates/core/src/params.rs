//! Unit conventions, nondimensionalization and the closed-form critical
//! exponents.
//!
//! Downstream modules work in natural units: ħ = 1, lengths in units of the
//! mean spacing `a = n^(-1/d)`, energies in units of `E_c = C_p n^(p/d)` and
//! times in units of `ħ / E_c`. In these units the Hamiltonian depends on the
//! drive `alpha`, the detuning `delta` and unit-strength interactions only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, SI units.
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Hartree energy, J.
    pub const HARTREE: f64 = 4.359_744_722_207_1e-18;
    /// Bohr radius, m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    /// One micrometre, m.
    pub const MICROMETRE: f64 = 1e-6;

    /// `(name, value, unit)` rows, in the order they are documented.
    pub const TABLE: &[(&str, f64, &str)] = &[
        ("hbar", HBAR, "J s"),
        ("h", PLANCK, "J s"),
        ("E_h", HARTREE, "J"),
        ("a_0", BOHR_RADIUS, "m"),
    ];
}

/// Dimensional problem definition in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Rabi frequency Ω, rad/s.
    pub rabi_frequency: f64,
    /// Laser detuning δ_L, rad/s.
    pub laser_detuning: f64,
    /// Number density, m^-d.
    pub density: f64,
    /// |C_p|, J m^p.
    pub interaction_coefficient: f64,
    pub dimension: u32,
    pub interaction_exponent: u32,
    pub atom_number: u64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        check_exponents(self.dimension, self.interaction_exponent)?;
        if !(self.rabi_frequency >= 0.0) || !self.rabi_frequency.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rabi_frequency must be finite and >= 0, got {}",
                self.rabi_frequency
            )));
        }
        if !self.laser_detuning.is_finite() {
            return Err(Error::InvalidParameter(
                "laser_detuning must be finite".into(),
            ));
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be finite and > 0, got {}",
                self.density
            )));
        }
        if !(self.interaction_coefficient > 0.0) || !self.interaction_coefficient.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interaction_coefficient must be finite and > 0, got {}",
                self.interaction_coefficient
            )));
        }
        if self.atom_number < 1 {
            return Err(Error::InvalidParameter("atom_number must be >= 1".into()));
        }
        Ok(())
    }

    /// Characteristic energy `E_c = C_p n^(p/d)` in joules.
    pub fn characteristic_energy(&self) -> f64 {
        let (p, d) = (self.interaction_exponent, self.dimension);
        // Integer powers keep density scalings exact.
        let scale = if p % d == 0 {
            self.density.powi((p / d) as i32)
        } else {
            self.density.powf(p as f64 / d as f64)
        };
        self.interaction_coefficient * scale
    }

    /// Conversion factors between natural and SI units.
    pub fn natural_units(&self) -> NaturalUnits {
        let energy = self.characteristic_energy();
        NaturalUnits {
            energy,
            length: self.density.powf(-1.0 / self.dimension as f64),
            time: constants::HBAR / energy,
        }
    }
}

/// SI size of one natural unit of energy, length and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalUnits {
    /// E_c, J.
    pub energy: f64,
    /// a = n^(-1/d), m.
    pub length: f64,
    /// ħ / E_c, s.
    pub time: f64,
}

/// Dimensionless problem definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dimension: u32,
    pub interaction_exponent: u32,
    /// α = ħΩ / E_c.
    pub alpha: f64,
    /// Δ = ħδ_L / E_c.
    pub delta: f64,
}

impl ModelParams {
    pub fn new(dimension: u32, interaction_exponent: u32, alpha: f64, delta: f64) -> Result<Self> {
        let params = Self {
            dimension,
            interaction_exponent,
            alpha,
            delta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponents(self.dimension, self.interaction_exponent)?;
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_exponents(d: u32, p: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if p <= d {
        return Err(Error::NoCriticalPoint { d, p });
    }
    Ok(())
}

/// Map SI parameters to `(α, Δ)`.
pub fn nondimensionalize(phys: &PhysicalParams) -> Result<ModelParams> {
    phys.validate()?;
    let energy = phys.characteristic_energy();
    Ok(ModelParams {
        dimension: phys.dimension,
        interaction_exponent: phys.interaction_exponent,
        alpha: constants::HBAR * phys.rabi_frequency / energy,
        delta: constants::HBAR * phys.laser_detuning / energy,
    })
}

/// A van der Waals coefficient converted from atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C6 {
    /// |C_6| in J m^6.
    pub joule_m6: f64,
    /// The input was negative and its sign was dropped.
    pub sign_flipped: bool,
}

impl C6 {
    /// |C_6| / h in Hz µm^6.
    pub fn hz_um6(&self) -> f64 {
        self.joule_m6 / constants::PLANCK / constants::MICROMETRE.powi(6)
    }
}

/// Convert `C_6` from atomic units `E_h a_0^6` to SI. Only the magnitude is
/// kept; a negative input sets [`C6::sign_flipped`].
pub fn c6_atomic_to_si(c6_au: f64) -> C6 {
    C6 {
        joule_m6: c6_au.abs() * constants::HARTREE * constants::BOHR_RADIUS.powi(6),
        sign_flipped: c6_au < 0.0,
    }
}

/// An exact fraction with positive denominator, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Self {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Critical exponents of the driven gas for interaction `1/r^p` in `d`
/// dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub dimension: u32,
    pub interaction_exponent: u32,
    /// f_R ~ Δ^β at α = 0.
    pub beta: Rational,
    /// f_R ~ α^(1/δ) at Δ = 0.
    pub one_over_delta: Rational,
    /// g_R ~ α^γ at Δ = 0.
    pub gamma: Rational,
    /// τ ~ ξ^z.
    pub z: Rational,
    /// ξ ~ Δ^(-ν). Not quoted in the literature for this system; obtained
    /// from ξ ~ f_R^(-1/d) together with β = d/p.
    pub nu: Rational,
}

impl CriticalExponents {
    /// δ = (2p + d) / 2d.
    pub fn delta(&self) -> Rational {
        Rational::new(self.one_over_delta.den, self.one_over_delta.num)
    }
}

pub fn critical_exponents(d: u32, p: u32) -> Result<CriticalExponents> {
    check_exponents(d, p)?;
    let (d_, p_) = (d as i64, p as i64);
    Ok(CriticalExponents {
        dimension: d,
        interaction_exponent: p,
        beta: Rational::new(d_, p_),
        one_over_delta: Rational::new(2 * d_, 2 * p_ + d_),
        gamma: Rational::new(2 * (p_ + d_), 2 * p_ + d_),
        z: Rational::new(p_, 1),
        nu: Rational::new(1, p_),
    })
}
