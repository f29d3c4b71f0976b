//! Parsing of physical quantities written with explicit units, such as
//! `"154 kHz"` or `"3.2e19 m^-3"`. Everything is converted to SI once, here.
//!
//! Frequencies given in Hz (and multiples) are cyclic and become angular
//! frequencies through a factor 2π; `rad/s` is taken as angular already.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{c6_atomic_to_si, constants};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Result in rad/s.
    AngularFrequency,
    /// Number density in m^-d; `Some(d)` pins the dimension.
    Density(Option<u32>),
    Length,
    Time,
    /// `C_p` in J·m^p.
    InteractionCoefficient(u32),
    /// Plain number, unit `1` or empty.
    Count,
}

fn length_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" | "µm" | "μm" => 1e-6,
        "nm" => 1e-9,
        _ => return None,
    })
}

fn cyclic_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        _ => return None,
    })
}

/// `"<length>^<k>"`, returning the length factor and `k`.
fn length_power(unit: &str) -> Option<(f64, i32)> {
    let (base, exp) = unit.split_once('^')?;
    Some((length_factor(base.trim())?, exp.trim().parse().ok()?))
}

fn unknown(unit: &str, kind: Quantity) -> Error {
    Error::Config(format!("unit '{unit}' not understood for {kind:?}"))
}

/// SI multiplier of `unit` for the given kind of quantity. Atomic units of
/// `C_6` are handled by [`parse_quantity`] because of the sign convention.
pub fn unit_factor(unit: &str, kind: Quantity) -> Result<f64> {
    let unit = unit.trim();
    match kind {
        Quantity::AngularFrequency => match unit {
            "rad/s" => Ok(1.0),
            "krad/s" => Ok(1e3),
            "Mrad/s" => Ok(1e6),
            _ => cyclic_factor(unit)
                .map(|f| 2.0 * PI * f)
                .ok_or_else(|| unknown(unit, kind)),
        },
        Quantity::Length => length_factor(unit).ok_or_else(|| unknown(unit, kind)),
        Quantity::Time => match unit {
            "s" => Ok(1.0),
            "ms" => Ok(1e-3),
            "us" | "µs" | "μs" => Ok(1e-6),
            "ns" => Ok(1e-9),
            _ => Err(unknown(unit, kind)),
        },
        Quantity::Density(dim) => {
            let (factor, k) = length_power(unit).ok_or_else(|| unknown(unit, kind))?;
            if k >= 0 || dim.is_some_and(|d| -k != d as i32) {
                return Err(Error::UnitMismatch(format!(
                    "'{unit}' is not a density for {kind:?}"
                )));
            }
            Ok(factor.powi(k))
        }
        Quantity::InteractionCoefficient(p) => {
            let (energy, length) = unit
                .split_once(char::is_whitespace)
                .map(|(e, l)| (e.trim(), l.trim()))
                .ok_or_else(|| unknown(unit, kind))?;
            let energy_factor = match energy {
                "J" => 1.0,
                other => {
                    constants::PLANCK * cyclic_factor(other).ok_or_else(|| unknown(unit, kind))?
                }
            };
            let (factor, k) = length_power(length).ok_or_else(|| unknown(unit, kind))?;
            if k != p as i32 {
                return Err(Error::UnitMismatch(format!(
                    "'{unit}' does not match r^-{p}"
                )));
            }
            Ok(energy_factor * factor.powi(k))
        }
        Quantity::Count => match unit {
            "" | "1" => Ok(1.0),
            _ => Err(unknown(unit, kind)),
        },
    }
}

/// Parse `"<number> <unit>"` into SI.
pub fn parse_quantity(text: &str, kind: Quantity) -> Result<f64> {
    let text = text.trim();
    let (number, unit) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => (text, ""),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Config(format!("'{text}': '{number}' is not a number")))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("'{text}' is not finite")));
    }
    if unit.is_empty() && kind != Quantity::Count {
        return Err(Error::Config(format!("'{text}' needs an explicit unit")));
    }
    if let Quantity::InteractionCoefficient(p) = kind {
        if unit == "au" || unit == "a.u." {
            if p != 6 {
                return Err(Error::UnitMismatch(
                    "atomic units are supported for C_6 only".into(),
                ));
            }
            return Ok(c6_atomic_to_si(value).joule_m6);
        }
    }
    Ok(value * unit_factor(unit, kind)?)
}
