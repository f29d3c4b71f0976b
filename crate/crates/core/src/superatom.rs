//! Prefactor-free superatom picture: an excitation blocks a sphere of radius
//! ξ, the `N_b = ξ^d` atoms inside share it and oscillate at `√N_b α`.
//! Balancing `ξ^{-p} = √N_b α` fixes everything in terms of α.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::check_exponents;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperatomEstimate {
    /// Blockade radius in units of `a`.
    pub xi: f64,
    /// Atoms per blockade volume, `ξ^d`.
    pub n_b: f64,
    /// `√N_b α`.
    pub collective_rabi: f64,
    /// Rate per atom, `α / √N_b`.
    pub g_r: f64,
    /// Saturated fraction, `1 / N_b`.
    pub f_sat: f64,
}

impl SuperatomEstimate {
    /// Characteristic time `1 / (√N_b α)`.
    pub fn characteristic_time(&self) -> f64 {
        1.0 / self.collective_rabi
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

/// `ξ = α^{-2/(2p+d)}` in units of `a`.
pub fn blockade_radius(alpha: f64, d: u32, p: u32) -> Result<f64> {
    check_exponents(d, p)?;
    check_alpha(alpha)?;
    Ok(alpha.powf(-2.0 / (2 * p + d) as f64))
}

pub fn superatom_estimate(alpha: f64, d: u32, p: u32) -> Result<SuperatomEstimate> {
    let xi = blockade_radius(alpha, d, p)?;
    let two_p_d = (2 * p + d) as f64;
    // Closed forms rather than products of xi, so exponents stay exact.
    let n_b = alpha.powf(-2.0 * d as f64 / two_p_d);
    let f_sat = alpha.powf(2.0 * d as f64 / two_p_d);
    let collective_rabi = alpha.powf(2.0 * p as f64 / two_p_d);
    let g_r = alpha.powf(2.0 * (p + d) as f64 / two_p_d);
    Ok(SuperatomEstimate {
        xi,
        n_b,
        collective_rabi,
        g_r,
        f_sat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn unit_alpha_is_a_fixed_point() {
        let e = superatom_estimate(1.0, 3, 6).unwrap();
        assert_eq!(
            (e.xi, e.n_b, e.collective_rabi, e.g_r, e.f_sat),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn radius_solves_the_balance_equation() {
        let xi = blockade_radius(1e-5, 3, 6).unwrap();
        assert!(rel(xi, 10f64.powf(2.0 / 3.0)) < 1e-12);
        assert!(rel(xi.powi(-6), xi.powf(1.5) * 1e-5) < 1e-12);
    }

    #[test]
    fn three_dimensional_example() {
        let e = superatom_estimate(1e-5, 3, 6).unwrap();
        assert!(rel(e.n_b, 100.0) < 1e-12);
        assert!(rel(e.f_sat, 1e-2) < 1e-12);
        assert!(rel(e.g_r, 1e-6) < 1e-12);
    }

    #[test]
    fn one_dimensional_example() {
        let e = superatom_estimate(1e-13, 1, 6).unwrap();
        assert!(rel(e.n_b, 100.0) < 1e-12);
        assert!(rel(e.f_sat, 1e-2) < 1e-12);
    }

    #[test]
    fn internal_relations() {
        for &alpha in &[1e-9, 3e-4, 0.2, 5.0] {
            for &(d, p) in &[(1, 6), (2, 6), (3, 6), (3, 4)] {
                let e = superatom_estimate(alpha, d, p).unwrap();
                assert!(rel(e.n_b, e.xi.powi(d as i32)) < 1e-12);
                assert!(rel(e.collective_rabi, e.n_b.sqrt() * alpha) < 1e-12);
                assert!(rel(e.g_r, alpha / e.n_b.sqrt()) < 1e-12);
                assert!(rel(e.f_sat, 1.0 / e.n_b) < 1e-12);
            }
        }
    }

    #[test]
    fn radius_grows_by_fixed_factor_per_decade() {
        for &alpha in &[1e-8, 1e-3, 1.0] {
            let ratio = blockade_radius(alpha / 10.0, 3, 6).unwrap()
                / blockade_radius(alpha, 3, 6).unwrap();
            assert!(rel(ratio, 10f64.powf(2.0 / 15.0)) < 1e-12);
        }
    }

    #[test]
    fn time_scales_as_xi_to_the_p() {
        let (d, p) = (3, 6);
        let a = superatom_estimate(1e-6, d, p).unwrap();
        let b = superatom_estimate(1e-2, d, p).unwrap();
        let lhs = a.characteristic_time() / b.characteristic_time();
        let rhs = (a.xi / b.xi).powi(p as i32);
        assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn rate_exponent_is_gamma() {
        let a = superatom_estimate(1e-4, 1, 6).unwrap();
        let b = superatom_estimate(1e-3, 1, 6).unwrap();
        let slope = (b.g_r / a.g_r).log10();
        assert!((slope - 14.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(blockade_radius(0.0, 3, 6).is_err());
        assert!(blockade_radius(-1.0, 3, 6).is_err());
        assert!(blockade_radius(1.0, 3, 3).is_err());
    }
}
