//! Mean-field equation of state
//!
//! ```text
//! α = f^δ |1 − Δ / f^{1/β}|,   δ = (2p+d)/(2d),  β = d/p
//! ```
//!
//! equivalently `α = f^{1/2} |f^{p/d} − Δ|`. For Δ > 0 the physical root sits
//! just above the classical crystal `f_c = Δ^{d/p}`, where the bracket
//! `f^{p/d} − Δ` cancels catastrophically; there the solver works with the
//! offset `u = f/f_c − 1` in log space so the residual stays at machine
//! precision even when `u` is far below one ulp of `f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::check_exponents;
use crate::roots::brent;

/// Reference coupling at which [`chi`] is evaluated.
pub const CHI_ALPHA_REF: f64 = 1e-6;

const XTOL: f64 = 1e-14;
const MAX_ITER: usize = 300;
const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `f ≥ max(0, Δ)^β`, connected to the classical crystal.
    Physical,
    /// Unphysical root on `(0, f*)` for Δ > 0.
    LowerSmall,
    /// Unphysical root on `(f*, Δ^β)` for Δ > 0.
    LowerLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosSolution {
    /// Root, capped at 1.
    pub f_r: f64,
    /// Root before the cap.
    pub unclamped: f64,
    pub branch: Branch,
    /// `|α − α(f)|` in the representation the solver used.
    pub residual: f64,
    /// The root exceeded 1 and `f_r` was capped.
    pub saturated: bool,
}

impl EosSolution {
    fn new(f: f64, branch: Branch, residual: f64) -> Self {
        Self {
            f_r: f.min(1.0),
            unclamped: f,
            branch,
            residual,
            saturated: f > 1.0,
        }
    }
}

/// Right-hand side `f^{1/2} |f^{p/d} − Δ|` evaluated naively.
pub fn eos_alpha(f: f64, delta: f64, d: u32, p: u32) -> f64 {
    let k = p as f64 / d as f64;
    f.sqrt() * (f.powf(k) - delta).abs()
}

/// `Δ^{d/p}` for Δ > 0, otherwise 0.
pub fn classical_fraction(delta: f64, d: u32, p: u32) -> f64 {
    if delta > 0.0 {
        delta.powf(d as f64 / p as f64)
    } else {
        0.0
    }
}

/// Nearest-neighbour distance between Rydberg atoms, `f^{-1/d}`.
pub fn correlation_length_mf(f_r: f64, d: u32) -> Result<f64> {
    if !(f_r > 0.0) || f_r > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "f_R must lie in (0, 1], got {f_r}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(f_r.powf(-1.0 / d as f64))
}

fn ln1p_exp(v: f64) -> f64 {
    if v > 30.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Expand `[lo, hi]` until `h(lo) < 0 < h(hi)` for an increasing `h`.
fn bracket<F: FnMut(f64) -> f64>(h: &mut F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let mut step = 1.0;
    for _ in 0..MAX_EXPANSIONS {
        let up = h(hi) <= 0.0;
        let down = h(lo) >= 0.0;
        if !up && !down {
            return Ok((lo, hi));
        }
        if up {
            lo = lo.max(hi);
            hi += step;
        }
        if down {
            hi = hi.min(lo);
            lo -= step;
        }
        step *= 2.0;
    }
    Err(Error::NonConvergence(format!(
        "no bracket found, last [{lo}, {hi}]"
    )))
}

fn solve_increasing<F: FnMut(f64) -> f64>(mut h: F, lo: f64, hi: f64) -> Result<f64> {
    let (lo, hi) = bracket(&mut h, lo, hi)?;
    Ok(brent(&mut h, lo, hi, XTOL, MAX_ITER)?.x)
}

fn check_inputs(alpha: f64, delta: f64, d: u32, p: u32) -> Result<()> {
    check_exponents(d, p)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParameter("delta must be finite".into()));
    }
    Ok(())
}

/// Physical root of the equation of state. `alpha = 0` returns the classical
/// fraction.
pub fn eos_solve(alpha: f64, delta: f64, d: u32, p: u32) -> Result<EosSolution> {
    check_inputs(alpha, delta, d, p)?;
    if alpha == 0.0 {
        return Ok(EosSolution::new(
            classical_fraction(delta, d, p),
            Branch::Physical,
            0.0,
        ));
    }
    let k = p as f64 / d as f64;
    let inv_delta = 2.0 * d as f64 / (2 * p + d) as f64;
    let ln_alpha = alpha.ln();
    let f_hi = 1f64.max(2.0 * (alpha + delta.abs()).powf(inv_delta));

    if delta == 0.0 {
        let f = alpha.powf(inv_delta);
        let residual = (alpha - eos_alpha(f, 0.0, d, p)).abs();
        return Ok(EosSolution::new(f, Branch::Physical, residual));
    }

    if delta < 0.0 {
        let ln_abs = (-delta).ln();
        let h = |x: f64| 0.5 * x + log_sum_exp(k * x, ln_abs) - ln_alpha;
        let hi = f_hi.ln();
        let x = solve_increasing(h, hi - 1.0, hi)?;
        let residual = alpha * h(x).exp_m1().abs();
        return Ok(EosSolution::new(x.exp(), Branch::Physical, residual));
    }

    // Δ > 0: f = f_c (1 + u), u = e^v.
    let f_c = delta.powf(1.0 / k);
    let base = 0.5 * f_c.ln() + delta.ln() - ln_alpha;
    let h = |v: f64| {
        let l1p = ln1p_exp(v);
        base + 0.5 * l1p + ln_expm1(k * l1p)
    };
    let hi = (f_hi / f_c - 1.0).max(1.0).ln();
    let v = solve_increasing(h, hi - 1.0, hi)?;
    let residual = alpha * h(v).exp_m1().abs();
    Ok(EosSolution::new(
        f_c + f_c * v.exp(),
        Branch::Physical,
        residual,
    ))
}

/// Every root of the equation of state, the physical one first. For Δ > 0
/// and `α` below the maximum of `f^{1/2}(Δ − f^{p/d})` two more roots exist
/// below the classical value; they are returned for diagnostics only.
pub fn eos_all_roots(alpha: f64, delta: f64, d: u32, p: u32) -> Result<Vec<EosSolution>> {
    let mut roots = vec![eos_solve(alpha, delta, d, p)?];
    if delta <= 0.0 || alpha == 0.0 {
        return Ok(roots);
    }
    let k = p as f64 / d as f64;
    let f_c = delta.powf(1.0 / k);
    let f_star = (delta / (1.0 + 2.0 * k)).powf(1.0 / k);
    let alpha_max = f_star.sqrt() * delta * 2.0 * k / (1.0 + 2.0 * k);
    if alpha > alpha_max {
        return Ok(roots);
    }
    let ln_alpha = alpha.ln();
    let ln_delta = delta.ln();

    // (0, f*]: x = ln f, increasing.
    let h_small = |x: f64| 0.5 * x + ln_delta + (-(k * x - ln_delta).exp_m1()).ln() - ln_alpha;
    let top = f_star.ln();
    let x = if h_small(top) <= 0.0 {
        top
    } else {
        let (lo, _) = bracket(
            &mut |x| if x >= top { 1.0 } else { h_small(x) },
            top - 1.0,
            top,
        )?;
        brent(h_small, lo, top, XTOL, MAX_ITER)?.x
    };
    roots.push(EosSolution::new(
        x.exp(),
        Branch::LowerSmall,
        alpha * h_small(x).exp_m1().abs(),
    ));

    // [f*, f_c): f = f_c (1 − w), w = e^s, increasing in w.
    let base = 0.5 * f_c.ln() + ln_delta - ln_alpha;
    let h_large = |s: f64| {
        let w = s.exp();
        base + 0.5 * (-w).ln_1p() + (-(k * (-w).ln_1p()).exp_m1()).ln()
    };
    let top = (1.0 - f_star / f_c).ln();
    let s = if h_large(top) <= 0.0 {
        top
    } else {
        let (lo, _) = bracket(
            &mut |s| if s >= top { 1.0 } else { h_large(s) },
            top - 1.0,
            top,
        )?;
        brent(h_large, lo, top, XTOL, MAX_ITER)?.x
    };
    roots.push(EosSolution::new(
        f_c - f_c * s.exp(),
        Branch::LowerLarge,
        alpha * h_large(s).exp_m1().abs(),
    ));
    Ok(roots)
}

/// Universal scaling function `χ(y) = f_R / α^{1/δ}` at `Δ = y α^{2p/(2p+d)}`,
/// evaluated at [`CHI_ALPHA_REF`].
pub fn chi(y: f64, d: u32, p: u32) -> Result<f64> {
    chi_at(y, d, p, CHI_ALPHA_REF)
}

/// [`chi`] at a chosen reference coupling. Uses the uncapped root, since the
/// cap at `f = 1` is not part of the scaling form.
pub fn chi_at(y: f64, d: u32, p: u32, alpha_ref: f64) -> Result<f64> {
    check_exponents(d, p)?;
    if !(alpha_ref > 0.0) {
        return Err(Error::InvalidParameter(
            "reference alpha must be positive".into(),
        ));
    }
    let two_p_d = (2 * p + d) as f64;
    let delta = y * alpha_ref.powf(2.0 * p as f64 / two_p_d);
    let sol = eos_solve(alpha_ref, delta, d, p)?;
    Ok(sol.unclamped / alpha_ref.powf(2.0 * d as f64 / two_p_d))
}
