//! Fitting and averaging layers checked by Monte Carlo calibration and by
//! brute-force integration.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rydberg_scaling::analysis::{fit_powerlaw, fit_saturation, SaturationGuess};
use rydberg_scaling::lda::{closed_form_prefactor, lda_average, CloudSpec};
use rydberg_scaling::meanfield::eos_solve;

fn saturation_curve(times: &[f64], rate: f64, sat: f64) -> Vec<f64> {
    times
        .iter()
        .map(|t| sat * (1.0 - (-rate * t / sat).exp()))
        .collect()
}

#[test]
fn saturation_fit_coverage() {
    let (rate, sat) = (3.0, 12.0);
    // counts must stay non-negative, so the first sample sits well above
    // the noise floor
    let times: Vec<f64> = (1..=50).map(|i| 0.3 * i as f64).collect();
    let clean = saturation_curve(&times, rate, sat);
    let noise = Normal::new(0.0, 0.01 * sat).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let trials = 500;
    let (mut rate_hits, mut sat_hits) = (0, 0);
    for _ in 0..trials {
        let noisy: Vec<f64> = clean.iter().map(|y| y + noise.sample(&mut rng)).collect();
        let guess = SaturationGuess {
            rate: rate * rng.gen_range(0.5..2.0),
            saturation: sat * rng.gen_range(0.7..1.4),
        };
        let fit = fit_saturation(&times, &noisy, Some(guess)).unwrap();
        assert!(fit.converged);
        rate_hits += usize::from((fit.rate - rate).abs() <= 3.0 * fit.rate_stderr);
        sat_hits += usize::from((fit.saturation - sat).abs() <= 3.0 * fit.saturation_stderr);
    }
    let (rc, sc) = (
        rate_hits as f64 / trials as f64,
        sat_hits as f64 / trials as f64,
    );
    assert!(
        rc >= 0.99 && sc >= 0.99,
        "coverage rate {rc}, saturation {sc}"
    );
}

#[test]
fn power_law_fit_coverage() {
    let xs: Vec<f64> = (0..12)
        .map(|i| 10f64.powf(-4.0 + 0.25 * i as f64))
        .collect();
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 500;
    let mut hits = 0;
    for _ in 0..trials {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, 0.7 * x.powf(0.4) * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = fit_powerlaw(&pts).unwrap();
        hits += usize::from((fit.exponent - 0.4).abs() <= 3.0 * fit.exponent_stderr);
    }
    assert!(hits as f64 >= 0.99 * trials as f64, "{hits} of {trials}");
}

/// Cloud-averaged power law by a plain trapezoid sum over a Cartesian grid in
/// physical coordinates.
fn brute_force_ratio(sigmas: [f64; 3], alpha_peak: f64) -> f64 {
    let inv_delta = 0.4;
    let m = 161;
    // the integrand falls off with variance 5σ², so cover ±10 of those
    let axes: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|s| {
            let half = 10.0 * 5f64.sqrt() * s;
            (0..m)
                .map(|i| -half + 2.0 * half * i as f64 / (m - 1) as f64)
                .collect()
        })
        .collect();
    let h: f64 = axes.iter().map(|a| a[1] - a[0]).product();
    let norm = (2.0 * std::f64::consts::PI).powf(1.5) * sigmas.iter().product::<f64>();
    let mut total = 0.0;
    for x in &axes[0] {
        for y in &axes[1] {
            for z in &axes[2] {
                let q = (x / sigmas[0]).powi(2) + (y / sigmas[1]).powi(2) + (z / sigmas[2]).powi(2);
                // ln n(r)/N and ln α(r), with α(r) = α_peak (n(0)/n(r))^2
                // in three dimensions for p = 6
                let ln_density = -0.5 * q - norm.ln();
                let ln_alpha = alpha_peak.ln() + q;
                total += (ln_density + inv_delta * ln_alpha).exp();
            }
        }
    }
    total * h / alpha_peak.powf(inv_delta)
}

#[test]
fn lda_prefactor_matches_brute_force_integration() {
    let want = 5f64.powf(1.5);
    for sigmas in [[20e-6, 20e-6, 20e-6], [12e-6, 35e-6, 90e-6]] {
        let brute = brute_force_ratio(sigmas, 1e-3);
        assert!((brute / want - 1.0).abs() < 1e-6, "brute force {brute}");
        let cloud = CloudSpec::new(sigmas.to_vec(), 1e5).unwrap();
        let lda = lda_average(&cloud, 1e-3, 3, 6).unwrap();
        assert!((lda.prefactor / brute - 1.0).abs() < 1e-6);
    }
}

#[test]
fn lda_quadrature_matches_closed_form_for_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let closed = closed_form_prefactor(3, 3, 6).unwrap();
    for _ in 0..10 {
        let sigmas: Vec<f64> = (0..3)
            .map(|_| 10f64.powf(rng.gen_range(-6.0..-4.0)))
            .collect();
        let alpha_peak = 10f64.powf(rng.gen_range(-7.0..-2.0));
        let cloud = CloudSpec::new(sigmas.clone(), 1e5).unwrap();
        let lda = lda_average(&cloud, alpha_peak, 3, 6).unwrap();
        assert!(
            (lda.prefactor / closed - 1.0).abs() < 1e-6,
            "sigmas {sigmas:?}: {} vs {closed}",
            lda.prefactor
        );
    }
}

proptest! {
    #[test]
    fn noiseless_saturation_roundtrip(rate in 0.01f64..100.0, sat in 0.1f64..1e3) {
        // sample until well into the plateau
        let t_end = 8.0 * sat / rate;
        let times: Vec<f64> = (0..40).map(|i| t_end * i as f64 / 39.0).collect();
        let counts = saturation_curve(&times, rate, sat);
        let fit = fit_saturation(&times, &counts, None).unwrap();
        prop_assert!((fit.rate / rate - 1.0).abs() < 1e-8);
        prop_assert!((fit.saturation / sat - 1.0).abs() < 1e-8);
    }

    #[test]
    fn noiseless_power_law_roundtrip(k in -3.0f64..3.0, c in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| {
            let x = 10f64.powf(-3.0 + 0.5 * i as f64);
            (x, c * x.powf(k))
        }).collect();
        let fit = fit_powerlaw(&pts).unwrap();
        prop_assert!((fit.exponent - k).abs() < 1e-8 * k.abs().max(1.0));
        prop_assert!((fit.intercept.exp() / c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn eos_residual_is_small(log_alpha in -8.0f64..0.0, delta in -2.0f64..2.0, d in 1u32..=3) {
        let alpha = 10f64.powf(log_alpha);
        let sol = eos_solve(alpha, delta, d, 6).unwrap();
        prop_assert!(sol.unclamped > 0.0);
        let k = 6.0 / d as f64;
        let rhs = sol.unclamped.sqrt() * (sol.unclamped.powf(k) - delta).abs();
        prop_assert!((rhs / alpha - 1.0).abs() < 1e-6, "α {} vs {}", alpha, rhs);
    }
}

/// A one-dimensional, 12-atom excitation curve (truncated basis, 20
/// realizations) on which optimized builds once returned `saturation = 0`.
#[test]
fn saturation_fit_on_simulated_curve() {
    let data: Vec<Vec<f64>> = serde_json::from_str(include_str!("data/saturation_1d_n12.json")).unwrap();
    let (times, counts) = (&data[0], &data[1]);
    let guess = rydberg_scaling::analysis::half_rise_guess(times, counts);
    let fit = fit_saturation(times, counts, guess).unwrap();
    assert!(fit.converged);
    assert!((fit.saturation - 1.928855).abs() < 1e-5, "{fit:?}");
    assert!((fit.rate - 7.030894e-3).abs() < 1e-8, "{fit:?}");
    assert!(!fit.saturation_unconstrained);
}
