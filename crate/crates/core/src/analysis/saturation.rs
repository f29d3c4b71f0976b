//! Levenberg–Marquardt fit of `N(t) = N_sat (1 − exp(−R t / N_sat))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationGuess {
    pub rate: f64,
    pub saturation: f64,
}

/// Slope of a separate straight-line fit to the early-time points, reported
/// when it disagrees with the saturation fit by more than 2σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyRate {
    pub rate: f64,
    pub rate_stderr: f64,
    pub point_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub rate: f64,
    pub saturation: f64,
    pub rate_stderr: f64,
    pub saturation_stderr: f64,
    /// `sqrt(Σ r²)`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The data never leave the linear regime, so `N_sat` is not determined
    /// (its standard error exceeds its value).
    pub saturation_unconstrained: bool,
    pub early_rate: Option<EarlyRate>,
}

fn model(t: f64, rate: f64, sat: f64) -> (f64, f64, f64) {
    // value, ∂/∂R, ∂/∂N_sat
    let x = rate * t / sat;
    let e = (-x).exp();
    let one_minus = -(-x).exp_m1();
    (sat * one_minus, t * e, one_minus - x * e)
}

fn residuals(times: &[f64], counts: &[f64], rate: f64, sat: f64) -> f64 {
    times
        .iter()
        .zip(counts)
        .map(|(t, y)| (y - model(*t, rate, sat).0).powi(2))
        .sum()
}

fn check(times: &[f64], counts: &[f64]) -> Result<()> {
    if times.len() != counts.len() {
        return Err(Error::DimensionMismatch(
            "times and counts differ in length".into(),
        ));
    }
    if times.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 points, got {}",
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "times must be finite and strictly increasing".into(),
        ));
    }
    if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return Err(Error::NonPositiveData(
            "counts must be finite and >= 0".into(),
        ));
    }
    if counts.iter().all(|c| *c == 0.0) {
        return Err(Error::NonPositiveData("all counts are zero".into()));
    }
    Ok(())
}

fn default_guess(times: &[f64], counts: &[f64]) -> SaturationGuess {
    let saturation = counts.iter().copied().fold(0.0, f64::max);
    let slope = (counts[1] - counts[0]) / (times[1] - times[0]);
    let fallback = saturation / (times[times.len() - 1] - times[0]).max(f64::MIN_POSITIVE);
    SaturationGuess {
        rate: if slope > 0.0 { slope } else { fallback },
        saturation,
    }
}

/// Starting point for the saturation fit: the maximum count, reached at the
/// rate that gets half-way there by the first time the curve crosses half of
/// it. The slope of the first two points is useless here, since a coherent
/// rise starts quadratically.
pub fn half_rise_guess(times: &[f64], counts: &[f64]) -> Option<SaturationGuess> {
    let max = counts.iter().copied().fold(0.0, f64::max);
    let t_half = times
        .iter()
        .zip(counts)
        .find(|(_, c)| **c > 0.5 * max)
        .map(|(t, _)| *t)?;
    (max > 0.0 && t_half > 0.0).then(|| SaturationGuess {
        rate: max / t_half,
        saturation: max,
    })
}

struct Minimum {
    rate: f64,
    sat: f64,
    rss: f64,
    iterations: usize,
    converged: bool,
}

// Kept out of line: when inlined into `fit_saturation`, LLVM 22's SLP
// vectorizer stored a stale `sat` lane into the result (release builds only).
#[inline(never)]
fn minimize(times: &[f64], counts: &[f64], guess: SaturationGuess, scale: f64) -> Minimum {
    let (mut rate, mut sat) = (guess.rate, guess.saturation);
    let mut rss = residuals(times, counts, rate, sat);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (t, y) in times.iter().zip(counts) {
            let (m, dr, dn) = model(*t, rate, sat);
            let r = y - m;
            a11 += dr * dr;
            a12 += dr * dn;
            a22 += dn * dn;
            g1 += dr * r;
            g2 += dn * r;
        }
        // Gradient in log-parameters, so the test is scale-free.
        let grad = (g1 * rate).abs() + (g2 * sat).abs();
        if grad <= 1e-10 * scale || rss <= 1e-30 * scale {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let b11 = a11 * (1.0 + lambda);
            let b22 = a22 * (1.0 + lambda);
            let det = b11 * b22 - a12 * a12;
            if det > 0.0 {
                let dr = (b22 * g1 - a12 * g2) / det;
                let dn = (b11 * g2 - a12 * g1) / det;
                let (nr, nn) = (rate + dr, sat + dn);
                if nr > 0.0 && nn > 0.0 {
                    let new_rss = residuals(times, counts, nr, nn);
                    if new_rss <= rss {
                        let tiny = dr.abs() <= 1e-15 * rate && dn.abs() <= 1e-15 * sat;
                        rate = nr;
                        sat = nn;
                        rss = new_rss;
                        lambda = (lambda / 3.0).max(1e-12);
                        accepted = true;
                        if tiny {
                            converged = true;
                        }
                        break;
                    }
                }
            }
            lambda *= 4.0;
        }
        if !accepted || converged {
            // No downhill step left: we are at the floating-point minimum.
            converged = true;
            break;
        }
    }

    Minimum {
        rate,
        sat,
        rss,
        iterations,
        converged,
    }
}

pub fn fit_saturation(
    times: &[f64],
    counts: &[f64],
    guess: Option<SaturationGuess>,
) -> Result<SaturationFit> {
    check(times, counts)?;
    let guess = guess.unwrap_or_else(|| default_guess(times, counts));
    if !(guess.rate > 0.0 && guess.saturation > 0.0) {
        return Err(Error::InvalidParameter(
            "initial guess must be positive".into(),
        ));
    }

    let scale: f64 = counts.iter().map(|c| c * c).sum();
    let Minimum {
        rate,
        sat,
        rss,
        iterations,
        converged,
    } = minimize(times, counts, guess, scale);

    let n = times.len();
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for t in times {
        let (_, dr, dn) = model(*t, rate, sat);
        a11 += dr * dr;
        a12 += dr * dn;
        a22 += dn * dn;
    }
    let s2 = rss / (n - 2) as f64;
    let det = a11 * a22 - a12 * a12;
    let (rate_stderr, mut saturation_stderr) = if det > 0.0 {
        ((s2 * a22 / det).sqrt(), (s2 * a11 / det).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    // The linearized error is blind to the flat direction N_sat → ∞. If the
    // straight line N = R t (that limit) is within 2σ of the best fit, the
    // data put no upper bound on N_sat.
    let stt: f64 = times.iter().map(|t| t * t).sum();
    let sty: f64 = times.iter().zip(counts).map(|(t, y)| t * y).sum();
    let rss_line = (scale - sty * sty / stt).max(0.0);
    if s2 > 0.0 && (rss_line - rss) / s2 < 4.0 {
        saturation_stderr = f64::INFINITY;
    }

    let mut fit = SaturationFit {
        rate,
        saturation: sat,
        rate_stderr,
        saturation_stderr,
        residual_norm: rss.sqrt(),
        iterations,
        converged,
        saturation_unconstrained: saturation_stderr > sat,
        early_rate: None,
    };
    if let Some(early) = early_rate(times, counts, &fit) {
        let sigma = (early.rate_stderr.powi(2) + fit.rate_stderr.powi(2)).sqrt();
        if (early.rate - fit.rate).abs() > 2.0 * sigma {
            fit.early_rate = Some(early);
        }
    }
    Ok(fit)
}

/// Straight line through the points with `R t / N_sat ≤ 0.3`.
fn early_rate(times: &[f64], counts: &[f64], fit: &SaturationFit) -> Option<EarlyRate> {
    let window = 0.3 * fit.saturation / fit.rate;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(counts)
        .filter(|(t, _)| **t <= window)
        .map(|(t, c)| (*t, *c))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    Some(EarlyRate {
        rate: slope,
        rate_stderr: (rss / (n - 2.0) / sxx).sqrt(),
        point_count: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn curve(rate: f64, sat: f64, times: &[f64]) -> Vec<f64> {
        times.iter().map(|t| model(*t, rate, sat).0).collect()
    }

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn noiseless_roundtrip() {
        let t = grid(50, 40.0);
        let fit = fit_saturation(&t, &curve(10.0, 100.0, &t), None).unwrap();
        assert!(fit.converged);
        assert!(((fit.rate - 10.0) / 10.0).abs() < 1e-8, "{fit:?}");
        assert!(((fit.saturation - 100.0) / 100.0).abs() < 1e-8);
        assert!(!fit.saturation_unconstrained);
    }

    #[test]
    fn count_rescaling_is_equivariant() {
        let t = grid(30, 20.0);
        let y: Vec<f64> = curve(3.0, 12.0, &t)
            .iter()
            .enumerate()
            .map(|(i, v)| v * (1.0 + 0.01 * ((i * 7 % 5) as f64 - 2.0)))
            .collect();
        let a = fit_saturation(&t, &y, None).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| v * 7.5).collect();
        let b = fit_saturation(&t, &scaled, None).unwrap();
        assert!((b.rate / a.rate / 7.5 - 1.0).abs() < 1e-8);
        assert!((b.saturation / a.saturation / 7.5 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_regime_leaves_saturation_unconstrained() {
        // R t / N_sat ≤ 0.05 everywhere.
        // Counting noise comparable to the 2.5% curvature.
        let t = grid(20, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = curve(10.0, 100.0, &t)
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                v + 0.3 * z
            })
            .collect();
        let fit = fit_saturation(&t, &y, None).unwrap();
        assert!(
            (fit.rate - 10.0).abs() <= 3.0 * fit.rate_stderr && fit.rate_stderr < 0.1 * fit.rate,
            "{fit:?}"
        );
        assert!(
            fit.saturation_unconstrained && fit.saturation_stderr > fit.saturation,
            "{fit:?}"
        );
    }

    #[test]
    fn half_rise_guess_starts_near_truth() {
        let t = grid(100, 40.0);
        let g = half_rise_guess(&t, &curve(10.0, 100.0, &t)).unwrap();
        assert!(
            g.saturation > 95.0 && g.rate > 5.0 && g.rate < 20.0,
            "{g:?}"
        );
        assert!(half_rise_guess(&t, &vec![0.0; 100]).is_none());
    }

    #[test]
    fn rejects_degenerate_input() {
        let t = grid(5, 1.0);
        assert!(matches!(
            fit_saturation(&t, &[0.0; 5], None),
            Err(Error::NonPositiveData(_))
        ));
        assert!(fit_saturation(&t[..3], &[1.0, 2.0, 3.0], None).is_err());
        assert!(fit_saturation(&[1.0, 1.0, 2.0, 3.0], &[1.0; 4], None).is_err());
        assert!(fit_saturation(&t, &[1.0, -1.0, 1.0, 1.0, 1.0], None).is_err());
    }

    #[test]
    fn early_rate_reported_on_disagreement() {
        // Fast initial rise followed by a slower approach: one exponential
        // cannot match both.
        let t = grid(300, 30.0);
        let y: Vec<f64> = t
            .iter()
            .map(|t| 50.0 * (1.0 - (-t).exp()) + 50.0 * (1.0 - (-t / 10.0).exp()))
            .collect();
        let fit = fit_saturation(&t, &y, None).unwrap();
        let early = fit.early_rate.expect("should disagree");
        assert!(early.rate > fit.rate);
    }
}
