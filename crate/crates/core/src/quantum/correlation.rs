//! Connected pair correlation `<P_i P_j> - f_R^2` binned by pair distance, and
//! the blockade radius read off from it.

use serde::{Deserialize, Serialize};

use super::basis::Basis;
use super::propagate::ManyBodyState;
use crate::ensemble::AtomConfiguration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCorrelation {
    pub edges: Vec<f64>,
    /// `None` for bins without any pair.
    pub values: Vec<Option<f64>>,
    pub pair_counts: Vec<usize>,
}

impl BinnedCorrelation {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Pair-count weighted average of several correlations on the same bins.
    pub fn average(parts: &[BinnedCorrelation]) -> Result<BinnedCorrelation> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InsufficientData("nothing to average".into()))?;
        let bins = first.values.len();
        let mut sums = vec![0.0; bins];
        let mut counts = vec![0usize; bins];
        for part in parts {
            if part.edges != first.edges {
                return Err(Error::DimensionMismatch(
                    "correlations use different bins".into(),
                ));
            }
            for b in 0..bins {
                if let Some(v) = part.values[b] {
                    sums[b] += v * part.pair_counts[b] as f64;
                    counts[b] += part.pair_counts[b];
                }
            }
        }
        Ok(BinnedCorrelation {
            edges: first.edges.clone(),
            values: (0..bins)
                .map(|b| (counts[b] > 0).then(|| sums[b] / counts[b] as f64))
                .collect(),
            pair_counts: counts,
        })
    }
}

/// Bin edges must be increasing; pairs outside `[edges[0], edges[last])` are
/// ignored.
pub fn pair_correlation(
    state: &ManyBodyState,
    basis: &Basis,
    config: &AtomConfiguration,
    edges: &[f64],
) -> Result<BinnedCorrelation> {
    let n = basis.atom_count();
    if config.len() != n || state.amplitudes.len() != basis.len() {
        return Err(Error::DimensionMismatch(
            "state, basis and configuration disagree".into(),
        ));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "bin edges must be increasing, at least two".into(),
        ));
    }

    let mut single = vec![0.0; n];
    let mut pair = vec![vec![0.0; n]; n];
    for (idx, amp) in state.amplitudes.iter().enumerate() {
        let prob = amp.norm_sqr();
        if prob == 0.0 {
            continue;
        }
        let s = basis.state(idx);
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            single[i] += prob;
            let mut lower = s & ((1u64 << i) - 1);
            while lower != 0 {
                let j = lower.trailing_zeros() as usize;
                lower &= lower - 1;
                pair[i][j] += prob;
            }
        }
    }
    let f_r = single.iter().sum::<f64>() / n as f64;

    let bins = edges.len() - 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for i in 0..n {
        for j in 0..i {
            let r = config.pair_distance(i, j)?;
            if r < edges[0] || r >= edges[bins] {
                continue;
            }
            let b = edges.partition_point(|e| *e <= r) - 1;
            sums[b] += pair[i][j] - f_r * f_r;
            counts[b] += 1;
        }
    }
    Ok(BinnedCorrelation {
        edges: edges.to_vec(),
        values: (0..bins)
            .map(|b| (counts[b] > 0).then(|| sums[b] / counts[b] as f64))
            .collect(),
        pair_counts: counts,
    })
}

/// Centre of the first bin, beyond the extremum of `C(r)`, where the
/// correlation has recovered half way from that extremum to its large-`r`
/// plateau. The plateau is the mean over the outer quarter of occupied bins.
/// Returns `None` for a flat correlation.
pub fn estimate_blockade_radius(correlation: &BinnedCorrelation) -> Result<Option<f64>> {
    let centers = correlation.centers();
    let occupied: Vec<(f64, f64)> = centers
        .iter()
        .zip(&correlation.values)
        .filter_map(|(c, v)| v.map(|v| (*c, v)))
        .collect();
    if occupied.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 occupied bins, got {}",
            occupied.len()
        )));
    }
    let outer = occupied.len().div_ceil(4);
    let plateau = occupied[occupied.len() - outer..]
        .iter()
        .map(|(_, v)| v)
        .sum::<f64>()
        / outer as f64;
    let (ext_idx, depth) = occupied
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (i, v - plateau))
        .fold((0usize, 0.0f64), |best, cur| {
            if cur.1.abs() > best.1.abs() {
                cur
            } else {
                best
            }
        });
    let scale = occupied.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    if depth.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
        return Ok(None);
    }
    Ok(occupied[ext_idx..]
        .iter()
        .find(|(_, v)| (v - plateau).abs() <= 0.5 * depth.abs())
        .map(|(c, _)| *c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Geometry;
    use crate::quantum::basis::BasisSpec;
    use num_complex::Complex64;

    fn synthetic(values: Vec<Option<f64>>) -> BinnedCorrelation {
        let bins = values.len();
        BinnedCorrelation {
            edges: (0..=bins).map(|b| b as f64).collect(),
            pair_counts: values.iter().map(|v| v.is_some() as usize).collect(),
            values,
        }
    }

    #[test]
    fn step_correlation_gives_step_position() {
        let c = synthetic(
            (0..10)
                .map(|b| Some(if b < 5 { -0.3 } else { 0.0 }))
                .collect(),
        );
        let xi = estimate_blockade_radius(&c).unwrap().unwrap();
        assert!((xi - 5.0).abs() <= 1.0, "xi = {xi}");
    }

    #[test]
    fn flat_correlation_has_no_radius() {
        let c = synthetic(vec![Some(0.0); 8]);
        assert_eq!(estimate_blockade_radius(&c).unwrap(), None);
        let c = synthetic(vec![Some(-0.01); 8]);
        assert_eq!(estimate_blockade_radius(&c).unwrap(), None);
    }

    #[test]
    fn too_few_bins_is_an_error() {
        let c = synthetic(vec![Some(-1.0), None, Some(0.0), None]);
        assert!(estimate_blockade_radius(&c).is_err());
    }

    fn pair_config(r: f64) -> AtomConfiguration {
        AtomConfiguration::from_positions(
            &[vec![0.0], vec![r]],
            Geometry::OpenLine { length: 10.0 },
            0,
        )
        .unwrap()
    }

    #[test]
    fn product_ground_state_is_uncorrelated() {
        let basis = Basis::new(BasisSpec::full(2)).unwrap();
        let state = ManyBodyState::all_ground(&basis);
        let c = pair_correlation(&state, &basis, &pair_config(0.5), &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.values, vec![Some(0.0), None]);
    }

    #[test]
    fn symmetric_single_excitation_midpoint() {
        // cos θ |gg> - i sin θ (|eg> + |ge>)/√2 at θ = π/4: f_R = 1/4, <P1 P2> = 0
        let basis = Basis::new(BasisSpec::full(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(h, 0.0);
        amps[1] = Complex64::new(0.0, -0.5);
        amps[2] = Complex64::new(0.0, -0.5);
        let state = ManyBodyState {
            amplitudes: amps,
            time: 0.0,
        };
        assert!((state.rydberg_fraction(&basis) - 0.25).abs() < 1e-15);
        let c = pair_correlation(&state, &basis, &pair_config(0.1), &[0.0, 0.5]).unwrap();
        assert!((c.values[0].unwrap() + 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn averaging_weights_by_pair_count() {
        let a = BinnedCorrelation {
            edges: vec![0.0, 1.0],
            values: vec![Some(1.0)],
            pair_counts: vec![1],
        };
        let b = BinnedCorrelation {
            edges: vec![0.0, 1.0],
            values: vec![Some(4.0)],
            pair_counts: vec![3],
        };
        let avg = BinnedCorrelation::average(&[a, b]).unwrap();
        assert_eq!(avg.values, vec![Some(3.25)]);
        assert_eq!(avg.pair_counts, vec![4]);
    }
}
