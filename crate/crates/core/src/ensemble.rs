//! Frozen random atom configurations.
//!
//! Positions are in units of the mean spacing `a`, so a periodic box holding
//! `N` atoms in `d` dimensions has side `N^(1/d)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum pair separation used unless overridden, in units of `a`.
pub const DEFAULT_R_MIN: f64 = 0.1;
/// Draws per atom before giving up on the `r_min` constraint.
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Hypercube `[0, side)^d` with minimum-image distances.
    PeriodicBox { side: f64 },
    /// Open boundary, positions drawn from a centred Gaussian.
    OpenGaussian { sigmas: Vec<f64> },
    /// Open segment `[0, length)` in one dimension.
    OpenLine { length: f64 },
}

impl Geometry {
    pub fn label(&self) -> &'static str {
        match self {
            Geometry::PeriodicBox { .. } => "periodic_box",
            Geometry::OpenGaussian { .. } => "open_gaussian",
            Geometry::OpenLine { .. } => "open_line",
        }
    }
}

/// 64-bit finalizer from SplitMix64. Used to derive per-realization seeds
/// `seed_k = mix_seed(master, k)`.
pub fn mix_seed(master: u64, k: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(k.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomConfiguration {
    dimension: usize,
    /// Row-major, `dimension` coordinates per atom.
    coords: Vec<f64>,
    geometry: Geometry,
    seed: u64,
    r_min: f64,
}

/// Rejection-sampling options shared by all samplers.
#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub r_min: f64,
    pub max_attempts: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            r_min: DEFAULT_R_MIN,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

pub fn sample_uniform(atoms: usize, dimension: usize, seed: u64) -> Result<AtomConfiguration> {
    sample_uniform_with(atoms, dimension, seed, SamplerOptions::default())
}

/// Uniform positions in a periodic box of side `atoms^(1/d)` (unit density).
pub fn sample_uniform_with(
    atoms: usize,
    dimension: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<AtomConfiguration> {
    check_counts(atoms, dimension)?;
    let side = (atoms as f64).powf(1.0 / dimension as f64);
    let geometry = Geometry::PeriodicBox { side };
    sample(atoms, dimension, geometry, seed, opts, |rng, out| {
        for x in out.iter_mut() {
            *x = rng.gen::<f64>() * side;
        }
    })
}

/// Positions drawn from a normalized Gaussian with per-axis standard
/// deviations `sigmas`; the dimension is `sigmas.len()`.
pub fn sample_gaussian_cloud(atoms: usize, sigmas: &[f64], seed: u64) -> Result<AtomConfiguration> {
    sample_gaussian_cloud_with(atoms, sigmas, seed, SamplerOptions::default())
}

pub fn sample_gaussian_cloud_with(
    atoms: usize,
    sigmas: &[f64],
    seed: u64,
    opts: SamplerOptions,
) -> Result<AtomConfiguration> {
    check_counts(atoms, sigmas.len())?;
    if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigmas must be positive, got {sigmas:?}"
        )));
    }
    let geometry = Geometry::OpenGaussian {
        sigmas: sigmas.to_vec(),
    };
    sample(atoms, sigmas.len(), geometry, seed, opts, |rng, out| {
        for (x, s) in out.iter_mut().zip(sigmas) {
            let z: f64 = StandardNormal.sample(rng);
            *x = s * z;
        }
    })
}

/// Uniform positions on an open segment of length `atoms` (unit density).
pub fn sample_open_line(
    atoms: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<AtomConfiguration> {
    check_counts(atoms, 1)?;
    let length = atoms as f64;
    sample(
        atoms,
        1,
        Geometry::OpenLine { length },
        seed,
        opts,
        |rng, out| {
            out[0] = rng.gen::<f64>() * length;
        },
    )
}

fn check_counts(atoms: usize, dimension: usize) -> Result<()> {
    if atoms < 1 {
        return Err(Error::InvalidParameter("need at least one atom".into()));
    }
    if !(1..=3).contains(&dimension) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1, 2 or 3, got {dimension}"
        )));
    }
    Ok(())
}

fn sample<F>(
    atoms: usize,
    dimension: usize,
    geometry: Geometry,
    seed: u64,
    opts: SamplerOptions,
    mut draw: F,
) -> Result<AtomConfiguration>
where
    F: FnMut(&mut ChaCha8Rng, &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = AtomConfiguration {
        dimension,
        coords: Vec::with_capacity(atoms * dimension),
        geometry,
        seed,
        r_min: opts.r_min,
    };
    let mut candidate = vec![0.0; dimension];
    for atom in 0..atoms {
        let mut placed = false;
        for _ in 0..opts.max_attempts {
            draw(&mut rng, &mut candidate);
            let clear = (0..atom).all(|j| config.distance_to(j, &candidate) >= opts.r_min);
            if clear {
                config.coords.extend_from_slice(&candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Overconstrained {
                atom,
                attempts: opts.max_attempts,
                r_min: opts.r_min,
            });
        }
    }
    Ok(config)
}

impl AtomConfiguration {
    /// Build a configuration from explicit positions. Periodic coordinates
    /// are wrapped into `[0, side)`.
    pub fn from_positions(positions: &[Vec<f64>], geometry: Geometry, seed: u64) -> Result<Self> {
        let dimension = positions
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("empty position list".into()))?;
        check_counts(positions.len(), dimension)?;
        let mut coords = Vec::with_capacity(positions.len() * dimension);
        for p in positions {
            if p.len() != dimension {
                return Err(Error::DimensionMismatch(format!(
                    "position has {} components, expected {dimension}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
            match geometry {
                Geometry::PeriodicBox { side } => {
                    coords.extend(p.iter().map(|x| x.rem_euclid(side)))
                }
                _ => coords.extend_from_slice(p),
            }
        }
        Ok(Self {
            dimension,
            coords,
            geometry,
            seed,
            r_min: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dimension)
    }

    fn distance_to(&self, j: usize, point: &[f64]) -> f64 {
        separation(&self.geometry, self.position(j), point)
    }

    /// Euclidean distance between atoms `i` and `j`, minimum image in a
    /// periodic box.
    pub fn pair_distance(&self, i: usize, j: usize) -> Result<f64> {
        let len = self.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        if i == j {
            return Err(Error::InvalidParameter(format!(
                "pair_distance needs distinct atoms, got {i} twice"
            )));
        }
        Ok(separation(
            &self.geometry,
            self.position(i),
            self.position(j),
        ))
    }

    /// All pairwise distances as a dense symmetric matrix with zero diagonal.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let r = separation(&self.geometry, self.position(i), self.position(j));
                out[i][j] = r;
                out[j][i] = r;
            }
        }
        out
    }

    /// CSV with a `#` comment header recording geometry, seed and units.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let geometry = match &self.geometry {
            Geometry::PeriodicBox { side } => format!("periodic_box side={side:?}"),
            Geometry::OpenGaussian { sigmas } => {
                let s: Vec<String> = sigmas.iter().map(|s| format!("{s:?}")).collect();
                format!("open_gaussian sigmas={}", s.join(";"))
            }
            Geometry::OpenLine { length } => format!("open_line length={length:?}"),
        };
        writeln!(w, "# geometry: {geometry}")?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# r_min: {:?}", self.r_min)?;
        writeln!(w, "# units: a = n^(-1/d)")?;
        let axes = ["x", "y", "z"];
        let mut header = String::from("index");
        for axis in &axes[..self.dimension] {
            write!(header, ",{axis}").unwrap();
        }
        writeln!(w, "{header}")?;
        for (i, p) in self.positions().enumerate() {
            let mut row = i.to_string();
            for x in p {
                write!(row, ",{x:?}").unwrap();
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut geometry = None;
        let mut seed = 0;
        let mut r_min = 0.0;
        let mut positions = Vec::new();
        let mut saw_header = false;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let (key, value) = match comment.split_once(':') {
                    Some((k, v)) => (k.trim(), v.trim()),
                    None => continue,
                };
                match key {
                    "geometry" => geometry = Some(parse_geometry(value)?),
                    "seed" => {
                        seed = value
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad seed {value:?}")))?
                    }
                    "r_min" => r_min = parse_f64(value)?,
                    _ => {}
                }
                continue;
            }
            if !saw_header {
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let coords = fields[1..]
                .iter()
                .map(|f| parse_f64(f))
                .collect::<Result<Vec<_>>>()?;
            positions.push(coords);
        }
        let geometry = geometry.ok_or_else(|| Error::Parse("missing geometry header".into()))?;
        let mut config = Self::from_positions(&positions, geometry, seed)?;
        config.r_min = r_min;
        Ok(config)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn parse_geometry(value: &str) -> Result<Geometry> {
    let (kind, rest) = value.split_once(' ').unwrap_or((value, ""));
    let arg = rest.split_once('=').map(|(_, v)| v).unwrap_or("");
    match kind {
        "periodic_box" => Ok(Geometry::PeriodicBox {
            side: parse_f64(arg)?,
        }),
        "open_line" => Ok(Geometry::OpenLine {
            length: parse_f64(arg)?,
        }),
        "open_gaussian" => Ok(Geometry::OpenGaussian {
            sigmas: arg.split(';').map(parse_f64).collect::<Result<_>>()?,
        }),
        other => Err(Error::Parse(format!("unknown geometry {other:?}"))),
    }
}

fn separation(geometry: &Geometry, a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let mut dx = x - y;
        if let Geometry::PeriodicBox { side } = geometry {
            dx -= side * (dx / side).round();
        }
        sum += dx * dx;
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_separation(c: &AtomConfiguration) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..c.len() {
            for j in 0..i {
                best = best.min(c.pair_distance(i, j).unwrap());
            }
        }
        best
    }

    #[test]
    fn uniform_line_respects_box_and_r_min() {
        let c = sample_uniform(8, 1, 3).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.geometry(), &Geometry::PeriodicBox { side: 8.0 });
        assert!(c.positions().all(|p| (0.0..8.0).contains(&p[0])));
        assert!(min_separation(&c) >= DEFAULT_R_MIN);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            sample_uniform(50, 3, 17).unwrap(),
            sample_uniform(50, 3, 17).unwrap()
        );
        assert_ne!(
            sample_uniform(50, 3, 17).unwrap(),
            sample_uniform(50, 3, 18).unwrap()
        );
        let s = [1.0, 2.0, 3.0];
        assert_eq!(
            sample_gaussian_cloud(40, &s, 5).unwrap(),
            sample_gaussian_cloud(40, &s, 5).unwrap()
        );
    }

    #[test]
    fn overconstrained_sampling_fails() {
        let opts = SamplerOptions {
            r_min: 1.5,
            max_attempts: 100,
        };
        let err = sample_uniform_with(10, 1, 0, opts).unwrap_err();
        assert!(matches!(err, Error::Overconstrained { .. }));
    }

    #[test]
    fn gaussian_cloud_covariance() {
        // 10^4 atoms in a unit cloud are far denser than r_min allows, so the
        // exclusion is switched off to test the bare Gaussian moments.
        let opts = SamplerOptions {
            r_min: 0.0,
            ..SamplerOptions::default()
        };
        let c = sample_gaussian_cloud_with(10_000, &[1.0, 1.0, 1.0], 11, opts).unwrap();
        let n = c.len() as f64;
        for axis in 0..3 {
            let mean: f64 = c.positions().map(|p| p[axis]).sum::<f64>() / n;
            let var: f64 = c.positions().map(|p| (p[axis] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var - 1.0).abs() < 0.05, "axis {axis} variance {var}");
        }
    }

    #[test]
    fn single_gaussian_atom() {
        let c = sample_gaussian_cloud(1, &[2.0, 2.0], 9).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.dimension(), 2);
    }

    #[test]
    fn minimum_image_distance() {
        let c = AtomConfiguration::from_positions(
            &[vec![0.5], vec![9.5]],
            Geometry::PeriodicBox { side: 10.0 },
            0,
        )
        .unwrap();
        assert!((c.pair_distance(0, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn open_distance() {
        let c = AtomConfiguration::from_positions(
            &[vec![0.0, 0.0, 0.0], vec![3.0, 4.0, 0.0]],
            Geometry::OpenGaussian {
                sigmas: vec![1.0; 3],
            },
            0,
        )
        .unwrap();
        assert_eq!(c.pair_distance(0, 1).unwrap(), 5.0);
        assert!(matches!(
            c.pair_distance(0, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(c.pair_distance(1, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = sample_uniform(12, 3, 99).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# geometry: periodic_box"));
        assert!(text.contains("index,x,y,z"));
        let back = AtomConfiguration::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn nearest_neighbours_follow_poisson_statistics() {
        // At unit density in 3d, P(r_nn > r) = exp(-4 pi r^3 / 3).
        let c = sample_uniform(1000, 3, 2024).unwrap();
        let dist = c.distance_matrix();
        let mut nn: Vec<f64> = dist
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, r)| *r)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        nn.sort_by(f64::total_cmp);
        let n = nn.len() as f64;
        let ks = nn
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let cdf = 1.0 - (-4.0 * std::f64::consts::PI * r.powi(3) / 3.0).exp();
                (cdf - k as f64 / n)
                    .abs()
                    .max((cdf - (k + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
        let mean = nn.iter().sum::<f64>() / n;
        // Gamma(4/3) (3 / 4 pi)^(1/3)
        assert!((mean - 0.5540).abs() < 0.03, "mean nn distance {mean}");
    }

    #[test]
    fn seed_mixing_spreads_bits() {
        let a = mix_seed(1, 0);
        let b = mix_seed(1, 1);
        assert_ne!(a, b);
        assert!((a ^ b).count_ones() > 10);
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
    }

    proptest::proptest! {
        #[test]
        fn distance_is_symmetric(seed in 0u64..1000, d in 1usize..4) {
            let c = sample_uniform(6, d, seed).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        proptest::prop_assert_eq!(c.pair_distance(i, j).unwrap(), c.pair_distance(j, i).unwrap());
                    }
                }
            }
        }

        #[test]
        fn periodic_translation_invariance(seed in 0u64..1000, shift in proptest::collection::vec(-20.0f64..20.0, 3)) {
            let c = sample_uniform(7, 3, seed).unwrap();
            let moved: Vec<Vec<f64>> = c.positions().map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect()).collect();
            let m = AtomConfiguration::from_positions(&moved, c.geometry().clone(), seed).unwrap();
            for i in 0..7 {
                for j in 0..i {
                    let (a, b) = (c.pair_distance(i, j).unwrap(), m.pair_distance(i, j).unwrap());
                    proptest::prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn relabeling_preserves_distance_multiset(seed in 0u64..1000, rot in 1usize..7) {
            let c = sample_uniform(7, 2, seed).unwrap();
            let mut perm: Vec<Vec<f64>> = c.positions().map(<[f64]>::to_vec).collect();
            perm.rotate_left(rot);
            perm.swap(0, 3);
            let p = AtomConfiguration::from_positions(&perm, c.geometry().clone(), seed).unwrap();
            let collect = |cfg: &AtomConfiguration| {
                let mut v: Vec<f64> = cfg.distance_matrix().iter().flatten().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            };
            let (a, b) = (collect(&c), collect(&p));
            for (x, y) in a.iter().zip(&b) {
                proptest::prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
