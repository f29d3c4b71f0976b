//! Dimensionless many-body Hamiltonian
//!
//! ```text
//! H = -(Δ/2) Σ_i σz_i + (α/2) Σ_i σx_i + Σ_{j<i} P_i P_j / r_ij^p
//! ```
//!
//! with `σz = +1` on the Rydberg state and `P = (1 + σz) / 2`. Energies are in
//! units of `E_c`, distances in units of `a`. The operator is real symmetric.

use num_complex::Complex64;

use super::basis::{Basis, BasisSpec};
use crate::ensemble::AtomConfiguration;
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone)]
pub struct HamiltonianOperator {
    basis: Basis,
    diagonal: Vec<f64>,
    /// α/2, the amplitude of every single-spin-flip matrix element.
    coupling: f64,
    params: ModelParams,
}

pub fn build_hamiltonian(
    config: &AtomConfiguration,
    params: &ModelParams,
    spec: BasisSpec,
) -> Result<HamiltonianOperator> {
    params.validate()?;
    if config.len() != spec.atom_count {
        return Err(Error::DimensionMismatch(format!(
            "configuration has {} atoms, basis expects {}",
            config.len(),
            spec.atom_count
        )));
    }
    if config.dimension() != params.dimension as usize {
        return Err(Error::DimensionMismatch(format!(
            "configuration is {}-dimensional, model is {}-dimensional",
            config.dimension(),
            params.dimension
        )));
    }
    let basis = Basis::new(spec)?;
    let n = config.len();
    let p = params.interaction_exponent as i32;
    let dist = config.distance_matrix();
    let mut interaction = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = dist[i][j].powi(-p);
            interaction[i][j] = v;
            interaction[j][i] = v;
        }
    }

    let delta = params.delta;
    let diagonal = basis
        .states()
        .iter()
        .map(|&s| {
            let k = s.count_ones() as f64;
            // -(Δ/2)(k - (N - k))
            let mut e = -0.5 * delta * (2.0 * k - n as f64);
            let mut bits = s;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let mut lower = s & ((1u64 << i) - 1);
                while lower != 0 {
                    let j = lower.trailing_zeros() as usize;
                    lower &= lower - 1;
                    e += interaction[i][j];
                }
            }
            e
        })
        .collect();

    Ok(HamiltonianOperator {
        basis,
        diagonal,
        coupling: 0.5 * params.alpha,
        params: *params,
    })
}

impl HamiltonianOperator {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// The off-diagonal matrix element α/2.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Calls `f(col)` for every column connected to `row` by a single spin
    /// flip that stays inside the basis.
    pub fn for_each_neighbor<F: FnMut(usize)>(&self, row: usize, mut f: F) {
        let s = self.basis.state(row);
        for i in 0..self.basis.atom_count() {
            if let Some(col) = self.basis.index_of(s ^ (1u64 << i)) {
                f(col);
            }
        }
    }

    /// Dense row-major matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let dim = self.dimension();
        let mut m = vec![0.0; dim * dim];
        for row in 0..dim {
            m[row * dim + row] = self.diagonal[row];
            if self.coupling != 0.0 {
                self.for_each_neighbor(row, |col| m[row * dim + col] = self.coupling);
            }
        }
        m
    }

    /// Exact symmetry check of the assembled matrix.
    pub fn is_hermitian(&self) -> bool {
        let dim = self.dimension();
        let m = self.to_dense();
        (0..dim).all(|i| (0..i).all(|j| m[i * dim + j] == m[j * dim + i]))
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = v[row] * self.diagonal[row];
            if self.coupling != 0.0 {
                let mut off = Complex64::new(0.0, 0.0);
                self.for_each_neighbor(row, |col| off += v[col]);
                acc += off * self.coupling;
            }
            *o = acc;
        }
    }

    /// `<v|H|v>` for a (not necessarily normalized) vector.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mut hv = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply(v, &mut hv);
        v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_uniform, Geometry};

    fn line(xs: &[f64]) -> AtomConfiguration {
        let pos: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        AtomConfiguration::from_positions(&pos, Geometry::OpenLine { length: 100.0 }, 0).unwrap()
    }

    #[test]
    fn single_atom_resonant() {
        let params = ModelParams::new(1, 6, 0.3, 0.0).unwrap();
        let h = build_hamiltonian(&line(&[0.0]), &params, BasisSpec::full(1)).unwrap();
        assert_eq!(h.to_dense(), vec![0.0, 0.15, 0.15, 0.0]);
    }

    #[test]
    fn two_atoms_doubly_excited_entry() {
        let (r, delta) = (0.7f64, 0.4);
        let params = ModelParams::new(1, 6, 0.1, delta).unwrap();
        let h = build_hamiltonian(&line(&[1.0, 1.0 + r]), &params, BasisSpec::full(2)).unwrap();
        let idx = h.basis().index_of(0b11).unwrap();
        assert!((h.diagonal()[idx] - (-delta + r.powi(-6))).abs() < 1e-12);
        assert!((h.diagonal()[0] - delta).abs() < 1e-15);
    }

    #[test]
    fn operator_is_hermitian_with_nonnegative_interactions() {
        let config = sample_uniform(7, 2, 4).unwrap();
        let params = ModelParams::new(2, 6, 0.2, 0.0).unwrap();
        let h = build_hamiltonian(&config, &params, BasisSpec::truncated(7, 3)).unwrap();
        assert!(h.is_hermitian());
        assert!(h.diagonal().iter().all(|e| *e >= 0.0));
    }

    #[test]
    fn off_diagonals_flip_one_spin() {
        let config = sample_uniform(5, 1, 8).unwrap();
        let params = ModelParams::new(1, 6, 1.0, 0.0).unwrap();
        let h = build_hamiltonian(&config, &params, BasisSpec::full(5)).unwrap();
        let dim = h.dimension();
        let m = h.to_dense();
        for i in 0..dim {
            for j in 0..dim {
                if i != j && m[i * dim + j] != 0.0 {
                    let diff = h.basis().state(i) ^ h.basis().state(j);
                    assert_eq!(diff.count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let config = sample_uniform(4, 3, 1).unwrap();
        let params = ModelParams::new(3, 6, 0.1, 0.0).unwrap();
        assert!(build_hamiltonian(&config, &params, BasisSpec::full(5)).is_err());
        let params1d = ModelParams::new(1, 6, 0.1, 0.0).unwrap();
        assert!(build_hamiltonian(&config, &params1d, BasisSpec::full(4)).is_err());
    }
}
