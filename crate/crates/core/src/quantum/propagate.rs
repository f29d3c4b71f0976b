//! Schrödinger propagation `i dψ/dτ = H ψ` for a time-independent `H`.
//!
//! Two routes:
//!
//! * `Dense`: full eigendecomposition; every output time is exact up to
//!   rounding, independently of how stiff the interaction spectrum is.
//! * `Krylov`: Lanczos exponential with full reorthogonalization and adaptive
//!   steps, for bases too large to diagonalize. Its step size is limited by
//!   the spectral width, so close pairs make it slow.
//!
//! Both routes are unitary by construction: the Krylov update is an
//! orthonormal basis times a unit coefficient vector.

use faer::dyn_stack::{GlobalPodBuffer, PodStack};
use faer::linalg::evd::{compute_hermitian_evd, compute_hermitian_evd_req, ComputeVectors};
use faer::{Col, Mat, Parallelism};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::Basis;
use super::hamiltonian::HamiltonianOperator;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized amplitudes over a basis at dimensionless time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl ManyBodyState {
    /// All atoms in the ground state (basis index 0).
    pub fn all_ground(basis: &Basis) -> Self {
        let mut amplitudes = vec![ZERO; basis.len()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            time: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// `(1/N) Σ_i <P_i>`.
    pub fn rydberg_fraction(&self, basis: &Basis) -> f64 {
        rydberg_fraction(&self.amplitudes, basis)
    }

    /// Total probability in each excitation sector.
    pub fn sector_populations(&self, basis: &Basis) -> Vec<f64> {
        (0..=basis.max_excitations())
            .map(|k| basis.sector(k).map(|i| self.amplitudes[i].norm_sqr()).sum())
            .collect()
    }
}

fn rydberg_fraction(amps: &[Complex64], basis: &Basis) -> f64 {
    let total: f64 = amps
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * basis.excitations(i) as f64)
        .sum();
    total / basis.atom_count() as f64
}

/// Rydberg fraction on a time grid; `stderr` is over disorder realizations
/// (zero for a single run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationTrajectory {
    pub times: Vec<f64>,
    pub f_r_mean: Vec<f64>,
    pub f_r_stderr: Vec<f64>,
    pub realization_count: usize,
}

impl ExcitationTrajectory {
    pub fn single(times: Vec<f64>, f_r: Vec<f64>) -> Self {
        let n = times.len();
        Self {
            times,
            f_r_mean: f_r,
            f_r_stderr: vec![0.0; n],
            realization_count: 1,
        }
    }

    /// CSV with columns `tau,f_R_mean,f_R_stderr,realization_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,f_R_mean,f_R_stderr,realization_count\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:?},{:?},{:?},{}\n",
                self.times[i], self.f_r_mean[i], self.f_r_stderr[i], self.realization_count
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dense when the basis fits under `dense_cap`, Krylov otherwise.
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    /// Relative accuracy target; must lie in (0, 1e-3].
    pub tol: f64,
    pub method: Method,
    pub dense_cap: usize,
    pub krylov_dim: usize,
    pub max_steps: usize,
}

impl PropagationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            method: Method::Auto,
            dense_cap: 4096,
            krylov_dim: 30,
            max_steps: 200_000,
        }
    }
}

/// One propagation run with its conservation diagnostics.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub trajectory: ExcitationTrajectory,
    pub final_state: ManyBodyState,
    /// max |<ψ|ψ> - 1| over the grid.
    pub norm_drift: f64,
    /// max |E(τ) - E(τ_0)| over the grid.
    pub energy_drift: f64,
    /// Largest population seen in the highest excitation sector of a
    /// truncated basis; zero for a full basis.
    pub top_sector_population: f64,
    pub method: Method,
}

pub fn propagate(
    h: &HamiltonianOperator,
    state: &ManyBodyState,
    times: &[f64],
    tol: f64,
) -> Result<Propagation> {
    propagate_with(h, state, times, &PropagationOptions::with_tol(tol))
}

pub fn propagate_with(
    h: &HamiltonianOperator,
    state: &ManyBodyState,
    times: &[f64],
    opts: &PropagationOptions,
) -> Result<Propagation> {
    check_inputs(h, state, times, opts.tol)?;
    let method = match opts.method {
        Method::Auto if h.dimension() <= opts.dense_cap => Method::Dense,
        Method::Auto => Method::Krylov,
        m => m,
    };
    let mut recorder = Recorder::new(h, state);
    let final_state = match method {
        Method::Dense => {
            let spectral = SpectralPropagator::new(h);
            spectral.run(state, times, &mut recorder)
        }
        _ => krylov_run(h, state, times, opts, &mut recorder)?,
    };
    Ok(recorder.finish(times.to_vec(), final_state, method))
}

fn check_inputs(
    h: &HamiltonianOperator,
    state: &ManyBodyState,
    times: &[f64],
    tol: f64,
) -> Result<()> {
    if state.amplitudes.len() != h.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} amplitudes, operator dimension is {}",
            state.amplitudes.len(),
            h.dimension()
        )));
    }
    if (state.norm_sqr() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(
            "initial state is not normalized".into(),
        ));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in (0, 1e-3], got {tol}"
        )));
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "times must be finite and strictly increasing".into(),
        ));
    }
    if times[0] < state.time {
        return Err(Error::InvalidParameter(
            "time grid starts before the state's time".into(),
        ));
    }
    Ok(())
}

struct Recorder<'a> {
    h: &'a HamiltonianOperator,
    energy0: f64,
    f_r: Vec<f64>,
    norm_drift: f64,
    energy_drift: f64,
    top: f64,
    scratch: Vec<Complex64>,
}

impl<'a> Recorder<'a> {
    fn new(h: &'a HamiltonianOperator, state: &ManyBodyState) -> Self {
        Self {
            h,
            energy0: h.expectation(&state.amplitudes),
            f_r: Vec::new(),
            norm_drift: 0.0,
            energy_drift: 0.0,
            top: 0.0,
            scratch: vec![ZERO; h.dimension()],
        }
    }

    fn record(&mut self, amps: &[Complex64]) {
        let basis = self.h.basis();
        self.f_r.push(rydberg_fraction(amps, basis));
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        self.norm_drift = self.norm_drift.max((norm - 1.0).abs());
        self.h.apply(amps, &mut self.scratch);
        let energy: f64 = amps
            .iter()
            .zip(&self.scratch)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        self.energy_drift = self.energy_drift.max((energy - self.energy0).abs());
        let kmax = basis.max_excitations();
        if kmax < basis.atom_count() {
            let top: f64 = basis.sector(kmax).map(|i| amps[i].norm_sqr()).sum();
            self.top = self.top.max(top);
        }
    }

    fn finish(self, times: Vec<f64>, final_state: ManyBodyState, method: Method) -> Propagation {
        Propagation {
            trajectory: ExcitationTrajectory::single(times, self.f_r),
            final_state,
            norm_drift: self.norm_drift,
            energy_drift: self.energy_drift,
            top_sector_population: self.top,
            method,
        }
    }
}

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix from
/// its lower triangle. Runs single-threaded: realizations are already
/// parallel, and a fixed thread count keeps the bits independent of the pool.
fn symmetric_eigen(m: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let dim = m.nrows();
    let mut s = Col::<f64>::zeros(dim);
    let mut u = Mat::<f64>::zeros(dim, dim);
    let par = Parallelism::None;
    let params = Default::default();
    let req = compute_hermitian_evd_req::<f64>(dim, ComputeVectors::Yes, par, params)
        .expect("eigendecomposition workspace size overflow");
    let mut buf = GlobalPodBuffer::new(req);
    compute_hermitian_evd(
        m.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        PodStack::new(&mut buf),
        params,
    );
    ((0..dim).map(|k| s.read(k)).collect(), u)
}

/// Eigendecomposition `H = U diag(E) U^T`, reusable for any number of times.
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: Mat<f64>,
}

impl SpectralPropagator {
    pub fn new(h: &HamiltonianOperator) -> Self {
        let dim = h.dimension();
        let dense = h.to_dense();
        let m = Mat::<f64>::from_fn(dim, dim, |i, j| dense[i * dim + j]);
        let (energies, vectors) = symmetric_eigen(&m);
        Self { energies, vectors }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvector `k` as a real column.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.nrows())
            .map(|i| self.vectors.read(i, k))
            .collect()
    }

    /// `c = U^T ψ`, split into real and imaginary parts.
    fn project(&self, state: &ManyBodyState) -> (Vec<f64>, Vec<f64>) {
        let dim = self.energies.len();
        let mut re = vec![0.0; dim];
        let mut im = vec![0.0; dim];
        for (i, a) in state.amplitudes.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for k in 0..dim {
                let u = self.vectors.read(i, k);
                re[k] += u * a.re;
                im[k] += u * a.im;
            }
        }
        (re, im)
    }

    /// State evolved from `state.time` to `time`.
    pub fn evolve(&self, state: &ManyBodyState, time: f64) -> ManyBodyState {
        let (re, im) = self.project(state);
        let amps = self.evolve_batch(&re, &im, &[time - state.time]);
        ManyBodyState {
            amplitudes: amps.into_iter().next().unwrap(),
            time,
        }
    }

    fn evolve_batch(&self, re: &[f64], im: &[f64], elapsed: &[f64]) -> Vec<Vec<Complex64>> {
        let dim = self.energies.len();
        let cols = elapsed.len();
        let phase = |k: usize, t: f64| {
            let (s, c) = (-self.energies[k] * t).sin_cos();
            Complex64::new(re[k], im[k]) * Complex64::new(c, s)
        };
        let cre = Mat::<f64>::from_fn(dim, cols, |k, j| phase(k, elapsed[j]).re);
        let cim = Mat::<f64>::from_fn(dim, cols, |k, j| phase(k, elapsed[j]).im);
        let pre = &self.vectors * &cre;
        let pim = &self.vectors * &cim;
        (0..cols)
            .map(|j| {
                (0..dim)
                    .map(|i| Complex64::new(pre.read(i, j), pim.read(i, j)))
                    .collect()
            })
            .collect()
    }

    fn run(
        &self,
        state: &ManyBodyState,
        times: &[f64],
        recorder: &mut Recorder<'_>,
    ) -> ManyBodyState {
        const CHUNK: usize = 128;
        let (re, im) = self.project(state);
        let mut last = state.amplitudes.clone();
        for chunk in times.chunks(CHUNK) {
            let elapsed: Vec<f64> = chunk.iter().map(|t| t - state.time).collect();
            for amps in self.evolve_batch(&re, &im, &elapsed) {
                recorder.record(&amps);
                last = amps;
            }
        }
        ManyBodyState {
            amplitudes: last,
            time: *times.last().unwrap(),
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Orthonormal Lanczos vectors and the tridiagonal projection of `H`.
struct Lanczos {
    vectors: Vec<Vec<Complex64>>,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    /// β_m coupling the last vector out of the subspace; zero on breakdown.
    residual: f64,
    scale: f64,
}

impl Lanczos {
    fn build(h: &HamiltonianOperator, start: &[Complex64], m: usize) -> Self {
        let scale = norm(start);
        let mut v0 = start.to_vec();
        v0.iter_mut().for_each(|x| *x /= scale);
        let mut vectors = vec![v0];
        let mut diag = Vec::with_capacity(m);
        let mut offdiag = Vec::with_capacity(m);
        let mut residual = 0.0;
        let mut w = vec![ZERO; start.len()];
        let spectral_scale = h
            .diagonal()
            .iter()
            .fold(h.coupling().abs(), |a, e| a.max(e.abs()))
            .max(1e-300);
        for j in 0..m {
            h.apply(&vectors[j], &mut w);
            let a = dot(&vectors[j], &w).re;
            diag.push(a);
            // full reorthogonalization, applied twice
            for _ in 0..2 {
                for v in &vectors {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if j + 1 == m {
                residual = b;
                break;
            }
            if b <= 1e-13 * spectral_scale {
                break;
            }
            offdiag.push(b);
            vectors.push(w.iter().map(|x| x / b).collect());
        }
        Self {
            vectors,
            diag,
            offdiag,
            residual,
            scale,
        }
    }

    /// `exp(-i T dt) e_1` in the Krylov basis, and the a posteriori error
    /// estimate `β_m |[exp(-i T dt) e_1]_m|` scaled by the start norm.
    fn exp_coefficients(&self, eig: &TridiagEigen, dt: f64) -> (Vec<Complex64>, f64) {
        let m = self.diag.len();
        let mut y = vec![ZERO; m];
        for k in 0..m {
            let (s, c) = (-eig.values[k] * dt).sin_cos();
            let coef = Complex64::new(c, s) * eig.column(k)[0];
            for (yi, q) in y.iter_mut().zip(eig.column(k)) {
                *yi += coef * q;
            }
        }
        let err = self.scale * self.residual * y[m - 1].norm();
        (y, err)
    }

    fn combine(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.vectors[0].len()];
        for (v, c) in self.vectors.iter().zip(y) {
            let c = c * self.scale;
            out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
        }
        out
    }
}

/// Eigendecomposition of the Lanczos tridiagonal matrix.
struct TridiagEigen {
    values: Vec<f64>,
    /// Eigenvectors stored column after column, `m * m`.
    matrix: Vec<f64>,
    m: usize,
}

impl TridiagEigen {
    fn new(diag: &[f64], offdiag: &[f64]) -> Self {
        let m = diag.len();
        let t = Mat::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                offdiag[i]
            } else if j + 1 == i {
                offdiag[j]
            } else {
                0.0
            }
        });
        let (values, u) = symmetric_eigen(&t);
        let mut matrix = vec![0.0; m * m];
        for k in 0..m {
            for i in 0..m {
                matrix[k * m + i] = u.read(i, k);
            }
        }
        Self { values, matrix, m }
    }

    fn column(&self, k: usize) -> &[f64] {
        &self.matrix[k * self.m..(k + 1) * self.m]
    }
}

fn krylov_run(
    h: &HamiltonianOperator,
    state: &ManyBodyState,
    times: &[f64],
    opts: &PropagationOptions,
    recorder: &mut Recorder<'_>,
) -> Result<ManyBodyState> {
    let m = opts
        .krylov_dim
        .clamp(2, h.dimension().max(2))
        .min(h.dimension());
    let span = (times[times.len() - 1] - state.time).max(f64::MIN_POSITIVE);
    // per-step budget so that accumulated error stays below tol over the run
    let budget_per_time = opts.tol / span.max(1.0);
    let norm_h = h.diagonal().iter().fold(0.0f64, |a, e| a.max(e.abs()))
        + h.coupling().abs() * h.basis().atom_count() as f64;
    let mut dt = if norm_h > 0.0 {
        (m as f64 / 4.0) / norm_h
    } else {
        span
    };
    let mut psi = state.amplitudes.clone();
    let mut tau = state.time;
    let mut steps = 0usize;

    for &target in times {
        while tau < target {
            let lanczos = Lanczos::build(h, &psi, m);
            let eig = TridiagEigen::new(&lanczos.diag, &lanczos.offdiag);
            loop {
                let step = dt.min(target - tau);
                let (y, err) = lanczos.exp_coefficients(&eig, step);
                let allowed = budget_per_time * step;
                if err <= allowed || lanczos.residual == 0.0 {
                    psi = lanczos.combine(&y);
                    tau = if step == target - tau {
                        target
                    } else {
                        tau + step
                    };
                    if step == dt {
                        let ratio = if err > 0.0 {
                            allowed / err
                        } else {
                            f64::INFINITY
                        };
                        dt *= (0.9 * ratio.powf(1.0 / m as f64)).clamp(1.0, 2.0);
                    }
                    break;
                }
                let shrink = (allowed / err).powf(1.0 / m as f64).clamp(0.1, 0.9);
                dt = step * shrink;
                if dt < span * 1e-15 || dt < f64::EPSILON * tau.abs() {
                    return Err(Error::StepUnderflow { tau, dt });
                }
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow { tau, dt });
            }
        }
        recorder.record(&psi);
    }
    Ok(ManyBodyState {
        amplitudes: psi,
        time: tau,
    })
}
