//! C ABI over `rydberg_scaling`.
//!
//! Every function returns an [`RsStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be read with
//! [`rs_last_error_message`]. Simulations live behind the opaque
//! [`RsSimulation`] handle, released with [`rs_simulation_free`]. Panics never
//! cross the boundary; they surface as [`RsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rydberg_scaling::analysis::{fit_powerlaw, fit_saturation};
use rydberg_scaling::lda::{lda_average, CloudSpec};
use rydberg_scaling::meanfield::{chi, eos_solve, Branch};
use rydberg_scaling::params::{critical_exponents, nondimensionalize, ModelParams, PhysicalParams};
use rydberg_scaling::quantum::{
    disorder_average, BasisChoice, DisorderResult, DisorderRun, EnsembleGeometry, PropagationOptions,
};
use rydberg_scaling::superatom::blockade_radius;
use rydberg_scaling::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Parameters outside their domain, mismatched sizes, bad configuration.
    InvalidArgument = 2,
    /// Too few or non-positive data points for a fit.
    InsufficientData = 3,
    /// A solver or propagator did not reach its tolerance.
    NonConvergence = 4,
    Io = 5,
    /// The caller's buffer is shorter than the result.
    BufferTooSmall = 6,
    /// The handle has no result yet.
    NotRun = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsStatus {
    match e {
        Error::Realization { source, .. } => status_of(source),
        Error::InsufficientData(_) | Error::NonPositiveData(_) => RsStatus::InsufficientData,
        Error::NonConvergence(_) | Error::StepUnderflow { .. } => RsStatus::NonConvergence,
        Error::Io(_) | Error::Json(_) => RsStatus::Io,
        _ => RsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard<F: FnOnce() -> Result<(), RsStatus>>(f: F) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            RsStatus::Panic
        }
    }
}

fn fail(e: Error) -> RsStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(name: &str) -> RsStatus {
    set_error(format!("{name} is null"));
    RsStatus::NullPointer
}

fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), RsStatus> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: non-null, and the caller guarantees it points to a writable T.
    unsafe { out.write(value) };
    Ok(())
}

/// # Safety
/// `data` must be null only when `len` is zero, otherwise valid for `len` reads.
unsafe fn input<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], RsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(data, len))
}

/// Copies `values` into a caller buffer of `capacity` entries.
///
/// # Safety
/// `buf` must be valid for `capacity` writes.
unsafe fn output(values: &[f64], buf: *mut f64, capacity: usize, name: &str) -> Result<(), RsStatus> {
    if capacity < values.len() {
        set_error(format!("{name} holds {capacity} values, need {}", values.len()));
        return Err(RsStatus::BufferTooSmall);
    }
    if values.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null(name));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes, without the
/// terminator, or 0 when there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Exponents as exact fractions `num / den`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsExponents {
    pub beta_num: i64,
    pub beta_den: i64,
    pub one_over_delta_num: i64,
    pub one_over_delta_den: i64,
    pub gamma_num: i64,
    pub gamma_den: i64,
    pub z_num: i64,
    pub z_den: i64,
    pub nu_num: i64,
    pub nu_den: i64,
}

/// # Safety
/// `out` must point to writable memory for one `RsExponents`.
#[no_mangle]
pub unsafe extern "C" fn rs_critical_exponents(d: u32, p: u32, out: *mut RsExponents) -> RsStatus {
    guard(|| {
        let e = critical_exponents(d, p).map_err(fail)?;
        let value = RsExponents {
            beta_num: e.beta.num,
            beta_den: e.beta.den,
            one_over_delta_num: e.one_over_delta.num,
            one_over_delta_den: e.one_over_delta.den,
            gamma_num: e.gamma.num,
            gamma_den: e.gamma.den,
            z_num: e.z.num,
            z_den: e.z.den,
            nu_num: e.nu.num,
            nu_den: e.nu.den,
        };
        write(out, value, "out")
    })
}

/// SI inputs: rad/s, rad/s, m^-d, J m^p.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsPhysicalParams {
    pub rabi_frequency: f64,
    pub laser_detuning: f64,
    pub density: f64,
    pub interaction_coefficient: f64,
    pub dimension: u32,
    pub interaction_exponent: u32,
    pub atom_number: u64,
}

/// Dimensionless drive and detuning, with the natural units in SI.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsNaturalParams {
    pub alpha: f64,
    pub delta: f64,
    /// E_c, J.
    pub energy: f64,
    /// a, m.
    pub length: f64,
    /// ħ / E_c, s.
    pub time: f64,
}

/// # Safety
/// `phys` must point to a readable `RsPhysicalParams`, `out` to a writable
/// `RsNaturalParams`.
#[no_mangle]
pub unsafe extern "C" fn rs_nondimensionalize(phys: *const RsPhysicalParams, out: *mut RsNaturalParams) -> RsStatus {
    guard(|| {
        let phys = phys.as_ref().ok_or_else(|| null("phys"))?;
        let phys = PhysicalParams {
            rabi_frequency: phys.rabi_frequency,
            laser_detuning: phys.laser_detuning,
            density: phys.density,
            interaction_coefficient: phys.interaction_coefficient,
            dimension: phys.dimension,
            interaction_exponent: phys.interaction_exponent,
            atom_number: phys.atom_number,
        };
        let model = nondimensionalize(&phys).map_err(fail)?;
        let units = phys.natural_units();
        write(
            out,
            RsNaturalParams {
                alpha: model.alpha,
                delta: model.delta,
                energy: units.energy,
                length: units.length,
                time: units.time,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsEosSolution {
    pub f_r: f64,
    pub unclamped: f64,
    pub residual: f64,
    /// 1 when the root exceeded 1 and was capped.
    pub saturated: u8,
    /// 0 physical, 1 lower small, 2 lower large.
    pub branch: u8,
}

/// Physical root of the mean-field equation of state.
///
/// # Safety
/// `out` must point to a writable `RsEosSolution`.
#[no_mangle]
pub unsafe extern "C" fn rs_eos_solve(alpha: f64, delta: f64, d: u32, p: u32, out: *mut RsEosSolution) -> RsStatus {
    guard(|| {
        let s = eos_solve(alpha, delta, d, p).map_err(fail)?;
        let branch = match s.branch {
            Branch::Physical => 0,
            Branch::LowerSmall => 1,
            Branch::LowerLarge => 2,
        };
        write(
            out,
            RsEosSolution {
                f_r: s.f_r,
                unclamped: s.unclamped,
                residual: s.residual,
                saturated: u8::from(s.saturated),
                branch,
            },
            "out",
        )
    })
}

/// Scaling function `χ(y)`.
///
/// # Safety
/// `out` must point to a writable `f64`.
#[no_mangle]
pub unsafe extern "C" fn rs_chi(y: f64, d: u32, p: u32, out: *mut f64) -> RsStatus {
    guard(|| write(out, chi(y, d, p).map_err(fail)?, "out"))
}

/// Superatom blockade radius in units of `a`.
///
/// # Safety
/// `out` must point to a writable `f64`.
#[no_mangle]
pub unsafe extern "C" fn rs_blockade_radius(alpha: f64, d: u32, p: u32, out: *mut f64) -> RsStatus {
    guard(|| write(out, blockade_radius(alpha, d, p).map_err(fail)?, "out"))
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsLdaResult {
    pub f_r: f64,
    /// `f_r / α_peak^{1/δ}`.
    pub prefactor: f64,
    /// NaN when no closed form applies.
    pub closed_form: f64,
    pub quadrature_error: f64,
    /// Number of warnings raised, e.g. blockade radius exceeding the cloud.
    pub warning_count: u32,
}

/// Cloud average of the power law `f = α^{1/δ}` over a Gaussian cloud with
/// `axes` standard deviations in metres.
///
/// # Safety
/// `sigmas` must be valid for `axes` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_lda_average(
    sigmas: *const f64,
    axes: usize,
    atom_number: f64,
    alpha_peak: f64,
    d: u32,
    p: u32,
    out: *mut RsLdaResult,
) -> RsStatus {
    guard(|| {
        let sigmas = input(sigmas, axes, "sigmas")?;
        let cloud = CloudSpec::new(sigmas.to_vec(), atom_number).map_err(fail)?;
        let r = lda_average(&cloud, alpha_peak, d, p).map_err(fail)?;
        write(
            out,
            RsLdaResult {
                f_r: r.f_r,
                prefactor: r.prefactor,
                closed_form: r.closed_form.unwrap_or(f64::NAN),
                quadrature_error: r.quadrature_error,
                warning_count: r.warnings.len() as u32,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsSaturationFit {
    pub rate: f64,
    pub saturation: f64,
    pub rate_stderr: f64,
    pub saturation_stderr: f64,
    pub residual_norm: f64,
    pub iterations: u32,
    pub converged: u8,
    pub saturation_unconstrained: u8,
}

/// Least-squares fit of `N(t) = N_sat (1 − exp(−R t / N_sat))`.
///
/// # Safety
/// `times` and `counts` must be valid for `len` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_fit_saturation(
    times: *const f64,
    counts: *const f64,
    len: usize,
    out: *mut RsSaturationFit,
) -> RsStatus {
    guard(|| {
        let t = input(times, len, "times")?;
        let c = input(counts, len, "counts")?;
        let f = fit_saturation(t, c, None).map_err(fail)?;
        write(
            out,
            RsSaturationFit {
                rate: f.rate,
                saturation: f.saturation,
                rate_stderr: f.rate_stderr,
                saturation_stderr: f.saturation_stderr,
                residual_norm: f.residual_norm,
                iterations: f.iterations as u32,
                converged: u8::from(f.converged),
                saturation_unconstrained: u8::from(f.saturation_unconstrained),
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsPowerLawFit {
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    pub exponent_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
}

/// Unweighted log-log fit of `y = exp(intercept) x^exponent`.
///
/// # Safety
/// `x` and `y` must be valid for `len` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_fit_powerlaw(x: *const f64, y: *const f64, len: usize, out: *mut RsPowerLawFit) -> RsStatus {
    guard(|| {
        let x = input(x, len, "x")?;
        let y = input(y, len, "y")?;
        let pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        let f = fit_powerlaw(&pts).map_err(fail)?;
        write(
            out,
            RsPowerLawFit {
                exponent: f.exponent,
                intercept: f.intercept,
                exponent_stderr: f.exponent_stderr,
                intercept_stderr: f.intercept_stderr,
                r_squared: f.r_squared,
            },
            "out",
        )
    })
}

/// Disorder-averaged run on a unit-density periodic box, starting from the
/// all-ground state.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsSimulationSpec {
    pub dimension: u32,
    pub interaction_exponent: u32,
    pub alpha: f64,
    pub delta: f64,
    pub atom_count: usize,
    pub realizations: usize,
    /// `-1` full basis, `0` adaptive cutoff, `k > 0` at most `k` excitations.
    pub max_excitations: i32,
    /// Propagator accuracy target in (0, 1e-3].
    pub tol: f64,
    pub master_seed: u64,
    /// Output grid `t_max · i / (points − 1)` in units of ħ / E_c.
    pub t_max: f64,
    pub points: usize,
    /// Minimum pair distance in units of `a`.
    pub r_min: f64,
}

/// Opaque simulation handle.
pub struct RsSimulation {
    run: DisorderRun,
    result: Option<DisorderResult>,
}

fn simulation_from(spec: &RsSimulationSpec) -> Result<DisorderRun, Error> {
    let params = ModelParams::new(spec.dimension, spec.interaction_exponent, spec.alpha, spec.delta)?;
    let basis = match spec.max_excitations {
        -1 => BasisChoice::Full,
        0 => BasisChoice::Adaptive { start: None },
        k if k > 0 => BasisChoice::Truncated {
            max_excitations: k as usize,
        },
        k => return Err(Error::InvalidParameter(format!("max_excitations {k}"))),
    };
    if spec.points < 2 || !(spec.t_max > 0.0) || !spec.t_max.is_finite() {
        return Err(Error::InvalidParameter("need points >= 2 and a positive finite t_max".into()));
    }
    let last = (spec.points - 1) as f64;
    Ok(DisorderRun {
        params,
        atom_count: spec.atom_count,
        geometry: EnsembleGeometry::Periodic,
        realizations: spec.realizations,
        basis,
        times: (0..spec.points).map(|i| spec.t_max * i as f64 / last).collect(),
        options: PropagationOptions::with_tol(spec.tol),
        master_seed: spec.master_seed,
        r_min: spec.r_min,
    })
}

/// Creates a handle; nothing is computed until [`rs_simulation_run`].
///
/// # Safety
/// `spec` must be readable, `out` writable. Release the handle with
/// [`rs_simulation_free`].
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_new(spec: *const RsSimulationSpec, out: *mut *mut RsSimulation) -> RsStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or_else(|| null("spec"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let run = simulation_from(spec).map_err(fail)?;
        let handle = Box::into_raw(Box::new(RsSimulation { run, result: None }));
        write(out, handle, "out")
    })
}

/// # Safety
/// `sim` must be null or a handle from [`rs_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_free(sim: *mut RsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Propagates every realization and averages.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_run(sim: *mut RsSimulation) -> RsStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        sim.result = Some(disorder_average(&sim.run).map_err(fail)?);
        Ok(())
    })
}

/// Number of grid points.
///
/// # Safety
/// `sim` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_len(sim: *const RsSimulation, out: *mut usize) -> RsStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        write(out, sim.run.times.len(), "out")
    })
}

/// Copies the time grid, mean Rydberg fraction and its standard error into
/// caller buffers of `capacity` entries each. Any of the three may be null to
/// skip it.
///
/// # Safety
/// `sim` must be a live handle; each non-null buffer valid for `capacity`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_trajectory(
    sim: *const RsSimulation,
    times: *mut f64,
    f_r_mean: *mut f64,
    f_r_stderr: *mut f64,
    capacity: usize,
) -> RsStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let Some(result) = &sim.result else {
            set_error("simulation has not been run".into());
            return Err(RsStatus::NotRun);
        };
        let t = &result.trajectory;
        for (values, buf, name) in [
            (&t.times, times, "times"),
            (&t.f_r_mean, f_r_mean, "f_r_mean"),
            (&t.f_r_stderr, f_r_stderr, "f_r_stderr"),
        ] {
            if !buf.is_null() {
                output(values, buf, capacity, name)?;
            }
        }
        Ok(())
    })
}

/// Worst norm and energy drift over all realizations.
///
/// # Safety
/// `sim` must be a live handle, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_drifts(sim: *const RsSimulation, norm: *mut f64, energy: *mut f64) -> RsStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let Some(result) = &sim.result else {
            set_error("simulation has not been run".into());
            return Err(RsStatus::NotRun);
        };
        write(norm, result.max_norm_drift(), "norm")?;
        write(energy, result.max_energy_drift(), "energy")
    })
}
