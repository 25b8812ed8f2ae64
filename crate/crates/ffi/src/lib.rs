//! C ABI over `singlet_core`.
//!
//! Every fallible function returns a [`SingletStatus`]; on failure the
//! message is available from [`singlet_last_error_message`] on the same
//! thread. Objects are opaque handles returned through `out` pointers
//! and released with the matching `*_free`. Array getters copy into
//! caller-owned buffers and fail with `SINGLET_STATUS_BUFFER_TOO_SMALL` when
//! the capacity is short; query the length first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use singlet_core::config::RunConfig;
use singlet_core::curve::{ScanCurve, ScanType};
use singlet_core::experiments::{dip_scan, duration_scan, evolve_scan};
use singlet_core::fitting::{fit_curve, FitModel, FitResult};
use singlet_core::io::read_curve;
use singlet_core::rate::{m2s_efficiency, slic_efficiency};
use singlet_core::sequence::{
    build_m2s, build_slic, execute_from, m2s_params_with, ExecOptions, PulseSequence, TauConvention, Trajectory,
    TRAJECTORY_COLUMNS,
};
use singlet_core::spin::{DensityState, SpinSystem};
use singlet_core::{Error, RelaxationParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Parse = 4,
    Io = 5,
    BufferTooSmall = 6,
    NotFound = 7,
    Panic = 8,
}

/// Scan kinds for curves.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletScanType {
    Dip = 0,
    Duration = 1,
    Evolve = 2,
    Efficiency = 3,
}

/// Fit models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletFitModel {
    Lorentzian = 0,
    Sin4 = 1,
    Sin4Offset = 2,
    Exponential = 3,
}

/// Echo spacing convention for M2S: 1/(4·sqrt(J²+Δν²)) or 1/(4J).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletTauConvention {
    Effective = 0,
    JOnly = 1,
}

/// Longitudinal and singlet lifetimes in seconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingletRelaxation {
    pub t1: f64,
    pub ts: f64,
}

/// M2S echo-train counts and timing.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingletM2sParams {
    pub n1: u32,
    pub n2: u32,
    pub tau_s: f64,
    pub nu_e_hz: f64,
    pub total_duration_s: f64,
}

/// A spin system (opaque).
pub struct SingletSystem(SpinSystem);

/// A pulse sequence (opaque).
pub struct SingletSequence(PulseSequence);

/// Observables recorded while running a sequence (opaque).
pub struct SingletTrajectory(Trajectory);

/// A scanned signal (opaque).
pub struct SingletCurve(ScanCurve);

/// Fitted parameters with uncertainties (opaque).
pub struct SingletFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> SingletStatus {
    match e {
        Error::Io(_) => SingletStatus::Io,
        Error::Json(_) | Error::Malformed(_) | Error::Config { .. } => SingletStatus::Parse,
        e if e.is_input_error() => SingletStatus::InvalidArgument,
        _ => SingletStatus::Numerical,
    }
}

/// Failure carried out of a guarded body before it becomes a status code.
enum Failure {
    Core(Error),
    Status(SingletStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(SingletStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status and recording the
/// message for `singlet_last_error_message`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SingletStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SingletStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SingletStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::Status(SingletStatus::Parse, format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize) -> Result<(), Failure> {
    if capacity < values.len() {
        return Err(Failure::Status(
            SingletStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("out"));
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn relaxation(ptr: *const SingletRelaxation) -> Result<Option<RelaxationParams>, Failure> {
    match ptr.as_ref() {
        None => Ok(None),
        Some(r) => Ok(Some(RelaxationParams::new(r.t1, r.ts)?)),
    }
}

fn publish<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn release<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Message of the last failed call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn singlet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a `singlet_*` function documented as returning an owned
/// string, and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn singlet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Two-spin system with coupling `j_hz` and offsets ±Δν/2.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_system_pair(j_hz: f64, delta_nu_hz: f64, out: *mut *mut SingletSystem) -> SingletStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        publish(out, SingletSystem(SpinSystem::pair(j_hz, delta_nu_hz)?));
        Ok(())
    })
}

/// Pair (spins 0 and 1) plus a third spin at `third_offset_hz` coupled by
/// `j13_hz` and `j23_hz`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_system_pair_with_third(
    j_hz: f64,
    delta_nu_hz: f64,
    third_offset_hz: f64,
    j13_hz: f64,
    j23_hz: f64,
    out: *mut *mut SingletSystem,
) -> SingletStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let system = SpinSystem::pair_with_third(j_hz, delta_nu_hz, third_offset_hz, j13_hz, j23_hz)?;
        publish(out, SingletSystem(system));
        Ok(())
    })
}

/// Number of spins, or 0 for NULL.
///
/// # Safety
/// `system` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_system_n_spins(system: *const SingletSystem) -> usize {
    system.as_ref().map_or(0, |s| s.0.n_spins())
}

/// # Safety
/// `system` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singlet_system_free(system: *mut SingletSystem) {
    release(system);
}

/// SLIC: 90° excitation, spin-lock at `nutation_hz` for `tau_sl`, storage
/// for `tau_evolve`, and optionally a second lock of `tau_sl` for readout.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_sequence_slic(
    nutation_hz: f64,
    tau_sl: f64,
    tau_evolve: f64,
    readout: bool,
    out: *mut *mut SingletSequence,
) -> SingletStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        publish(out, SingletSequence(build_slic(nutation_hz, 0.0, tau_sl, tau_evolve, readout)?));
        Ok(())
    })
}

/// M2S with counts and spacing derived from `j_hz` and `delta_nu_hz`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_sequence_m2s(
    j_hz: f64,
    delta_nu_hz: f64,
    convention: SingletTauConvention,
    tau_evolve: f64,
    readout: bool,
    out: *mut *mut SingletSequence,
) -> SingletStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = m2s_params_with(j_hz, delta_nu_hz, tau_convention(convention))?;
        publish(out, SingletSequence(build_m2s(&params, tau_evolve, readout)?));
        Ok(())
    })
}

/// Sequence from its JSON form (`{"elements": [...], "record_points": ...}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_sequence_from_json(json: *const c_char, out: *mut *mut SingletSequence) -> SingletStatus {
    guard(|| {
        let json = text(json, "json")?;
        let out = out_ref(out, "out")?;
        publish(out, SingletSequence(PulseSequence::from_json(json)?));
        Ok(())
    })
}

/// Total duration in seconds, or NaN for NULL.
///
/// # Safety
/// `sequence` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_sequence_duration(sequence: *const SingletSequence) -> f64 {
    sequence.as_ref().map_or(f64::NAN, |s| s.0.duration())
}

/// # Safety
/// `sequence` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singlet_sequence_free(sequence: *mut SingletSequence) {
    release(sequence);
}

/// Runs `sequence` from thermal equilibrium with polarization `polarization`
/// (0.01 if zero). `relaxation` may be NULL for ideal evolution.
///
/// # Safety
/// `system` and `sequence` must be live handles; `relaxation` NULL or valid;
/// `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_simulate(
    system: *const SingletSystem,
    sequence: *const SingletSequence,
    relaxation: *const SingletRelaxation,
    polarization: f64,
    out: *mut *mut SingletTrajectory,
) -> SingletStatus {
    guard(|| {
        let system = &borrow(system, "system")?.0;
        let sequence = &borrow(sequence, "sequence")?.0;
        let relax = self::relaxation(relaxation)?;
        let out = out_ref(out, "out")?;
        let mut options = ExecOptions::default();
        if polarization != 0.0 {
            options.polarization = polarization;
        }
        let rho = DensityState::thermal(system.n_spins(), options.polarization)?;
        let trajectory = execute_from(sequence, system, relax.as_ref(), &rho, &options)?;
        publish(out, SingletTrajectory(trajectory));
        Ok(())
    })
}

/// Number of recorded samples, or 0 for NULL.
///
/// # Safety
/// `trajectory` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_trajectory_len(trajectory: *const SingletTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Number of observable columns.
#[no_mangle]
pub extern "C" fn singlet_trajectory_n_columns() -> usize {
    TRAJECTORY_COLUMNS.len()
}

/// Index of the observable column named `name` (e.g. "P_S0").
///
/// # Safety
/// `name` must be a NUL-terminated string; `index` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn singlet_trajectory_column_index(name: *const c_char, index: *mut usize) -> SingletStatus {
    guard(|| {
        let name = text(name, "name")?;
        let index = out_ref(index, "index")?;
        *index = TRAJECTORY_COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Failure::Status(SingletStatus::NotFound, format!("no observable named '{name}'")))?;
        Ok(())
    })
}

/// Copies the sample times into `out`.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn singlet_trajectory_times(
    trajectory: *const SingletTrajectory,
    out: *mut f64,
    capacity: usize,
) -> SingletStatus {
    guard(|| copy_out(&borrow(trajectory, "trajectory")?.0.times(), out, capacity))
}

/// Copies observable column `column` into `out`.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn singlet_trajectory_column(
    trajectory: *const SingletTrajectory,
    column: usize,
    out: *mut f64,
    capacity: usize,
) -> SingletStatus {
    guard(|| {
        let trajectory = &borrow(trajectory, "trajectory")?.0;
        if column >= TRAJECTORY_COLUMNS.len() {
            return Err(Failure::Status(
                SingletStatus::InvalidArgument,
                format!("column {column} out of range (0..{})", TRAJECTORY_COLUMNS.len()),
            ));
        }
        copy_out(&trajectory.column(column), out, capacity)
    })
}

/// # Safety
/// `trajectory` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singlet_trajectory_free(trajectory: *mut SingletTrajectory) {
    release(trajectory);
}

fn tau_convention(c: SingletTauConvention) -> TauConvention {
    match c {
        SingletTauConvention::Effective => TauConvention::Effective,
        SingletTauConvention::JOnly => TauConvention::JOnly,
    }
}

/// M2S counts and spacing for a pair; requires J > Δν > 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn singlet_m2s_params(
    j_hz: f64,
    delta_nu_hz: f64,
    convention: SingletTauConvention,
    out: *mut SingletM2sParams,
) -> SingletStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = m2s_params_with(j_hz, delta_nu_hz, tau_convention(convention))?;
        *out = SingletM2sParams {
            n1: p.n1,
            n2: p.n2,
            tau_s: p.tau,
            nu_e_hz: p.nu_e,
            total_duration_s: p.total_duration(),
        };
        Ok(())
    })
}

/// Rate-model SLIC efficiency (singlet population over the 0.5 ceiling).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn singlet_slic_efficiency(
    t1: f64,
    ts: f64,
    delta_nu_hz: f64,
    optimize_duration: bool,
    out: *mut f64,
) -> SingletStatus {
    guard(|| {
        *out_ref(out, "out")? = slic_efficiency(t1, ts, delta_nu_hz, optimize_duration)?;
        Ok(())
    })
}

/// Rate-model M2S efficiency at the ideal stage durations.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn singlet_m2s_efficiency(t1: f64, ts: f64, delta_nu_hz: f64, out: *mut f64) -> SingletStatus {
    guard(|| {
        *out_ref(out, "out")? = m2s_efficiency(t1, ts, delta_nu_hz, None)?;
        Ok(())
    })
}

fn scan_type(t: SingletScanType) -> ScanType {
    match t {
        SingletScanType::Dip => ScanType::Dip,
        SingletScanType::Duration => ScanType::Duration,
        SingletScanType::Evolve => ScanType::Evolve,
        SingletScanType::Efficiency => ScanType::Efficiency,
    }
}

/// Curve from `len` grid points and signals; `x` must be strictly increasing.
///
/// # Safety
/// `x` and `y` must each hold `len` doubles; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_new(
    kind: SingletScanType,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut *mut SingletCurve,
) -> SingletStatus {
    guard(|| {
        let x = slice(x, len, "x")?.to_vec();
        let y = slice(y, len, "y")?.to_vec();
        let out = out_ref(out, "out")?;
        publish(out, SingletCurve(ScanCurve::new(scan_type(kind), x, y)?));
        Ok(())
    })
}

/// Reads a curve file written by the `singlet` CLI (CSV or JSON).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_read(path: *const c_char, out: *mut *mut SingletCurve) -> SingletStatus {
    guard(|| {
        let path = text(path, "path")?;
        let out = out_ref(out, "out")?;
        publish(out, SingletCurve(read_curve(Path::new(path))?));
        Ok(())
    })
}

/// Runs the scan described by a JSON run config (the `scan` section).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_scan_from_config(config_json: *const c_char, out: *mut *mut SingletCurve) -> SingletStatus {
    use singlet_core::config::ResolvedScan;
    guard(|| {
        let config = RunConfig::from_json(text(config_json, "config_json")?)?;
        let out = out_ref(out, "out")?;
        let system = config.system()?;
        let relax = config.relaxation.as_ref();
        let curve = match config.resolved_scan(&system)? {
            ResolvedScan::Dip { tau_sl, grid } => dip_scan(&system, tau_sl, &grid, relax)?,
            ResolvedScan::Duration { nutation_hz, tau_evolve, grid } => {
                duration_scan(&system, nutation_hz, &grid, tau_evolve, relax)?
            }
            ResolvedScan::Evolve { nutation_hz, tau_sl, grid } => {
                let relax = relax.ok_or_else(|| {
                    Failure::Status(SingletStatus::InvalidArgument, "an evolve scan needs `relaxation`".into())
                })?;
                evolve_scan(&system, nutation_hz, tau_sl, &grid, relax)?
            }
        };
        publish(out, SingletCurve(curve));
        Ok(())
    })
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_len(curve: *const SingletCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the grid into `out`.
///
/// # Safety
/// `curve` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_x(curve: *const SingletCurve, out: *mut f64, capacity: usize) -> SingletStatus {
    guard(|| copy_out(borrow(curve, "curve")?.0.x(), out, capacity))
}

/// Copies the signal into `out`.
///
/// # Safety
/// `curve` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_y(curve: *const SingletCurve, out: *mut f64, capacity: usize) -> SingletStatus {
    guard(|| copy_out(borrow(curve, "curve")?.0.y(), out, capacity))
}

/// # Safety
/// `curve` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singlet_curve_free(curve: *mut SingletCurve) {
    release(curve);
}

/// Fits `curve` with `model`.
///
/// # Safety
/// `curve` must be a live handle; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit(curve: *const SingletCurve, model: SingletFitModel, out: *mut *mut SingletFit) -> SingletStatus {
    guard(|| {
        let curve = &borrow(curve, "curve")?.0;
        let out = out_ref(out, "out")?;
        let model = match model {
            SingletFitModel::Lorentzian => FitModel::Lorentzian,
            SingletFitModel::Sin4 => FitModel::Sin4,
            SingletFitModel::Sin4Offset => FitModel::Sin4Offset,
            SingletFitModel::Exponential => FitModel::Exponential,
        };
        publish(out, SingletFit(fit_curve(curve, model)?));
        Ok(())
    })
}

/// Looks up a fitted parameter (e.g. "center", "period", "rate") or a
/// derived quantity (e.g. "delta_nu_hz", "lifetime"). Quantities that could
/// not be determined report `SINGLET_STATUS_NOT_FOUND`.
///
/// # Safety
/// `fit` must be a live handle; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit_value(fit: *const SingletFit, name: *const c_char, out: *mut f64) -> SingletStatus {
    guard(|| {
        let fit = &borrow(fit, "fit")?.0;
        let name = text(name, "name")?;
        let out = out_ref(out, "out")?;
        *out = fit
            .params
            .get(name)
            .copied()
            .or_else(|| fit.derived(name))
            .ok_or_else(|| Failure::Status(SingletStatus::NotFound, format!("no value named '{name}'")))?;
        Ok(())
    })
}

/// Standard error of a fitted parameter; `SINGLET_STATUS_NOT_FOUND` when the
/// parameter is unknown or its covariance is singular.
///
/// # Safety
/// `fit` must be a live handle; `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit_std_error(fit: *const SingletFit, name: *const c_char, out: *mut f64) -> SingletStatus {
    guard(|| {
        let fit = &borrow(fit, "fit")?.0;
        let name = text(name, "name")?;
        let out = out_ref(out, "out")?;
        *out = fit
            .std_error(name)
            .ok_or_else(|| Failure::Status(SingletStatus::NotFound, format!("no standard error for '{name}'")))?;
        Ok(())
    })
}

/// Whether the optimizer reached a stationary point; false for NULL.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit_converged(fit: *const SingletFit) -> bool {
    fit.as_ref().is_some_and(|f| f.0.converged)
}

/// The full fit result as JSON. Free with `singlet_string_free`.
///
/// # Safety
/// `fit` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit_to_json(fit: *const SingletFit, out: *mut *mut c_char) -> SingletStatus {
    guard(|| {
        let fit = &borrow(fit, "fit")?.0;
        let out = out_ref(out, "out")?;
        let json = fit.to_json()?;
        *out = CString::new(json).map_err(|e| Failure::Status(SingletStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `fit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn singlet_fit_free(fit: *mut SingletFit) {
    release(fit);
}
