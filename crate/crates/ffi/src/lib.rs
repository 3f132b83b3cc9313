//! C interface to the collective-cooling simulator.
//!
//! Every function returns a [`CcStatus`]; on failure the message is kept in a
//! thread-local slot readable with [`cc_last_error`]. Handles are opaque and
//! owned by the caller, who releases them with the matching `*_free`
//! function. Strings returned through out-pointers are released with
//! [`cc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use collective_cooling::cli::{preset, run_config, RunOutcome, ScenarioConfig};
use collective_cooling::moments::{self, MomentState};
use collective_cooling::{derive_couplings, Error, PhysicalParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Numerical = 4,
    CutoffExceeded = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcScenario {
    Common = 0,
    Individual = 1,
}

/// Physical parameters.
pub struct CcParams(PhysicalParams);

/// A scenario configuration.
pub struct CcConfig(ScenarioConfig);

/// The trajectory table and report of a finished run.
pub struct CcRun {
    outcome: RunOutcome,
    report_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> CcStatus {
    match err {
        Error::InvalidParameter { .. } | Error::NoCoolingModes | Error::ZeroCavityCoupling(_) => {
            CcStatus::InvalidArgument
        }
        Error::Config(_) | Error::Json(_) => CcStatus::InvalidConfig,
        Error::CutoffExceeded { .. } => CcStatus::CutoffExceeded,
        Error::Io(_) | Error::Csv(_) => CcStatus::Io,
        _ => CcStatus::Numerical,
    }
}

struct Failure(CcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            CcStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(CcStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a parameter set; `rabi` and `trap_freqs` each hold `modes` values.
///
/// # Safety
/// The arrays must hold `modes` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_params_new(
    n_particles: u64,
    g: f64,
    kappa: f64,
    eta: f64,
    rabi: *const f64,
    trap_freqs: *const f64,
    modes: usize,
    out: *mut *mut CcParams,
) -> CcStatus {
    guard(|| {
        let params = PhysicalParams {
            n_particles,
            g,
            kappa,
            gamma: 0.0,
            eta,
            rabi: slice(rabi, modes, "rabi")?.to_vec(),
            trap_freqs: slice(trap_freqs, modes, "trap_freqs")?.to_vec(),
        };
        params.validate()?;
        put(out, Box::into_raw(Box::new(CcParams(params))), "out")
    })
}

/// Sets the spontaneous decay rate used by the regime report.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_params_set_gamma(params: *mut CcParams, gamma: f64) -> CcStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        let mut next = p.0.clone();
        next.gamma = gamma;
        next.validate()?;
        p.0 = next;
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`cc_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_params_free(params: *mut CcParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Collective couplings `x` and `y`.
///
/// # Safety
/// `params` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn cc_couplings(params: *const CcParams, x: *mut f64, y: *mut f64) -> CcStatus {
    guard(|| {
        let c = derive_couplings(&as_ref(params, "params")?.0)?;
        put(x, c.x, "x")?;
        put(y, c.y, "y")
    })
}

/// Predicted common-mode and individual-mode cooling rates.
///
/// # Safety
/// `params` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn cc_analytic_rates(
    params: *const CcParams,
    rate_common: *mut f64,
    rate_individual: *mut f64,
) -> CcStatus {
    guard(|| {
        let p = &as_ref(params, "params")?.0;
        let c = derive_couplings(p)?;
        put(rate_common, moments::analytic_rate_common(&c, p.kappa)?, "rate_common")?;
        put(rate_individual, moments::analytic_rate_individual(&c, p.kappa)?, "rate_individual")
    })
}

/// Moment-equation vector field at `state = (m, n, s3, u1, u2, k3)`.
///
/// # Safety
/// `state` must hold 6 readable values, `out` 6 writable ones.
#[no_mangle]
pub unsafe extern "C" fn cc_moment_rhs(
    params: *const CcParams,
    scenario: CcScenario,
    state: *const f64,
    out: *mut f64,
) -> CcStatus {
    guard(|| {
        let p = &as_ref(params, "params")?.0;
        let s = MomentState::from_slice(0.0, slice(state, 6, "state")?);
        let c = derive_couplings(p)?;
        let r = match scenario {
            CcScenario::Common => moments::rhs_common(&s, &c, p)?,
            CcScenario::Individual => moments::rhs_individual(&s, &c, p)?,
        };
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, 6).copy_from_slice(&r.to_array());
        Ok(())
    })
}

/// Parses and validates a JSON scenario configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_config_from_json(json: *const c_char, out: *mut *mut CcConfig) -> CcStatus {
    guard(|| {
        let cfg = ScenarioConfig::from_json(&string(json, "json")?)?;
        put(out, Box::into_raw(Box::new(CcConfig(cfg))), "out")
    })
}

/// Loads a built-in preset by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_config_from_preset(name: *const c_char, out: *mut *mut CcConfig) -> CcStatus {
    guard(|| {
        let cfg = preset(&string(name, "name")?)?;
        put(out, Box::into_raw(Box::new(CcConfig(cfg))), "out")
    })
}

/// Replaces the physical parameters of a configuration.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn cc_config_set_params(config: *mut CcConfig, params: *const CcParams) -> CcStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = cfg.0.clone();
        next.params = as_ref(params, "params")?.0.clone();
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Sets the simulated duration.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_config_set_t_end(config: *mut CcConfig, t_end: f64) -> CcStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = cfg.0.clone();
        next.t_end = t_end;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Serializes a configuration to JSON; free the result with [`cc_string_free`].
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_config_to_json(config: *const CcConfig, out: *mut *mut c_char) -> CcStatus {
    guard(|| {
        let text = serde_json::to_string_pretty(&as_ref(config, "config")?.0).map_err(Error::from)?;
        put(out, CString::new(text).unwrap_or_default().into_raw(), "out")
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_config_free(config: *mut CcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a scenario. A finished run whose rate comparison misses its
/// tolerance still returns [`CcStatus::Ok`]; query [`cc_run_passed`].
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_run_scenario(config: *const CcConfig, out: *mut *mut CcRun) -> CcStatus {
    guard(|| {
        let outcome = run_config(&as_ref(config, "config")?.0)?;
        let report_json =
            CString::new(serde_json::to_string(&outcome.report).map_err(Error::from)?).unwrap_or_default();
        put(out, Box::into_raw(Box::new(CcRun { outcome, report_json })), "out")
    })
}

/// Number of recorded rows, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_run_rows(run: *const CcRun) -> usize {
    run.as_ref().map_or(0, |r| r.outcome.rows.len())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_run_columns(run: *const CcRun) -> usize {
    run.as_ref().map_or(0, |r| r.outcome.columns.len())
}

/// 1 when the rate comparison passed, 0 otherwise or for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_run_passed(run: *const CcRun) -> i32 {
    run.as_ref().map_or(0, |r| i32::from(r.outcome.passed()))
}

/// Name of column `col`; free with [`cc_string_free`].
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_run_column_name(run: *const CcRun, col: usize, out: *mut *mut c_char) -> CcStatus {
    guard(|| {
        let r = as_ref(run, "run")?;
        let name = r.outcome.columns.get(col).ok_or_else(|| {
            Failure(CcStatus::OutOfRange, format!("column {col} out of range ({})", r.outcome.columns.len()))
        })?;
        put(out, CString::new(*name).unwrap_or_default().into_raw(), "out")
    })
}

/// Value at (`row`, `col`).
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_run_value(run: *const CcRun, row: usize, col: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let r = as_ref(run, "run")?;
        let v = r
            .outcome
            .rows
            .get(row)
            .and_then(|rw| rw.get(col))
            .ok_or_else(|| Failure(CcStatus::OutOfRange, format!("cell ({row}, {col}) out of range")))?;
        put(out, *v, "out")
    })
}

/// Copies column `col` into `buf`, which must hold [`cc_run_rows`] values.
///
/// # Safety
/// `run` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn cc_run_copy_column(run: *const CcRun, col: usize, buf: *mut f64, len: usize) -> CcStatus {
    guard(|| {
        let r = as_ref(run, "run")?;
        let rows = &r.outcome.rows;
        if col >= r.outcome.columns.len() {
            return Err(Failure(CcStatus::OutOfRange, format!("column {col} out of range")));
        }
        if len < rows.len() {
            return Err(Failure(CcStatus::OutOfRange, format!("buffer holds {len} values, need {}", rows.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, rows.len());
        for (d, row) in dst.iter_mut().zip(rows) {
            *d = row[col];
        }
        Ok(())
    })
}

/// JSON report of the run; borrowed, valid until the handle is freed.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_run_report_json(run: *const CcRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.report_json.as_ptr())
}

/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_run_free(run: *mut CcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
