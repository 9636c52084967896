//! C ABI for nullcone.
//!
//! Objects are opaque handles created by `nc_*_parse`/`nc_run` and released
//! with the matching `*_free`. Every fallible call returns an [`NcStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`nc_last_error`]. Strings returned as `char *` are owned by the
//! caller and must be released with [`nc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nullcone::cli::{parse_config, run_scenario, RunConfig, RunOutcome};
use nullcone::geometry::{tortoise, tortoise_inverse};
use nullcone::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigParse = 3,
    ConfigSchema = 4,
    ConfigSemantic = 5,
    InvalidArgument = 6,
    Instability = 7,
    Extraction = 8,
    Diagnostics = 9,
    Io = 10,
    Panic = 11,
}

/// Tables a finished run can render as CSV.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcTable {
    Energies = 0,
    Radiation = 1,
    Cones = 2,
}

/// A parsed, validated run configuration.
pub struct NcConfig {
    inner: RunConfig,
}

/// A completed run with its trace, radiation fields and report.
pub struct NcRun {
    inner: RunOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> NcStatus {
    match err {
        Error::ConfigParse { .. } => NcStatus::ConfigParse,
        Error::ConfigSchema { .. } => NcStatus::ConfigSchema,
        Error::ConfigSemantic(_) => NcStatus::ConfigSemantic,
        Error::Instability { .. } => NcStatus::Instability,
        Error::Extraction(_) => NcStatus::Extraction,
        Error::Diagnostics(_) => NcStatus::Diagnostics,
        Error::Io(_) => NcStatus::Io,
        _ => NcStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> NcStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, turning panics into [`NcStatus::Panic`].
fn guard(f: impl FnOnce() -> NcStatus) -> NcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            NcStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, NcStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(NcStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        NcStatus::InvalidUtf8
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next `nc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn nc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate a JSON configuration.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_config_parse(json: *const c_char, out: *mut *mut NcConfig) -> NcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return NcStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(NcConfig { inner: cfg }));
                NcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The configuration re-serialized as JSON with defaults filled in.
///
/// # Safety
/// `cfg` must be NULL or a live handle from [`nc_config_parse`].
#[no_mangle]
pub unsafe extern "C" fn nc_config_to_json(cfg: *const NcConfig) -> *mut c_char {
    let Some(cfg) = cfg.as_ref() else {
        set_error("null config");
        return ptr::null_mut();
    };
    match serde_json::to_string(&cfg.inner) {
        Ok(s) => into_c_string(s),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `cfg` must be NULL or a handle from [`nc_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_config_free(cfg: *mut NcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Evolve, extract and diagnose. A run whose checks fail still returns
/// [`NcStatus::Ok`]; query [`nc_run_passed`].
///
/// # Safety
/// `cfg` must be NULL or a live config handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_run(cfg: *const NcConfig, out: *mut *mut NcRun) -> NcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return NcStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let Some(cfg) = cfg.as_ref() else {
            set_error("null config");
            return NcStatus::NullPointer;
        };
        match run_scenario(&cfg.inner) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(NcRun { inner: run }));
                NcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// 1 if every check passed, 0 if any failed, -1 for a NULL handle.
///
/// # Safety
/// `run` must be NULL or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn nc_run_passed(run: *const NcRun) -> c_int {
    run.as_ref().map_or(-1, |r| c_int::from(r.inner.report.pass))
}

/// `E(0)` and the total radiated norm `|F|^2` of a run.
///
/// # Safety
/// `run` must be NULL or a live run handle; the outputs must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_run_energy(run: *const NcRun, initial: *mut f64, radiated: *mut f64) -> NcStatus {
    let Some(run) = run.as_ref() else {
        set_error("null run");
        return NcStatus::NullPointer;
    };
    if initial.is_null() || radiated.is_null() {
        set_error("null output pointer");
        return NcStatus::NullPointer;
    }
    *initial = run.inner.report.initial_energy;
    *radiated = run.inner.report.norm_sq;
    NcStatus::Ok
}

/// The run report as JSON, or NULL on failure.
///
/// # Safety
/// `run` must be NULL or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn nc_run_report_json(run: *const NcRun) -> *mut c_char {
    let Some(run) = run.as_ref() else {
        set_error("null run");
        return ptr::null_mut();
    };
    match run.inner.report_json() {
        Ok(s) => into_c_string(s),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// One of the run's CSV tables, or NULL on failure.
///
/// # Safety
/// `run` must be NULL or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn nc_run_csv(run: *const NcRun, table: NcTable) -> *mut c_char {
    let Some(run) = run.as_ref() else {
        set_error("null run");
        return ptr::null_mut();
    };
    let csv = match table {
        NcTable::Energies => run.inner.energies_csv(),
        NcTable::Radiation => run.inner.radiation_csv(),
        NcTable::Cones => run.inner.cones_csv(),
    };
    match csv {
        Ok(s) => into_c_string(s),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// Write all output files of a run into `dir`, creating it if needed.
///
/// # Safety
/// `run` must be NULL or a live run handle; `dir` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nc_run_write(run: *const NcRun, dir: *const c_char) -> NcStatus {
    guard(|| {
        let Some(run) = run.as_ref() else {
            set_error("null run");
            return NcStatus::NullPointer;
        };
        let dir = match read_str(dir) {
            Ok(d) => d,
            Err(s) => return s,
        };
        match run.inner.write(Path::new(dir)) {
            Ok(()) => NcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `run` must be NULL or a handle from [`nc_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_run_free(run: *mut NcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Tortoise coordinate `r* = r + 2M log(r - 2M)`.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_tortoise(mass: f64, r: f64, out: *mut f64) -> NcStatus {
    if out.is_null() {
        set_error("null output pointer");
        return NcStatus::NullPointer;
    }
    match tortoise(mass, r) {
        Ok(v) => {
            *out = v;
            NcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Areal radius `r > 2M` with tortoise coordinate `r_star`.
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_tortoise_inverse(mass: f64, r_star: f64, out: *mut f64) -> NcStatus {
    if out.is_null() {
        set_error("null output pointer");
        return NcStatus::NullPointer;
    }
    match tortoise_inverse(mass, r_star) {
        Ok(v) => {
            *out = v;
            NcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::ConfigSemantic("x".into())), NcStatus::ConfigSemantic);
        assert_eq!(status_of(&Error::Cfl(1.5)), NcStatus::InvalidArgument);
        assert_eq!(NcStatus::Ok as i32, 0);
    }

    #[test]
    fn errors_are_thread_local() {
        set_error("here");
        let other = std::thread::spawn(|| nc_last_error().is_null()).join().unwrap();
        assert!(other);
        assert!(!nc_last_error().is_null());
    }
}
