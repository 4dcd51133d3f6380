//! C ABI over the experiment runner.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every fallible function returns an [`HfStatus`]; the message of
//! the last failure on the calling thread is available from
//! [`hf_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use heatflux::harness::{run_experiment, write_reports, RunConfig, RunOutput};
use heatflux::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Run configuration.
pub struct HfConfig(RunConfig);

/// Results of one experiment.
pub struct HfRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> HfStatus {
    match e {
        Error::InvalidArgument(_) | Error::ForestMismatch(..) => HfStatus::InvalidArgument,
        Error::Config(_) | Error::Parse { .. } => HfStatus::Config,
        Error::Singular(_) | Error::Compatibility { .. } => HfStatus::Numerical,
        Error::Io(_) => HfStatus::Io,
        Error::Step { source, .. } => status_of(source),
    }
}

fn guard(f: impl FnOnce() -> Result<(), HfStatus>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HfStatus::Panic
        }
    }
}

fn fail(e: Error) -> HfStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HfStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(HfStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        HfStatus::InvalidArgument
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), HfStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(HfStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with default values.
#[no_mangle]
pub extern "C" fn hf_config_new() -> *mut HfConfig {
    Box::into_raw(Box::new(HfConfig(RunConfig::default())))
}

/// # Safety
/// `cfg` must be null or a handle from [`hf_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_config_free(cfg: *mut HfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one key, using the same keys and value syntax as config files.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set(
    cfg: *mut HfConfig,
    key: *const c_char,
    value: *const c_char,
) -> HfStatus {
    guard(|| {
        non_null(cfg, "config")?;
        let (k, v) = (str_arg(key, "key")?, str_arg(value, "value")?);
        (*cfg).0.set(k, v).map_err(fail)
    })
}

/// Applies a whole `key = value` text, one entry per line.
///
/// # Safety
/// `cfg` must be a live handle; `text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_config_apply(cfg: *mut HfConfig, text: *const c_char) -> HfStatus {
    guard(|| {
        non_null(cfg, "config")?;
        let t = str_arg(text, "text")?;
        (*cfg).0.apply_text(t).map_err(fail)
    })
}

/// Solves, estimates and verifies. On success `*out` receives a new handle.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_run(cfg: *const HfConfig, out: *mut *mut HfRun) -> HfStatus {
    guard(|| {
        non_null(cfg, "config")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let c = &(*cfg).0;
        c.validate().map_err(fail)?;
        let r = run_experiment(c).map_err(fail)?;
        *out = Box::into_raw(Box::new(HfRun(r)));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from [`hf_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_run_free(run: *mut HfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Headline numbers of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HfSummary {
    pub eta_ey: f64,
    pub eta_y: f64,
    pub error_ey: f64,
    pub error_y: f64,
    pub effectivity_ey: f64,
    pub effectivity_y: f64,
    pub max_equilibration: f64,
    pub max_local_efficiency: f64,
    pub n_checks: usize,
    pub n_failed: usize,
    /// 1 if every enabled check passed.
    pub passed: i32,
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_run_summary(run: *const HfRun, out: *mut HfSummary) -> HfStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(out, "out")?;
        let r = &(*run).0;
        *out = HfSummary {
            eta_ey: r.estimators.eta_ey(),
            eta_y: r.estimators.eta_y(),
            error_ey: r.errors.ey(),
            error_y: r.errors.y(),
            effectivity_ey: r.effectivity_ey(),
            effectivity_y: r.effectivity_y(),
            max_equilibration: r.max_equilibration(),
            max_local_efficiency: r.max_local_efficiency(),
            n_checks: r.checks.len(),
            n_failed: r.checks.iter().filter(|c| c.failed()).count(),
            passed: i32::from(r.passed()),
        };
        Ok(())
    })
}

/// Writes the CSV reports into `dir`, creating it if needed.
///
/// # Safety
/// `run` must be a live handle; `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn hf_run_write_reports(run: *const HfRun, dir: *const c_char) -> HfStatus {
    guard(|| {
        non_null(run, "run")?;
        let d = str_arg(dir, "dir")?;
        write_reports(&(*run).0, Path::new(d)).map_err(fail)
    })
}
