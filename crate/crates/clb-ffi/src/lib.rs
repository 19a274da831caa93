//! C interface over the run layer and the resource calculus.
//!
//! Handles are opaque; every entry point returns a [`ClbStatus`] and leaves a
//! detailed message for [`clb_last_error_message`] on failure. The generated
//! header lands in `include/clb.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use clb::advantage::{max_steps, min_success_probability, qubit_count, LogBase, StepBudget};
use clb::run::{run_to_string, RunConfig, COMMANDS};
use clb::Error;

/// Result of every fallible entry point. Nonzero codes mirror the CLI exit
/// statuses where one exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    ResourceCap = 3,
    Numeric = 4,
    NullArgument = 5,
    InvalidUtf8 = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message held an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: ClbStatus, message: String) -> ClbStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> ClbStatus {
    match err {
        Error::Config(_) | Error::Unsupported(_) => ClbStatus::Config,
        Error::ResourceCap(_) => ClbStatus::ResourceCap,
        Error::Io(_) => ClbStatus::Io,
        _ => ClbStatus::Numeric,
    }
}

fn report(err: Error) -> ClbStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Wraps an entry point so a panic becomes `ClbInternal` instead of
/// unwinding across the C boundary.
fn guarded<F: FnOnce() -> ClbStatus>(f: F) -> ClbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ClbStatus::Internal, "internal panic".to_string()),
    }
}

/// Borrow a C string argument, rejecting null and invalid UTF-8.
unsafe fn text_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ClbStatus> {
    if ptr.is_null() {
        return Err(fail(
            ClbStatus::NullArgument,
            format!("{what} must not be null"),
        ));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            ClbStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn clb_status_message(status: ClbStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        ClbStatus::Ok => b"ok\0",
        ClbStatus::Io => b"input/output failure\0",
        ClbStatus::Config => b"invalid configuration\0",
        ClbStatus::ResourceCap => b"resource cap exceeded\0",
        ClbStatus::Numeric => b"numerical domain error\0",
        ClbStatus::NullArgument => b"null argument\0",
        ClbStatus::InvalidUtf8 => b"argument is not valid UTF-8\0",
        ClbStatus::Internal => b"internal error\0",
    };
    text.as_ptr() as *const c_char
}

/// Detailed message from the most recent failure on this thread, or null if
/// none has occurred. The pointer stays valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn clb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Pending invocation of one command: parameter overrides, optional config
/// file, and seed.
pub struct ClbRunConfig {
    inner: RunConfig,
}

/// Completed run: owns the CSV artifact text.
pub struct ClbArtifact {
    csv: CString,
}

/// Create a run configuration for `command` (one of the CLI command names).
/// On success `*out` owns the handle; release it with `clb_run_config_free`.
///
/// # Safety
/// `command`, if non-null, must point to a NUL-terminated string; `out`, if
/// non-null, must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn clb_run_config_new(
    command: *const c_char,
    out: *mut *mut ClbRunConfig,
) -> ClbStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ClbStatus::NullArgument, "out must not be null".into());
        }
        let name = match text_arg(command, "command") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if !COMMANDS.contains(&name) {
            return fail(
                ClbStatus::Config,
                format!(
                    "unknown command `{name}`; valid commands: {}",
                    COMMANDS.join(", ")
                ),
            );
        }
        let handle = Box::new(ClbRunConfig {
            inner: RunConfig::new(name),
        });
        *out = Box::into_raw(handle);
        ClbStatus::Ok
    })
}

/// Set one parameter override, using the same keys as the config file.
/// Unknown keys are rejected when the run executes.
///
/// # Safety
/// `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
/// `key` and `value`, if non-null, must point to NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn clb_run_config_set(
    cfg: *mut ClbRunConfig,
    key: *const c_char,
    value: *const c_char,
) -> ClbStatus {
    guarded(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(ClbStatus::NullArgument, "cfg must not be null".into());
        };
        let key = match text_arg(key, "key") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let value = match text_arg(value, "value") {
            Ok(s) => s,
            Err(status) => return status,
        };
        cfg.inner
            .overrides
            .insert(key.to_string(), value.to_string());
        ClbStatus::Ok
    })
}

/// Set the seed recorded in the provenance header (default 42).
///
/// # Safety
/// `cfg`, if non-null, must be a live handle from `clb_run_config_new`.
#[no_mangle]
pub unsafe extern "C" fn clb_run_config_set_seed(cfg: *mut ClbRunConfig, seed: u64) -> ClbStatus {
    guarded(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(ClbStatus::NullArgument, "cfg must not be null".into());
        };
        cfg.inner.seed = seed;
        ClbStatus::Ok
    })
}

/// Point the run at an INI config file; explicit overrides still win.
///
/// # Safety
/// `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
/// `path`, if non-null, must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clb_run_config_set_config_file(
    cfg: *mut ClbRunConfig,
    path: *const c_char,
) -> ClbStatus {
    guarded(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(ClbStatus::NullArgument, "cfg must not be null".into());
        };
        let path = match text_arg(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        cfg.inner.config = Some(path.into());
        ClbStatus::Ok
    })
}

/// Release a run configuration. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle from `clb_run_config_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clb_run_config_free(cfg: *mut ClbRunConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Execute the configured command. On success `*out` owns the artifact;
/// release it with `clb_artifact_free`.
///
/// # Safety
/// `cfg`, if non-null, must be a live handle from `clb_run_config_new`;
/// `out`, if non-null, must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn clb_run_execute(
    cfg: *const ClbRunConfig,
    out: *mut *mut ClbArtifact,
) -> ClbStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ClbStatus::NullArgument, "out must not be null".into());
        }
        let Some(cfg) = cfg.as_ref() else {
            return fail(ClbStatus::NullArgument, "cfg must not be null".into());
        };
        let csv = match run_to_string(&cfg.inner) {
            Ok(csv) => csv,
            Err(err) => return report(err),
        };
        let csv = match CString::new(csv) {
            Ok(c) => c,
            Err(_) => {
                return fail(
                    ClbStatus::Internal,
                    "artifact held an interior NUL".into(),
                )
            }
        };
        *out = Box::into_raw(Box::new(ClbArtifact { csv }));
        ClbStatus::Ok
    })
}

/// NUL-terminated CSV text of a completed run; valid until the artifact is
/// freed. Returns null for a null artifact.
///
/// # Safety
/// `artifact`, if non-null, must be a live handle from `clb_run_execute`.
#[no_mangle]
pub unsafe extern "C" fn clb_artifact_csv(artifact: *const ClbArtifact) -> *const c_char {
    match artifact.as_ref() {
        Some(a) => a.csv.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Length of the CSV text in bytes, excluding the terminating NUL.
///
/// # Safety
/// `artifact`, if non-null, must be a live handle from `clb_run_execute`.
#[no_mangle]
pub unsafe extern "C" fn clb_artifact_len(artifact: *const ClbArtifact) -> usize {
    match artifact.as_ref() {
        Some(a) => a.csv.as_bytes().len(),
        None => 0,
    }
}

/// Release an artifact. Null is ignored.
///
/// # Safety
/// `artifact` must be null or a handle from `clb_run_execute` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clb_artifact_free(artifact: *mut ClbArtifact) {
    if !artifact.is_null() {
        drop(Box::from_raw(artifact));
    }
}

/// Per-step success probability needed to finish `steps` post-selected steps
/// on a grid of `grid_points` sites at truncation order `order` (natural-log
/// qubit accounting).
///
/// # Safety
/// `out`, if non-null, must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn clb_min_success_probability(
    grid_points: f64,
    steps: u64,
    order: u32,
    out: *mut f64,
) -> ClbStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ClbStatus::NullArgument, "out must not be null".into());
        }
        match min_success_probability(grid_points, steps, order, LogBase::Natural) {
            Ok(p) => {
                *out = p;
                ClbStatus::Ok
            }
            Err(err) => report(err),
        }
    })
}

/// Qubit count for an order-`order` lifting of a grid with `grid_points`
/// sites.
///
/// # Safety
/// `out`, if non-null, must be valid for writing one 64-bit integer.
#[no_mangle]
pub unsafe extern "C" fn clb_qubit_count(
    grid_points: f64,
    order: u32,
    out: *mut u64,
) -> ClbStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ClbStatus::NullArgument, "out must not be null".into());
        }
        match qubit_count(grid_points, order) {
            Ok(q) => {
                *out = q;
                ClbStatus::Ok
            }
            Err(err) => report(err),
        }
    })
}

/// Largest number of post-selected steps whose success floor stays under the
/// ancilla ceiling; -1 means unbounded (zero ancillas).
///
/// # Safety
/// `out`, if non-null, must be valid for writing one 64-bit integer.
#[no_mangle]
pub unsafe extern "C" fn clb_max_steps(
    grid_points: f64,
    order: u32,
    ancillas: u32,
    out: *mut i64,
) -> ClbStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ClbStatus::NullArgument, "out must not be null".into());
        }
        match max_steps(grid_points, order, ancillas, LogBase::Natural) {
            Ok(StepBudget::Bounded(t)) => {
                *out = t as i64;
                ClbStatus::Ok
            }
            Ok(StepBudget::Unbounded) => {
                *out = -1;
                ClbStatus::Ok
            }
            Err(err) => report(err),
        }
    })
}
