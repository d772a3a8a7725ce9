//! C interface to the checker, interpreter and verifier.
//!
//! Programs are opaque handles. Every entry point returns a [`SocStatus`];
//! on failure the message is available from [`soc_last_error`] on the same
//! thread. Strings handed out by the library are owned by the caller and
//! must be released with [`soc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::time::Duration;

use soc_core::eval::{RunResult, Verdict};
use soc_core::session::{self, Loaded, Outcome, ToolError, VerifyOptions};
use soc_core::smt::default_command;

/// A checked and elaborated model.
pub struct SocProgram {
    loaded: Loaded,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SocStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Parse, type or elaboration errors.
    Rejected = 4,
    /// Unknown scenario, capacity exhausted or a bad choice value.
    Eval = 5,
    Solver = 6,
    Model = 7,
    Internal = 8,
}

/// Outcome of a concrete run or replay; values match the `socv` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SocVerdict {
    Passed = 0,
    AssertionFailed = 2,
    AssumeInfeasible = 4,
}

/// Outcome of `soc_verify`; values match the `socv` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SocOutcome {
    Proven = 0,
    Counterexample = 2,
    Unknown = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &ToolError) -> SocStatus {
    match e {
        ToolError::Io { .. } => SocStatus::Io,
        ToolError::Rejected(_) => SocStatus::Rejected,
        ToolError::Eval(_) => SocStatus::Eval,
        ToolError::Solver(_) | ToolError::SolverCrashed { .. } => SocStatus::Solver,
        ToolError::Model(_) => SocStatus::Model,
        ToolError::ReplayDisagrees => SocStatus::Internal,
    }
}

struct Fail(SocStatus);

impl From<ToolError> for Fail {
    fn from(e: ToolError) -> Fail {
        let s = status_of(&e);
        set_error(e.to_string());
        Fail(s)
    }
}

fn fail(status: SocStatus, msg: &str) -> Fail {
    set_error(msg.to_string());
    Fail(status)
}

/// Runs `f`, turning panics and errors into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SocStatus::Ok
        }
        Ok(Err(Fail(s))) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal error: {}", msg));
            SocStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(SocStatus::NullArgument, &format!("`{}` is null", what)));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SocStatus::InvalidUtf8, &format!("`{}` is not UTF-8", what)))
}

unsafe fn program<'a>(p: *const SocProgram) -> Result<&'a Loaded, Fail> {
    p.as_ref()
        .map(|p| &p.loaded)
        .ok_or_else(|| fail(SocStatus::NullArgument, "`program` is null"))
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Writes `s` through `out` unless `out` is null.
unsafe fn put(out: *mut *mut c_char, s: &str) {
    if !out.is_null() {
        *out = owned(s);
    }
}

unsafe fn put_run(l: &Loaded, r: &RunResult, verdict: *mut SocVerdict, transcript: *mut *mut c_char, location: *mut *mut c_char) {
    if !verdict.is_null() {
        *verdict = match r.verdict {
            Verdict::Passed => SocVerdict::Passed,
            Verdict::AssertionFailed { .. } => SocVerdict::AssertionFailed,
            Verdict::AssumeInfeasible { .. } => SocVerdict::AssumeInfeasible,
        };
    }
    put(transcript, &r.transcript);
    if !location.is_null() {
        *location = match session::verdict_line(l, &r.verdict) {
            Some(line) => owned(&line),
            None => ptr::null_mut(),
        };
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn soc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn soc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and checks the model at `path`.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn soc_program_load(path: *const c_char, out: *mut *mut SocProgram) -> SocStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(SocStatus::NullArgument, "`out` is null"));
        }
        let path = text(path, "path")?;
        let loaded = session::load_file(Path::new(path))?;
        *out = Box::into_raw(Box::new(SocProgram { loaded }));
        Ok(())
    })
}

/// Checks model source held in memory; `name` is used in diagnostics.
///
/// # Safety
/// `name` and `source` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn soc_program_from_source(
    name: *const c_char,
    source: *const c_char,
    out: *mut *mut SocProgram,
) -> SocStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(SocStatus::NullArgument, "`out` is null"));
        }
        let name = text(name, "name")?;
        let source = text(source, "source")?;
        let loaded = session::load_source(name, source)?;
        *out = Box::into_raw(Box::new(SocProgram { loaded }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from a load function and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn soc_program_free(p: *mut SocProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// The elaborated instance tree, one node per line.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn soc_dump_tree(p: *const SocProgram, out: *mut *mut c_char) -> SocStatus {
    guard(|| {
        let l = program(p)?;
        if out.is_null() {
            return Err(fail(SocStatus::NullArgument, "`out` is null"));
        }
        put(out, &l.tree.dump(&l.tp));
        Ok(())
    })
}

/// Runs `scenario` with seeded random choices. `capacity` 0 selects the
/// default sparse-array capacity. Any of the out-pointers may be null;
/// `location` receives null when the run passed.
///
/// # Safety
/// `p` must be a live handle and `scenario` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn soc_run(
    p: *const SocProgram,
    scenario: *const c_char,
    seed: u64,
    capacity: usize,
    verdict: *mut SocVerdict,
    transcript: *mut *mut c_char,
    location: *mut *mut c_char,
) -> SocStatus {
    guard(|| {
        let l = program(p)?;
        let scenario = text(scenario, "scenario")?;
        let r = session::run(l, scenario, seed, capacity_or_default(capacity))?;
        put_run(l, &r, verdict, transcript, location);
        Ok(())
    })
}

/// Replays a model file's text, as written by `soc_verify` or `socv verify`.
///
/// # Safety
/// `p` must be a live handle; `scenario` and `model` nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn soc_trace(
    p: *const SocProgram,
    scenario: *const c_char,
    model: *const c_char,
    capacity: usize,
    verdict: *mut SocVerdict,
    transcript: *mut *mut c_char,
    location: *mut *mut c_char,
) -> SocStatus {
    guard(|| {
        let l = program(p)?;
        let scenario = text(scenario, "scenario")?;
        let model = text(model, "model")?;
        let r = session::trace(l, scenario, model, capacity_or_default(capacity))?;
        put_run(l, &r, verdict, transcript, location);
        Ok(())
    })
}

/// Searches for a counterexample. A null `solver` uses `SOC_SOLVER` or the
/// default z3 command; `timeout_secs` 0 means 300 s. On a counterexample
/// `model` receives the model file text and `transcript` the replayed
/// output; on `Unknown`, `transcript` receives the reason. Out-pointers
/// that do not apply are set to null.
///
/// # Safety
/// `p` must be a live handle; `scenario` and a non-null `solver` must be
/// nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn soc_verify(
    p: *const SocProgram,
    scenario: *const c_char,
    solver: *const c_char,
    timeout_secs: u64,
    capacity: usize,
    outcome: *mut SocOutcome,
    model: *mut *mut c_char,
    transcript: *mut *mut c_char,
) -> SocStatus {
    guard(|| {
        let l = program(p)?;
        let scenario = text(scenario, "scenario")?;
        if outcome.is_null() {
            return Err(fail(SocStatus::NullArgument, "`outcome` is null"));
        }
        let solver = if solver.is_null() {
            default_command()
        } else {
            text(solver, "solver")?.to_string()
        };
        let opts = VerifyOptions {
            solver,
            timeout: Duration::from_secs(if timeout_secs == 0 { 300 } else { timeout_secs }),
            capacity: capacity_or_default(capacity),
        };
        let report = session::verify(l, scenario, &opts)?;
        for out in [model, transcript] {
            if !out.is_null() {
                *out = ptr::null_mut();
            }
        }
        *outcome = match &report.outcome {
            Outcome::Proven => SocOutcome::Proven,
            Outcome::Unknown(reason) => {
                put(transcript, reason);
                SocOutcome::Unknown
            }
            Outcome::Counterexample { model_text, run, .. } => {
                put(model, model_text);
                put(transcript, &run.transcript);
                SocOutcome::Counterexample
            }
        };
        Ok(())
    })
}

fn capacity_or_default(c: usize) -> usize {
    if c == 0 {
        soc_core::value::DEFAULT_CAPACITY
    } else {
        c
    }
}
