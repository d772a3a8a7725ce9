use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use soc_ffi::*;

fn corpus(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a library string.
unsafe fn take(p: *mut c_char) -> Option<String> {
    if p.is_null() {
        return None;
    }
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    soc_string_free(p);
    Some(s)
}

unsafe fn last_error() -> String {
    let p = soc_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn load(name: &str) -> *mut SocProgram {
    let mut p = ptr::null_mut();
    assert_eq!(soc_program_load(corpus(name).as_ptr(), &mut p), SocStatus::Ok);
    assert!(!p.is_null());
    p
}

const SMALL: &str = "module Main { mut fn ok() { assert(true) } mut fn bad() { assume(false) } }";

#[test]
fn load_errors_have_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(soc_program_load(c("/nonexistent.soc").as_ptr(), &mut p), SocStatus::Io);
        assert!(p.is_null());
        assert!(last_error().contains("/nonexistent.soc"));

        assert_eq!(soc_program_load(corpus("ill-typed/vector_equality.soc").as_ptr(), &mut p), SocStatus::Rejected);
        assert!(last_error().contains("equality on indexed collections"));

        assert_eq!(soc_program_load(ptr::null(), &mut p), SocStatus::NullArgument);
        assert_eq!(
            soc_program_from_source(c("x.soc").as_ptr(), c(SMALL).as_ptr(), ptr::null_mut()),
            SocStatus::NullArgument
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            soc_program_from_source(c("x.soc").as_ptr(), bad.as_ptr() as *const c_char, &mut p),
            SocStatus::InvalidUtf8
        );
    }
}

#[test]
fn run_from_source() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(soc_program_from_source(c("x.soc").as_ptr(), c(SMALL).as_ptr(), &mut p), SocStatus::Ok);
        assert!(soc_last_error().is_null());

        let mut v = SocVerdict::AssertionFailed;
        let mut loc = ptr::null_mut();
        assert_eq!(soc_run(p, c("ok").as_ptr(), 0, 0, &mut v, ptr::null_mut(), &mut loc), SocStatus::Ok);
        assert_eq!(v, SocVerdict::Passed);
        assert!(loc.is_null());

        assert_eq!(soc_run(p, c("bad").as_ptr(), 0, 0, &mut v, ptr::null_mut(), &mut loc), SocStatus::Ok);
        assert_eq!(v, SocVerdict::AssumeInfeasible);
        assert_eq!(take(loc).unwrap(), "INFEASIBLE ASSUMPTION at x.soc:1");

        assert_eq!(soc_run(p, c("missing").as_ptr(), 0, 0, &mut v, ptr::null_mut(), ptr::null_mut()), SocStatus::Eval);
        assert_eq!(soc_run(ptr::null(), c("ok").as_ptr(), 0, 0, &mut v, ptr::null_mut(), ptr::null_mut()), SocStatus::NullArgument);
        soc_program_free(p);
        soc_program_free(ptr::null_mut());
    }
}

#[test]
fn dump_tree() {
    unsafe {
        let p = load("mini_tx1_vulnerable.soc");
        let mut out = ptr::null_mut();
        assert_eq!(soc_dump_tree(p, &mut out), SocStatus::Ok);
        let tree = take(out).unwrap();
        assert!(tree.contains("miniTX1.asc.dram -> miniTX1.dram"));
        soc_program_free(p);
    }
}

#[test]
fn verify_then_trace() {
    unsafe {
        let p = load("mini_tx1_vulnerable.soc");
        let scenario = c("test_secure_area_unchanged");
        let mut outcome = SocOutcome::Unknown;
        let (mut model, mut transcript) = (ptr::null_mut(), ptr::null_mut());
        let st = soc_verify(p, scenario.as_ptr(), ptr::null(), 60, 0, &mut outcome, &mut model, &mut transcript);
        assert_eq!(st, SocStatus::Ok, "{}", last_error());
        assert_eq!(outcome, SocOutcome::Counterexample);
        let model = take(model).unwrap();
        let transcript = take(transcript).unwrap();
        assert!(transcript.contains(".ATTR to 1"));

        let mut v = SocVerdict::Passed;
        let (mut again, mut loc) = (ptr::null_mut(), ptr::null_mut());
        let m = c(&model);
        assert_eq!(soc_trace(p, scenario.as_ptr(), m.as_ptr(), 0, &mut v, &mut again, &mut loc), SocStatus::Ok);
        assert_eq!(v, SocVerdict::AssertionFailed);
        assert_eq!(take(again).unwrap(), transcript);
        assert!(take(loc).unwrap().ends_with("mini_tx1_vulnerable.soc:215"));

        let wrong = c("(model (define-fun c1 () Bool true))");
        assert_eq!(soc_trace(p, scenario.as_ptr(), wrong.as_ptr(), 0, &mut v, ptr::null_mut(), ptr::null_mut()), SocStatus::Model);
        soc_program_free(p);
    }
}

#[test]
fn verify_proof_and_solver_failure() {
    unsafe {
        let p = load("mini_tx1_fixed.soc");
        let scenario = c("test_secure_area_unchanged");
        let mut outcome = SocOutcome::Unknown;
        let mut model = ptr::null_mut();
        assert_eq!(soc_verify(p, scenario.as_ptr(), ptr::null(), 0, 0, &mut outcome, &mut model, ptr::null_mut()), SocStatus::Ok);
        assert_eq!(outcome, SocOutcome::Proven);
        assert!(model.is_null());

        let st = soc_verify(p, scenario.as_ptr(), c("false").as_ptr(), 0, 0, &mut outcome, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, SocStatus::Solver);
        soc_program_free(p);
    }
}
