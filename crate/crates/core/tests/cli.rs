//! End-to-end tests of the `socv` binary and its exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use soc_core::corpus::default_dir;
use soc_core::eval::Verdict;
use soc_core::session;
use soc_core::value::DEFAULT_CAPACITY;

fn corpus(name: &str) -> PathBuf {
    default_dir().join(name).canonicalize().unwrap()
}

fn socv(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socv"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SOC_SOLVER")
        .output()
        .expect("spawn socv")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
module Main {
  instance flag: State<Bool>(false);

  mut fn trivially_true() {
    assert(true)
  }

  mut fn coin() {
    let b = any<Bool>;
    assume(b);
    flag.set(b);
    assert(flag.get())
  }
}
"#;

#[test]
fn check_accepts_vulnerable_model() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = socv(dir.path(), &["check", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).ends_with(": ok\n"));
}

#[test]
fn check_rejects_vector_equality() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("ill-typed/vector_equality.soc");
    let o = socv(dir.path(), &["check", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("equality on indexed collections is not supported"), "{}", err);
}

#[test]
fn check_missing_file_is_tool_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = socv(dir.path(), &["check", "does_not_exist.soc"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_are_tool_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = socv(dir.path(), &["verify", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn run_assert_true_passes_with_empty_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "small.soc", SMALL);
    let o = socv(dir.path(), &["run", f.to_str().unwrap(), "--scenario", "trivially_true"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "PASSED\n");
}

#[test]
fn run_reports_seed_dependent_assume() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "small.soc", SMALL);
    let l = session::load_file(&f).unwrap();
    let seeds: Vec<u64> = (0..64).collect();
    let infeasible = seeds
        .iter()
        .find(|&&s| matches!(session::run(&l, "coin", s, DEFAULT_CAPACITY).unwrap().verdict, Verdict::AssumeInfeasible { .. }))
        .expect("some seed draws false");
    let passing = seeds
        .iter()
        .find(|&&s| session::run(&l, "coin", s, DEFAULT_CAPACITY).unwrap().verdict == Verdict::Passed)
        .expect("some seed draws true");

    let o = socv(dir.path(), &["run", f.to_str().unwrap(), "--scenario", "coin", "--seed", &infeasible.to_string()]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("INFEASIBLE ASSUMPTION at"), "{}", stdout(&o));
    assert!(stdout(&o).contains("small.soc:11"), "{}", stdout(&o));

    let o = socv(dir.path(), &["run", f.to_str().unwrap(), "--scenario", "coin", "--seed", &passing.to_string()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn run_json_has_verdict_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "small.soc", SMALL);
    let o = socv(dir.path(), &["run", f.to_str().unwrap(), "--scenario", "trivially_true", "--trace-json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "passed");
    assert!(v["events"].is_array());
}

#[test]
fn unknown_scenario_is_tool_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "small.soc", SMALL);
    let o = socv(dir.path(), &["run", f.to_str().unwrap(), "--scenario", "nope"]);
    assert_eq!(code(&o), 1);
}

// Random testing misses the bug for most seeds: almost every draw of the
// test address falls outside the secure range, and the rare seeds that land
// inside it issue requests that never reach the region configuration.
#[test]
fn random_run_can_miss_the_exploit() {
    let f = corpus("mini_tx1_vulnerable.soc");
    let l = session::load_file(&f).unwrap();
    let seed = (0..20_000u64)
        .find(|&s| session::run(&l, "test_secure_area_unchanged", s, DEFAULT_CAPACITY).unwrap().verdict == Verdict::Passed)
        .expect("a passing seed");
    let dir = tempfile::tempdir().unwrap();
    let o = socv(
        dir.path(),
        &["run", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--seed", &seed.to_string()],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("PASSED\n"));
}

#[test]
fn verify_finds_exploit_and_trace_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let fs = f.to_str().unwrap();
    let o = socv(dir.path(), &["verify", fs, "--scenario", "test_secure_area_unchanged", "--dump-smt", "q.smt2"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains(".ATTR to 1"), "{}", out);
    assert!(out.contains("DRAM: Storing"), "{}", out);
    assert!(out.contains("FAILED ASSERTION at "));
    assert!(out.trim_end().ends_with("mini_tx1_vulnerable.soc:215"), "{}", out);

    let model = dir.path().join("test_secure_area_unchanged.model.smt2");
    assert!(model.exists(), "default model path");
    let smt = std::fs::read_to_string(dir.path().join("q.smt2")).unwrap();
    assert!(smt.contains("(check-sat)"));
    assert!(smt.contains("(declare-const c1 (_ BitVec 48))"), "{}", smt);

    let t = socv(dir.path(), &["trace", fs, "--scenario", "test_secure_area_unchanged", "--model", model.to_str().unwrap()]);
    assert_eq!(code(&t), 2);
    assert_eq!(stdout(&t), out, "trace must match verify byte-for-byte");
}

#[test]
fn verify_dump_model_path_and_dump_vc_alias() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = socv(
        dir.path(),
        &[
            "verify",
            f.to_str().unwrap(),
            "--scenario",
            "test_secure_area_unchanged",
            "--dump-vc",
            "vc.smt2",
            "--dump-model",
            "m.smt2",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(dir.path().join("vc.smt2").exists());
    let m = std::fs::read_to_string(dir.path().join("m.smt2")).unwrap();
    assert!(m.starts_with("(model"), "{}", m);
    assert!(!dir.path().join("test_secure_area_unchanged.model.smt2").exists());
}

#[test]
fn verify_proves_fixed_model() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_fixed.soc");
    let o = socv(dir.path(), &["verify", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PROVEN"));
    assert!(!stdout(&o).contains("by hand"));
}

#[test]
fn verify_induction_triple_prints_caveat() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_fixed.soc");
    for s in session::INDUCTION_SCENARIOS {
        let o = socv(dir.path(), &["verify", f.to_str().unwrap(), "--scenario", s]);
        assert_eq!(code(&o), 0, "{}: {}", s, stdout(&o));
        assert!(stdout(&o).contains(session::INDUCTION_CAVEAT), "{}", s);
    }
}

#[test]
fn trace_all_zero_model_on_fixed_passes() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_fixed.soc");
    let m = write(dir.path(), "zero.smt2", "(model)\n");
    let o = socv(
        dir.path(),
        &["trace", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--model", m.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn trace_wrong_sort_model_is_tool_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let m = write(dir.path(), "bad.smt2", "(model (define-fun c1 () Bool true))\n");
    let o = socv(
        dir.path(),
        &["trace", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--model", m.to_str().unwrap()],
    );
    assert_eq!(code(&o), 1);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn trace_replays_handwritten_model() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let m = corpus("mini_tx1_region3_attack.model.smt2");
    let o = socv(
        dir.path(),
        &["trace", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--model", m.to_str().unwrap()],
    );
    assert_eq!(code(&o), 2);
    let out = stdout(&o);
    let attr = out.find("ASC: Setting region3.ATTR to 1").expect("region3 write");
    let store = out.find("DRAM: Storing 0x48ad_c33c_fdc9_99d4u64 to 0").expect("dram store");
    assert!(attr < store);
    assert!(out.contains("{ is_write: true, is_secure: false, address: 0x8000_0000_0070u48, value: 1 }"), "{}", out);
}

#[test]
fn dump_tree_lists_paths_and_bindings() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = socv(dir.path(), &["dump-tree", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for p in ["miniTX1.cpu", "miniTX1.asc.region0", "miniTX1.asc.region3", "miniTX1.dram.storage"] {
        assert!(out.contains(p), "{}", p);
    }
    assert!(out.contains("miniTX1.asc.dram -> miniTX1.dram"));
}

#[test]
fn solver_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let fake = write(dir.path(), "fake.sh", "#!/bin/sh\necho unsat\n");
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = Command::new(env!("CARGO_BIN_EXE_socv"))
        .args(["verify", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged"])
        .current_dir(dir.path())
        .env("SOC_SOLVER", format!("sh {} {{file}}", fake.display()))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "the stand-in solver always answers unsat");
}

#[test]
fn solver_without_verdict_is_tool_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus("mini_tx1_vulnerable.soc");
    let o = socv(
        dir.path(),
        &["verify", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--solver", "false"],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn solver_timeout_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let slow = write(dir.path(), "slow.sh", "#!/bin/sh\nexec sleep 5\n");
    let f = corpus("mini_tx1_vulnerable.soc");
    let cmd = format!("sh {}", slow.display());
    let o = socv(
        dir.path(),
        &["verify", f.to_str().unwrap(), "--scenario", "test_secure_area_unchanged", "--solver", &cmd, "--timeout", "1"],
    );
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("UNKNOWN: timeout"));
}
