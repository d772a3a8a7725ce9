//! Front end through solver on the bundled ThunderX-1 model.

use soc_core::corpus::default_dir;
use soc_core::elaborate::{Resolved, ROOT};
use soc_core::eval::{init_store, Verdict};
use soc_core::session::{self, Loaded};
use soc_core::smt::emit_smtlib;
use soc_core::value::{format_value, Value, DEFAULT_CAPACITY};

fn load(name: &str) -> Loaded {
    session::load_file(&default_dir().join(name)).unwrap()
}

#[test]
fn resolution_from_root_and_from_module_code() {
    let l = load("mini_tx1_vulnerable.soc");
    let t = &l.tree;
    assert!(matches!(
        t.resolve_path(&l.tp, ROOT, &["miniTX1", "cpu", "is_secure"]),
        Ok(Resolved::Cell(_))
    ));
    assert!(matches!(
        t.resolve_path(&l.tp, ROOT, &["miniTX1", "dram", "storage"]),
        Ok(Resolved::Cell(_))
    ));
    let asc = t.find_node("miniTX1.asc").unwrap();
    let dram = t.find_node("miniTX1.dram").unwrap();
    match t.resolve_path(&l.tp, asc, &["dram", "store"]) {
        Ok(Resolved::Function(n, _)) => assert_eq!(n, dram),
        _ => panic!("dram.store from the ASC should reach the bound DRAM"),
    }
    assert!(t.resolve_path(&l.tp, asc, &["cpu", "step"]).is_err());
}

#[test]
fn initial_store() {
    let l = load("mini_tx1_vulnerable.soc");
    let store = init_store(&l.tp, &l.tree);
    let cell = |path: &[&str]| match l.tree.resolve_path(&l.tp, ROOT, path) {
        Ok(Resolved::Cell(c)) => store[c.0 as usize].clone(),
        _ => panic!("{:?}", path),
    };
    assert_eq!(cell(&["miniTX1", "cpu", "is_secure"]), Value::Bool(true));
    for r in ["region0", "region1", "region2", "region3"] {
        for reg in ["START", "END", "ATTR"] {
            assert_eq!(cell(&["miniTX1", "asc", r, reg]), Value::bits(64, 0));
        }
    }
    match cell(&["miniTX1", "dram", "storage"]) {
        Value::Array(a) => {
            assert!(a.is_empty());
            assert_eq!(*a.default, Value::bits(64, 0));
        }
        other => panic!("{:?}", other),
    }
}

#[test]
fn vc_declarations() {
    let l = load("mini_tx1_vulnerable.soc");
    let text = emit_smtlib(&session::build_vc(&l, "test_secure_area_unchanged").unwrap());
    assert!(text.starts_with("(set-logic QF_ABV)"));
    assert!(text.contains("(declare-const c1 (_ BitVec 48))"));
    assert_eq!(text.matches("(assert ").count(), 1);

    let fixed = load("mini_tx1_fixed.soc");
    let text = emit_smtlib(&session::build_vc(&fixed, "inductive_step").unwrap());
    let arrays: Vec<_> = text
        .lines()
        .filter(|l| l.starts_with("(declare-const") && l.contains("(Array"))
        .collect();
    assert_eq!(arrays.len(), 1, "{:?}", arrays);
    assert!(arrays[0].ends_with("(Array (_ BitVec 31) (_ BitVec 64)))"), "{}", arrays[0]);
}

#[test]
fn random_runs_are_deterministic() {
    let l = load("mini_tx1_vulnerable.soc");
    for seed in 0..5 {
        let a = session::run(&l, "test_secure_area_unchanged", seed, DEFAULT_CAPACITY).unwrap();
        let b = session::run(&l, "test_secure_area_unchanged", seed, DEFAULT_CAPACITY).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.store, b.store);
    }
}

#[test]
fn empty_model_runs_all_zero_choices() {
    let l = load("mini_tx1_fixed.soc");
    let r = session::trace(&l, "test_secure_area_unchanged", "", DEFAULT_CAPACITY).unwrap();
    assert_eq!(r.verdict, Verdict::Passed);
    // zero requests are non-secure reads of address 0
    assert!(r.transcript.contains("CPU: request is { is_write: false, is_secure: false, address: 0, value: 0 }"));
}

#[test]
fn value_formatting_examples() {
    assert_eq!(format_value(&Value::Bool(true)), "true");
    assert_eq!(format_value(&Value::bits(2, 3)), "3");
    assert_eq!(format_value(&Value::bits(48, 0x8000_0000_0070)), "0x8000_0000_0070u48");
}
