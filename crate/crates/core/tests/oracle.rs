//! Symbolic execution against the exhaustive interpreter, plus the replay
//! and guard properties of satisfying models.

mod common;

use std::time::Duration;

use soc_core::eval::Verdict;
use soc_core::session::{load_source, Loaded};
use soc_core::smt::{default_command, emit_smtlib, emit_with_pins, run_solver, SolverJob, SolverVerdict};
use soc_core::symexec::{oracle_from_ids, replay, sym_exec};
use soc_core::value::DEFAULT_CAPACITY;

fn solve(text: String, registry: &soc_core::choice::Registry) -> SolverVerdict {
    let mut job = SolverJob::new(&default_command(), Duration::from_secs(60), text);
    run_solver(&mut job, registry).expect("solver runs")
}

fn load(seed: u64) -> Loaded {
    let src = common::micro_scenario(seed);
    match load_source("micro.soc", &src) {
        Ok(l) => l,
        Err(e) => panic!("generated program {} is ill-typed: {}\n{}", seed, e, src),
    }
}

#[test]
fn generated_programs_are_well_typed() {
    for seed in 0..200 {
        load(seed);
    }
}

#[test]
fn solver_agrees_with_enumeration() {
    let mut sat = 0;
    for seed in 0..60 {
        let l = load(seed);
        let truth = common::brute_force(&l.tp, &l.tree, "s");
        let mut vc = sym_exec(&l.tp, &l.tree, "s").unwrap();
        let verdict = solve(emit_smtlib(&vc), &vc.registry);
        match verdict {
            SolverVerdict::Sat(model) => {
                assert!(truth.violated, "seed {}: solver found a violation the interpreter cannot", seed);
                sat += 1;
                // replay agreement
                let oracle = oracle_from_ids(&vc.registry, &model);
                let r = replay(&l.tp, &l.tree, "s", &oracle, DEFAULT_CAPACITY).unwrap();
                let Verdict::AssertionFailed { site, .. } = r.verdict else {
                    panic!("seed {}: replay of a satisfying model did not fail", seed)
                };
                // guard correctness
                assert!(vc.violated(&model).contains(&site), "seed {}", seed);
                // pinning every variable keeps it satisfiable
                let pins: Vec<_> = model.iter().map(|(k, v)| (*k, v.clone())).collect();
                let again = solve(emit_with_pins(&vc, &pins), &vc.registry);
                assert!(matches!(again, SolverVerdict::Sat(_)), "seed {}", seed);
            }
            SolverVerdict::Unsat => {
                assert!(!truth.violated, "seed {}: interpreter found a violation the solver missed", seed);
            }
            other => panic!("seed {}: {:?}", seed, other),
        }
    }
    eprintln!("sat {} of 60", sat);
    assert!(sat > 5 && sat < 55, "generator should produce both outcomes ({} of 60 violated)", sat);
}

