//! Every bundled model against its manifest, and the rejection suite.

use std::time::Duration;

use soc_core::corpus::{contains_in_order, corpus_manifest, default_dir, error_annotations, soc_files};
use soc_core::session::{self, Outcome, VerifyOptions};
use soc_core::smt::default_command;
use soc_core::value::DEFAULT_CAPACITY;

fn opts() -> VerifyOptions {
    VerifyOptions {
        solver: default_command(),
        timeout: Duration::from_secs(300),
        capacity: DEFAULT_CAPACITY,
    }
}

#[test]
fn manifest_scenarios_verify_as_expected() {
    let entries = corpus_manifest(&default_dir()).unwrap();
    assert!(entries.len() >= 6);
    for e in &entries {
        let l = session::load_file(&e.file).unwrap_or_else(|err| panic!("{}: {}", e.file.display(), err));
        for s in &e.scenarios {
            let report = session::verify(&l, &s.name, &opts()).unwrap();
            assert_eq!(report.exit_code(), s.verify, "{} {}", e.file.display(), s.name);
            if let Outcome::Counterexample { model_text, run, .. } = &report.outcome {
                assert!(
                    contains_in_order(&run.transcript, &s.fragments),
                    "{} {}: fragments {:?} not in\n{}",
                    e.file.display(),
                    s.name,
                    s.fragments,
                    run.transcript
                );
                let again = session::trace(&l, &s.name, model_text, DEFAULT_CAPACITY).unwrap();
                assert_eq!(again.transcript, run.transcript);
                assert_eq!(again.verdict, run.verdict);
            }
        }
    }
}

#[test]
fn manifest_replays() {
    for e in corpus_manifest(&default_dir()).unwrap() {
        let l = session::load_file(&e.file).unwrap();
        for r in &e.replay {
            let text = std::fs::read_to_string(&r.model).unwrap();
            let run = session::trace(&l, &r.scenario, &text, DEFAULT_CAPACITY).unwrap();
            assert_eq!(run.verdict.exit_code(), r.exit, "{}", r.model.display());
            assert!(contains_in_order(&run.transcript, &r.fragments), "{}", run.transcript);
        }
    }
}

#[test]
fn ill_typed_files_fail_on_annotated_line() {
    let files = soc_files(&default_dir().join("ill-typed"));
    assert!(files.len() >= 15, "only {} ill-typed files", files.len());
    for f in files {
        let src = std::fs::read_to_string(&f).unwrap();
        let expected = error_annotations(&src);
        assert!(!expected.is_empty(), "{} has no annotation", f.display());
        let diags = match session::front_end(&src) {
            Ok(_) => panic!("{} was accepted", f.display()),
            Err(d) => d,
        };
        for (line, text) in expected {
            assert!(
                diags.iter().any(|d| d.span.lo.line == line && d.message.contains(&text)),
                "{}:{}: expected `{}`, got\n{}",
                f.display(),
                line,
                text,
                diags.render(&f.display().to_string())
            );
        }
    }
}

#[test]
fn well_typed_files_check() {
    let root = default_dir();
    let files: Vec<_> = soc_files(&root)
        .into_iter()
        .filter(|f| !f.starts_with(root.join("ill-typed")))
        .collect();
    assert!(files.len() >= 7);
    for f in files {
        session::load_file(&f).unwrap_or_else(|e| panic!("{}", e));
    }
}

#[test]
fn pretty_printing_is_a_fixpoint_on_corpus() {
    for f in soc_files(&default_dir()) {
        let src = std::fs::read_to_string(&f).unwrap();
        let Ok(ast) = soc_core::parser::parse(&src) else { continue };
        let once = soc_core::pretty::print_program(&ast);
        let reparsed = soc_core::parser::parse(&once).unwrap_or_else(|d| panic!("{}: {}\n{}", f.display(), d, once));
        assert_eq!(soc_core::pretty::print_program(&reparsed), once, "{}", f.display());
    }
}
