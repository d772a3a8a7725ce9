//! The check / run / verify / trace pipelines shared by the CLI and the FFI.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::choice::{ModelOracle, SeededRandom};
use crate::diag::Diagnostics;
use crate::elaborate::{elaborate, InstanceTree};
use crate::eval::{run_scenario, EvalError, RunResult, Verdict};
use crate::parser::parse;
use crate::smt::solver::SolverFailure;
use crate::smt::{emit_smtlib, parse_model, run_solver, write_model, ModelError, SolverJob, SolverVerdict};
use crate::symexec::{oracle_from_ids, replay, sym_exec, Vc};
use crate::tir::TypedProgram;
use crate::typecheck::check_program;
use crate::value::Value;

/// Scenario names that form an induction proof; proving them says nothing
/// about the final implication, which is left to the reader.
pub const INDUCTION_SCENARIOS: [&str; 3] = ["base_case", "inductive_step", "invariant_is_useful"];

pub const INDUCTION_CAVEAT: &str = "note: an induction proof also needs the implication \
from the base case, inductive step and usefulness scenarios to the property itself; \
that last step is not checked and must be done by hand";

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Rendered front-end diagnostics, one per line.
    #[error("{0}")]
    Rejected(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solver(#[from] SolverFailure),
    #[error("solver failed (exit code {code:?}): {stderr}")]
    SolverCrashed { code: Option<i32>, stderr: String },
    #[error("corrupt model: {0}")]
    Model(#[from] ModelError),
    #[error("internal error: the solver's model does not violate an assertion when replayed")]
    ReplayDisagrees,
}

pub struct Loaded {
    /// Name used in diagnostics.
    pub file: String,
    pub tp: TypedProgram,
    pub tree: InstanceTree,
}

impl Loaded {
    pub fn location(&self, span: crate::ast::Span) -> String {
        format!("{}:{}", self.file, span.lo.line)
    }
}

/// Parses, checks and elaborates `src`, keeping diagnostics structured.
pub fn front_end(src: &str) -> Result<(TypedProgram, InstanceTree), Diagnostics> {
    let ast = parse(src)?;
    let tp = check_program(&ast)?;
    let tree = elaborate(&tp)?;
    Ok((tp, tree))
}

pub fn load_source(file: &str, src: &str) -> Result<Loaded, ToolError> {
    let (tp, tree) = front_end(src).map_err(|d| ToolError::Rejected(d.render(file).trim_end().to_string()))?;
    Ok(Loaded {
        file: file.to_string(),
        tp,
        tree,
    })
}

pub fn load_file(path: &Path) -> Result<Loaded, ToolError> {
    let src = std::fs::read_to_string(path).map_err(|source| ToolError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_source(&path.display().to_string(), &src)
}

pub fn run(l: &Loaded, scenario: &str, seed: u64, capacity: usize) -> Result<RunResult, ToolError> {
    let mut src = SeededRandom::new(seed);
    Ok(run_scenario(&l.tp, &l.tree, scenario, &mut src, capacity)?)
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub solver: String,
    pub timeout: Duration,
    pub capacity: usize,
}

pub enum Outcome {
    Proven,
    Counterexample {
        model: HashMap<u32, Value>,
        /// Canonical model file contents for `trace`.
        model_text: String,
        run: RunResult,
    },
    Unknown(String),
}

pub struct VerifyReport {
    pub smtlib: String,
    pub outcome: Outcome,
    pub choices: usize,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Proven => 0,
            Outcome::Counterexample { .. } => 2,
            Outcome::Unknown(_) => 3,
        }
    }
}

/// Builds the verification condition for `scenario`.
pub fn build_vc(l: &Loaded, scenario: &str) -> Result<Vc, ToolError> {
    Ok(sym_exec(&l.tp, &l.tree, scenario)?)
}

pub fn verify(l: &Loaded, scenario: &str, opts: &VerifyOptions) -> Result<VerifyReport, ToolError> {
    let vc = build_vc(l, scenario)?;
    let smtlib = emit_smtlib(&vc);
    let mut job = SolverJob::new(&opts.solver, opts.timeout, smtlib);
    let outcome = match run_solver(&mut job, &vc.registry)? {
        SolverVerdict::Unsat => Outcome::Proven,
        SolverVerdict::Unknown(r) => Outcome::Unknown(r),
        SolverVerdict::SolverError { code, stderr } => return Err(ToolError::SolverCrashed { code, stderr }),
        SolverVerdict::Sat(model) => {
            let oracle = oracle_from_ids(&vc.registry, &model);
            let run = replay(&l.tp, &l.tree, scenario, &oracle, opts.capacity)?;
            if !matches!(run.verdict, Verdict::AssertionFailed { .. }) {
                return Err(ToolError::ReplayDisagrees);
            }
            let model_text = write_model(&vc.registry, &model);
            Outcome::Counterexample { model, model_text, run }
        }
    };
    Ok(VerifyReport {
        smtlib: job.smtlib,
        outcome,
        choices: vc.registry.len(),
    })
}

/// Replays a saved model. Choice names are recovered by re-running the
/// symbolic executor, which issues them deterministically.
pub fn trace(l: &Loaded, scenario: &str, model_text: &str, capacity: usize) -> Result<RunResult, ToolError> {
    let vc = build_vc(l, scenario)?;
    let model = parse_model(model_text, &vc.registry)?;
    let oracle: ModelOracle = oracle_from_ids(&vc.registry, &model);
    Ok(replay(&l.tp, &l.tree, scenario, &oracle, capacity)?)
}

/// Where `verify` caches a counterexample when no path is given.
pub fn default_model_path(scenario: &str) -> PathBuf {
    PathBuf::from(format!("{}.model.smt2", scenario))
}

/// Human-readable verdict line for a finished run.
pub fn verdict_line(l: &Loaded, v: &Verdict) -> Option<String> {
    match v {
        Verdict::Passed => None,
        Verdict::AssertionFailed { span, .. } => Some(format!("FAILED ASSERTION at {}", l.location(*span))),
        Verdict::AssumeInfeasible { span, .. } => Some(format!("INFEASIBLE ASSUMPTION at {}", l.location(*span))),
    }
}
