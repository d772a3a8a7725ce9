//! Runs an external SMT-LIB solver on a file and classifies its answer.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::model::{parse_model, ModelError};
use crate::choice::Registry;
use crate::value::Value;

pub const DEFAULT_SOLVER: &str = "z3 -smt2 {file}";
pub const SOLVER_ENV: &str = "SOC_SOLVER";

#[derive(Clone, Debug)]
pub struct SolverJob {
    /// Whitespace-separated command; `{file}` is replaced by the query path
    /// (appended when absent).
    pub command: String,
    pub timeout: Duration,
    pub smtlib: String,
    pub raw_output: String,
}

impl SolverJob {
    pub fn new(command: &str, timeout: Duration, smtlib: String) -> SolverJob {
        SolverJob {
            command: command.to_string(),
            timeout,
            smtlib,
            raw_output: String::new(),
        }
    }
}

/// Solver command from `SOC_SOLVER`, or the default.
pub fn default_command() -> String {
    std::env::var(SOLVER_ENV)
        .ok()
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| DEFAULT_SOLVER.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverVerdict {
    Unsat,
    Sat(HashMap<u32, Value>),
    Unknown(String),
    SolverError { code: Option<i32>, stderr: String },
}

#[derive(Debug, thiserror::Error)]
pub enum SolverFailure {
    #[error("cannot start solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("cannot write query file: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver model: {0}")]
    Model(#[from] ModelError),
}

fn argv(command: &str, file: &Path) -> Vec<String> {
    let file = file.to_string_lossy();
    let mut out: Vec<String> = command.split_whitespace().map(|w| w.replace("{file}", &file)).collect();
    if !command.contains("{file}") {
        out.push(file.into_owned());
    }
    out
}

/// Writes the query to a temporary file, runs the solver and parses its reply.
pub fn run_solver(job: &mut SolverJob, registry: &Registry) -> Result<SolverVerdict, SolverFailure> {
    let dir = std::env::temp_dir();
    let path = dir.join(format!(
        "socv-{}-{}.smt2",
        std::process::id(),
        QUERY_COUNTER.fetch_add(1, std::sync::atomic::Ordering::Relaxed)
    ));
    std::fs::write(&path, &job.smtlib)?;
    let result = run_on_file(job, &path, registry);
    let _ = std::fs::remove_file(&path);
    result
}

static QUERY_COUNTER: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

fn run_on_file(job: &mut SolverJob, path: &Path, registry: &Registry) -> Result<SolverVerdict, SolverFailure> {
    let args = argv(&job.command, path);
    let Some((prog, rest)) = args.split_first() else {
        return Err(SolverFailure::Spawn {
            command: job.command.clone(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
        });
    };
    let mut child = Command::new(prog)
        .args(rest)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverFailure::Spawn {
            command: job.command.clone(),
            source,
        })?;
    // Drain pipes on threads so a chatty solver cannot block on a full pipe.
    let mut so = child.stdout.take().expect("piped");
    let mut se = child.stderr.take().expect("piped");
    let out_thread = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = so.read_to_string(&mut s);
        s
    });
    let err_thread = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = se.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break Some(st);
        }
        if start.elapsed() >= job.timeout {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();
    job.raw_output = stdout.clone();
    let Some(status) = status else {
        return Ok(SolverVerdict::Unknown("timeout".to_string()));
    };
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(SolverVerdict::Unsat),
        Some("sat") => {
            let rest = stdout.trim_start().strip_prefix("sat").unwrap_or("");
            Ok(SolverVerdict::Sat(parse_model(rest, registry)?))
        }
        Some("unknown") => Ok(SolverVerdict::Unknown("solver answered unknown".to_string())),
        Some("timeout") => Ok(SolverVerdict::Unknown("timeout".to_string())),
        _ => Ok(SolverVerdict::SolverError {
            code: status.code(),
            stderr: if stderr.trim().is_empty() { stdout } else { stderr },
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_substitution() {
        let p = Path::new("/tmp/q.smt2");
        assert_eq!(argv("z3 -smt2 {file}", p), ["z3", "-smt2", "/tmp/q.smt2"]);
        assert_eq!(argv("cvc5 --lang smt2", p), ["cvc5", "--lang", "smt2", "/tmp/q.smt2"]);
    }

    #[test]
    fn missing_solver_is_a_spawn_error() {
        let mut job = SolverJob::new("/nonexistent/solver {file}", Duration::from_secs(1), "(check-sat)".into());
        assert!(matches!(run_solver(&mut job, &Registry::default()), Err(SolverFailure::Spawn { .. })));
    }

    #[test]
    fn timeout_is_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slow.sh");
        std::fs::write(&path, "exec sleep 5\n").unwrap();
        let mut job = SolverJob::new(&format!("sh {}", path.display()), Duration::from_millis(100), String::new());
        let v = run_solver(&mut job, &Registry::default()).unwrap();
        assert_eq!(v, SolverVerdict::Unknown("timeout".to_string()));
    }

    #[test]
    fn non_verdict_output_is_a_solver_error() {
        let mut job = SolverJob::new("false", Duration::from_secs(5), String::new());
        let v = run_solver(&mut job, &Registry::default()).unwrap();
        assert!(matches!(v, SolverVerdict::SolverError { code: Some(1), .. }));
    }
}
