use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::Serialize;

use soc_core::eval::{RunResult, TraceEvent};
use soc_core::session::{self, Loaded, Outcome, ToolError, VerifyOptions, INDUCTION_CAVEAT, INDUCTION_SCENARIOS};
use soc_core::smt::default_command;
use soc_core::value::DEFAULT_CAPACITY;

#[derive(Parser)]
#[command(name = "socv", version, about = "Check, run and verify SoC security models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, type-check and elaborate a model.
    Check { file: PathBuf },
    /// Run a scenario with random choices.
    Run {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
        /// Print the result as JSON, including call events.
        #[arg(long)]
        trace_json: bool,
    },
    /// Search for a counterexample with an SMT solver.
    Verify {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Solver command; `{file}` is replaced by the query path.
        #[arg(long)]
        solver: Option<String>,
        #[arg(long, default_value_t = 300)]
        timeout: u64,
        #[arg(long, alias = "dump-vc")]
        dump_smt: Option<PathBuf>,
        #[arg(long)]
        dump_model: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
    },
    /// Replay a model saved by `verify`.
    Trace {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
        #[arg(long)]
        trace_json: bool,
    },
    /// Print the elaborated instance tree.
    DumpTree { file: PathBuf },
}

#[derive(Serialize)]
struct JsonRun<'a> {
    verdict: &'static str,
    location: Option<String>,
    transcript: &'a str,
    events: &'a [TraceEvent],
}

fn report_run(l: &Loaded, r: &RunResult, json: bool) -> i32 {
    let line = session::verdict_line(l, &r.verdict);
    if json {
        let verdict = match r.verdict.exit_code() {
            0 => "passed",
            2 => "assertion_failed",
            _ => "assume_infeasible",
        };
        let out = JsonRun {
            verdict,
            location: line.map(|s| s.rsplit(" at ").next().unwrap_or_default().to_string()),
            transcript: &r.transcript,
            events: &r.events,
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    } else {
        print!("{}", r.transcript);
        match line {
            Some(l) => println!("{}", l),
            None => println!("PASSED"),
        }
    }
    r.verdict.exit_code()
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), ToolError> {
    std::fs::write(path, text).map_err(|source| ToolError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<i32, ToolError> {
    match cli.command {
        Command::Check { file } => {
            session::load_file(&file)?;
            println!("{}: ok", file.display());
            Ok(0)
        }
        Command::DumpTree { file } => {
            let l = session::load_file(&file)?;
            print!("{}", l.tree.dump(&l.tp));
            Ok(0)
        }
        Command::Run {
            file,
            scenario,
            seed,
            capacity,
            trace_json,
        } => {
            let l = session::load_file(&file)?;
            let r = session::run(&l, &scenario, seed, capacity)?;
            Ok(report_run(&l, &r, trace_json))
        }
        Command::Trace {
            file,
            scenario,
            model,
            capacity,
            trace_json,
        } => {
            let l = session::load_file(&file)?;
            let text = std::fs::read_to_string(&model).map_err(|source| ToolError::Io {
                path: model.display().to_string(),
                source,
            })?;
            let r = session::trace(&l, &scenario, &text, capacity)?;
            Ok(report_run(&l, &r, trace_json))
        }
        Command::Verify {
            file,
            scenario,
            solver,
            timeout,
            dump_smt,
            dump_model,
            capacity,
        } => {
            let l = session::load_file(&file)?;
            let opts = VerifyOptions {
                solver: solver.unwrap_or_else(default_command),
                timeout: Duration::from_secs(timeout),
                capacity,
            };
            let report = session::verify(&l, &scenario, &opts)?;
            if let Some(p) = &dump_smt {
                write_file(p, &report.smtlib)?;
            }
            match &report.outcome {
                Outcome::Proven => {
                    println!("PROVEN: no choice of values violates an assertion in `{}`", scenario);
                    if INDUCTION_SCENARIOS.contains(&scenario.as_str()) {
                        println!("{}", INDUCTION_CAVEAT);
                    }
                }
                Outcome::Unknown(reason) => println!("UNKNOWN: {}", reason),
                Outcome::Counterexample { model_text, run, .. } => {
                    let path = dump_model.unwrap_or_else(|| session::default_model_path(&scenario));
                    write_file(&path, model_text)?;
                    print!("{}", run.transcript);
                    if let Some(line) = session::verdict_line(&l, &run.verdict) {
                        println!("{}", line);
                    }
                    eprintln!("model written to {}", path.display());
                }
            }
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would read as "counterexample found"
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(1)
        }
    }
}
