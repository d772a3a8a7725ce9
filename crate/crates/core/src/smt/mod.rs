//! SMT-LIB backend: emission, solver process, model parsing.

pub mod emit;
pub mod model;
pub mod sexp;
pub mod solver;

pub use emit::{emit_smtlib, emit_with_pins};
pub use model::{parse_model, write_model, ModelError};
pub use solver::{default_command, run_solver, SolverJob, SolverVerdict};
