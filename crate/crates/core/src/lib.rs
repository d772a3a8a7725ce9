//! Toolchain for a small language describing on-chip security components.

pub mod ast;
pub mod choice;
pub mod corpus;
pub mod diag;
pub mod elaborate;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod session;
pub mod smt;
pub mod symexec;
pub mod term;
pub mod tir;
pub mod typecheck;
pub mod types;
pub mod value;
