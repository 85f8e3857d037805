//! Interpreter for C with statement-local modules, macros and scoped regions.

pub mod ast;
pub mod batch;
pub mod engine;
pub mod machine;
pub mod macro_env;
pub mod program;
pub mod region;
pub mod syntax;
pub mod trace;
