//! Running many independent programs at once.
//!
//! Each program gets its own machine, so programs share nothing and results
//! come back in input order regardless of scheduling. With the `parallel`
//! feature the work is spread over the rayon pool; without it, or through
//! [`run_batch_sequential`], programs run one after another.

use crate::program::{run_program, RunReport};
use crate::syntax::parser::SourceProgram;

pub fn run_batch_sequential(progs: &[SourceProgram], max_depth: usize) -> Vec<RunReport> {
    progs.iter().map(|p| run_program(p, max_depth)).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch(progs: &[SourceProgram], max_depth: usize) -> Vec<RunReport> {
    use rayon::prelude::*;
    progs
        .par_iter()
        .map(|p| run_program(p, max_depth))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_batch(progs: &[SourceProgram], max_depth: usize) -> Vec<RunReport> {
    run_batch_sequential(progs, max_depth)
}

/// Summary of a batch run: output and exit status per program.
pub fn outcomes(reports: &[RunReport]) -> Vec<(String, i32)> {
    reports
        .iter()
        .map(|r| (r.output().to_string(), r.exit_code()))
        .collect()
}
