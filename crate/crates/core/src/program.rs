//! Whole programs: loading a parsed file into a machine, running its main
//! statement, and the persistent session behind the REPL.

use crate::ast::{Declaration, MacroDef, Name, Statement};
use crate::machine::{Failure, FailureKind, Machine, DEFAULT_MAX_DEPTH};
use crate::macro_env::MacroEnv;
use crate::syntax::parser::{parse_items_source, parse_source, Item, SourceProgram, SyntaxError};
use crate::trace::{NoObserver, Observer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_CLAUSE: i32 = 1;
pub const EXIT_SYNTAX: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

/// Exit status for an interpreter failure.
pub fn failure_exit_code(f: &Failure) -> i32 {
    match f.kind {
        FailureKind::NoMatchingClause => EXIT_NO_CLAUSE,
        _ => EXIT_FAULT,
    }
}

/// The macro environment a program starts with: its modules, then its
/// top-level macros, as permanent definitions.
pub fn initial_macros(prog: &SourceProgram) -> MacroEnv {
    let modules = prog
        .modules
        .iter()
        .map(|(name, body)| MacroDef::new(name, body.clone()));
    MacroEnv::seeded(modules.chain(prog.macros.iter().cloned()))
}

/// A machine with an empty program and store, ready to run `prog`.
pub fn load(prog: &SourceProgram, max_depth: usize) -> Machine {
    Machine::with_macros(initial_macros(prog)).max_depth(max_depth)
}

#[derive(Debug)]
pub struct RunReport {
    pub machine: Machine,
    pub result: Result<(), Failure>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(()) => EXIT_OK,
            Err(f) => failure_exit_code(f),
        }
    }

    pub fn output(&self) -> &str {
        &self.machine.output
    }
}

pub fn run_program(prog: &SourceProgram, max_depth: usize) -> RunReport {
    run_program_with(prog, max_depth, &mut NoObserver)
}

pub fn run_program_with(
    prog: &SourceProgram,
    max_depth: usize,
    obs: &mut dyn Observer,
) -> RunReport {
    let mut machine = load(prog, max_depth);
    let result = machine.execute_with(&prog.main, obs);
    RunReport { machine, result }
}

/// Parses and runs `source`; syntax errors are returned as such.
pub fn run_source(source: &str) -> Result<RunReport, SyntaxError> {
    let prog = parse_source(source)?;
    Ok(run_program(&prog, DEFAULT_MAX_DEPTH))
}

/// What a session did with one submission.
#[derive(Debug, PartialEq, Eq)]
pub enum Submitted {
    Module(Name),
    Macro(Name),
    Executed,
}

/// A machine that persists across submissions. Modules and macros become
/// permanent definitions; statements run against the accumulated store.
#[derive(Debug)]
pub struct Session {
    pub machine: Machine,
    max_depth: usize,
    modules: Vec<Name>,
}

impl Default for Session {
    fn default() -> Session {
        Session::new(DEFAULT_MAX_DEPTH)
    }
}

impl Session {
    pub fn new(max_depth: usize) -> Session {
        Session {
            machine: Machine::new().max_depth(max_depth),
            max_depth,
            modules: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        *self = Session::new(self.max_depth);
    }

    /// Module names defined so far, oldest first.
    pub fn modules(&self) -> &[Name] {
        &self.modules
    }

    pub fn define_module(&mut self, name: &str, body: Declaration) {
        self.machine.macros.seed(MacroDef::new(name, body));
        if !self.modules.iter().any(|m| m == name) {
            self.modules.push(name.to_string());
        }
    }

    pub fn define_macro(&mut self, def: MacroDef) {
        self.machine.macros.seed(def);
    }

    pub fn execute(&mut self, stmt: &Statement, obs: &mut dyn Observer) -> Result<(), Failure> {
        let r = self.machine.execute_with(stmt, obs);
        // a failure may leave the call depth mid-way
        self.machine.depth = 0;
        r
    }

    /// Handles one parsed item; all results are returned in order, stopping
    /// at the first failure.
    pub fn submit(
        &mut self,
        item: Item,
        obs: &mut dyn Observer,
    ) -> Result<Vec<Submitted>, Failure> {
        match item {
            Item::Module(name, body) => {
                self.define_module(&name, body);
                Ok(vec![Submitted::Module(name)])
            }
            Item::Macros(defs) => Ok(defs
                .into_iter()
                .map(|d| {
                    let name = d.name.clone();
                    self.define_macro(d);
                    Submitted::Macro(name)
                })
                .collect()),
            Item::Statement(s) => {
                self.execute(&s, obs)?;
                Ok(vec![Submitted::Executed])
            }
        }
    }

    /// Parses `source` as any number of items and submits them in order.
    pub fn submit_source(
        &mut self,
        source: &str,
    ) -> Result<Result<Vec<Submitted>, Failure>, SyntaxError> {
        let items = parse_items_source(source)?;
        let mut done = Vec::new();
        for item in items {
            match self.submit(item, &mut NoObserver) {
                Ok(s) => done.extend(s),
                Err(f) => return Ok(Err(f)),
            }
        }
        Ok(Ok(done))
    }
}
