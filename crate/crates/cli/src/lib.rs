//! Command implementations for the `cmod` binary, written against generic
//! readers and writers so they can be driven from tests.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use cmod_core::machine::DEFAULT_MAX_DEPTH;
use cmod_core::program::{self, Session, Submitted, EXIT_OK, EXIT_SYNTAX};
use cmod_core::syntax::parser::{parse_items_source, parse_source, SyntaxError};
use cmod_core::syntax::printer::{declaration, pretty_print};
use cmod_core::trace::{NoObserver, TraceWriter};

/// Exit status when the source file cannot be read.
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "cmod",
    version,
    about = "Interpreter for C with implication statements, macros and scoped regions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a program's main statement.
    Run(RunConfig),
    /// Interactive session with a persistent machine.
    Repl {
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH as u64, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: u64,
    },
    /// Print a program in canonical form.
    Fmt { file: PathBuf },
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    pub file: PathBuf,
    /// Write the derivation to stderr, one rule per line.
    #[arg(long)]
    pub trace: bool,
    /// Maximum number of nested procedure activations.
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_depth: u64,
    /// Write the final machine state to stderr.
    #[arg(long)]
    pub dump_state: bool,
}

pub fn main_with(cli: Cli) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    match cli.command {
        Command::Run(cfg) => run(&cfg, &mut stdout.lock(), &mut stderr.lock()),
        Command::Fmt { file } => fmt(&file, &mut stdout.lock(), &mut stderr.lock()),
        Command::Repl { max_depth } => {
            let stdin = io::stdin();
            repl(stdin.lock(), &mut stdout.lock(), max_depth as usize, true)
        }
    }
}

fn read_source(path: &Path, err: &mut dyn Write) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            None
        }
    }
}

fn syntax_diagnostic(path: &Path, e: &SyntaxError) -> String {
    let (line, col) = e.position();
    format!(
        "{}:{line}:{col}: syntax error: {}",
        path.display(),
        syntax_message(e)
    )
}

/// Runs a program file. Program output goes to `out`, diagnostics, trace
/// and state dumps to `err`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(source) = read_source(&cfg.file, err) else {
        return EXIT_IO;
    };
    let prog = match parse_source(&source) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "{}", syntax_diagnostic(&cfg.file, &e));
            return EXIT_SYNTAX;
        }
    };
    let max_depth = cfg.max_depth as usize;
    let report = if cfg.trace {
        let mut tw = TraceWriter::new(&mut *err);
        program::run_program_with(&prog, max_depth, &mut tw)
    } else {
        program::run_program(&prog, max_depth)
    };
    let _ = out.write_all(report.output().as_bytes());
    let _ = out.flush();
    if cfg.dump_state {
        let _ = write!(err, "{}", report.machine.dump());
    }
    if let Err(f) = &report.result {
        let _ = writeln!(err, "error: {f}");
    }
    report.exit_code()
}

pub fn fmt(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(source) = read_source(path, err) else {
        return EXIT_IO;
    };
    match parse_source(&source) {
        Ok(p) => {
            let _ = writeln!(out, "{}", pretty_print(&p));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "{}", syntax_diagnostic(path, &e));
            EXIT_SYNTAX
        }
    }
}

const PROMPT: &str = "cmod> ";
const CONTINUE: &str = "....> ";

const HELP: &str = "\
enter a statement, a `module N. ... end` or a `macro /n = { ... }` definition
  :stack   module stack and defined modules
  :store   variable bindings
  :macros  macro environment, most recent first
  :regions region table
  :reset   start again from an empty machine
  :quit    leave";

/// Reads items from `input` until EOF or `:quit`. Input that ends in the
/// middle of a construct is continued on the next line. Returns the exit
/// status, which is always 0.
pub fn repl(input: impl BufRead, out: &mut dyn Write, max_depth: usize, prompts: bool) -> i32 {
    let mut session = Session::new(max_depth);
    let mut pending = String::new();
    let mut lines = input.lines();
    loop {
        if prompts {
            let _ = write!(
                out,
                "{}",
                if pending.is_empty() { PROMPT } else { CONTINUE }
            );
            let _ = out.flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        let trimmed = line.trim();
        if pending.is_empty() {
            if trimmed.is_empty() {
                continue;
            }
            if let Some(cmd) = trimmed.strip_prefix(':') {
                if !meta(cmd, &mut session, out) {
                    break;
                }
                continue;
            }
        }
        pending.push_str(&line);
        pending.push('\n');
        let items = match parse_items_source(&pending) {
            Ok(items) => items,
            Err(e) if e.is_incomplete() => continue,
            Err(e) => {
                let (l, c) = e.position();
                let _ = writeln!(out, "syntax error at {l}:{c}: {}", syntax_message(&e));
                pending.clear();
                continue;
            }
        };
        pending.clear();
        for item in items {
            match session.submit(item, &mut NoObserver) {
                Ok(done) => {
                    let printed = session.machine.take_output();
                    let _ = out.write_all(printed.as_bytes());
                    for d in done {
                        let _ = match d {
                            Submitted::Module(n) => writeln!(out, "module {n} defined"),
                            Submitted::Macro(n) => writeln!(out, "macro /{n} defined"),
                            Submitted::Executed => writeln!(out, "ok"),
                        };
                    }
                }
                Err(f) => {
                    let printed = session.machine.take_output();
                    let _ = out.write_all(printed.as_bytes());
                    let _ = writeln!(out, "{f}");
                    break;
                }
            }
        }
    }
    let _ = out.flush();
    EXIT_OK
}

fn syntax_message(e: &SyntaxError) -> String {
    match e {
        SyntaxError::Lex(l) => format!("unexpected character {:?}", l.ch),
        SyntaxError::Parse(p) => {
            let text = p.to_string();
            // drop the position prefix, callers print it their own way
            text.split_once(": ")
                .map(|(_, m)| m.to_string())
                .unwrap_or(text)
        }
    }
}

/// Runs a meta command. Returns false when the session should end.
fn meta(cmd: &str, session: &mut Session, out: &mut dyn Write) -> bool {
    let m = &session.machine;
    let _ = match cmd {
        "quit" | "q" => return false,
        "store" => {
            if m.store.is_empty() {
                writeln!(out, "(empty store)")
            } else {
                m.store
                    .iter()
                    .try_for_each(|(k, v)| writeln!(out, "{k} = {v}"))
            }
        }
        "stack" => {
            let mut r = writeln!(out, "frames: {}", m.modules.len());
            for frame in m.modules.iter().rev() {
                r = r.and_then(|_| writeln!(out, "  {}", declaration(frame).replace('\n', " ")));
            }
            if !session.modules().is_empty() {
                r = r.and_then(|_| writeln!(out, "modules: {}", session.modules().join(", ")));
            }
            r
        }
        "macros" => {
            if m.macros.is_empty() {
                writeln!(out, "(no macros)")
            } else {
                m.macros.defs().try_for_each(|d| {
                    writeln!(
                        out,
                        "/{} = {{ {} }}",
                        d.name,
                        declaration(&d.body).replace('\n', " ")
                    )
                })
            }
        }
        "regions" => write!(out, "{}", m.regions.table()),
        "reset" => {
            session.reset();
            writeln!(out, "reset")
        }
        "help" | "h" => writeln!(out, "{HELP}"),
        other => writeln!(out, "unknown command :{other} (try :help)"),
    };
    true
}
