//! Derivation events emitted while executing.

use std::fmt;
use std::io::Write;

use crate::ast::{Declaration, Statement};
use crate::machine::CallSite;
use crate::syntax::printer;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Ex,
    Bc,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Ex => "ex",
            Phase::Bc => "bc",
        }
    }
}

/// Inference rules, numbered as in the extended definition with macros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Clause = 1,
    Instantiate = 2,
    AndLeft = 3,
    AndRight = 4,
    Rename = 5,
    MacroRef = 6,
    Call = 7,
    True = 8,
    Assign = 9,
    Seq = 10,
    Implication = 11,
    MacroScope = 12,
}

impl Rule {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn phase(self) -> Phase {
        if self.id() <= 6 {
            Phase::Bc
        } else {
            Phase::Ex
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Subject<'a> {
    Stmt(&'a Statement),
    Decl(&'a Declaration),
    Call(&'a CallSite),
}

impl fmt::Display for Subject<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Stmt(s) => f.write_str(&printer::statement_inline(s)),
            Subject::Decl(d) => f.write_str(&printer::declaration_inline(d)),
            Subject::Call(c) => write!(f, "{c}"),
        }
    }
}

/// One node of the derivation. The subject is rendered on demand.
#[derive(Clone, Copy, Debug)]
pub struct TraceEvent<'a> {
    pub rule: Rule,
    pub depth: usize,
    pub subject: Subject<'a>,
}

impl TraceEvent<'_> {
    pub fn phase(&self) -> Phase {
        self.rule.phase()
    }
}

/// `<2*depth spaces><phase>:<rule-id> <subject>`
impl fmt::Display for TraceEvent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:indent$}{}:{} {}",
            "",
            self.phase().as_str(),
            self.rule.id(),
            self.subject,
            indent = self.depth * 2
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeKind {
    Implication,
    ModuleImplication,
    MacroScope,
    Alloc,
}

/// Stack sizes around a scoped statement, reported after the scope closes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScopeExit {
    pub kind: ScopeKind,
    pub modules_before: usize,
    pub modules_after: usize,
    pub macros_before: usize,
    pub macros_after: usize,
    pub regions_before: usize,
    pub regions_after: usize,
    pub succeeded: bool,
}

impl ScopeExit {
    pub fn balanced(&self) -> bool {
        self.modules_before == self.modules_after
            && self.macros_before == self.macros_after
            && self.regions_before == self.regions_after
    }
}

/// Receives events synchronously on the interpreting thread.
pub trait Observer {
    fn event(&mut self, _ev: &TraceEvent<'_>) {}
    fn scope_exit(&mut self, _scope: &ScopeExit) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// Writes each event as one trace line.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> TraceWriter<W> {
        TraceWriter { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Observer for TraceWriter<W> {
    fn event(&mut self, ev: &TraceEvent<'_>) {
        // trace output is best effort
        let _ = writeln!(self.out, "{ev}");
    }
}

/// Collects events as owned lines; handy in tests.
#[derive(Default, Debug)]
pub struct TraceLog {
    pub events: Vec<(Rule, usize, String)>,
    pub scopes: Vec<ScopeExit>,
}

impl TraceLog {
    pub fn count(&self, rule: Rule) -> usize {
        self.events.iter().filter(|(r, _, _)| *r == rule).count()
    }

    pub fn lines(&self) -> Vec<String> {
        self.events
            .iter()
            .map(|(r, d, s)| {
                format!(
                    "{:indent$}{}:{} {}",
                    "",
                    r.phase().as_str(),
                    r.id(),
                    s,
                    indent = d * 2
                )
            })
            .collect()
    }
}

impl Observer for TraceLog {
    fn event(&mut self, ev: &TraceEvent<'_>) {
        self.events
            .push((ev.rule, ev.depth, ev.subject.to_string()));
    }

    fn scope_exit(&mut self, scope: &ScopeExit) {
        self.scopes.push(*scope);
    }
}

/// Counts rule firings without rendering subjects.
#[derive(Default, Debug)]
pub struct RuleCounter {
    pub counts: [usize; 13],
    pub scopes: Vec<ScopeExit>,
}

impl RuleCounter {
    pub fn count(&self, rule: Rule) -> usize {
        self.counts[rule.id() as usize]
    }
}

impl Observer for RuleCounter {
    fn event(&mut self, ev: &TraceEvent<'_>) {
        self.counts[ev.rule.id() as usize] += 1;
    }

    fn scope_exit(&mut self, scope: &ScopeExit) {
        self.scopes.push(*scope);
    }
}
