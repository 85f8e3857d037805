use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ast::{Declaration, Name, Value};
use crate::macro_env::MacroEnv;
use crate::region::{RegionFault, RegionStack, Store};

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

/// The running program: module stack, macro environment and store, plus the
/// region stack and accumulated output.
#[derive(Clone, Debug)]
pub struct Machine {
    /// Module frames; the last element is the top of the stack.
    pub modules: Vec<Arc<Declaration>>,
    pub macros: MacroEnv,
    pub store: Store,
    pub regions: RegionStack,
    pub output: String,
    /// Number of procedure activations currently open.
    pub depth: usize,
    pub max_depth: usize,
    /// Handle variables that may not be reassigned, innermost last.
    pub(crate) pinned: Vec<Name>,
}

impl Default for Machine {
    fn default() -> Machine {
        Machine::new()
    }
}

impl Machine {
    pub fn new() -> Machine {
        Machine {
            modules: Vec::new(),
            macros: MacroEnv::new(),
            store: Store::new(),
            regions: RegionStack::new(),
            output: String::new(),
            depth: 0,
            max_depth: DEFAULT_MAX_DEPTH,
            pinned: Vec::new(),
        }
    }

    pub fn with_macros(macros: MacroEnv) -> Machine {
        Machine {
            macros,
            ..Machine::new()
        }
    }

    pub fn max_depth(mut self, n: usize) -> Machine {
        self.max_depth = n;
        self
    }

    pub fn take_output(&mut self) -> String {
        std::mem::take(&mut self.output)
    }

    /// Human-readable dump of the whole machine state.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("modules:\n");
        for frame in self.modules.iter().rev() {
            out.push_str("  ");
            out.push_str(&crate::syntax::printer::declaration_inline(frame));
            out.push('\n');
        }
        out.push_str("macros:\n");
        for def in self.macros.defs() {
            out.push_str(&format!(
                "  /{} = {{ {} }}\n",
                def.name,
                crate::syntax::printer::declaration_inline(&def.body)
            ));
        }
        out.push_str("store:\n");
        for (k, v) in self.store.iter() {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        out.push_str("regions:\n");
        for line in self.regions.table().lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// An evaluated procedure call.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CallSite {
    pub name: Name,
    pub actuals: Vec<Value>,
}

impl CallSite {
    pub fn new(name: &str, actuals: Vec<Value>) -> CallSite {
        CallSite {
            name: name.to_string(),
            actuals,
        }
    }

    pub fn arity(&self) -> usize {
        self.actuals.len()
    }

    /// `name/arity`
    pub fn signature(&self) -> String {
        format!("{}/{}", self.name, self.actuals.len())
    }
}

impl fmt::Display for CallSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, v) in self.actuals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                Value::Str(s) => write!(f, "{s:?}")?,
                other => write!(f, "{other}")?,
            }
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    NoMatchingClause,
    UnboundVariable,
    DepthExceeded,
    RegionFault(RegionFault),
    TypeMismatch,
    DivisionByZero,
    Overflow,
}

impl FailureKind {
    pub fn label(&self) -> &'static str {
        match self {
            FailureKind::NoMatchingClause => "no matching clause",
            FailureKind::UnboundVariable => "unbound variable",
            FailureKind::DepthExceeded => "depth exceeded",
            FailureKind::RegionFault(_) => "region fault",
            FailureKind::TypeMismatch => "type mismatch",
            FailureKind::DivisionByZero => "division by zero",
            FailureKind::Overflow => "arithmetic overflow",
        }
    }
}

/// Why execution had no derivation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct Failure {
    pub kind: FailureKind,
    pub detail: String,
    /// Open calls when the failure happened, outermost first.
    pub chain: Vec<CallSite>,
}

impl Failure {
    pub fn new(kind: FailureKind, detail: impl Into<String>) -> Failure {
        Failure {
            kind,
            detail: detail.into(),
            chain: Vec::new(),
        }
    }

    /// Innermost calls first, elided past a handful of entries.
    pub fn chain_summary(&self) -> String {
        const SHOWN: usize = 6;
        let mut parts: Vec<String> = self
            .chain
            .iter()
            .rev()
            .take(SHOWN)
            .map(|c| c.to_string())
            .collect();
        if self.chain.len() > SHOWN {
            parts.push(format!("... {} more", self.chain.len() - SHOWN));
        }
        parts.join(" <- ")
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.detail)?;
        if !self.chain.is_empty() {
            write!(f, " [in {}]", self.chain_summary())?;
        }
        Ok(())
    }
}

pub enum ExecOutcome {
    Success(Machine),
    Failure(Failure),
}

impl ExecOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecOutcome::Success(_))
    }

    pub fn into_result(self) -> Result<Machine, Failure> {
        match self {
            ExecOutcome::Success(m) => Ok(m),
            ExecOutcome::Failure(f) => Err(f),
        }
    }
}
