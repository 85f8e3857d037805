//! The macro environment: named declaration bodies with most-recent-wins
//! lookup, plus the conjunction and renaming algebra over declarations.

use thiserror::Error;

use crate::ast::{CallPattern, Declaration, MacroDef, Name, Statement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("macro /{0} is not defined")]
    NotDefined(Name),
}

/// List of macro definitions, most recent first.
///
/// Definitions are stored oldest-first internally so that scoped additions
/// and removals happen at the end of the vector.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MacroEnv {
    defs: Vec<MacroDef>,
    frame_marks: Vec<usize>,
    seeds: usize,
}

impl MacroEnv {
    pub fn new() -> MacroEnv {
        MacroEnv::default()
    }

    /// Environment holding top-level definitions that are never popped.
    pub fn seeded(defs: impl IntoIterator<Item = MacroDef>) -> MacroEnv {
        let mut env = MacroEnv::new();
        for d in defs {
            env.seed(d);
        }
        env
    }

    /// Adds a permanent definition. Only valid while no scope is open.
    pub fn seed(&mut self, def: MacroDef) {
        assert!(
            self.frame_marks.is_empty(),
            "seeding inside an open macro scope"
        );
        self.defs.push(def);
        self.seeds += 1;
    }

    /// Returns a new environment with `defs` in front of this one.
    pub fn define(&self, defs: Vec<MacroDef>) -> MacroEnv {
        let mut env = self.clone();
        env.push_frame(defs);
        env
    }

    /// Opens a scope holding `defs`. Within the scope the first of `defs`
    /// is the frontmost entry.
    pub fn push_frame(&mut self, defs: Vec<MacroDef>) {
        self.frame_marks.push(defs.len());
        self.defs.extend(defs.into_iter().rev());
    }

    /// Closes the innermost scope, removing exactly its definitions.
    pub fn pop_frame(&mut self) {
        let n = self
            .frame_marks
            .pop()
            .expect("pop_frame without an open scope");
        self.defs.truncate(self.defs.len() - n);
    }

    pub fn lookup(&self, name: &str) -> Result<&Declaration, MacroError> {
        self.defs
            .iter()
            .rev()
            .find(|d| d.name == name)
            .map(|d| &d.body)
            .ok_or_else(|| MacroError::NotDefined(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_ok()
    }

    /// Definitions, most recent first.
    pub fn defs(&self) -> impl Iterator<Item = &MacroDef> {
        self.defs.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn frame_count(&self) -> usize {
        self.frame_marks.len()
    }

    pub fn seed_count(&self) -> usize {
        self.seeds
    }

    pub fn frame_marks(&self) -> &[usize] {
        &self.frame_marks
    }
}

/// Replaces every macro reference in the structure of `decl` by its most
/// recent definition, recursively. A reference to a macro that is already
/// being expanded is left in place, which cuts cycles. Clause bodies are
/// not entered.
pub fn conj_expand(env: &MacroEnv, decl: &Declaration) -> Result<Declaration, MacroError> {
    expand_decl(env, decl, &mut Vec::new())
}

fn expand_decl(
    env: &MacroEnv,
    decl: &Declaration,
    path: &mut Vec<Name>,
) -> Result<Declaration, MacroError> {
    Ok(match decl {
        Declaration::Clause(..) => decl.clone(),
        Declaration::And(a, b) => {
            Declaration::and(expand_decl(env, a, path)?, expand_decl(env, b, path)?)
        }
        Declaration::Forall(x, d) => {
            Declaration::Forall(x.clone(), Box::new(expand_decl(env, d, path)?))
        }
        Declaration::Rename(a, b, d) => {
            Declaration::Rename(a.clone(), b.clone(), Box::new(expand_decl(env, d, path)?))
        }
        Declaration::MacroRef(n) => {
            if path.contains(n) {
                return Ok(decl.clone());
            }
            let body = env.lookup(n)?;
            path.push(n.clone());
            let out = expand_decl(env, body, path);
            path.pop();
            out?
        }
    })
}

/// Rewrites a statement so that it no longer consults the macro
/// environment: declarations are expanded with [`conj_expand`], module
/// implications become plain implications of the expanded body, and macro
/// scopes become the nested implications they would push. Clause bodies
/// are rewritten too. A module implication whose name is already being
/// expanded is kept as is.
pub fn expand_statement(env: &MacroEnv, stmt: &Statement) -> Result<Statement, MacroError> {
    expand_stmt(env, stmt, &mut Vec::new())
}

fn expand_stmt(
    env: &MacroEnv,
    stmt: &Statement,
    path: &mut Vec<Name>,
) -> Result<Statement, MacroError> {
    Ok(match stmt {
        Statement::True
        | Statement::Call(..)
        | Statement::Assign(..)
        | Statement::IndexAssign(..)
        | Statement::Print(_) => stmt.clone(),
        Statement::Seq(a, b) => {
            Statement::seq(expand_stmt(env, a, path)?, expand_stmt(env, b, path)?)
        }
        Statement::Implication(d, g) => {
            Statement::implication(expand_deep(env, d, path)?, expand_stmt(env, g, path)?)
        }
        Statement::ModuleImplication(n, g) => {
            if path.contains(n) {
                Statement::ModuleImplication(n.clone(), Box::new(expand_stmt(env, g, path)?))
            } else {
                let d = expand_deep(env, &Declaration::MacroRef(n.clone()), path)?;
                Statement::implication(d, expand_stmt(env, g, path)?)
            }
        }
        Statement::MacroScope(defs, g) => {
            let inner = env.define(defs.clone());
            let mut body = expand_stmt(&inner, g, path)?;
            for def in defs {
                let d = expand_deep(&inner, &Declaration::MacroRef(def.name.clone()), path)?;
                body = Statement::implication(d, body);
            }
            body
        }
        Statement::AllocScope {
            handle,
            elem,
            len,
            body,
        } => Statement::AllocScope {
            handle: handle.clone(),
            elem: *elem,
            len: len.clone(),
            body: Box::new(expand_stmt(env, body, path)?),
        },
        Statement::If(c, t, e) => Statement::if_else(
            c.clone(),
            expand_stmt(env, t, path)?,
            expand_stmt(env, e, path)?,
        ),
        Statement::Switch(c, cases, default) => Statement::Switch(
            c.clone(),
            cases
                .iter()
                .map(|(l, s)| Ok((l.clone(), expand_stmt(env, s, path)?)))
                .collect::<Result<_, MacroError>>()?,
            Box::new(expand_stmt(env, default, path)?),
        ),
    })
}

fn expand_deep(
    env: &MacroEnv,
    decl: &Declaration,
    path: &mut Vec<Name>,
) -> Result<Declaration, MacroError> {
    Ok(match decl {
        Declaration::Clause(head, body) => {
            Declaration::Clause(head.clone(), Box::new(expand_stmt(env, body, path)?))
        }
        Declaration::And(a, b) => {
            Declaration::and(expand_deep(env, a, path)?, expand_deep(env, b, path)?)
        }
        Declaration::Forall(x, d) => {
            Declaration::Forall(x.clone(), Box::new(expand_deep(env, d, path)?))
        }
        Declaration::Rename(a, b, d) => {
            Declaration::Rename(a.clone(), b.clone(), Box::new(expand_deep(env, d, path)?))
        }
        Declaration::MacroRef(n) => {
            if path.contains(n) {
                return Ok(decl.clone());
            }
            let body = env.lookup(n)?;
            path.push(n.clone());
            let out = expand_deep(env, body, path);
            path.pop();
            out?
        }
    })
}

/// Replaces procedure name `old` by `new` in clause heads and call sites,
/// including nested declarations. Variables and macro names are untouched.
pub fn rename(decl: &Declaration, old: &str, new: &str) -> Declaration {
    if old == new {
        return decl.clone();
    }
    rename_decl(decl, old, new)
}

fn swap(name: &Name, old: &str, new: &str) -> Name {
    if name == old {
        new.to_string()
    } else {
        name.clone()
    }
}

fn rename_decl(decl: &Declaration, old: &str, new: &str) -> Declaration {
    match decl {
        Declaration::Clause(head, body) => Declaration::Clause(
            CallPattern {
                name: swap(&head.name, old, new),
                params: head.params.clone(),
            },
            Box::new(rename_stmt(body, old, new)),
        ),
        Declaration::And(a, b) => {
            Declaration::and(rename_decl(a, old, new), rename_decl(b, old, new))
        }
        Declaration::Forall(x, d) => {
            Declaration::Forall(x.clone(), Box::new(rename_decl(d, old, new)))
        }
        Declaration::MacroRef(_) => decl.clone(),
        Declaration::Rename(a, b, d) => Declaration::Rename(
            swap(a, old, new),
            swap(b, old, new),
            Box::new(rename_decl(d, old, new)),
        ),
    }
}

pub fn rename_stmt(stmt: &Statement, old: &str, new: &str) -> Statement {
    match stmt {
        Statement::Call(name, args) => Statement::Call(swap(name, old, new), args.clone()),
        Statement::True
        | Statement::Assign(..)
        | Statement::IndexAssign(..)
        | Statement::Print(_) => stmt.clone(),
        Statement::Seq(a, b) => Statement::seq(rename_stmt(a, old, new), rename_stmt(b, old, new)),
        Statement::Implication(d, g) => {
            Statement::implication(rename_decl(d, old, new), rename_stmt(g, old, new))
        }
        Statement::ModuleImplication(n, g) => {
            Statement::ModuleImplication(n.clone(), Box::new(rename_stmt(g, old, new)))
        }
        Statement::MacroScope(defs, g) => Statement::MacroScope(
            defs.iter()
                .map(|m| MacroDef {
                    name: m.name.clone(),
                    body: rename_decl(&m.body, old, new),
                })
                .collect(),
            Box::new(rename_stmt(g, old, new)),
        ),
        Statement::AllocScope {
            handle,
            elem,
            len,
            body,
        } => Statement::AllocScope {
            handle: handle.clone(),
            elem: *elem,
            len: len.clone(),
            body: Box::new(rename_stmt(body, old, new)),
        },
        Statement::If(c, t, e) => Statement::if_else(
            c.clone(),
            rename_stmt(t, old, new),
            rename_stmt(e, old, new),
        ),
        Statement::Switch(c, cases, default) => Statement::Switch(
            c.clone(),
            cases
                .iter()
                .map(|(l, s)| (l.clone(), rename_stmt(s, old, new)))
                .collect(),
            Box::new(rename_stmt(default, old, new)),
        ),
    }
}
