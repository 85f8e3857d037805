//! Big-step execution of statements and backchaining over declarations.
//!
//! `execute` reduces a statement against the machine. A procedure call picks
//! the topmost module frame that declares the name and backchains into it:
//! conjunctions are searched left to right, universal closures are
//! instantiated from the call's actuals, renamings and macro references are
//! unfolded on the way down. Scoped statements always restore the module
//! stack, macro environment and region stack on exit, while store and output
//! effects are kept.

use std::sync::Arc;

use crate::ast::{
    desugar, BinOp, CallPattern, Declaration, Expr, MacroDef, Name, Statement, Term, UnOp, Value,
};
use crate::machine::{CallSite, ExecOutcome, Failure, FailureKind, Machine};
use crate::macro_env::rename;
use crate::region::RegionFault;
use crate::trace::{NoObserver, Observer, Rule, ScopeExit, ScopeKind, Subject, TraceEvent};

const RED_ZONE: usize = 256 * 1024;
const STACK_CHUNK: usize = 8 * 1024 * 1024;

/// Runs `stmt` on `machine`, returning the resulting machine on success.
pub fn execute(mut machine: Machine, stmt: &Statement) -> ExecOutcome {
    match machine.execute(stmt) {
        Ok(()) => ExecOutcome::Success(machine),
        Err(f) => ExecOutcome::Failure(f),
    }
}

impl Machine {
    pub fn execute(&mut self, stmt: &Statement) -> Result<(), Failure> {
        self.execute_with(stmt, &mut NoObserver)
    }

    pub fn execute_with(
        &mut self,
        stmt: &Statement,
        obs: &mut dyn Observer,
    ) -> Result<(), Failure> {
        Exec::new(self, obs).exec(stmt, 0)
    }

    /// Selects the topmost frame declaring `call.name` and backchains on it.
    pub fn resolve_call(&mut self, call: &CallSite) -> Result<(), Failure> {
        Exec::new(self, &mut NoObserver).resolve_call(call, 0)
    }

    /// Backchains `call` directly against `decl`.
    pub fn backchain(&mut self, decl: &Declaration, call: &CallSite) -> Result<(), Failure> {
        let mut obs = NoObserver;
        let mut ex = Exec::new(self, &mut obs);
        match ex.backchain(decl, call, 0, &mut Vec::new()) {
            Ok(()) => Ok(()),
            Err(Bc::NoMatch(detail)) => Err(ex.fail(FailureKind::NoMatchingClause, detail)),
            Err(Bc::Failed(f)) => Err(f),
        }
    }

    pub fn eval(&self, expr: &Expr) -> Result<Value, Failure> {
        eval(self, expr)
    }
}

enum Bc {
    NoMatch(String),
    Failed(Failure),
}

impl From<Failure> for Bc {
    fn from(f: Failure) -> Bc {
        Bc::Failed(f)
    }
}

struct Exec<'a> {
    m: &'a mut Machine,
    obs: &'a mut dyn Observer,
    chain: Vec<CallSite>,
}

impl<'a> Exec<'a> {
    fn new(m: &'a mut Machine, obs: &'a mut dyn Observer) -> Exec<'a> {
        Exec {
            m,
            obs,
            chain: Vec::new(),
        }
    }

    fn fail(&self, kind: FailureKind, detail: impl Into<String>) -> Failure {
        Failure {
            kind,
            detail: detail.into(),
            chain: self.chain.clone(),
        }
    }

    fn with_chain(&self, mut f: Failure) -> Failure {
        if f.chain.is_empty() {
            f.chain = self.chain.clone();
        }
        f
    }

    fn emit(&mut self, rule: Rule, depth: usize, subject: Subject<'_>) {
        self.obs.event(&TraceEvent {
            rule,
            depth,
            subject,
        });
    }

    fn eval(&self, e: &Expr) -> Result<Value, Failure> {
        eval(self.m, e).map_err(|f| self.with_chain(f))
    }

    fn exec(&mut self, stmt: &Statement, depth: usize) -> Result<(), Failure> {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.exec_inner(stmt, depth))
    }

    fn exec_inner(&mut self, stmt: &Statement, depth: usize) -> Result<(), Failure> {
        match stmt {
            Statement::True => {
                self.emit(Rule::True, depth, Subject::Stmt(stmt));
                Ok(())
            }
            Statement::Assign(x, e) => {
                self.emit(Rule::Assign, depth, Subject::Stmt(stmt));
                if self.m.pinned.iter().any(|p| p == x) {
                    return Err(self.fail(
                        FailureKind::RegionFault(RegionFault::ReadOnlyHandle),
                        format!("cannot assign to handle `{x}`"),
                    ));
                }
                let v = self.eval(e)?;
                self.m.store.assign(x, v);
                Ok(())
            }
            Statement::IndexAssign(base, idx, e) => {
                let h = self.handle_of(base)?;
                let i = self.int_of(idx)?;
                let v = self.eval(e)?;
                let elem = self
                    .m
                    .regions
                    .elem_type(h)
                    .map_err(|rf| self.fail(FailureKind::RegionFault(rf), rf.to_string()))?;
                if !elem.admits(&v) {
                    return Err(self.fail(
                        FailureKind::TypeMismatch,
                        format!(
                            "cannot store {} in {} region",
                            v.type_name(),
                            elem.keyword()
                        ),
                    ));
                }
                self.m
                    .regions
                    .write(h, i, v)
                    .map_err(|rf| self.fail(FailureKind::RegionFault(rf), rf.to_string()))
            }
            Statement::Seq(a, b) => {
                self.emit(Rule::Seq, depth, Subject::Stmt(stmt));
                self.exec(a, depth + 1)?;
                self.exec(b, depth + 1)
            }
            Statement::Implication(d, g) => {
                self.emit(Rule::Implication, depth, Subject::Stmt(stmt));
                let frame = Arc::new((**d).clone());
                self.scoped(ScopeKind::Implication, vec![frame], None, g, depth + 1)
            }
            Statement::ModuleImplication(n, g) => {
                self.emit(Rule::Implication, depth, Subject::Stmt(stmt));
                if !self.m.macros.contains(n) {
                    return Err(self.fail(
                        FailureKind::NoMatchingClause,
                        format!("module /{n} is not defined"),
                    ));
                }
                let frame = Arc::new(Declaration::MacroRef(n.clone()));
                self.scoped(
                    ScopeKind::ModuleImplication,
                    vec![frame],
                    None,
                    g,
                    depth + 1,
                )
            }
            Statement::MacroScope(defs, g) => {
                self.emit(Rule::MacroScope, depth, Subject::Stmt(stmt));
                // pushed last to first so that the first definition is on top
                let frames = defs
                    .iter()
                    .rev()
                    .map(|d| Arc::new(Declaration::MacroRef(d.name.clone())))
                    .collect();
                self.scoped(ScopeKind::MacroScope, frames, Some(defs), g, depth + 1)
            }
            Statement::AllocScope {
                handle,
                elem,
                len,
                body,
            } => {
                let n = self.int_of(len)?;
                let regions_before = self.m.regions.live_count();
                let h = self
                    .m
                    .regions
                    .alloc(*elem, n)
                    .map_err(|rf| self.fail(FailureKind::RegionFault(rf), rf.to_string()))?;
                let shadowed = self.m.store.read(handle).cloned();
                self.m.store.assign(handle, Value::Handle(h));
                self.m.pinned.push(handle.clone());
                let modules_before = self.m.modules.len();
                let macros_before = self.m.macros.len();
                let result = self.exec(body, depth);
                self.m.pinned.pop();
                self.m.regions.free(h);
                match shadowed {
                    Some(v) => self.m.store.assign(handle, v),
                    None => {
                        self.m.store.remove(handle);
                    }
                }
                self.obs.scope_exit(&ScopeExit {
                    kind: ScopeKind::Alloc,
                    modules_before,
                    modules_after: self.m.modules.len(),
                    macros_before,
                    macros_after: self.m.macros.len(),
                    regions_before,
                    regions_after: self.m.regions.live_count(),
                    succeeded: result.is_ok(),
                });
                result
            }
            Statement::If(c, t, e) => match self.eval(c)? {
                Value::Bool(true) => self.exec(t, depth),
                Value::Bool(false) => self.exec(e, depth),
                other => Err(self.fail(
                    FailureKind::TypeMismatch,
                    format!("condition must be bool, got {}", other.type_name()),
                )),
            },
            Statement::Switch(..) => self.exec(&desugar(stmt), depth),
            Statement::Print(e) => {
                let v = self.eval(e)?;
                self.m.output.push_str(&v.to_string());
                self.m.output.push('\n');
                Ok(())
            }
            Statement::Call(name, args) => {
                let actuals = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let call = CallSite {
                    name: name.clone(),
                    actuals,
                };
                self.emit(Rule::Call, depth, Subject::Call(&call));
                self.resolve_call(&call, depth + 1)
            }
        }
    }

    /// Pushes `frames` (and `defs`, for macro scopes), runs `body`, and
    /// restores both stacks whatever the outcome.
    fn scoped(
        &mut self,
        kind: ScopeKind,
        frames: Vec<Arc<Declaration>>,
        defs: Option<&Vec<MacroDef>>,
        body: &Statement,
        depth: usize,
    ) -> Result<(), Failure> {
        let modules_before = self.m.modules.len();
        let macros_before = self.m.macros.len();
        let regions_before = self.m.regions.live_count();
        if let Some(defs) = defs {
            self.m.macros.push_frame(defs.clone());
        }
        self.m.modules.extend(frames);
        let result = self.exec(body, depth);
        self.m.modules.truncate(modules_before);
        if defs.is_some() {
            self.m.macros.pop_frame();
        }
        self.obs.scope_exit(&ScopeExit {
            kind,
            modules_before,
            modules_after: self.m.modules.len(),
            macros_before,
            macros_after: self.m.macros.len(),
            regions_before,
            regions_after: self.m.regions.live_count(),
            succeeded: result.is_ok(),
        });
        result
    }

    fn handle_of(&self, e: &Expr) -> Result<crate::ast::Handle, Failure> {
        match self.eval(e)? {
            Value::Handle(h) => Ok(h),
            other => Err(self.fail(
                FailureKind::TypeMismatch,
                format!("indexing needs a handle, got {}", other.type_name()),
            )),
        }
    }

    fn int_of(&self, e: &Expr) -> Result<i64, Failure> {
        match self.eval(e)? {
            Value::Int(n) => Ok(n),
            other => Err(self.fail(
                FailureKind::TypeMismatch,
                format!("expected int, got {}", other.type_name()),
            )),
        }
    }

    fn resolve_call(&mut self, call: &CallSite, depth: usize) -> Result<(), Failure> {
        let frame = self
            .m
            .modules
            .iter()
            .rev()
            .find(|f| declares(f, &call.name, &self.m.macros))
            .cloned();
        let Some(frame) = frame else {
            return Err(self.fail(FailureKind::NoMatchingClause, call.signature()));
        };
        if self.m.depth >= self.m.max_depth {
            return Err(self.fail(
                FailureKind::DepthExceeded,
                format!(
                    "more than {} nested calls at {}",
                    self.m.max_depth,
                    call.signature()
                ),
            ));
        }
        self.m.depth += 1;
        self.chain.push(call.clone());
        let result = self.backchain(&frame, call, depth, &mut Vec::new());
        self.chain.pop();
        self.m.depth -= 1;
        match result {
            Ok(()) => Ok(()),
            Err(Bc::Failed(f)) => Err(f),
            Err(Bc::NoMatch(detail)) => Err(self.fail(
                FailureKind::NoMatchingClause,
                format!("{} ({detail})", call.signature()),
            )),
        }
    }

    fn backchain(
        &mut self,
        decl: &Declaration,
        call: &CallSite,
        depth: usize,
        expanding: &mut Vec<Name>,
    ) -> Result<(), Bc> {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || {
            self.backchain_inner(decl, call, depth, expanding)
        })
    }

    fn backchain_inner(
        &mut self,
        decl: &Declaration,
        call: &CallSite,
        depth: usize,
        expanding: &mut Vec<Name>,
    ) -> Result<(), Bc> {
        match decl {
            Declaration::Clause(head, body) => {
                if !head_matches(head, call) {
                    return Err(Bc::NoMatch(format!("head {} does not match", head.name)));
                }
                self.emit(Rule::Clause, depth, Subject::Decl(decl));
                Ok(self.exec(body, depth + 1)?)
            }
            Declaration::Forall(x, d) => {
                self.emit(Rule::Instantiate, depth, Subject::Decl(decl));
                let inst = match binding_for(x, d, call, &self.m.macros, expanding) {
                    Some(t) => substitute(d, x, &t),
                    None => (**d).clone(),
                };
                self.backchain(&inst, call, depth + 1, expanding)
            }
            Declaration::And(l, r) => {
                if matches(l, call, &self.m.macros, expanding) {
                    self.emit(Rule::AndLeft, depth, Subject::Decl(decl));
                    self.backchain(l, call, depth + 1, expanding)
                } else if matches(r, call, &self.m.macros, expanding) {
                    self.emit(Rule::AndRight, depth, Subject::Decl(decl));
                    self.backchain(r, call, depth + 1, expanding)
                } else {
                    Err(Bc::NoMatch("no conjunct declares it".into()))
                }
            }
            Declaration::Rename(old, new, d) => {
                self.emit(Rule::Rename, depth, Subject::Decl(decl));
                let renamed = rename_resolving(d, old, new, &self.m.macros, &mut expanding.clone());
                self.backchain(&renamed, call, depth + 1, expanding)
            }
            Declaration::MacroRef(n) => {
                if expanding.contains(n) {
                    return Err(Bc::NoMatch(format!("macro /{n} refers to itself")));
                }
                let body = match self.m.macros.lookup(n) {
                    Ok(b) => b.clone(),
                    Err(e) => return Err(Bc::NoMatch(e.to_string())),
                };
                self.emit(Rule::MacroRef, depth, Subject::Decl(decl));
                expanding.push(n.clone());
                let r = self.backchain(&body, call, depth + 1, expanding);
                expanding.pop();
                r
            }
        }
    }
}

/// `rename`, except that macro references are replaced by their current
/// bodies first so the renaming reaches the clauses they stand for. A
/// reference that is undefined or cyclic keeps the renaming around it.
fn rename_resolving(
    decl: &Declaration,
    old: &str,
    new: &str,
    env: &crate::macro_env::MacroEnv,
    expanding: &mut Vec<Name>,
) -> Declaration {
    match decl {
        Declaration::MacroRef(n) => match env.lookup(n) {
            Ok(body) if !expanding.contains(n) => {
                expanding.push(n.clone());
                let r = rename_resolving(body, old, new, env, expanding);
                expanding.pop();
                r
            }
            _ => Declaration::rename(old, new, decl.clone()),
        },
        Declaration::And(a, b) => Declaration::and(
            rename_resolving(a, old, new, env, expanding),
            rename_resolving(b, old, new, env, expanding),
        ),
        Declaration::Forall(x, d) => Declaration::Forall(
            x.clone(),
            Box::new(rename_resolving(d, old, new, env, expanding)),
        ),
        Declaration::Rename(a, b, d) => {
            // the inner renaming applies first, so resolve it before the outer one
            let inner = rename_resolving(d, a, b, env, expanding);
            rename(&inner, old, new)
        }
        Declaration::Clause(..) => rename(decl, old, new),
    }
}

/// Whether `decl` exposes procedure `name` to call resolution.
fn declares(decl: &Declaration, name: &str, env: &crate::macro_env::MacroEnv) -> bool {
    crate::ast::free_procedure_names(decl, Some(env)).contains(name)
}

fn head_matches(head: &CallPattern, call: &CallSite) -> bool {
    head.name == call.name
        && head.params.len() == call.actuals.len()
        && head.params.iter().zip(&call.actuals).all(|(p, a)| match p {
            Term::Var(_) => true,
            Term::Val(v) => v == a,
        })
}

/// Whether backchaining `call` into `decl` would reach a matching clause.
fn matches(
    decl: &Declaration,
    call: &CallSite,
    env: &crate::macro_env::MacroEnv,
    expanding: &mut Vec<Name>,
) -> bool {
    match decl {
        Declaration::Clause(head, _) => head_matches(head, call),
        Declaration::Forall(_, d) => matches(d, call, env, expanding),
        Declaration::And(l, r) => {
            matches(l, call, env, expanding) || matches(r, call, env, expanding)
        }
        Declaration::Rename(old, new, d) => {
            // [new/old]d declares c iff d declares old (c == new) or d declares c (c != old)
            let as_old = call.name == *new && {
                let inner = CallSite {
                    name: old.clone(),
                    actuals: call.actuals.clone(),
                };
                matches(d, &inner, env, expanding)
            };
            as_old || (call.name != *old && matches(d, call, env, expanding))
        }
        Declaration::MacroRef(n) => {
            if expanding.contains(n) {
                return false;
            }
            let Ok(body) = env.lookup(n) else {
                return false;
            };
            expanding.push(n.clone());
            let r = matches(body, call, env, expanding);
            expanding.pop();
            r
        }
    }
}

/// The actual that instantiates bound variable `x`: the argument at the
/// position where `x` occurs in the head of the clause the call would reach.
fn binding_for(
    x: &str,
    decl: &Declaration,
    call: &CallSite,
    env: &crate::macro_env::MacroEnv,
    expanding: &mut Vec<Name>,
) -> Option<Value> {
    match decl {
        Declaration::Clause(head, _) => {
            if !head_matches(head, call) {
                return None;
            }
            head.params
                .iter()
                .position(|p| matches!(p, Term::Var(v) if v == x))
                .map(|i| call.actuals[i].clone())
        }
        Declaration::Forall(y, d) => {
            if y == x {
                None
            } else {
                binding_for(x, d, call, env, expanding)
            }
        }
        Declaration::And(l, r) => {
            if matches(l, call, env, expanding) {
                binding_for(x, l, call, env, expanding)
            } else {
                binding_for(x, r, call, env, expanding)
            }
        }
        Declaration::Rename(old, new, d) => {
            binding_for(x, &rename(d, old, new), call, env, expanding)
        }
        // a macro body is a separate scope; its clauses cannot mention x
        Declaration::MacroRef(_) => None,
    }
}

/// `[val/var]decl`: replaces free occurrences of variable `var` in heads and
/// bodies by the literal `val`. Inner binders of the same name shadow it.
/// Values are closed, so no binder can capture anything.
pub fn substitute(decl: &Declaration, var: &str, val: &Value) -> Declaration {
    match decl {
        Declaration::Clause(head, body) => Declaration::Clause(
            CallPattern {
                name: head.name.clone(),
                params: head
                    .params
                    .iter()
                    .map(|p| match p {
                        Term::Var(v) if v == var => Term::Val(val.clone()),
                        other => other.clone(),
                    })
                    .collect(),
            },
            Box::new(subst_stmt(body, var, val)),
        ),
        Declaration::And(a, b) => {
            Declaration::and(substitute(a, var, val), substitute(b, var, val))
        }
        Declaration::Forall(y, d) => {
            if y == var {
                decl.clone()
            } else {
                Declaration::Forall(y.clone(), Box::new(substitute(d, var, val)))
            }
        }
        Declaration::MacroRef(_) => decl.clone(),
        Declaration::Rename(a, b, d) => {
            Declaration::Rename(a.clone(), b.clone(), Box::new(substitute(d, var, val)))
        }
    }
}

fn subst_stmt(stmt: &Statement, var: &str, val: &Value) -> Statement {
    let se = |e: &Expr| subst_expr(e, var, val);
    match stmt {
        Statement::True => Statement::True,
        Statement::Call(n, args) => Statement::Call(n.clone(), args.iter().map(se).collect()),
        // assignment targets name store variables, not the formal
        Statement::Assign(x, e) => Statement::Assign(x.clone(), se(e)),
        Statement::IndexAssign(b, i, e) => Statement::IndexAssign(se(b), se(i), se(e)),
        Statement::Seq(a, b) => Statement::seq(subst_stmt(a, var, val), subst_stmt(b, var, val)),
        Statement::Implication(d, g) => {
            Statement::implication(substitute(d, var, val), subst_stmt(g, var, val))
        }
        Statement::ModuleImplication(n, g) => {
            Statement::ModuleImplication(n.clone(), Box::new(subst_stmt(g, var, val)))
        }
        Statement::MacroScope(defs, g) => Statement::MacroScope(
            defs.iter()
                .map(|m| MacroDef {
                    name: m.name.clone(),
                    body: substitute(&m.body, var, val),
                })
                .collect(),
            Box::new(subst_stmt(g, var, val)),
        ),
        Statement::AllocScope {
            handle,
            elem,
            len,
            body,
        } => Statement::AllocScope {
            handle: handle.clone(),
            elem: *elem,
            len: se(len),
            body: if handle == var {
                body.clone()
            } else {
                Box::new(subst_stmt(body, var, val))
            },
        },
        Statement::If(c, t, e) => {
            Statement::if_else(se(c), subst_stmt(t, var, val), subst_stmt(e, var, val))
        }
        Statement::Switch(c, cases, d) => Statement::Switch(
            se(c),
            cases
                .iter()
                .map(|(l, s)| (l.clone(), subst_stmt(s, var, val)))
                .collect(),
            Box::new(subst_stmt(d, var, val)),
        ),
        Statement::Print(e) => Statement::Print(se(e)),
    }
}

fn subst_expr(e: &Expr, var: &str, val: &Value) -> Expr {
    match e {
        Expr::Var(x) if x == var => Expr::Lit(val.clone()),
        Expr::Lit(_) | Expr::Var(_) => e.clone(),
        Expr::Index(b, i) => Expr::Index(
            Box::new(subst_expr(b, var, val)),
            Box::new(subst_expr(i, var, val)),
        ),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(subst_expr(a, var, val))),
        Expr::Binary(op, a, b) => Expr::Binary(
            *op,
            Box::new(subst_expr(a, var, val)),
            Box::new(subst_expr(b, var, val)),
        ),
    }
}

fn mismatch(msg: String) -> Failure {
    Failure::new(FailureKind::TypeMismatch, msg)
}

fn region_fault(rf: RegionFault) -> Failure {
    Failure::new(FailureKind::RegionFault(rf), rf.to_string())
}

/// Evaluates an expression against the store and region stack.
pub fn eval(m: &Machine, e: &Expr) -> Result<Value, Failure> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => match m.store.read(x) {
            None => Err(Failure::new(
                FailureKind::UnboundVariable,
                format!("`{x}` is unbound"),
            )),
            Some(Value::Handle(h)) => {
                m.regions.check(*h).map_err(region_fault)?;
                Ok(Value::Handle(*h))
            }
            Some(v) => Ok(v.clone()),
        },
        Expr::Index(b, i) => {
            let h = match eval(m, b)? {
                Value::Handle(h) => h,
                other => {
                    return Err(mismatch(format!(
                        "indexing needs a handle, got {}",
                        other.type_name()
                    )))
                }
            };
            let idx = match eval(m, i)? {
                Value::Int(n) => n,
                other => {
                    return Err(mismatch(format!(
                        "index must be int, got {}",
                        other.type_name()
                    )))
                }
            };
            m.regions.read(h, idx).cloned().map_err(region_fault)
        }
        Expr::Unary(UnOp::Neg, a) => match eval(m, a)? {
            Value::Int(n) => n
                .checked_neg()
                .map(Value::Int)
                .ok_or_else(|| Failure::new(FailureKind::Overflow, format!("-({n})"))),
            other => Err(mismatch(format!("cannot negate {}", other.type_name()))),
        },
        Expr::Unary(UnOp::Not, a) => match eval(m, a)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            other => Err(mismatch(format!("cannot apply ! to {}", other.type_name()))),
        },
        Expr::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
            let lhs = match eval(m, a)? {
                Value::Bool(x) => x,
                other => {
                    return Err(mismatch(format!(
                        "{} needs bool, got {}",
                        op.symbol(),
                        other.type_name()
                    )))
                }
            };
            if (*op == BinOp::And && !lhs) || (*op == BinOp::Or && lhs) {
                return Ok(Value::Bool(lhs));
            }
            match eval(m, b)? {
                Value::Bool(y) => Ok(Value::Bool(y)),
                other => Err(mismatch(format!(
                    "{} needs bool, got {}",
                    op.symbol(),
                    other.type_name()
                ))),
            }
        }
        Expr::Binary(op, a, b) => {
            let lhs = eval(m, a)?;
            let rhs = eval(m, b)?;
            match op {
                BinOp::Eq => Ok(Value::Bool(lhs == rhs)),
                BinOp::Ne => Ok(Value::Bool(lhs != rhs)),
                _ => {
                    let (Value::Int(x), Value::Int(y)) = (&lhs, &rhs) else {
                        return Err(mismatch(format!(
                            "{} {} {}",
                            lhs.type_name(),
                            op.symbol(),
                            rhs.type_name()
                        )));
                    };
                    let (x, y) = (*x, *y);
                    let overflow =
                        || Failure::new(FailureKind::Overflow, format!("{x} {} {y}", op.symbol()));
                    match op {
                        BinOp::Add => x.checked_add(y).map(Value::Int).ok_or_else(overflow),
                        BinOp::Sub => x.checked_sub(y).map(Value::Int).ok_or_else(overflow),
                        BinOp::Mul => x.checked_mul(y).map(Value::Int).ok_or_else(overflow),
                        BinOp::Div => {
                            if y == 0 {
                                Err(Failure::new(
                                    FailureKind::DivisionByZero,
                                    format!("{x} / 0"),
                                ))
                            } else {
                                x.checked_div(y).map(Value::Int).ok_or_else(overflow)
                            }
                        }
                        BinOp::Lt => Ok(Value::Bool(x < y)),
                        BinOp::Le => Ok(Value::Bool(x <= y)),
                        BinOp::Gt => Ok(Value::Bool(x > y)),
                        BinOp::Ge => Ok(Value::Bool(x >= y)),
                        BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ElemType;
    use crate::macro_env::MacroEnv;
    use crate::region::Store;
    use crate::trace::TraceLog;

    fn clause(name: &str, formals: &[&str], body: Statement) -> Declaration {
        Declaration::closed_clause(CallPattern::new(name, formals), body)
    }

    fn set(x: &str, n: i64) -> Statement {
        Statement::assign(x, Expr::int(n))
    }

    fn atom(a: &str) -> Value {
        Value::Atom(a.into())
    }

    fn emp_module() -> Declaration {
        let body = Statement::Switch(
            Expr::var("emp"),
            vec![
                (atom("tom"), set("age", 31)),
                (atom("kim"), set("age", 40)),
                (atom("sue"), set("age", 22)),
            ],
            Box::new(set("age", 0)),
        );
        clause("Age", &["emp"], body)
    }

    #[test]
    fn emp_task_prints_and_unloads() {
        let g = Statement::implication(
            emp_module(),
            Statement::seq(
                Statement::call("Age", vec![Expr::atom("tom")]),
                Statement::Print(Expr::var("age")),
            ),
        );
        let m = execute(Machine::new(), &g).into_result().unwrap();
        assert_eq!(m.output, "31\n");
        assert!(m.modules.is_empty());
    }

    #[test]
    fn true_leaves_machine_alone() {
        let mut m = Machine::new();
        m.store.assign("x", Value::Int(1));
        m.execute(&Statement::True).unwrap();
        assert_eq!(m.store, Store::from([("x", Value::Int(1))]));
        assert!(m.output.is_empty());
    }

    #[test]
    fn assignment_replaces() {
        let mut m = Machine::new();
        m.store.assign("x", Value::Int(1));
        m.execute(&set("x", 2)).unwrap();
        assert_eq!(m.store, Store::from([("x", Value::Int(2))]));
    }

    #[test]
    fn implication_pops_its_frame() {
        let mut m = Machine::new();
        m.modules.push(Arc::new(clause("q", &[], Statement::True)));
        let before = m.modules.clone();
        m.execute(&Statement::implication(
            clause("p", &[], Statement::True),
            Statement::True,
        ))
        .unwrap();
        assert_eq!(m.modules, before);
    }

    #[test]
    fn effects_survive_the_pop() {
        let mut m = Machine::new();
        m.execute(&Statement::implication(
            clause("p", &[], Statement::True),
            set("x", 1),
        ))
        .unwrap();
        assert_eq!(m.store.read("x"), Some(&Value::Int(1)));
    }

    #[test]
    fn most_recent_frame_wins() {
        let mut m = Machine::new();
        m.modules.push(Arc::new(clause("p", &[], set("who", 1))));
        m.modules.push(Arc::new(clause("p", &[], set("who", 2))));
        m.resolve_call(&CallSite::new("p", vec![])).unwrap();
        assert_eq!(m.store.read("who"), Some(&Value::Int(2)));
    }

    #[test]
    fn empty_stack_has_no_clause() {
        let err = Machine::new()
            .resolve_call(&CallSite::new("p", vec![]))
            .unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
        assert!(err.detail.contains("p/0"));
    }

    #[test]
    fn absent_name_has_no_clause() {
        let mut m = Machine::new();
        m.modules.push(Arc::new(clause("q", &[], Statement::True)));
        let err = m.resolve_call(&CallSite::new("p", vec![])).unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
    }

    #[test]
    fn frame_is_chosen_by_name_only() {
        // the top frame declares p/1; a deeper p/0 is not consulted
        let mut m = Machine::new();
        m.modules.push(Arc::new(clause("p", &[], set("deep", 1))));
        m.modules.push(Arc::new(clause("p", &["x"], set("top", 1))));
        let err = m.resolve_call(&CallSite::new("p", vec![])).unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
        assert_eq!(m.store.read("deep"), None);
    }

    #[test]
    fn backchain_instantiates_formal() {
        let mut m = Machine::new();
        m.backchain(&emp_module(), &CallSite::new("Age", vec![atom("kim")]))
            .unwrap();
        assert_eq!(m.store.read("age"), Some(&Value::Int(40)));
    }

    // Every combination of two nullary clauses and a call name, against the
    // rule that some conjunct whose head matches must run.
    #[test]
    fn and_search_agrees_with_branch_enumeration() {
        let names = ["p", "q", "r"];
        for a in names {
            for b in names {
                for c in names {
                    let d = Declaration::and(
                        clause(a, &[], set("hit", 1)),
                        clause(b, &[], set("hit", 2)),
                    );
                    let mut m = Machine::new();
                    let got = m.backchain(&d, &CallSite::new(c, vec![]));
                    let expected = if a == c {
                        Some(1)
                    } else if b == c {
                        Some(2)
                    } else {
                        None
                    };
                    match expected {
                        Some(v) => {
                            assert!(got.is_ok(), "{a} {b} {c}");
                            assert_eq!(m.store.read("hit"), Some(&Value::Int(v)));
                        }
                        None => assert_eq!(got.unwrap_err().kind, FailureKind::NoMatchingClause),
                    }
                }
            }
        }
    }

    #[test]
    fn rename_redirects_calls() {
        let d = Declaration::rename("f", "g", clause("f", &["x"], Statement::True));
        let mut m = Machine::new();
        assert!(m
            .backchain(&d, &CallSite::new("g", vec![Value::Int(1)]))
            .is_ok());
        let err = m
            .backchain(&d, &CallSite::new("f", vec![Value::Int(1)]))
            .unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
    }

    #[test]
    fn macro_ref_uses_latest_definition() {
        let mut env = MacroEnv::seeded([MacroDef::new("m", clause("p", &[], set("v", 1)))]);
        env.push_frame(vec![MacroDef::new("m", clause("p", &[], set("v", 2)))]);
        let mut m = Machine::with_macros(env);
        m.backchain(&Declaration::macro_ref("m"), &CallSite::new("p", vec![]))
            .unwrap();
        assert_eq!(m.store.read("v"), Some(&Value::Int(2)));
    }

    #[test]
    fn unbound_macro_is_no_match() {
        let err = Machine::new()
            .backchain(&Declaration::macro_ref("nope"), &CallSite::new("p", vec![]))
            .unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
        assert!(err.detail.contains("/nope"));
    }

    #[test]
    fn self_referential_macro_does_not_loop() {
        let env = MacroEnv::seeded([MacroDef::new(
            "a",
            Declaration::and(Declaration::macro_ref("a"), clause("f", &[], set("ok", 1))),
        )]);
        let mut m = Machine::with_macros(env);
        m.modules.push(Arc::new(Declaration::macro_ref("a")));
        m.resolve_call(&CallSite::new("f", vec![])).unwrap();
        assert_eq!(m.store.read("ok"), Some(&Value::Int(1)));
    }

    #[test]
    fn substitute_formal() {
        let inner = match emp_module() {
            Declaration::Forall(_, d) => *d,
            _ => unreachable!(),
        };
        let got = substitute(&inner, "emp", &atom("tom"));
        let Declaration::Clause(head, body) = got else {
            panic!()
        };
        assert_eq!(head.params, vec![Term::Val(atom("tom"))]);
        let Statement::Switch(scrutinee, ..) = *body else {
            panic!()
        };
        assert_eq!(scrutinee, Expr::atom("tom"));
    }

    #[test]
    fn substitute_absent_var_is_identity() {
        let d = Declaration::Clause(CallPattern::new("p", &["y"]), Box::new(Statement::True));
        assert_eq!(substitute(&d, "x", &Value::Int(5)), d);
    }

    // Naive substitution ignores binders; the real one must stop at a
    // binder of the same name and agree with the naive one elsewhere.
    fn naive(d: &Declaration, var: &str, val: &Value) -> Declaration {
        match d {
            Declaration::Forall(y, inner) => {
                Declaration::Forall(y.clone(), Box::new(naive(inner, var, val)))
            }
            Declaration::Clause(head, body) => Declaration::Clause(
                CallPattern {
                    name: head.name.clone(),
                    params: head
                        .params
                        .iter()
                        .map(|p| match p {
                            Term::Var(v) if v == var => Term::Val(val.clone()),
                            o => o.clone(),
                        })
                        .collect(),
                },
                Box::new(subst_stmt(body, var, val)),
            ),
            other => other.clone(),
        }
    }

    #[test]
    fn substitution_respects_shadowing() {
        let d = Declaration::Forall(
            "x".into(),
            Box::new(Declaration::Clause(
                CallPattern::new("p", &["x"]),
                Box::new(Statement::Print(Expr::var("x"))),
            )),
        );
        let v = Value::Int(1);
        assert_eq!(substitute(&d, "x", &v), d);
        assert_ne!(naive(&d, "x", &v), d);
        let open = Declaration::Forall(
            "y".into(),
            Box::new(Declaration::Clause(
                CallPattern::new("p", &["y"]),
                Box::new(Statement::Print(Expr::var("x"))),
            )),
        );
        assert_eq!(substitute(&open, "x", &v), naive(&open, "x", &v));
    }

    #[test]
    fn eval_cases() {
        let mut m = Machine::new();
        let two_plus_three = Expr::binary(BinOp::Add, Expr::int(2), Expr::int(3));
        assert_eq!(m.eval(&two_plus_three), Ok(Value::Int(5)));
        m.store.assign("x", Value::Int(7));
        assert_eq!(m.eval(&Expr::var("x")), Ok(Value::Int(7)));
        assert_eq!(
            m.eval(&Expr::var("nope")).unwrap_err().kind,
            FailureKind::UnboundVariable
        );
        let bad = Expr::binary(BinOp::Add, Expr::int(1), Expr::Lit(Value::Bool(true)));
        assert_eq!(m.eval(&bad).unwrap_err().kind, FailureKind::TypeMismatch);
        let div = Expr::binary(BinOp::Div, Expr::int(1), Expr::int(0));
        assert_eq!(m.eval(&div).unwrap_err().kind, FailureKind::DivisionByZero);
        let ovf = Expr::binary(BinOp::Add, Expr::int(i64::MAX), Expr::int(1));
        assert_eq!(m.eval(&ovf).unwrap_err().kind, FailureKind::Overflow);
    }

    #[test]
    fn atom_equality_is_symbol_equality() {
        let atoms = ["tom", "kim", "sue", "default"];
        for a in atoms {
            for b in atoms {
                let mut m = Machine::new();
                m.store.assign("emp", atom(a));
                let e = Expr::binary(BinOp::Eq, Expr::var("emp"), Expr::atom(b));
                assert_eq!(m.eval(&e), Ok(Value::Bool(a == b)));
            }
        }
        let m = Machine::new();
        let mixed = Expr::binary(BinOp::Eq, Expr::atom("tom"), Expr::int(0));
        assert_eq!(m.eval(&mixed), Ok(Value::Bool(false)));
    }

    #[test]
    fn short_circuit_skips_rhs() {
        let m = Machine::new();
        let e = Expr::binary(
            BinOp::And,
            Expr::Lit(Value::Bool(false)),
            Expr::var("unbound"),
        );
        assert_eq!(m.eval(&e), Ok(Value::Bool(false)));
    }

    #[test]
    fn depth_limit() {
        // p() = p()
        let d = clause("p", &[], Statement::call("p", vec![]));
        let mut m = Machine::new().max_depth(50);
        let err = m
            .execute(&Statement::implication(d, Statement::call("p", vec![])))
            .unwrap_err();
        assert_eq!(err.kind, FailureKind::DepthExceeded);
        assert_eq!(err.chain.len(), 50);
        assert_eq!(m.depth, 0);
        assert!(m.modules.is_empty());
    }

    #[test]
    fn alloc_scope_cleans_up_on_failure() {
        let s = Statement::AllocScope {
            handle: "p".into(),
            elem: ElemType::Int,
            len: Expr::int(4),
            body: Box::new(Statement::call("missing", vec![])),
        };
        let mut m = Machine::new();
        assert!(m.execute(&s).is_err());
        assert_eq!(m.regions.live_count(), 0);
        assert_eq!(m.store.read("p"), None);
    }

    #[test]
    fn escaped_handle_dangles() {
        let s = Statement::seq(
            Statement::AllocScope {
                handle: "p".into(),
                elem: ElemType::Int,
                len: Expr::int(4),
                body: Box::new(Statement::assign("q", Expr::var("p"))),
            },
            Statement::Print(Expr::Index(
                Box::new(Expr::var("q")),
                Box::new(Expr::int(0)),
            )),
        );
        let err = Machine::new().execute(&s).unwrap_err();
        assert!(matches!(
            err.kind,
            FailureKind::RegionFault(RegionFault::Dangling(_))
        ));
    }

    #[test]
    fn handle_cannot_be_reassigned() {
        let s = Statement::AllocScope {
            handle: "p".into(),
            elem: ElemType::Int,
            len: Expr::int(1),
            body: Box::new(set("p", 3)),
        };
        let err = Machine::new().execute(&s).unwrap_err();
        assert_eq!(
            err.kind,
            FailureKind::RegionFault(RegionFault::ReadOnlyHandle)
        );
    }

    #[test]
    fn writes_respect_element_type() {
        let s = Statement::AllocScope {
            handle: "p".into(),
            elem: ElemType::Int,
            len: Expr::int(1),
            body: Box::new(Statement::IndexAssign(
                Expr::var("p"),
                Expr::int(0),
                Expr::atom("tom"),
            )),
        };
        assert_eq!(
            Machine::new().execute(&s).unwrap_err().kind,
            FailureKind::TypeMismatch
        );
    }

    #[test]
    fn trace_depths_nest() {
        let g = Statement::implication(
            clause("p", &[], set("x", 1)),
            Statement::seq(Statement::call("p", vec![]), Statement::True),
        );
        let mut log = TraceLog::default();
        Machine::new().execute_with(&g, &mut log).unwrap();
        assert_eq!(
            log.lines(),
            [
                "ex:11 p() = x = 1 => p(); true",
                "  ex:10 p(); true",
                "    ex:7 p()",
                "      bc:1 p() = x = 1",
                "        ex:9 x = 1",
                "    ex:8 true",
            ]
        );
    }

    #[test]
    fn renaming_reaches_through_macro_references() {
        // macro /p = { f(n) = if (n > 0) (print(n); f(n - 1)) }. ren(f, h) /p => h(2)
        let n = || Expr::var("n");
        let body = Statement::if_else(
            Expr::binary(BinOp::Gt, n(), Expr::int(0)),
            Statement::seq(
                Statement::Print(n()),
                Statement::call("f", vec![Expr::binary(BinOp::Sub, n(), Expr::int(1))]),
            ),
            Statement::True,
        );
        let env = MacroEnv::seeded([crate::ast::MacroDef::new("p", clause("f", &["n"], body))]);
        let decl = Declaration::rename("f", "h", Declaration::macro_ref("p"));
        let mut m = Machine::with_macros(env.clone());
        m.execute(&Statement::implication(
            decl.clone(),
            Statement::call("h", vec![Expr::int(2)]),
        ))
        .unwrap();
        assert_eq!(m.output, "2\n1\n");
        let mut m = Machine::with_macros(env);
        let err = m
            .execute(&Statement::implication(
                decl,
                Statement::call("f", vec![Expr::int(2)]),
            ))
            .unwrap_err();
        assert_eq!(err.kind, FailureKind::NoMatchingClause);
    }
}
