//! Abstract syntax for statements, declarations, macro definitions and
//! expressions, plus the runtime values they evaluate to.

use std::collections::BTreeSet;
use std::fmt;

use crate::macro_env::MacroEnv;

pub type Name = String;

/// Reference to a region on the data stack. The generation is checked on
/// every access so that handles outliving their scope are caught.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle {
    pub region: u64,
    pub generation: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Atom(Name),
    Unit,
    Handle(Handle),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::Atom(_) => "atom",
            Value::Unit => "unit",
            Value::Handle(_) => "handle",
        }
    }
}

/// Renders a value the way `print` writes it.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::Atom(a) => f.write_str(a),
            Value::Unit => f.write_str("()"),
            Value::Handle(h) => write!(f, "<handle #{}@{}>", h.region, h.generation),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElemType {
    Int,
}

impl ElemType {
    pub fn keyword(self) -> &'static str {
        match self {
            ElemType::Int => "int",
        }
    }

    pub fn zero(self) -> Value {
        match self {
            ElemType::Int => Value::Int(0),
        }
    }

    pub fn admits(self, v: &Value) -> bool {
        matches!((self, v), (ElemType::Int, Value::Int(_)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Literal value. Atoms such as `tom` are literals too.
    Lit(Value),
    Var(Name),
    /// Element read `base[index]`; `base` must evaluate to a handle.
    Index(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Lit(Value::Int(n))
    }

    pub fn atom(a: &str) -> Expr {
        Expr::Lit(Value::Atom(a.to_string()))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }
}

/// A head parameter: a formal variable, or the value it was instantiated to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Val(Value),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CallPattern {
    pub name: Name,
    pub params: Vec<Term>,
}

impl CallPattern {
    pub fn new(name: &str, formals: &[&str]) -> CallPattern {
        CallPattern {
            name: name.to_string(),
            params: formals.iter().map(|f| Term::Var(f.to_string())).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Names of the parameters that are still variables.
    pub fn formals(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Val(_) => None,
        })
    }
}

/// G-formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    True,
    Call(Name, Vec<Expr>),
    Assign(Name, Expr),
    /// `base[index] = value`
    IndexAssign(Expr, Expr, Expr),
    Seq(Box<Statement>, Box<Statement>),
    Implication(Box<Declaration>, Box<Statement>),
    ModuleImplication(Name, Box<Statement>),
    MacroScope(Vec<MacroDef>, Box<Statement>),
    AllocScope {
        handle: Name,
        elem: ElemType,
        len: Expr,
        body: Box<Statement>,
    },
    If(Expr, Box<Statement>, Box<Statement>),
    Switch(Expr, Vec<(Value, Statement)>, Box<Statement>),
    Print(Expr),
}

impl Statement {
    pub fn call(name: &str, args: Vec<Expr>) -> Statement {
        Statement::Call(name.to_string(), args)
    }

    pub fn assign(x: &str, e: Expr) -> Statement {
        Statement::Assign(x.to_string(), e)
    }

    pub fn seq(a: Statement, b: Statement) -> Statement {
        Statement::Seq(Box::new(a), Box::new(b))
    }

    pub fn implication(d: Declaration, g: Statement) -> Statement {
        Statement::Implication(Box::new(d), Box::new(g))
    }

    pub fn module_implication(n: &str, g: Statement) -> Statement {
        Statement::ModuleImplication(n.to_string(), Box::new(g))
    }

    pub fn if_else(c: Expr, t: Statement, e: Statement) -> Statement {
        Statement::If(c, Box::new(t), Box::new(e))
    }

    /// Right-nested sequence of the given statements; `True` when empty.
    pub fn seq_all(stmts: impl IntoIterator<Item = Statement>) -> Statement {
        let mut v: Vec<Statement> = stmts.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Statement::True;
        };
        while let Some(s) = v.pop() {
            acc = Statement::seq(s, acc);
        }
        acc
    }
}

/// D-formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Declaration {
    Clause(CallPattern, Box<Statement>),
    And(Box<Declaration>, Box<Declaration>),
    Forall(Name, Box<Declaration>),
    MacroRef(Name),
    /// `ren(old, new) D`
    Rename(Name, Name, Box<Declaration>),
}

impl Declaration {
    /// A clause universally closed over its formals, as the parser builds it.
    pub fn closed_clause(head: CallPattern, body: Statement) -> Declaration {
        let formals: Vec<Name> = head.formals().map(str::to_string).collect();
        let mut d = Declaration::Clause(head, Box::new(body));
        for f in formals.into_iter().rev() {
            d = Declaration::Forall(f, Box::new(d));
        }
        d
    }

    pub fn and(a: Declaration, b: Declaration) -> Declaration {
        Declaration::And(Box::new(a), Box::new(b))
    }

    pub fn macro_ref(n: &str) -> Declaration {
        Declaration::MacroRef(n.to_string())
    }

    pub fn rename(old: &str, new: &str, d: Declaration) -> Declaration {
        Declaration::Rename(old.to_string(), new.to_string(), Box::new(d))
    }

    /// Right-nested conjunction; `None` when empty.
    pub fn and_all(decls: impl IntoIterator<Item = Declaration>) -> Option<Declaration> {
        let mut v: Vec<Declaration> = decls.into_iter().collect();
        let mut acc = v.pop()?;
        while let Some(d) = v.pop() {
            acc = Declaration::and(d, acc);
        }
        Some(acc)
    }
}

/// `/name = body`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MacroDef {
    pub name: Name,
    pub body: Declaration,
}

impl MacroDef {
    pub fn new(name: &str, body: Declaration) -> MacroDef {
        MacroDef {
            name: name.to_string(),
            body,
        }
    }
}

/// Rewrites every `switch` into a chain of `if`s comparing the scrutinee
/// against each label in order, ending in the default branch.
pub fn desugar(stmt: &Statement) -> Statement {
    match stmt {
        Statement::True
        | Statement::Call(..)
        | Statement::Assign(..)
        | Statement::IndexAssign(..)
        | Statement::Print(_) => stmt.clone(),
        Statement::Seq(a, b) => Statement::seq(desugar(a), desugar(b)),
        Statement::Implication(d, g) => Statement::implication(desugar_decl(d), desugar(g)),
        Statement::ModuleImplication(n, g) => {
            Statement::ModuleImplication(n.clone(), Box::new(desugar(g)))
        }
        Statement::MacroScope(defs, g) => Statement::MacroScope(
            defs.iter()
                .map(|m| MacroDef {
                    name: m.name.clone(),
                    body: desugar_decl(&m.body),
                })
                .collect(),
            Box::new(desugar(g)),
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
            body: Box::new(desugar(body)),
        },
        Statement::If(c, t, e) => Statement::if_else(c.clone(), desugar(t), desugar(e)),
        Statement::Switch(scrutinee, cases, default) => {
            cases
                .iter()
                .rev()
                .fold(desugar(default), |rest, (label, body)| {
                    Statement::if_else(
                        Expr::binary(BinOp::Eq, scrutinee.clone(), Expr::Lit(label.clone())),
                        desugar(body),
                        rest,
                    )
                })
        }
    }
}

pub fn desugar_decl(decl: &Declaration) -> Declaration {
    match decl {
        Declaration::Clause(head, body) => {
            Declaration::Clause(head.clone(), Box::new(desugar(body)))
        }
        Declaration::And(a, b) => Declaration::and(desugar_decl(a), desugar_decl(b)),
        Declaration::Forall(x, d) => Declaration::Forall(x.clone(), Box::new(desugar_decl(d))),
        Declaration::MacroRef(_) => decl.clone(),
        Declaration::Rename(a, b, d) => {
            Declaration::Rename(a.clone(), b.clone(), Box::new(desugar_decl(d)))
        }
    }
}

/// Procedure names declared by clause heads anywhere in `decl`.
///
/// Renames are applied to the names they cover. A macro reference
/// contributes the names of its most recent definition when `env` is given,
/// and nothing otherwise; references already being expanded contribute
/// nothing, so cyclic macro definitions terminate.
pub fn free_procedure_names(decl: &Declaration, env: Option<&MacroEnv>) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_names(decl, env, &mut Vec::new(), &mut out);
    out
}

fn collect_names<'a>(
    decl: &'a Declaration,
    env: Option<&'a MacroEnv>,
    expanding: &mut Vec<&'a str>,
    out: &mut BTreeSet<Name>,
) {
    match decl {
        Declaration::Clause(head, _) => {
            out.insert(head.name.clone());
        }
        Declaration::And(a, b) => {
            collect_names(a, env, expanding, out);
            collect_names(b, env, expanding, out);
        }
        Declaration::Forall(_, d) => collect_names(d, env, expanding, out),
        Declaration::Rename(old, new, d) => {
            let mut inner = BTreeSet::new();
            collect_names(d, env, expanding, &mut inner);
            if inner.remove(old) {
                inner.insert(new.clone());
            }
            out.extend(inner);
        }
        Declaration::MacroRef(n) => {
            let Some(env) = env else { return };
            if expanding.contains(&n.as_str()) {
                return;
            }
            if let Ok(body) = env.lookup(n) {
                expanding.push(n);
                collect_names(body, Some(env), expanding, out);
                expanding.pop();
            }
        }
    }
}
