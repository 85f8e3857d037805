//! Canonical text for programs. The output parses back to the same tree.

use crate::ast::{CallPattern, Declaration, Expr, MacroDef, Name, Statement, Term, UnOp, Value};
use crate::syntax::lexer::is_keyword;
use crate::syntax::parser::SourceProgram;

pub fn pretty_print(prog: &SourceProgram) -> String {
    let mut parts = Vec::new();
    for (name, d) in &prog.modules {
        let mut p = Printer::block();
        p.out.push_str(&format!("module {name}."));
        p.indent += 2;
        p.newline();
        p.decl(d);
        p.indent -= 2;
        p.newline();
        p.out.push_str("end");
        parts.push(p.out);
    }
    for def in &prog.macros {
        let mut p = Printer::block();
        p.out.push_str("macro ");
        p.macro_def(def);
        parts.push(p.out);
    }
    let mut p = Printer::block();
    p.stmt(&prog.main, Ctx::Full);
    parts.push(p.out);
    parts.join("\n\n")
}

pub fn statement(s: &Statement) -> String {
    let mut p = Printer::block();
    p.stmt(s, Ctx::Full);
    p.out
}

pub fn declaration(d: &Declaration) -> String {
    let mut p = Printer::block();
    p.decl(d);
    p.out
}

/// Single-line rendering, used for traces and diagnostics.
pub fn statement_inline(s: &Statement) -> String {
    let mut p = Printer::inline();
    p.stmt(s, Ctx::Full);
    p.out
}

pub fn declaration_inline(d: &Declaration) -> String {
    let mut p = Printer::inline();
    p.decl(d);
    p.out
}

pub fn expression(e: &Expr) -> String {
    let mut p = Printer::inline();
    p.expr(e, 0);
    p.out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    /// Anything, including scoped statements and sequences.
    Full,
    /// A clause body: a sequence of units.
    Body,
    /// A single unit.
    Unit,
}

struct Printer {
    out: String,
    indent: usize,
    inline: bool,
    bound: Vec<Name>,
}

impl Printer {
    fn block() -> Printer {
        Printer {
            out: String::new(),
            indent: 0,
            inline: false,
            bound: Vec::new(),
        }
    }

    fn inline() -> Printer {
        Printer {
            inline: true,
            ..Printer::block()
        }
    }

    fn newline(&mut self) {
        if self.inline {
            self.out.push(' ');
        } else {
            self.out.push('\n');
            for _ in 0..self.indent {
                self.out.push(' ');
            }
        }
    }

    fn w(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn parens(&mut self, f: impl FnOnce(&mut Printer)) {
        self.w("(");
        f(self);
        self.w(")");
    }

    fn is_scoped(s: &Statement) -> bool {
        matches!(
            s,
            Statement::Implication(..)
                | Statement::ModuleImplication(..)
                | Statement::MacroScope(..)
                | Statement::AllocScope { .. }
        )
    }

    /// Body of a scoped statement, on its own indented line.
    fn scope_body(&mut self, g: &Statement) {
        self.indent += 2;
        self.newline();
        self.stmt(g, Ctx::Full);
        self.indent -= 2;
    }

    fn stmt(&mut self, s: &Statement, ctx: Ctx) {
        let needs_parens = match ctx {
            Ctx::Full => false,
            Ctx::Body => Self::is_scoped(s),
            Ctx::Unit => Self::is_scoped(s) || matches!(s, Statement::Seq(..)),
        };
        if needs_parens {
            self.parens(|p| p.stmt(s, Ctx::Full));
            return;
        }
        match s {
            Statement::True => self.w("true"),
            Statement::Call(name, args) => {
                self.w(name);
                self.w("(");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.w(", ");
                    }
                    self.arg(a);
                }
                self.w(")");
            }
            Statement::Assign(x, e) => {
                self.w(x);
                self.w(" = ");
                self.expr(e, 0);
            }
            Statement::IndexAssign(b, i, e) => {
                self.expr(b, 7);
                self.w("[");
                self.expr(i, 0);
                self.w("] = ");
                self.expr(e, 0);
            }
            Statement::Seq(a, b) => {
                self.stmt(a, Ctx::Unit);
                self.w(";");
                self.newline();
                self.stmt(b, ctx);
            }
            Statement::Implication(d, g) => {
                if matches!(**d, Declaration::MacroRef(_)) {
                    // a bare `/n =>` would read as a module implication
                    self.parens(|p| p.decl(d));
                } else {
                    self.decl(d);
                }
                self.w(" =>");
                self.scope_body(g);
            }
            Statement::ModuleImplication(n, g) => {
                self.w(&format!("/{n} =>"));
                self.scope_body(g);
            }
            Statement::MacroScope(defs, g) => {
                self.w("macro ");
                for (i, def) in defs.iter().enumerate() {
                    if i > 0 {
                        self.w(" and ");
                    }
                    self.macro_def(def);
                }
                self.w(" in");
                self.scope_body(g);
            }
            Statement::AllocScope {
                handle,
                elem,
                len,
                body,
            } => {
                self.w(&format!("{handle} = new {}[", elem.keyword()));
                self.expr(len, 0);
                self.w("] =>");
                self.bound.push(handle.clone());
                self.scope_body(body);
                self.bound.pop();
            }
            Statement::If(c, t, e) => {
                self.w("if (");
                self.expr(c, 0);
                self.w(") ");
                if matches!(**t, Statement::If(..)) {
                    self.parens(|p| p.stmt(t, Ctx::Full));
                } else {
                    self.stmt(t, Ctx::Unit);
                }
                if **e != Statement::True {
                    self.w(" else ");
                    self.stmt(e, Ctx::Unit);
                }
            }
            Statement::Switch(scrutinee, cases, default) => {
                self.w("switch (");
                self.expr(scrutinee, 0);
                self.w(") {");
                self.indent += 2;
                for (label, body) in cases {
                    self.newline();
                    self.w("case ");
                    self.label(label);
                    self.w(":");
                    self.case_body(body);
                }
                self.newline();
                self.w("default:");
                self.case_body(default);
                self.indent -= 2;
                self.newline();
                self.w("}");
            }
            Statement::Print(e) => {
                self.w("print(");
                self.expr(e, 0);
                self.w(")");
            }
        }
    }

    fn case_body(&mut self, body: &Statement) {
        let mut units = Vec::new();
        let mut cur = body;
        while let Statement::Seq(a, b) = cur {
            units.push(&**a);
            cur = b;
        }
        if *cur != Statement::True || !units.is_empty() {
            units.push(cur);
        }
        for u in units {
            self.w(" ");
            self.stmt(u, Ctx::Unit);
            self.w(";");
        }
        self.w(" break;");
    }

    fn label(&mut self, v: &Value) {
        match v {
            Value::Atom(a) => self.w(a),
            other => self.value(other),
        }
    }

    fn macro_def(&mut self, def: &MacroDef) {
        self.w(&format!("/{} = {{ ", def.name));
        self.indent += 2;
        self.decl(&def.body);
        self.indent -= 2;
        self.w(" }");
    }

    fn decl(&mut self, d: &Declaration) {
        match d {
            Declaration::And(a, b) => {
                self.decl_unit(a);
                self.newline();
                self.w("and ");
                self.decl(b);
            }
            _ => self.decl_unit(d),
        }
    }

    /// Forall binders wrapping a clause whose formals they are, in order.
    fn closure_of(d: &Declaration) -> Option<(&CallPattern, &Statement)> {
        let mut binders = Vec::new();
        let mut cur = d;
        while let Declaration::Forall(x, inner) = cur {
            binders.push(x.as_str());
            cur = inner;
        }
        let Declaration::Clause(head, body) = cur else {
            return None;
        };
        let formals: Option<Vec<&str>> = head
            .params
            .iter()
            .map(|t| match t {
                Term::Var(v) => Some(v.as_str()),
                Term::Val(_) => None,
            })
            .collect();
        match formals {
            Some(f) if f == binders => Some((head, body)),
            // instantiated heads only occur at run time
            None if binders.is_empty() => Some((head, body)),
            _ => None,
        }
    }

    fn decl_unit(&mut self, d: &Declaration) {
        if let Some((head, body)) = Self::closure_of(d) {
            self.clause(head, body);
            return;
        }
        match d {
            Declaration::And(..) => self.parens(|p| p.decl(d)),
            Declaration::Forall(x, inner) => {
                self.w(&format!("forall {x} "));
                self.bound.push(x.clone());
                self.decl_unit(inner);
                self.bound.pop();
            }
            Declaration::Rename(a, b, inner) => {
                self.w(&format!("ren({a}, {b}) "));
                self.decl_unit(inner);
            }
            Declaration::MacroRef(n) => self.w(&format!("/{n}")),
            Declaration::Clause(head, body) => self.clause(head, body),
        }
    }

    fn clause(&mut self, head: &CallPattern, body: &Statement) {
        self.w(&head.name);
        self.w("(");
        for (i, t) in head.params.iter().enumerate() {
            if i > 0 {
                self.w(", ");
            }
            match t {
                Term::Var(v) => self.w(v),
                Term::Val(Value::Atom(a)) if is_plain_ident(a) && !self.bound.contains(a) => {
                    self.w(a)
                }
                Term::Val(v) => self.value(v),
            }
        }
        self.w(") = ");
        let n = self.bound.len();
        self.bound.extend(head.formals().map(str::to_string));
        self.indent += 2;
        self.stmt(body, Ctx::Body);
        self.indent -= 2;
        self.bound.truncate(n);
    }

    /// Call argument: bare identifiers read as atoms unless bound.
    fn arg(&mut self, e: &Expr) {
        match e {
            Expr::Lit(Value::Atom(a)) if is_plain_ident(a) && !self.bound.contains(a) => self.w(a),
            Expr::Var(x) if !self.bound.contains(x) => {
                self.w("(");
                self.w(x);
                self.w(")");
            }
            _ => self.expr(e, 0),
        }
    }

    fn value(&mut self, v: &Value) {
        match v {
            Value::Int(n) => self.w(&n.to_string()),
            Value::Bool(b) => self.w(if *b { "true" } else { "false" }),
            Value::Str(s) => {
                self.w("\"");
                for c in s.chars() {
                    match c {
                        '"' => self.w("\\\""),
                        '\\' => self.w("\\\\"),
                        '\n' => self.w("\\n"),
                        '\t' => self.w("\\t"),
                        c => self.out.push(c),
                    }
                }
                self.w("\"");
            }
            Value::Atom(a) => {
                self.w("'");
                self.w(a);
            }
            other => self.w(&other.to_string()),
        }
    }

    /// Prints `e`, parenthesised when it binds looser than `min_prec`.
    fn expr(&mut self, e: &Expr, min_prec: u8) {
        match e {
            Expr::Lit(v) => {
                let negative = matches!(v, Value::Int(n) if *n < 0);
                if negative && min_prec > 6 {
                    self.w("(");
                    self.value(v);
                    self.w(")");
                } else {
                    self.value(v);
                }
            }
            Expr::Var(x) => self.w(x),
            Expr::Index(b, i) => {
                self.expr(b, 7);
                self.w("[");
                self.expr(i, 0);
                self.w("]");
            }
            Expr::Unary(op, a) => {
                let wrap = min_prec > 6;
                if wrap {
                    self.w("(");
                }
                self.w(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                });
                // `-5` would read back as a literal
                if *op == UnOp::Neg && matches!(**a, Expr::Lit(Value::Int(n)) if n >= 0) {
                    self.w("(");
                    self.expr(a, 0);
                    self.w(")");
                } else {
                    if *op == UnOp::Neg && starts_with_minus(a) {
                        self.w(" ");
                    }
                    self.expr(a, 6);
                }
                if wrap {
                    self.w(")");
                }
            }
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                let wrap = prec < min_prec;
                if wrap {
                    self.w("(");
                }
                // comparisons do not chain, other operators are left-associative
                let left_min = if prec == 3 { 4 } else { prec };
                self.expr(l, left_min);
                self.w(&format!(" {} ", op.symbol()));
                self.expr(r, prec + 1);
                if wrap {
                    self.w(")");
                }
            }
        }
    }
}

fn starts_with_minus(e: &Expr) -> bool {
    match e {
        Expr::Lit(Value::Int(n)) => *n < 0,
        Expr::Unary(UnOp::Neg, _) => true,
        Expr::Binary(_, l, _) => starts_with_minus(l),
        _ => false,
    }
}

fn is_plain_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s)
}
