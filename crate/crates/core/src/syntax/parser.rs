//! Recursive-descent parser producing statements and universally closed
//! declarations.
//!
//! Scoped statements (`D => G`, `/m => G`, `p = new int[n] => G`,
//! `macro ... in G`) take everything up to the enclosing closing
//! parenthesis as their body, so `;` binds tighter than `=>`. Clause bodies
//! are sequences of simple statements; a scoped statement inside a clause
//! body needs parentheses. Declarations are told apart from statements by
//! bracket-matched lookahead, so there is no backtracking.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ast::{
    BinOp, CallPattern, Declaration, ElemType, Expr, MacroDef, Name, Statement, Term, UnOp, Value,
};
use crate::syntax::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: BTreeSet<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        let exp: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        match exp.len() {
            0 => write!(f, "unexpected {}", self.found),
            1 => write!(f, "expected {}, found {}", exp[0], self.found),
            _ => write!(
                f,
                "expected one of {}, found {}",
                exp.join(", "),
                self.found
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
}

impl ParseError {
    /// True when the input ran out before the construct was complete.
    pub fn at_end_of_input(&self) -> bool {
        self.found == "end of input"
    }
}

impl SyntaxError {
    pub fn is_incomplete(&self) -> bool {
        matches!(self, SyntaxError::Parse(e) if e.at_end_of_input())
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Lex(e) => (e.line, e.column),
            SyntaxError::Parse(e) => (e.line, e.column),
        }
    }
}

/// A parsed source file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceProgram {
    pub modules: Vec<(Name, Declaration)>,
    pub macros: Vec<MacroDef>,
    pub main: Statement,
}

/// One top-level form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Module(Name, Declaration),
    Macros(Vec<MacroDef>),
    Statement(Statement),
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_program(tokens: &[Token]) -> Result<SourceProgram, ParseError> {
    let mut p = Parser::new(tokens);
    let mut modules: Vec<(Name, Declaration)> = Vec::new();
    let mut macros = Vec::new();
    let mut main: Option<Statement> = None;
    while !p.at_end() {
        let tok = p.peek().clone();
        match p.item()? {
            Item::Module(name, d) => {
                if modules.iter().any(|(n, _)| *n == name) {
                    return Err(p.error_at(&tok, format!("module {name} is already defined")));
                }
                modules.push((name, d));
            }
            Item::Macros(defs) => macros.extend(defs),
            Item::Statement(s) => {
                if main.is_some() {
                    return Err(p.error_at(&tok, "a single main statement"));
                }
                main = Some(s);
            }
        }
    }
    let Some(main) = main else {
        return Err(p.expected("statement"));
    };
    Ok(SourceProgram {
        modules,
        macros,
        main,
    })
}

/// Parses any number of top-level forms with no constraint on how many
/// statements appear.
pub fn parse_items(tokens: &[Token]) -> Result<Vec<Item>, ParseError> {
    let mut p = Parser::new(tokens);
    let mut items = Vec::new();
    while !p.at_end() {
        items.push(p.item()?);
    }
    Ok(items)
}

pub fn parse_source(source: &str) -> Result<SourceProgram, SyntaxError> {
    let toks = tokenize(source)?;
    Ok(parse_program(&toks)?)
}

pub fn parse_items_source(source: &str) -> Result<Vec<Item>, SyntaxError> {
    let toks = tokenize(source)?;
    Ok(parse_items(&toks)?)
}

/// Parses a single statement, the whole input.
pub fn parse_statement(source: &str) -> Result<Statement, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser::new(&toks);
    let s = p.stmt()?;
    p.expect_end()?;
    Ok(s)
}

/// Parses a single declaration, the whole input.
pub fn parse_declaration(source: &str) -> Result<Declaration, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser::new(&toks);
    let d = p.decl()?;
    p.expect_end()?;
    Ok(d)
}

pub fn parse_expression(source: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser::new(&toks);
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    /// Variables bound by enclosing clauses and `forall`s.
    bound: Vec<Name>,
    /// Handle variables of enclosing allocation scopes.
    handles: Vec<Name>,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token]) -> Parser<'t> {
        assert!(
            toks.last().is_some_and(|t| t.kind == TokenKind::End),
            "token stream must end with the end marker"
        );
        Parser {
            toks,
            pos: 0,
            bound: Vec::new(),
            handles: Vec::new(),
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)]
    }

    fn at_end(&self) -> bool {
        self.peek().kind == TokenKind::End
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokenKind::End {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, expected: impl Into<String>) -> ParseError {
        ParseError {
            line: tok.line,
            column: tok.column,
            expected: BTreeSet::from([expected.into()]),
            found: tok.to_string(),
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        self.error_at(self.peek(), what)
    }

    fn expected_any(&self, what: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError {
            line: tok.line,
            column: tok.column,
            expected: what.iter().map(|s| s.to_string()).collect(),
            found: tok.to_string(),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, k: &str) -> bool {
        if self.peek().is_keyword(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{p}`")))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> PResult<()> {
        if self.eat_keyword(k) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{k}`")))
        }
    }

    fn expect_end(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.expected("end of input"))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.bump().lexeme)
        } else {
            Err(self.expected("identifier"))
        }
    }

    /// Index of the token after the bracket group opening at `self.pos + k`.
    fn skip_group(&self, k: usize) -> usize {
        let (open, close) = match self.peek_at(k).lexeme.as_str() {
            "(" => ("(", ")"),
            "{" => ("{", "}"),
            "[" => ("[", "]"),
            _ => return k,
        };
        let mut depth = 0usize;
        let mut i = k;
        loop {
            let t = self.peek_at(i);
            if t.kind == TokenKind::End {
                return i;
            }
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            i += 1;
        }
    }

    /// Whether a declaration starts here rather than a statement.
    fn at_declaration(&self) -> bool {
        let t = self.peek();
        if t.is_keyword("forall") || t.is_keyword("ren") || t.is_punct("/") {
            return true;
        }
        if t.kind == TokenKind::Ident && self.peek_at(1).is_punct("(") {
            return self.peek_at(self.skip_group(1)).is_punct("=");
        }
        if t.is_punct("(") {
            let after = self.peek_at(self.skip_group(0));
            return after.is_punct("=>") || after.is_keyword("and");
        }
        false
    }

    fn starts_unit(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokenKind::Ident => true,
            TokenKind::Keyword => matches!(
                t.lexeme.as_str(),
                "true" | "print" | "if" | "switch" | "macro" | "forall" | "ren"
            ),
            TokenKind::Punct => t.lexeme == "(" || t.lexeme == "/",
            _ => false,
        }
    }

    // ---- items ----

    fn item(&mut self) -> PResult<Item> {
        if self.eat_keyword("module") {
            let name = self.ident()?;
            self.expect_punct(".")?;
            let d = self.decl()?;
            self.expect_keyword("end")?;
            return Ok(Item::Module(name, d));
        }
        if self.peek().is_keyword("macro") {
            // `macro M` defines at top level, `macro M in G` is a statement
            let save = self.pos;
            self.bump();
            let defs = self.macro_defs()?;
            if !self.peek().is_keyword("in") {
                self.eat_punct(".");
                return Ok(Item::Macros(defs));
            }
            self.pos = save;
        }
        Ok(Item::Statement(self.stmt()?))
    }

    fn macro_defs(&mut self) -> PResult<Vec<MacroDef>> {
        let mut defs = vec![self.macro_def()?];
        while self.eat_keyword("and") {
            defs.push(self.macro_def()?);
        }
        Ok(defs)
    }

    fn macro_def(&mut self) -> PResult<MacroDef> {
        self.expect_punct("/")?;
        let name = self.ident()?;
        self.expect_punct("=")?;
        self.expect_punct("{")?;
        let body = self.decl()?;
        self.expect_punct("}")?;
        Ok(MacroDef { name, body })
    }

    // ---- statements ----

    /// A full statement: a scoped statement, or a unit optionally followed by
    /// `;` and more.
    fn stmt(&mut self) -> PResult<Statement> {
        if let Some(s) = self.scoped()? {
            return Ok(s);
        }
        let first = self.unit()?;
        if self.eat_punct(";") && (self.starts_unit() || self.at_declaration()) {
            let rest = self.stmt()?;
            return Ok(Statement::seq(first, rest));
        }
        Ok(first)
    }

    fn scoped(&mut self) -> PResult<Option<Statement>> {
        let t = self.peek().clone();
        if t.is_keyword("macro") {
            self.bump();
            let defs = self.macro_defs()?;
            self.expect_keyword("in")?;
            let body = self.stmt()?;
            return Ok(Some(Statement::MacroScope(defs, Box::new(body))));
        }
        if t.is_punct("/")
            && self.peek_at(1).kind == TokenKind::Ident
            && self.peek_at(2).is_punct("=>")
        {
            self.bump();
            let name = self.bump().lexeme;
            self.bump();
            let body = self.stmt()?;
            return Ok(Some(Statement::ModuleImplication(name, Box::new(body))));
        }
        if t.kind == TokenKind::Ident && self.peek_at(1).is_punct("=>") {
            self.bump();
            self.bump();
            let body = self.stmt()?;
            return Ok(Some(Statement::ModuleImplication(t.lexeme, Box::new(body))));
        }
        if t.kind == TokenKind::Ident
            && self.peek_at(1).is_punct("=")
            && self.peek_at(2).is_keyword("new")
        {
            return self.alloc_scope().map(Some);
        }
        if self.at_declaration() {
            let d = self.decl()?;
            self.expect_punct("=>")?;
            let body = self.stmt()?;
            return Ok(Some(Statement::implication(d, body)));
        }
        Ok(None)
    }

    fn alloc_scope(&mut self) -> PResult<Statement> {
        let handle = self.ident()?;
        self.expect_punct("=")?;
        self.expect_keyword("new")?;
        let elem = self.elem_type()?;
        self.expect_punct("[")?;
        let len = self.expr()?;
        self.expect_punct("]")?;
        self.expect_punct("=>")?;
        self.handles.push(handle.clone());
        let body = self.stmt();
        self.handles.pop();
        Ok(Statement::AllocScope {
            handle,
            elem,
            len,
            body: Box::new(body?),
        })
    }

    fn elem_type(&mut self) -> PResult<ElemType> {
        if self.eat_keyword("int") {
            Ok(ElemType::Int)
        } else {
            Err(self.expected("element type `int`"))
        }
    }

    /// Simple statements joined by `;`, as in clause bodies.
    fn body(&mut self) -> PResult<Statement> {
        let first = self.unit()?;
        if self.eat_punct(";") && self.starts_unit() && !self.at_declaration() {
            let rest = self.body()?;
            return Ok(Statement::seq(first, rest));
        }
        Ok(first)
    }

    fn unit(&mut self) -> PResult<Statement> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Keyword => match t.lexeme.as_str() {
                "true" => {
                    self.bump();
                    Ok(Statement::True)
                }
                "print" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let e = self.expr()?;
                    self.expect_punct(")")?;
                    Ok(Statement::Print(e))
                }
                "if" => {
                    self.bump();
                    let c = self.expr()?;
                    let then = self.unit()?;
                    let otherwise = if self.eat_keyword("else") {
                        self.unit()?
                    } else {
                        Statement::True
                    };
                    Ok(Statement::if_else(c, then, otherwise))
                }
                "switch" => self.switch(),
                _ => Err(self.expected("statement")),
            },
            TokenKind::Punct if t.lexeme == "(" => {
                self.bump();
                let s = self.stmt()?;
                self.expect_punct(")")?;
                Ok(s)
            }
            TokenKind::Ident => {
                let name = self.bump().lexeme;
                if self.peek().is_punct("(") {
                    let args = self.args()?;
                    return Ok(Statement::Call(name, args));
                }
                if self.peek().is_punct("[") {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect_punct("]")?;
                    self.expect_punct("=")?;
                    let v = self.expr()?;
                    return Ok(Statement::IndexAssign(Expr::Var(name), idx, v));
                }
                if self.peek().is_punct("=") {
                    if self.handles.contains(&name) && !self.bound.contains(&name) {
                        return Err(self.error_at(
                            &t,
                            format!("an assignable variable (`{name}` is a read-only handle)"),
                        ));
                    }
                    self.bump();
                    let e = self.expr()?;
                    return Ok(Statement::Assign(name, e));
                }
                Err(self.expected_any(&["`(`", "`=`", "`[`", "`=>`"]))
            }
            _ => Err(self.expected("statement")),
        }
    }

    fn switch(&mut self) -> PResult<Statement> {
        self.expect_keyword("switch")?;
        self.expect_punct("(")?;
        let scrutinee = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases: Vec<(Value, Statement)> = Vec::new();
        let mut seen = HashSet::new();
        let mut default = Statement::True;
        loop {
            if self.eat_keyword("case") {
                let tok = self.peek().clone();
                let label = self.case_label()?;
                if !seen.insert(label.clone()) {
                    return Err(self.error_at(&tok, "a case label not used before"));
                }
                self.expect_punct(":")?;
                cases.push((label, self.case_body()?));
            } else if self.eat_keyword("default") {
                self.expect_punct(":")?;
                default = self.case_body()?;
                self.expect_punct("}")?;
                break;
            } else if self.eat_punct("}") {
                break;
            } else {
                return Err(self.expected_any(&["`case`", "`default`", "`}`"]));
            }
        }
        Ok(Statement::Switch(scrutinee, cases, Box::new(default)))
    }

    fn case_label(&mut self) -> PResult<Value> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Ident => {
                self.bump();
                Ok(Value::Atom(t.lexeme))
            }
            TokenKind::Int => {
                self.bump();
                self.int_value(&t, false)
            }
            TokenKind::Punct if t.lexeme == "-" && self.peek_at(1).kind == TokenKind::Int => {
                self.bump();
                let n = self.bump();
                self.int_value(&n, true)
            }
            _ => Err(self.expected_any(&["atom", "integer"])),
        }
    }

    /// `(unit ;)* [break ;]`; cases never fall through.
    fn case_body(&mut self) -> PResult<Statement> {
        let mut units = Vec::new();
        loop {
            let t = self.peek();
            if t.is_keyword("break") {
                self.bump();
                self.expect_punct(";")?;
                break;
            }
            if t.is_keyword("case") || t.is_keyword("default") || t.is_punct("}") {
                break;
            }
            units.push(self.unit()?);
            self.expect_punct(";")?;
        }
        Ok(Statement::seq_all(units))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.arg()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            if !self.eat_punct(",") {
                return Err(self.expected_any(&["`,`", "`)`"]));
            }
        }
    }

    /// A bare identifier argument is a variable if a clause parameter,
    /// `forall` or region handle of that name is in scope, and an atom
    /// otherwise.
    fn arg(&mut self) -> PResult<Expr> {
        let t = self.peek();
        if t.kind == TokenKind::Ident
            && (self.peek_at(1).is_punct(",") || self.peek_at(1).is_punct(")"))
        {
            let name = self.bump().lexeme;
            if self.bound.contains(&name) || self.handles.contains(&name) {
                return Ok(Expr::Var(name));
            }
            return Ok(Expr::Lit(Value::Atom(name)));
        }
        self.expr()
    }

    // ---- declarations ----

    fn decl(&mut self) -> PResult<Declaration> {
        let first = self.decl_unit()?;
        if self.eat_keyword("and") {
            let rest = self.decl()?;
            return Ok(Declaration::and(first, rest));
        }
        Ok(first)
    }

    fn decl_unit(&mut self) -> PResult<Declaration> {
        let t = self.peek().clone();
        if self.eat_keyword("forall") {
            let x = self.ident()?;
            self.bound.push(x.clone());
            let d = self.decl_unit();
            self.bound.pop();
            return Ok(Declaration::Forall(x, Box::new(d?)));
        }
        if self.eat_keyword("ren") {
            self.expect_punct("(")?;
            let old = self.ident()?;
            self.expect_punct(",")?;
            let new = self.ident()?;
            self.expect_punct(")")?;
            let d = self.decl_unit()?;
            return Ok(Declaration::Rename(old, new, Box::new(d)));
        }
        if self.eat_punct("/") {
            return Ok(Declaration::MacroRef(self.ident()?));
        }
        if self.eat_punct("(") {
            let d = self.decl()?;
            self.expect_punct(")")?;
            return Ok(d);
        }
        if t.kind == TokenKind::Ident {
            return self.clause();
        }
        Err(self.expected_any(&["clause", "`forall`", "`ren`", "`/`", "`(`"]))
    }

    fn clause(&mut self) -> PResult<Declaration> {
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut formals: Vec<Name> = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let tok = self.peek().clone();
                let f = self.ident()?;
                if formals.contains(&f) {
                    return Err(self.error_at(&tok, "distinct parameter names"));
                }
                formals.push(f);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        self.expect_punct("=")?;
        let n = self.bound.len();
        self.bound.extend(formals.iter().cloned());
        let body = self.body();
        self.bound.truncate(n);
        let head = CallPattern {
            name,
            params: formals.into_iter().map(Term::Var).collect(),
        };
        Ok(Declaration::closed_clause(head, body?))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        let t = self.peek();
        if t.kind != TokenKind::Punct {
            return None;
        }
        Some(match t.lexeme.as_str() {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing. Comparisons do not chain.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let tok = self.bump();
            let rhs = self.binary(prec + 1)?;
            self.check_handle_operand(op, &lhs, &tok)?;
            self.check_handle_operand(op, &rhs, &tok)?;
            lhs = Expr::binary(op, lhs, rhs);
            if prec == 3 {
                if let Some(next) = self.binop() {
                    if next.precedence() == 3 {
                        return Err(self.expected("operator other than a comparison"));
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn check_handle_operand(&self, op: BinOp, e: &Expr, at: &Token) -> PResult<()> {
        if let Expr::Var(x) = e {
            if (op.is_arithmetic() || op.is_ordering())
                && self.handles.contains(x)
                && !self.bound.contains(x)
            {
                return Err(self.error_at(at, format!("no arithmetic on handle `{x}`")));
            }
        }
        Ok(())
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().is_punct("-") {
            self.bump();
            if self.peek().kind == TokenKind::Int {
                let t = self.bump();
                return self.postfix(Expr::Lit(self.int_value(&t, true)?));
            }
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        if self.eat_punct("!") {
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        let p = self.primary()?;
        self.postfix(p)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.eat_punct("[") {
            let i = self.expr()?;
            self.expect_punct("]")?;
            e = Expr::Index(Box::new(e), Box::new(i));
        }
        Ok(e)
    }

    fn int_value(&self, t: &Token, negative: bool) -> PResult<Value> {
        let text = if negative {
            format!("-{}", t.lexeme)
        } else {
            t.lexeme.clone()
        };
        text.parse::<i64>()
            .map(Value::Int)
            .map_err(|_| self.error_at(t, "integer within 64-bit range"))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Int => {
                self.bump();
                Ok(Expr::Lit(self.int_value(&t, false)?))
            }
            TokenKind::Str => {
                self.bump();
                Ok(Expr::Lit(Value::Str(t.lexeme)))
            }
            TokenKind::Ident => {
                self.bump();
                Ok(Expr::Var(t.lexeme))
            }
            TokenKind::Keyword if t.lexeme == "true" || t.lexeme == "false" => {
                self.bump();
                Ok(Expr::Lit(Value::Bool(t.lexeme == "true")))
            }
            TokenKind::Punct if t.lexeme == "'" => {
                self.bump();
                let a = self.peek().clone();
                if matches!(a.kind, TokenKind::Ident | TokenKind::Keyword) {
                    self.bump();
                    Ok(Expr::Lit(Value::Atom(a.lexeme)))
                } else {
                    Err(self.expected("atom name"))
                }
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.expected("expression")),
        }
    }
}
