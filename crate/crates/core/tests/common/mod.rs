//! Random program generators shared by the property tests.
#![allow(dead_code)]

use std::path::PathBuf;

use cmod_core::ast::{BinOp, CallPattern, Declaration, Expr, MacroDef, Statement, UnOp, Value};
use proptest::prelude::*;

pub const PROCS: &[&str] = &["p", "q", "r"];
pub const VARS: &[&str] = &["x", "y", "z"];
pub const ATOMS: &[&str] = &["tom", "kim", "sue"];
pub const MACROS: &[&str] = &["m", "n"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Corpus files that are meant to parse, sorted by name.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cmod"))
        .collect();
    files.sort();
    files
}

pub fn error_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir().join("errors"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
}

fn name(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(pool).prop_map(str::to_string)
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-20i64..20).prop_map(Value::Int),
        any::<bool>().prop_map(Value::Bool),
        name(ATOMS).prop_map(Value::Atom),
        "[a-z ]{0,4}".prop_map(Value::Str),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![value().prop_map(Expr::Lit), name(VARS).prop_map(Expr::Var)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0usize..12).prop_map(|(l, r, i)| {
                use BinOp::*;
                let op = [Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div][i];
                Expr::binary(op, l, r)
            }),
            (inner, any::<bool>()).prop_map(|(e, neg)| {
                Expr::Unary(if neg { UnOp::Neg } else { UnOp::Not }, Box::new(e))
            }),
        ]
    })
}

/// Call arguments: values, plain variables, or small sums.
fn arg(formals: Vec<String>) -> impl Strategy<Value = Expr> {
    let mut vars: Vec<String> = VARS.iter().map(|s| s.to_string()).collect();
    vars.extend(formals);
    prop_oneof![
        value().prop_map(Expr::Lit),
        prop::sample::select(vars.clone()).prop_map(Expr::Var),
        (prop::sample::select(vars), -3i64..3).prop_map(|(v, n)| Expr::binary(
            BinOp::Add,
            Expr::Var(v),
            Expr::int(n)
        )),
    ]
}

fn simple(formals: Vec<String>) -> impl Strategy<Value = Statement> {
    prop_oneof![
        Just(Statement::True),
        (name(VARS), expr()).prop_map(|(x, e)| Statement::Assign(x, e)),
        (name(PROCS), prop::collection::vec(arg(formals), 0..3))
            .prop_map(|(p, a)| Statement::Call(p, a)),
        expr().prop_map(Statement::Print),
    ]
}

/// A universally closed clause with distinct formals.
pub fn clause() -> impl Strategy<Value = Declaration> {
    (name(PROCS), 0usize..3).prop_flat_map(|(p, arity)| {
        let formals: Vec<String> = ["a", "b", "c"][..arity]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let body =
            prop::collection::vec(simple(formals.clone()), 1..3).prop_map(Statement::seq_all);
        body.prop_map(move |b| {
            let f: Vec<&str> = formals.iter().map(String::as_str).collect();
            Declaration::closed_clause(CallPattern::new(&p, &f), b)
        })
    })
}

pub fn declaration() -> impl Strategy<Value = Declaration> {
    prop_oneof![4 => clause(), 1 => name(MACROS).prop_map(Declaration::MacroRef)].prop_recursive(
        3,
        8,
        2,
        |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Declaration::and(a, b)),
                (name(PROCS), name(PROCS), inner).prop_map(|(a, b, d)| Declaration::Rename(
                    a,
                    b,
                    Box::new(d)
                )),
            ]
        },
    )
}

pub fn macro_defs() -> impl Strategy<Value = Vec<MacroDef>> {
    prop::collection::vec((name(MACROS), declaration()), 1..3).prop_map(|v| {
        v.into_iter()
            .map(|(n, d)| MacroDef { name: n, body: d })
            .collect()
    })
}

/// Statements in the surface language, including every scoped form.
pub fn statement() -> impl Strategy<Value = Statement> {
    simple(Vec::new()).prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Statement::seq(a, b)),
            3 => (declaration(), inner.clone()).prop_map(|(d, g)| Statement::implication(d, g)),
            1 => (name(&["M", "N"]), inner.clone()).prop_map(|(n, g)| Statement::module_implication(&n, g)),
            1 => (macro_defs(), inner.clone()).prop_map(|(m, g)| Statement::MacroScope(m, Box::new(g))),
            1 => (name(&["h", "k"]), 0i64..4, inner.clone()).prop_map(|(h, n, g)| Statement::AllocScope {
                handle: h,
                elem: cmod_core::ast::ElemType::Int,
                len: Expr::int(n),
                body: Box::new(g),
            }),
            2 => (expr(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| Statement::if_else(c, t, e)),
            1 => (expr(), prop::collection::vec(inner.clone(), 1..3), inner).prop_map(|(c, bodies, d)| {
                let cases = bodies.into_iter().enumerate().map(|(i, b)| (Value::Int(i as i64), b)).collect();
                Statement::Switch(c, cases, Box::new(d))
            }),
        ]
    })
}
