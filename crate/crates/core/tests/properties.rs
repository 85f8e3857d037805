mod common;

use std::collections::BTreeSet;

use cmod_core::ast::{
    desugar, free_procedure_names, CallPattern, Declaration, ElemType, Expr, MacroDef, Statement,
    Value,
};
use cmod_core::machine::{FailureKind, Machine};
use cmod_core::macro_env::{rename, MacroEnv};
use cmod_core::region::{RegionEvent, RegionFault, RegionStack, Store};
use cmod_core::syntax::parser::parse_statement;
use cmod_core::syntax::printer;
use cmod_core::trace::RuleCounter;
use common::*;
use proptest::prelude::*;

fn seeded_machine() -> Machine {
    let env = MacroEnv::seeded([
        MacroDef::new(
            "M",
            Declaration::closed_clause(
                CallPattern::new("p", &[]),
                Statement::assign("x", Expr::int(1)),
            ),
        ),
        MacroDef::new(
            "m",
            Declaration::closed_clause(CallPattern::new("q", &["a"]), Statement::True),
        ),
    ]);
    Machine::with_macros(env).max_depth(40)
}

fn all_names(d: &Declaration, out: &mut BTreeSet<String>) {
    match d {
        Declaration::Clause(h, b) => {
            out.insert(h.name.clone());
            stmt_names(b, out);
        }
        Declaration::And(a, b) => {
            all_names(a, out);
            all_names(b, out);
        }
        Declaration::Forall(_, d) => all_names(d, out),
        Declaration::MacroRef(_) => {}
        Declaration::Rename(a, b, d) => {
            out.insert(a.clone());
            out.insert(b.clone());
            all_names(d, out);
        }
    }
}

fn stmt_names(s: &Statement, out: &mut BTreeSet<String>) {
    match s {
        Statement::Call(n, _) => {
            out.insert(n.clone());
        }
        Statement::Seq(a, b) | Statement::If(_, a, b) => {
            stmt_names(a, out);
            stmt_names(b, out);
        }
        Statement::Implication(d, g) => {
            all_names(d, out);
            stmt_names(g, out);
        }
        Statement::ModuleImplication(_, g) | Statement::AllocScope { body: g, .. } => {
            stmt_names(g, out)
        }
        Statement::MacroScope(defs, g) => {
            for def in defs {
                all_names(&def.body, out);
            }
            stmt_names(g, out);
        }
        Statement::Switch(_, cases, d) => {
            for (_, b) in cases {
                stmt_names(b, out);
            }
            stmt_names(d, out);
        }
        _ => {}
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printed_statements_parse_back(s in statement()) {
        let text = printer::statement(&s);
        let back = parse_statement(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, s, "{}", text);
    }

    #[test]
    fn inline_rendering_parses_back(s in statement()) {
        let text = printer::statement_inline(&s);
        prop_assert!(!text.contains('\n'));
        prop_assert_eq!(parse_statement(&text).unwrap(), s);
    }

    #[test]
    fn desugar_is_idempotent(s in statement()) {
        let once = desugar(&s);
        prop_assert_eq!(desugar(&once), once);
    }

    #[test]
    fn desugared_program_behaves_the_same(s in statement()) {
        let a = seeded_machine().execute(&s).map(|_| ());
        let mut m1 = seeded_machine();
        let r1 = m1.execute(&s);
        let mut m2 = seeded_machine();
        let r2 = m2.execute(&desugar(&s));
        prop_assert_eq!(r1.is_ok(), r2.is_ok());
        prop_assert_eq!(a.is_ok(), r1.is_ok());
        prop_assert_eq!(&m1.store, &m2.store);
        prop_assert_eq!(&m1.output, &m2.output);
    }

    #[test]
    fn rename_round_trips_with_a_fresh_name(d in declaration(), old in prop::sample::select(PROCS)) {
        let mut names = BTreeSet::new();
        all_names(&d, &mut names);
        prop_assume!(!names.contains("fresh"));
        let there = rename(&d, old, "fresh");
        prop_assert_eq!(rename(&there, "fresh", old), d);
    }

    #[test]
    fn rename_to_self_is_identity(d in declaration(), a in prop::sample::select(PROCS)) {
        prop_assert_eq!(rename(&d, a, a), d);
    }

    #[test]
    fn scopes_leave_stacks_balanced(s in statement()) {
        let mut m = seeded_machine();
        let macros_before = m.macros.clone();
        let regions_before = m.regions.live_count();
        let mut counter = RuleCounter::default();
        let result = m.execute_with(&s, &mut counter);
        for scope in &counter.scopes {
            prop_assert!(scope.balanced(), "{:?}", scope);
        }
        prop_assert!(m.modules.is_empty());
        prop_assert_eq!(&m.macros, &macros_before);
        prop_assert_eq!(m.regions.live_count(), regions_before);
        if result.is_ok() {
            prop_assert_eq!(m.depth, 0);
        }
    }

    #[test]
    fn innermost_declaration_wins(bodies in prop::collection::vec(0i64..1000, 2..5)) {
        // p() = x = b0 => (p() = x = b1 => ... p())
        let mut g = Statement::call("p", vec![]);
        for b in bodies.iter().rev() {
            let d = Declaration::closed_clause(CallPattern::new("p", &[]), Statement::assign("x", Expr::int(*b)));
            g = Statement::implication(d, g);
        }
        let mut m = Machine::new();
        m.execute(&g).unwrap();
        prop_assert_eq!(m.store.read("x"), Some(&Value::Int(*bodies.last().unwrap())));
    }

    #[test]
    fn sequence_keeps_last_write(a in -100i64..100, b in -100i64..100) {
        let mut m = Machine::new();
        m.execute(&Statement::seq(Statement::assign("x", Expr::int(a)), Statement::assign("x", Expr::int(b)))).unwrap();
        prop_assert_eq!(m.store.read("x"), Some(&Value::Int(b)));
    }

    #[test]
    fn effects_survive_the_pop(d in clause(), v in -50i64..50) {
        let mut m = seeded_machine();
        m.execute(&Statement::implication(d, Statement::assign("kept", Expr::int(v)))).unwrap();
        prop_assert_eq!(m.store.read("kept"), Some(&Value::Int(v)));
        prop_assert!(m.modules.is_empty());
    }

    #[test]
    fn define_then_pop_restores(base in macro_defs(), more in macro_defs()) {
        let mut env = MacroEnv::seeded(base);
        let before = env.clone();
        env.push_frame(more.clone());
        for def in &more {
            prop_assert!(env.contains(&def.name));
        }
        prop_assert_eq!(env.lookup(&more[0].name).unwrap(), &more[0].body);
        env.pop_frame();
        prop_assert_eq!(env, before);
    }

    #[test]
    fn free_names_cover_callable_heads(d in declaration()) {
        // every name the declaration can answer is reported as declared
        let env = MacroEnv::seeded([MacroDef::new("m", Declaration::closed_clause(CallPattern::new("q", &[]), Statement::True))]);
        let names = free_procedure_names(&d, Some(&env));
        for p in PROCS {
            let mut m = Machine::with_macros(env.clone()).max_depth(5);
            m.modules.push(std::sync::Arc::new(d.clone()));
            let call = cmod_core::machine::CallSite::new(p, vec![]);
            if let Err(f) = m.resolve_call(&call) {
                if f.kind == FailureKind::NoMatchingClause && f.detail == format!("{p}/0") {
                    prop_assert!(!names.contains(*p));
                }
            } else {
                prop_assert!(names.contains(*p));
            }
        }
    }

    #[test]
    fn regions_free_in_lifo_order(lens in prop::collection::vec(0i64..5, 1..6), writes in prop::collection::vec((0usize..6, 0i64..5, -9i64..9), 0..20)) {
        let mut rs = RegionStack::new();
        let mut store = Store::new();
        store.assign("x", Value::Int(1));
        let handles: Vec<_> = lens.iter().map(|n| rs.alloc(ElemType::Int, *n).unwrap()).collect();
        for (which, idx, v) in writes {
            let h = handles[which % handles.len()];
            let r = rs.write(h, idx, Value::Int(v));
            prop_assert_eq!(r.is_ok(), idx < lens[which % handles.len()]);
        }
        // writes never touch the store
        prop_assert_eq!(store.read("x"), Some(&Value::Int(1)));
        for h in handles.iter().rev() {
            rs.free(*h);
        }
        let mut open = Vec::new();
        for ev in rs.log() {
            match ev {
                RegionEvent::Alloc(id) => open.push(*id),
                RegionEvent::Free(id) => prop_assert_eq!(open.pop(), Some(*id)),
            }
        }
        for h in handles {
            prop_assert_eq!(rs.read(h, 0), Err(RegionFault::Dangling(h)));
        }
    }
}
