use coop_core::check::{infer_user, Ctx};
use coop_core::criteria::instrument;
use coop_core::gen::{observe_eval, observe_tree, test_tables, Gen, Observed, Script};
use coop_core::ground::GroundValue;
use coop_core::names::{name, Fresh};
use coop_core::oracle::{denote_user, OracleError, Tree, UPay};
use coop_core::parse::{parse_program, print_program};
use coop_core::subst::{alpha_equal_user, free_vars_value, subst_user, free_vars};
use coop_core::syntax::{Program, Term, Value};
use proptest::prelude::*;

fn program(seed: u64) -> coop_core::syntax::UserComp {
    let mut g = Gen::new(seed);
    if seed.is_multiple_of(2) {
        g.pure_program(5).0
    } else {
        g.effectful_program(4).0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_programs_typecheck(seed in any::<u64>()) {
        let m = program(seed);
        prop_assert!(infer_user(&test_tables(), &Ctx::new(), &m).is_ok());
    }

    #[test]
    fn well_typed_programs_do_not_get_stuck(seed in any::<u64>(), script in any::<u64>()) {
        let tables = test_tables();
        let (o, s) = observe_eval(&mut Script::new(&tables, script), &program(seed));
        prop_assert!(!matches!(o, Observed::Error(_)), "{o}");
        prop_assert_eq!(s.affinity_violations, 0);
    }

    #[test]
    fn evaluator_agrees_with_oracle(seed in any::<u64>(), script in any::<u64>()) {
        let tables = test_tables();
        let m = program(seed);
        let (ev, _) = observe_eval(&mut Script::new(&tables, script), &m);
        match denote_user(&tables, &m) {
            Ok(t) => prop_assert_eq!(ev, observe_tree(&mut Script::new(&tables, script), &t)),
            Err(OracleError::Fragment(_)) => {}
            Err(e) => prop_assert!(false, "oracle failed: {e}"),
        }
    }

    #[test]
    fn finally_fires_at_most_once_under_kills(seed in any::<u64>(), at in 0usize..6) {
        let tables = test_tables();
        let (_, s) = observe_eval(&mut Script::new(&tables, seed).with_kill_at(at), &program(seed | 1));
        prop_assert!(s.runs.iter().all(|r| r.fired.len() <= 1));
        prop_assert_eq!(s.affinity_violations, 0);
    }

    #[test]
    fn printed_programs_parse_back(seed in any::<u64>()) {
        let p = Program { tables: test_tables(), bindings: Vec::new(), main: program(seed) };
        let src = print_program(&p);
        let back = parse_program(&src).map_err(|d| TestCaseError::fail(format!("{d}\n{src}")))?;
        prop_assert!(alpha_equal_user(&p.main, &back.main), "{}", src);
    }

    #[test]
    fn substitution_only_adds_free_variables_of_the_replacement(seed in any::<u64>(), k in 0i64..3) {
        let m = program(seed);
        let fv = free_vars(&Term::User(m.clone()));
        if let Some(x) = fv.iter().next().cloned().or_else(|| Some(name("unused"))) {
            let v = Value::var(&name("y"));
            let out = free_vars(&Term::User(subst_user(&m, &x, &v, &mut Fresh::new())));
            let mut allowed = fv.clone();
            allowed.remove(&x);
            allowed.extend(free_vars_value(&v));
            prop_assert!(out.is_subset(&allowed));
            let closed = subst_user(&m, &x, &Value::int(k), &mut Fresh::new());
            prop_assert!(!free_vars(&Term::User(closed)).contains(&x));
        }
    }

    #[test]
    fn instrumentation_counts_container_operations(seed in any::<u64>()) {
        let tables = test_tables();
        let m = Gen::new(seed).effectful_program(4).0;
        let (bare, s) = observe_eval(&mut Script::new(&tables, seed), &m);
        prop_assume!(!matches!(bare, Observed::Error(_)));
        let (count, _) = observe_eval(&mut Script::new(&tables, seed), &instrument(&tables, m));
        prop_assert_eq!(count, Observed::Return(GroundValue::Int(s.container_ops as i64)));
    }

    #[test]
    fn tree_bind_has_units(seed in any::<u64>()) {
        let tables = test_tables();
        let mut g = Gen::new(seed);
        let leaves: Vec<UPay<GroundValue>> = (0..3).map(|i| UPay::Val(GroundValue::Int(i))).collect();
        let t = g.tree(&tables.ops, &leaves, 4);
        prop_assert_eq!(t.clone().bind(&mut |p| Ok(Tree::Leaf(p))).unwrap(), t);
    }
}
