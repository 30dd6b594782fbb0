use coop_core::check::check_program;
use coop_core::eval::{run_pure, Outcome};
use coop_core::oracle::{denote_user, Tree, UPay};
use coop_core::parse::parse_program;

const TICK: &str = "\
operation tick : unit ~> int
let r = { tick x -> getenv (c. setenv (c + 1, return c)) } @ int
using r @ 0 run (let a = tick () in let b = tick () in return b)
finally { return x @ c -> return (x, c) }
";

fn eval(src: &str) -> String {
    let p = parse_program(src).unwrap_or_else(|d| panic!("{d}"));
    let c = check_program(&p);
    assert!(c.is_ok(), "{:?}", c.errors());
    let ev = run_pure(c.elaborated.as_ref().unwrap());
    assert_eq!(ev.session.affinity_violations, 0);
    match ev.outcome.expect("evaluation") {
        o @ (Outcome::Return(_) | Outcome::Raise(_) | Outcome::Kill(_)) => o.to_string(),
    }
}

fn denote(src: &str) -> String {
    let p = parse_program(src).unwrap_or_else(|d| panic!("{d}"));
    let c = check_program(&p);
    let t = denote_user(&p.tables, c.elaborated.as_ref().unwrap()).expect("denotation");
    match t {
        Tree::Leaf(p @ (UPay::Val(_) | UPay::Exc(_))) => p.to_string(),
        t => panic!("not a leaf: {t}"),
    }
}

#[test]
fn tick_counter() {
    assert_eq!(eval(TICK), "return (1, 2)");
    assert_eq!(denote(TICK), "return (1, 2)");
}

#[test]
fn kill_in_coop_runs_kill_clause() {
    let src = "\
operation op : unit ~> int
signal s
let r = { op x -> kill s } @ unit
using r @ () run op ()
finally { return x @ c -> return x, kill s -> return 9 }
";
    assert_eq!(eval(src), "return 9");
    assert_eq!(denote(src), "return 9");
}

#[test]
fn getenv_in_kernel_switch() {
    let src = "kernel (getenv (c. return c)) @ 9 finally { return x @ c -> return (x, c) }\n";
    assert_eq!(eval(src), "return (9, 9)");
    assert_eq!(denote(src), "return (9, 9)");
}

#[test]
fn raise_is_a_leaf() {
    let src = "exception e\nraise e : int\n";
    assert_eq!(eval(src), "raise e");
    assert_eq!(denote(src), "raise e");
}
