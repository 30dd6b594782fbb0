use coop_core::check::{check_program, describe_bindings};
use coop_core::eval::run_pure;
use coop_core::subst::alpha_equal_user;
use coop_core::parse::{parse_program, parse_program_with, print_program, ParseOptions};

fn rule(src: &str) -> String {
    match parse_program(src) {
        Err(d) => d.rule,
        Ok(p) => check_program(&p).errors().first().map(|d| d.rule.clone()).unwrap_or_default(),
    }
}

fn run(src: &str) -> String {
    let c = check_program(&parse_program(src).unwrap_or_else(|d| panic!("{d}")));
    assert!(c.is_ok(), "{:?}", c.errors());
    run_pure(c.elaborated.as_ref().unwrap()).outcome.unwrap().to_string()
}

#[test]
fn main_may_start_with_let() {
    assert_eq!(run("let x = (return 1) in return (x + 1)\n"), "return 2");
    assert_eq!(run("let r = {} @ int\nlet x = using r @ 0 run return 1 finally { return x @ c -> return (x, c) } in return x\n"), "return (1, 0)");
}

#[test]
fn bindings_are_typed_in_order() {
    let src = "let f = fun (x : int) -> return (x + 1)\nlet y = f 2\nreturn y\n";
    let c = check_program(&parse_program(src).unwrap());
    assert_eq!(describe_bindings(&c), ["f : int -> int ! ({}, {})", "y : int"]);
    assert_eq!(run(src), "return 3");
}

#[test]
fn empty_program_has_no_main() {
    let d = parse_program("# nothing\n").unwrap_err();
    assert_eq!(d.message, "no main computation");
}

#[test]
fn duplicate_declarations_are_rejected() {
    assert_eq!(rule("exception e\nsignal e\nreturn 1\n"), "Parse-Duplicate");
}

#[test]
fn strict_values_rejects_hoisting() {
    let src = "operation tick : unit ~> int\nreturn (tick (), 1)\n";
    assert!(parse_program(src).is_ok());
    let strict = ParseOptions { strict_values: true, ..ParseOptions::default() };
    assert_eq!(parse_program_with(src, strict).unwrap_err().rule, "Parse-Value");
}

#[test]
fn hoisting_evaluates_left_to_right() {
    let src = "\
operation tick : unit ~> int
let r = { tick x -> getenv (c. setenv (c + 1, return c)) } @ int
using r @ 0 run return (tick (), tick ())
finally { return x @ c -> return x }
";
    assert_eq!(run(src), "return (0, 1)");
}

#[test]
fn printing_round_trips_through_the_parser() {
    let src = "\
exception e
operation tick : unit ~> int ! {e}
let r = { tick x -> getenv (c. setenv (c + 1, return c)) } @ int
using r @ 0 run (try tick () with { return y -> return y, raise e -> return 0 })
finally { return x @ c -> return (x, c) }
";
    let p = parse_program(src).unwrap();
    let printed = print_program(&p);
    let again = parse_program(&printed).unwrap_or_else(|d| panic!("{d}\n{printed}"));
    assert!(alpha_equal_user(&p.assembled(), &again.assembled()), "{printed}");
}

#[test]
fn checker_rules_are_named() {
    assert_eq!(rule("return (1 + \"a\")\n"), "TyValue-Const");
    assert_eq!(rule("signal s\nkill s\n"), "Parse-Mode");
    assert_eq!(rule("raise nope\n"), "Parse-Undeclared");
    assert_eq!(rule("return x\n"), "Parse-Undeclared");
}

#[test]
fn unreachable_switch_state_accepts_any_new_state() {
    let src = "\
exception ugh
try raise ugh with {
  return x -> kernel setenv (1, return 0) @ x finally { return y @ c -> return y },
  raise ugh -> return 0
}
";
    assert_eq!(run(src), "return 0");
}
