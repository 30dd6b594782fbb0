//! The example programs shipped with the interpreter, their expected
//! outcomes, and ill-typed variants with the rule that rejects each.

use crate::check::{check_program, CheckedProgram};
use crate::containers::{by_name, check_compatible, Container, FsSim, FsSimConfig};
use crate::diag::Diagnostic;
use crate::eval::{run_toplevel, Outcome, Session};
use crate::parse::{parse_program_with, ParseOptions};
use crate::syntax::Program;

pub struct Example {
    pub name: &'static str,
    pub source: &'static str,
    pub container: &'static str,
    pub fs: Option<FsSimConfig>,
    pub expected: &'static str,
}

pub struct Negative {
    pub name: &'static str,
    pub source: &'static str,
    pub rule: &'static str,
}

const FILEIO: &str = include_str!("../corpus/fileio.coop");

fn fs(quota: Option<usize>, fail_at_write: Option<usize>) -> Option<FsSimConfig> {
    Some(FsSimConfig { quota, fail_at_write, ..FsSimConfig::default() })
}

pub fn examples() -> Vec<Example> {
    let ex = |name, source, container, fs, expected| Example { name, source, container, fs, expected };
    vec![
        ex("fileio", FILEIO, "fs-sim", fs(None, None), "return ()"),
        ex("fileio-quota", FILEIO, "fs-sim", fs(Some(5), None), "return ()"),
        ex("fileio-ioerror", FILEIO, "fs-sim", fs(None, Some(0)), "return ()"),
        ex("nesting", include_str!("../corpus/nesting.coop"), "fs-sim", fs(None, None), "return ()"),
        ex("instrumentation", include_str!("../corpus/instrumentation.coop"), "state", None, "return (2, 4)"),
        ex("mlrefs", include_str!("../corpus/mlrefs.coop"), "state", None, "return (11, 2)"),
        ex("monotonic", include_str!("../corpus/monotonic.coop"), "state", None, "return (3, 1)"),
        ex("pairing", include_str!("../corpus/pairing.coop"), "pure", None, "return ((0, 1), (2, \"ab\"))"),
    ]
}

pub fn negatives() -> Vec<Negative> {
    let neg = |name, source, rule| Negative { name, source, rule };
    vec![
        neg("missing-finally", include_str!("../corpus/neg/missing_finally.coop"), "TyUser-Run"),
        neg("uncovered-op", include_str!("../corpus/neg/uncovered_op.coop"), "TyUser-Run"),
        neg("exception-outside-eop", include_str!("../corpus/neg/exception_outside_eop.coop"), "TyValue-Runner"),
        neg("state-mismatch", include_str!("../corpus/neg/state_mismatch.coop"), "TyKernel-Setenv"),
        neg("kill-outside-s", include_str!("../corpus/neg/kill_outside_s.coop"), "TyKernel-Kill"),
        neg("raise-outside-e", include_str!("../corpus/neg/raise_outside_e.coop"), "TyUser-Raise"),
    ]
}

/// A parsed and typechecked program.
pub struct Loaded {
    pub program: Program,
    pub checked: CheckedProgram,
}

/// Parses and typechecks; the error holds every diagnostic.
pub fn load(src: &str, opts: ParseOptions) -> Result<Loaded, Vec<Diagnostic>> {
    let program = parse_program_with(src, opts).map_err(|d| vec![d])?;
    let checked = check_program(&program);
    if !checked.is_ok() {
        return Err(checked.errors());
    }
    Ok(Loaded { program, checked })
}

pub struct ExampleRun {
    pub outcome: String,
    pub session: Session,
    /// Final state of the filesystem simulator, for examples that use it.
    pub fs: Option<FsSim>,
}

pub fn run_example(ex: &Example) -> Result<ExampleRun, String> {
    let loaded = load(ex.source, ParseOptions::default())
        .map_err(|ds| ds.iter().map(|d| d.render(ex.name)).collect::<Vec<_>>().join("\n"))?;
    let m = loaded.checked.elaborated.as_ref().expect("checked program");
    let needed = loaded.checked.program_type.as_ref().map(|t| t.ops.clone()).unwrap_or_default();
    let declared = &loaded.program.tables.ops;
    if ex.container == "fs-sim" {
        let mut sim = FsSim::new(ex.fs.clone().unwrap_or_default());
        check_compatible(&sim, &needed, declared)?;
        let ev = run_toplevel(&mut sim, m);
        let outcome = ev.outcome.map_err(|e| e.to_string())?;
        return Ok(ExampleRun { outcome: outcome.to_string(), session: ev.session, fs: Some(sim) });
    }
    let mut c: Box<dyn Container> = by_name(ex.container, None).ok_or("unknown container")?;
    check_compatible(c.as_ref(), &needed, declared)?;
    let ev = run_toplevel(c.as_mut(), m);
    let outcome: Outcome = ev.outcome.map_err(|e| e.to_string())?;
    Ok(ExampleRun { outcome: outcome.to_string(), session: ev.session, fs: None })
}

/// The diagnostics rejecting a negative example, or an error if it is
/// accepted.
pub fn check_negative(n: &Negative) -> Result<Vec<Diagnostic>, String> {
    match load(n.source, ParseOptions::default()) {
        Ok(_) => Err(format!("{} typechecks", n.name)),
        Err(ds) => Ok(ds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_produce_expected_outcomes() {
        for ex in examples() {
            let r = run_example(&ex).unwrap_or_else(|e| panic!("{}: {e}", ex.name));
            assert_eq!(r.outcome, ex.expected, "{}", ex.name);
            assert_eq!(r.session.affinity_violations, 0);
        }
    }

    #[test]
    fn negatives_name_their_rule() {
        for n in negatives() {
            let ds = check_negative(&n).unwrap();
            assert!(ds.iter().any(|d| d.rule == n.rule), "{}: {:?}", n.name, ds);
        }
    }
}
