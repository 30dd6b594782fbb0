//! Whole-system checks: the example corpus, the equation suite,
//! evaluator/oracle agreement, finalisation counts, runner/morphism round
//! trips, the monad laws, resource behaviour and continuation affinity.
//! Each returns a verdict with a one-line summary.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::corpus::{check_negative, examples, load, negatives, run_example};
use crate::equations::{mutations, run_schema, schemas};
use crate::eval::{Fired, Session};
use crate::gen::{observe_eval, observe_tree, test_tables, Gen, Observed, Script};
use crate::ground::GroundValue;
use crate::names::{name, Name};
use crate::oracle::{all_trees, DEnv, FiniteRunner, GTree, Oracle, OracleError, Tree, UPay};
use crate::parse::ParseOptions;
use crate::syntax::*;
use crate::types::{EffectTables, GroundType, OpSig};

#[derive(Clone, Debug)]
pub struct Verdict {
    pub pass: bool,
    pub summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict { pass, summary: summary.into() }
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2}s", t.as_secs_f64()))
}

/// Programs of the generated population: pure ones, then ones whose
/// operations reach a scripted top level.
pub fn population(seed: u64, n: usize) -> Vec<UserComp> {
    let mut g = Gen::new(seed);
    (0..n).map(|i| if i % 2 == 0 { g.pure_program(5).0 } else { g.effectful_program(4).0 }).collect()
}

/// Every example parses, typechecks and produces its expected outcome;
/// every negative example is rejected under its rule.
pub fn corpus() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    for ex in examples() {
        match run_example(&ex) {
            Ok(r) if r.outcome == ex.expected => {}
            Ok(r) => bad.push(format!("{}: {} instead of {}", ex.name, r.outcome, ex.expected)),
            Err(e) => bad.push(format!("{}: {e}", ex.name)),
        }
    }
    for n in negatives() {
        match check_negative(&n) {
            Ok(ds) if ds.first().is_some_and(|d| d.rule == n.rule) => {}
            Ok(ds) => bad.push(format!("{}: rejected with {:?} instead of {}", n.name, ds.first().map(|d| &d.rule), n.rule)),
            Err(e) => bad.push(e),
        }
    }
    let (fast, t) = within(start, Duration::from_secs(1));
    let summary = format!(
        "{} examples, {} negatives, {} problems in {t}{}",
        examples().len(),
        negatives().len(),
        bad.len(),
        bad.first().map(|b| format!(": {b}")).unwrap_or_default()
    );
    Verdict::new(bad.is_empty() && fast, summary)
}

/// Every schema holds on `cases` instances; every mutation fails on at
/// least one.
pub fn equations(seed: u64, cases: usize) -> Verdict {
    let start = Instant::now();
    let ss = schemas();
    let ms = mutations();
    let mut bad = Vec::new();
    for s in &ss {
        let r = run_schema(s, seed, cases);
        if r.failures > 0 || r.cases < cases {
            bad.push(format!("{} ({} of {} failed)", s.id, r.failures, r.cases));
        }
    }
    for m in &ms {
        if run_schema(m, seed, cases).failures == 0 {
            bad.push(format!("mutation {} not caught", m.id));
        }
    }
    let (fast, t) = within(start, Duration::from_secs(60));
    let summary = format!(
        "{} schemas x {cases} cases, {} mutations, {} problems in {t}{}",
        ss.len(),
        ms.len(),
        bad.len(),
        bad.first().map(|b| format!(": {b}")).unwrap_or_default()
    );
    Verdict::new(bad.is_empty() && ss.len() >= 35 && ms.len() >= 10 && fast, summary)
}

/// Evaluator outcomes equal the oracle's on the generated population.
pub fn agreement(seed: u64, n: usize) -> Verdict {
    let start = Instant::now();
    let tables = test_tables();
    let (mut agree, mut skipped, mut bad) = (0, 0, Vec::new());
    for (i, m) in population(seed, n).iter().enumerate() {
        let (ev, _) = observe_eval(&mut Script::new(&tables, i as u64), m);
        let oracle = Oracle::new(&tables);
        let ob = match oracle.user(&DEnv::new(), m) {
            Ok(t) => observe_tree(&mut Script::new(&tables, i as u64), &t),
            Err(OracleError::Fragment(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => Observed::Error(e.to_string()),
        };
        if ev == ob && !matches!(ev, Observed::Error(_)) {
            agree += 1;
        } else {
            bad.push(format!("program {i}: evaluator {ev}, oracle {ob}"));
        }
    }
    let (fast, t) = within(start, Duration::from_secs(120));
    let summary = format!(
        "{agree} of {n} programs agree, {skipped} outside the oracle fragment, {} mismatches in {t}{}",
        bad.len(),
        bad.first().map(|b| format!(": {b}")).unwrap_or_default()
    );
    Verdict::new(bad.is_empty() && agree >= 1000 && fast, summary)
}

fn killed(s: &Session) -> bool {
    s.trace.iter().any(|e| e.event == "coop-kill")
}

/// Checks finalisation counts of one evaluation: exactly one clause per
/// run when nothing was killed, at most one otherwise.
fn counts_ok(s: &Session, outer_kill: bool) -> bool {
    if outer_kill || killed(s) {
        s.runs.iter().all(|r| r.fired.len() <= 1)
    } else {
        s.runs.iter().all(|r| r.fired.len() == 1)
    }
}

/// Finalisation runs exactly once per run without kills and at most once
/// with injected container kills; every fused run equals its body's
/// kernel tree with the finally clauses applied.
pub fn finalisation(seed: u64, n: usize) -> Verdict {
    let start = Instant::now();
    let tables = test_tables();
    let (mut runs, mut killed_runs, mut bad) = (0usize, 0usize, Vec::new());
    let mut factoring = (0usize, 0usize);
    for (i, m) in population(seed, n).iter().enumerate() {
        let (_, s) = observe_eval(&mut Script::new(&tables, i as u64), m);
        runs += s.runs.len();
        if !counts_ok(&s, false) {
            bad.push(format!("program {i}: finalisation counts {:?}", fired_counts(&s)));
        }
        // Inject a container signal at each operation call in turn.
        let calls = s.container_ops as usize;
        for k in 0..calls.min(4) {
            let (_, s) = observe_eval(&mut Script::new(&tables, i as u64).with_kill_at(k), m);
            killed_runs += s.runs.len();
            if !counts_ok(&s, true) {
                bad.push(format!("program {i} killed at call {k}: counts {:?}", fired_counts(&s)));
            }
        }
        let mut oracle = Oracle::new(&tables);
        oracle.check_factoring = true;
        let _ = oracle.user(&DEnv::new(), m);
        let f = oracle.factoring();
        factoring.0 += f.checked;
        factoring.1 += f.failed;
    }
    for ex in examples() {
        match run_example(&ex) {
            Ok(r) => {
                runs += r.session.runs.len();
                if !counts_ok(&r.session, false) {
                    bad.push(format!("{}: finalisation counts {:?}", ex.name, fired_counts(&r.session)));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", ex.name)),
        }
    }
    if factoring.1 > 0 {
        bad.push(format!("{} runs do not factor through finalisation", factoring.1));
    }
    let summary = format!(
        "{runs} runs, {killed_runs} under injected kills, {} factored runs, {} problems{}",
        factoring.0,
        bad.len(),
        bad.first().map(|b| format!(": {b}")).unwrap_or_default()
    );
    let (_, t) = within(start, Duration::MAX);
    Verdict::new(bad.is_empty() && factoring.0 > 0 && runs > 0, format!("{summary} in {t}"))
}

fn fired_counts(s: &Session) -> Vec<usize> {
    s.runs.iter().map(|r| r.fired.len()).collect()
}

/// The reduced signature whose trees of depth three are enumerated.
fn small_signature() -> BTreeMap<Name, OpSig> {
    let mut ops = BTreeMap::new();
    ops.insert(name("flip"), OpSig { param: GroundType::Unit, result: GroundType::bool(), excs: Default::default() });
    ops.insert(
        name("ping"),
        OpSig { param: GroundType::Unit, result: GroundType::Unit, excs: [name("bad")].into_iter().collect() },
    );
    ops
}

/// Runner to morphism to runner is the identity, and morphism to runner
/// to morphism agrees on every tree of depth at most three.
pub fn round_trips(seed: u64, runners: usize) -> Verdict {
    let start = Instant::now();
    let tables = test_tables();
    let small = small_signature();
    let trees = all_trees(&small, &[UPay::Val(GroundValue::Unit)], 3, 3);
    let sigs: Vec<Name> = tables.signals.iter().cloned().collect();
    let mut g = Gen::new(seed);
    let (mut inputs, mut compared, mut bad) = (0usize, 0usize, Vec::new());
    for i in 0..runners {
        let internal = if i % 2 == 0 { small.clone() } else { tables.ops.clone() };
        let state = g.state_type();
        let r = g.finite_runner(&internal, &tables.ops, &state, &sigs, 2);
        let theta = |t: &GTree, c: &GroundValue| r.morphism(t, c);
        let back = match FiniteRunner::from_morphism(&theta, &internal, &state, 3) {
            Ok(b) => b,
            Err(e) => {
                bad.push(format!("runner {i}: {e}"));
                continue;
            }
        };
        inputs += r.coops.len();
        if back != r {
            bad.push(format!("runner {i}: co-operations differ after the round trip"));
        }
        let states = crate::ground::enumerate(&state, 3).unwrap_or_default();
        let deep: Vec<GTree> = (0..50).map(|_| g.tree(&internal, &[UPay::Val(GroundValue::Unit)], 5)).collect();
        let sample: &[GTree] = if i % 2 == 0 { &trees } else { &deep };
        for t in sample {
            for c in &states {
                compared += 1;
                if r.morphism(t, c) != back.morphism(t, c) {
                    bad.push(format!("runner {i}: morphisms differ on {t} at {c}"));
                }
            }
        }
    }
    let (_, t) = within(start, Duration::MAX);
    let summary = format!(
        "{runners} runners, {inputs} co-operation inputs, {} trees of depth <= 3, {compared} morphism comparisons, {} problems in {t}{}",
        trees.len(),
        bad.len(),
        bad.first().map(|b| format!(": {b}")).unwrap_or_default()
    );
    Verdict::new(bad.is_empty() && runners >= 20, summary)
}

/// Left and right unit and associativity of Kleisli extension.
pub fn monad_laws(seed: u64, n: usize) -> Verdict {
    type T = Tree<UPay<GroundValue>>;
    let tables = test_tables();
    let mut g = Gen::new(seed);
    let leaves: Vec<UPay<GroundValue>> =
        (0..4).map(|i| UPay::Val(GroundValue::Int(i))).chain([UPay::Exc(name("oops"))]).collect();
    let table = |g: &mut Gen| -> BTreeMap<i64, T> { (0..4).map(|i| (i, g.tree(&tables.ops, &leaves, 2))).collect() };
    let mut bad = 0;
    for _ in 0..n {
        let t = g.tree(&tables.ops, &leaves, 4);
        let (f, h) = (table(&mut g), table(&mut g));
        let kleisli = |tab: &BTreeMap<i64, T>| {
            let tab = tab.clone();
            move |p: UPay<GroundValue>| -> Result<T, OracleError> {
                Ok(match p {
                    UPay::Val(GroundValue::Int(i)) => tab[&i].clone(),
                    p => Tree::Leaf(p),
                })
            }
        };
        let a = GroundValue::Int(g.below(4) as i64);
        let left = Tree::Leaf(UPay::Val(a.clone())).bind(&mut kleisli(&f)).ok() == kleisli(&f)(UPay::Val(a)).ok();
        let right = t.clone().bind(&mut |p| Ok(Tree::Leaf(p))).ok() == Some(t.clone());
        let lhs = t.clone().bind(&mut kleisli(&f)).and_then(|u| u.bind(&mut kleisli(&h)));
        let rhs = t.clone().bind(&mut |p| kleisli(&f)(p)?.bind(&mut kleisli(&h)));
        if !(left && right && lhs.is_ok() && lhs == rhs) {
            bad += 1;
        }
    }
    Verdict::new(bad == 0 && n >= 500, format!("{n} trees of depth <= 4, {bad} law violations"))
}

/// The file-IO matrix, the nesting example, and instrumentation of
/// generated programs.
pub fn resources(seed: u64, programs: usize) -> Verdict {
    let mut bad = Vec::new();
    let by_name: BTreeMap<&str, _> = examples().into_iter().map(|e| (e.name, e)).collect();
    for (ex, closes, clause) in [
        ("fileio", 1, Fired::Return),
        ("fileio-quota", 1, Fired::Raise("QuotaExceeded".into())),
        ("fileio-ioerror", 0, Fired::Kill("IOError".into())),
    ] {
        match run_example(&by_name[ex]) {
            Ok(r) => {
                let fs = r.fs.expect("filesystem example");
                if fs.close_count() != closes || r.session.runs[0].fired != [clause.clone()] || r.outcome != "return ()" {
                    bad.push(format!("{ex}: {} closes, finally {:?}, {}", fs.close_count(), r.session.runs[0].fired, r.outcome));
                }
            }
            Err(e) => bad.push(format!("{ex}: {e}")),
        }
    }
    match run_example(&by_name["nesting"]) {
        Ok(r) => {
            let fs = r.fs.expect("filesystem example");
            let content = fs.file("hello.txt").map(|f| f.content.clone()).unwrap_or_default();
            if fs.committed_writes() != 1 || content != "Hello, world.Hello, again." {
                bad.push(format!("nesting: {} writes, content {content:?}", fs.committed_writes()));
            }
        }
        Err(e) => bad.push(format!("nesting: {e}")),
    }
    let tables = test_tables();
    let mut g = Gen::new(seed);
    let mut counted = 0;
    let mut total_ops = 0;
    while counted < programs {
        let (m, _) = g.effectful_program(4);
        let s = g.below(1 << 30) as u64;
        let (bare, sess) = observe_eval(&mut Script::new(&tables, s), &m);
        if sess.container_ops == 0 {
            continue;
        }
        if matches!(bare, Observed::Error(_)) {
            bad.push(format!("instrumented program failed: {bare}"));
            break;
        }
        let (cost, sess2) = observe_eval(&mut Script::new(&tables, s), &instrument(&tables, m));
        total_ops += sess.container_ops;
        if cost != Observed::Return(GroundValue::Int(sess.container_ops as i64)) || sess2.container_ops != sess.container_ops {
            bad.push(format!("instrumentation reported {cost} for {} operations", sess.container_ops));
        }
        counted += 1;
    }
    Verdict::new(
        bad.is_empty(),
        format!(
            "file-IO matrix, nesting, {counted} instrumented programs with {total_ops} operations, {} problems{}",
            bad.len(),
            bad.first().map(|b| format!(": {b}")).unwrap_or_default()
        ),
    )
}

/// Wraps `m` in a runner that forwards every operation and counts the
/// calls; the result is the count.
pub fn instrument(tables: &EffectTables, m: UserComp) -> UserComp {
    let (x, y, c) = (name("x"), name("y"), name("c"));
    let a = |k: KernelKind| Arc::new(KernelComp::new(k));
    let clauses = tables
        .ops
        .iter()
        .map(|(op, sig)| {
            let forward = OpCall {
                op: op.clone(),
                arg: Value::var(&x),
                var: y.clone(),
                body: Arc::new(KernelComp::ret(Value::var(&y))),
                handlers: sig.excs.iter().map(|e| (e.clone(), a(KernelKind::Raise(e.clone(), None)))).collect(),
            };
            let bump = Value::Prim(Prim::Add, vec![Value::var(&c), Value::int(1)]);
            let body = KernelKind::Getenv(c.clone(), a(KernelKind::Setenv(bump, a(KernelKind::Op(forward)))));
            CoopClause { op: op.clone(), param: x.clone(), body: a(body) }
        })
        .collect();
    let runner = RunnerLit { clauses, state: GroundType::int() };
    let count = Arc::new(UserComp::ret(Value::var(&c)));
    let fin = Finally {
        ret: (x.clone(), c.clone(), count.clone()),
        raises: tables.exceptions.iter().map(|e| (e.clone(), c.clone(), count.clone())).collect(),
        kills: Vec::new(),
    };
    UserComp::new(UserKind::Run(Value::Runner(Arc::new(runner)), Value::int(0), Arc::new(m), fin))
}

/// No continuation is resumed twice anywhere in the generated population,
/// under injected kills, or in the corpus.
pub fn affinity(seed: u64, n: usize) -> Verdict {
    let tables = test_tables();
    let (mut created, mut resumed, mut violations, mut reads) = (0u64, 0u64, 0u64, 0u64);
    let mut tally = |s: &Session| {
        created += s.continuations_created;
        resumed += s.continuations_resumed;
        violations += s.affinity_violations;
        reads += s.reads_after_kill;
    };
    for (i, m) in population(seed, n).iter().enumerate() {
        let (_, s) = observe_eval(&mut Script::new(&tables, i as u64), m);
        let calls = s.container_ops as usize;
        tally(&s);
        for k in 0..calls.min(4) {
            tally(&observe_eval(&mut Script::new(&tables, i as u64).with_kill_at(k), m).1);
        }
    }
    for ex in examples() {
        if let Ok(r) = run_example(&ex) {
            tally(&r.session);
        }
    }
    for src in examples().iter().map(|e| e.source) {
        if load(src, ParseOptions::default()).is_err() {
            violations += 1;
        }
    }
    Verdict::new(
        violations == 0 && reads == 0 && resumed > 0,
        format!("{created} continuations created, {resumed} resumed, {violations} resumed twice, {reads} state reads after a signal"),
    )
}
