//! Equation schemas of the equational theory and deliberately wrong
//! variants of some of them. An instance is a pair of closed user
//! computations; kernel-mode sides are observed through a kernel switch
//! that reifies the returned value, raised exception or signal together
//! with the final state.

use std::sync::Arc;

use crate::check::{infer_user, Ctx};
use crate::gen::{observe_eval, GCtx, Gen, KEff, Observed, Script, UEff};
use crate::names::{Fresh, Name};
use crate::oracle::{DEnv, Oracle, OracleError};
use crate::subst::{subst_kernel, subst_user};
use crate::syntax::*;
use crate::types::{EffectTables, GroundType};

/// Depth of generated metavariables.
const D: u32 = 2;

#[derive(Clone, Debug)]
pub struct Instance {
    pub lhs: UserComp,
    pub rhs: UserComp,
}

pub struct Schema {
    pub id: &'static str,
    /// `user`, `kernel` or `other`.
    pub group: &'static str,
    pub law: &'static str,
    pub gen: fn(&mut Gen) -> Instance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    /// The two sides are observably different.
    Differ(String),
    /// The instance is outside the checkable fragment.
    Invalid(String),
}

fn uc(kind: UserKind) -> UserComp {
    UserComp::new(kind)
}

fn kc(kind: KernelKind) -> KernelComp {
    KernelComp::new(kind)
}

fn ret(v: Value) -> UserComp {
    UserComp::ret(v)
}

fn a<T>(t: T) -> Arc<T> {
    Arc::new(t)
}

fn subst_u(m: &UserComp, x: &Name, v: &Value) -> UserComp {
    subst_user(m, x, v, &mut Fresh::starting_at(1 << 40))
}

fn subst_k(k: &KernelComp, x: &Name, v: &Value) -> KernelComp {
    subst_kernel(k, x, v, &mut Fresh::starting_at(1 << 40))
}

fn top_eff(g: &mut Gen) -> UEff {
    let (ops, excs) = (g.all_ops(), g.all_excs());
    UEff { ops, excs: g.subset(&excs, 0.5) }
}

fn kernel_eff(g: &mut Gen) -> KEff {
    let (ops, excs, sigs) = (g.all_ops(), g.all_excs(), g.all_sigs());
    let state = g.state_type();
    KEff { ops, excs: g.subset(&excs, 0.5), sigs: g.subset(&sigs, 0.5), state }
}

fn closed(g: &mut Gen, t: &GroundType) -> Value {
    g.value(&GCtx::new(), t, 2, false)
}

/// A closed value of type `t` syntactically different from `v`.
fn other_value(g: &mut Gen, t: &GroundType, v: &Value) -> Value {
    for _ in 0..50 {
        let w = closed(g, t);
        if w != *v {
            return w;
        }
    }
    closed(g, t)
}

/// A ground type with at least two values.
fn rich_type(g: &mut Gen) -> GroundType {
    loop {
        let t = g.ground_type();
        if t != GroundType::Unit {
            return t;
        }
    }
}

fn user_handler(g: &mut Gen, ctx: &GCtx, input: &GroundType, t: &GroundType, eff: &UEff, excs: &[Name]) -> Handler<UserComp> {
    let x = g.fresh("x");
    let n = g.user(&ctx.with(&x, input), t, eff, D);
    let raises = excs.iter().map(|e| (e.clone(), a(g.user(ctx, t, eff, D)))).collect();
    Handler { ret: (x, a(n)), raises }
}

fn kernel_handler(g: &mut Gen, ctx: &GCtx, input: &GroundType, t: &GroundType, eff: &KEff, excs: &[Name]) -> Handler<KernelComp> {
    let x = g.fresh("x");
    let n = g.kernel(&ctx.with(&x, input), t, eff, D, false);
    let raises = excs.iter().map(|e| (e.clone(), a(g.kernel(ctx, t, eff, D, false)))).collect();
    Handler { ret: (x, a(n)), raises }
}

/// Observes a kernel computation started in state `w`: every outcome is
/// returned as a value of `(A * C) + ((int * C) + int)`.
fn reify(tables: &EffectTables, k: KernelComp, carrier: &GroundType, state: &GroundType, w: Value) -> UserComp {
    let ok = GroundType::prod(carrier.clone(), state.clone());
    let exc = GroundType::prod(GroundType::int(), state.clone());
    let bad = GroundType::sum(exc.clone(), GroundType::int());
    let (okv, badv) = (ok.to_value(), bad.to_value());
    let inl = |v: Value| Value::Inl(Box::new(v), okv.clone(), badv.clone());
    let inr = |v: Value| Value::Inr(Box::new(v), okv.clone(), badv.clone());
    let (x, c) = (crate::names::name("rx"), crate::names::name("rc"));
    let ret_clause = (x.clone(), c.clone(), a(ret(inl(Value::pair(Value::var(&x), Value::var(&c))))));
    let raises = tables
        .exceptions
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let v = Value::Inl(Box::new(Value::pair(Value::int(i as i64), Value::var(&c))), exc.to_value(), GroundType::int().to_value());
            (e.clone(), c.clone(), a(ret(inr(v))))
        })
        .collect();
    let kills = tables
        .signals
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let v = Value::Inr(Box::new(Value::int(j as i64)), exc.to_value(), GroundType::int().to_value());
            (s.clone(), a(ret(inr(v))))
        })
        .collect();
    uc(UserKind::Kernel(a(k), w, Finally { ret: ret_clause, raises, kills }))
}

/// Kernel-mode instance builder: both sides run from the same state.
fn kernel_instance(g: &mut Gen, keff: &KEff, carrier: &GroundType, lhs: KernelComp, rhs: KernelComp) -> Instance {
    let w = closed(g, &keff.state);
    let t = g.tables.clone();
    Instance {
        lhs: reify(&t, lhs, carrier, &keff.state, w.clone()),
        rhs: reify(&t, rhs, carrier, &keff.state, w),
    }
}

// ---------------------------------------------------------------------------
// User mode.

fn fun_beta(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t) = (g.ground_type(), g.ground_type());
    let x = g.fresh("x");
    let m = g.user(&GCtx::new().with(&x, &s), &t, &eff, D);
    let v = closed(g, &s);
    Instance {
        lhs: uc(UserKind::App(Value::Fun(x.clone(), s.to_value(), a(m.clone())), v.clone())),
        rhs: subst_u(&m, &x, &v),
    }
}

fn try_return(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t) = (g.ground_type(), g.ground_type());
    let all = g.all_excs();
    let handled = g.subset(&all, 0.5);
    let h = user_handler(g, &GCtx::new(), &s, &t, &eff, &handled);
    let v = closed(g, &s);
    Instance {
        lhs: uc(UserKind::Try(a(ret(v.clone())), h.clone())),
        rhs: subst_u(&h.ret.1, &h.ret.0, &v),
    }
}

fn try_raise(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t) = (g.ground_type(), g.ground_type());
    let all = g.all_excs();
    let e = g.pick(&all);
    let mut handled = g.subset(&all, 0.5);
    if !handled.contains(&e) {
        handled.push(e.clone());
    }
    let h = user_handler(g, &GCtx::new(), &s, &t, &eff, &handled);
    let n = h.raise_clause(&e).unwrap().as_ref().clone();
    Instance { lhs: uc(UserKind::Try(a(uc(UserKind::Raise(e, Some(s.to_value())))), h)), rhs: n }
}

/// `op(V, x. M, {e -> N'_e})` at user level, returning the pieces.
fn user_op(g: &mut Gen, ctx: &GCtx, t: &GroundType, eff: &UEff, op: Option<Name>) -> OpCall<UserComp> {
    let op = op.unwrap_or_else(|| g.pick(&eff.ops));
    let sig = g.tables.ops[&op].clone();
    let v = g.value(ctx, &sig.param, 1, false);
    let x = g.fresh("x");
    let m = g.user(&ctx.with(&x, &sig.result), t, eff, D);
    let handlers = sig.excs.iter().map(|e| (e.clone(), a(g.user(ctx, t, eff, D)))).collect();
    OpCall { op, arg: v, var: x, body: a(m), handlers }
}

fn kernel_op(g: &mut Gen, ctx: &GCtx, t: &GroundType, eff: &KEff) -> OpCall<KernelComp> {
    let op = g.pick(&eff.ops);
    let sig = g.tables.ops[&op].clone();
    let v = g.value(ctx, &sig.param, 1, false);
    let x = g.fresh("x");
    let k = g.kernel(&ctx.with(&x, &sig.result), t, eff, D, false);
    let handlers = sig.excs.iter().map(|e| (e.clone(), a(g.kernel(ctx, t, eff, D, false)))).collect();
    OpCall { op, arg: v, var: x, body: a(k), handlers }
}

fn map_op<B, C>(c: &OpCall<B>, f: &mut dyn FnMut(&B) -> C) -> OpCall<C> {
    OpCall {
        op: c.op.clone(),
        arg: c.arg.clone(),
        var: c.var.clone(),
        body: a(f(&c.body)),
        handlers: c.handlers.iter().map(|(e, n)| (e.clone(), a(f(n)))).collect(),
    }
}

fn try_op_with(g: &mut Gen, push_into_handlers: bool, same_type: bool) -> Instance {
    let eff = top_eff(g);
    let s = g.ground_type();
    let t = if same_type { s.clone() } else { g.ground_type() };
    let all = g.all_excs();
    let handled = g.subset(&all, 0.6);
    let c = user_op(g, &GCtx::new(), &s, &eff, None);
    let h = user_handler(g, &GCtx::new(), &s, &t, &eff, &handled);
    let lhs = uc(UserKind::Try(a(uc(UserKind::Op(c.clone()))), h.clone()));
    let mut rhs_op = map_op(&c, &mut |m| uc(UserKind::Try(a(m.clone()), h.clone())));
    if !push_into_handlers {
        rhs_op.handlers = c.handlers.clone();
    }
    Instance { lhs, rhs: uc(UserKind::Op(rhs_op)) }
}

fn try_op(g: &mut Gen) -> Instance {
    try_op_with(g, true, false)
}

fn match_pair(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s1, s2, t) = (g.ground_type(), g.ground_type(), g.ground_type());
    let (x, y) = (g.fresh("x"), g.fresh("y"));
    let m = g.user(&GCtx::new().with(&x, &s1).with(&y, &s2), &t, &eff, D);
    let (v, w) = (closed(g, &s1), closed(g, &s2));
    Instance {
        lhs: uc(UserKind::MatchPair(Value::pair(v.clone(), w.clone()), x.clone(), y.clone(), a(m.clone()))),
        rhs: subst_u(&subst_u(&m, &x, &v), &y, &w),
    }
}

fn match_sum_with(g: &mut Gen, left: bool, wrong: bool) -> Instance {
    let eff = top_eff(g);
    let s1 = g.ground_type();
    let s2 = if wrong { s1.clone() } else { g.ground_type() };
    let t = g.ground_type();
    let (x, y) = (g.fresh("x"), g.fresh("y"));
    let m = g.user(&GCtx::new().with(&x, &s1), &t, &eff, D);
    let n = g.user(&GCtx::new().with(&y, &s2), &t, &eff, D);
    let (l, r) = (s1.to_value(), s2.to_value());
    let (scrut, taken) = if left {
        let v = closed(g, &s1);
        (Value::Inl(Box::new(v.clone()), l, r), if wrong { subst_u(&n, &y, &v) } else { subst_u(&m, &x, &v) })
    } else {
        let v = closed(g, &s2);
        (Value::Inr(Box::new(v.clone()), l, r), subst_u(&n, &y, &v))
    };
    Instance { lhs: uc(UserKind::MatchSum(scrut, x, a(m), y, a(n))), rhs: taken }
}

fn match_inl(g: &mut Gen) -> Instance {
    match_sum_with(g, true, false)
}

fn match_inr(g: &mut Gen) -> Instance {
    match_sum_with(g, false, false)
}

/// Pieces of a run: runner, state type, body effects and finally clauses.
struct RunParts {
    runner: RunnerLit,
    state: GroundType,
    body_eff: UEff,
    body_ty: GroundType,
    fin: Finally,
    eff: UEff,
    t: GroundType,
}

fn run_parts(g: &mut Gen) -> RunParts {
    let eff = top_eff(g);
    let all_ops = g.all_ops();
    let mut inner = g.subset(&all_ops, 0.6);
    if inner.is_empty() {
        inner.push(g.pick(&all_ops));
    }
    let state = g.state_type();
    let (all_sigs, all_excs) = (g.all_sigs(), g.all_excs());
    let sigs = g.subset(&all_sigs, 0.5);
    let runner = g.runner(&GCtx::new(), &inner, &eff.ops, &sigs, &state, D);
    let body_eff = UEff { ops: inner, excs: g.subset(&all_excs, 0.5) };
    let (body_ty, t) = (g.ground_type(), g.ground_type());
    let fin = g.finally(&GCtx::new(), &t, &eff, &body_ty, &state, &body_eff.excs, &sigs, D);
    RunParts { runner, state, body_eff, body_ty, fin, eff, t }
}

fn run_of(p: &RunParts, w: &Value, body: UserComp) -> UserComp {
    uc(UserKind::Run(Value::Runner(a(p.runner.clone())), w.clone(), a(body), p.fin.clone()))
}

fn finally_return(f: &Finally, v: &Value, w: &Value) -> UserComp {
    let (x, c, n) = &f.ret;
    subst_u(&subst_u(n, x, v), c, w)
}

fn run_return_with(g: &mut Gen, wrong_state: bool) -> Instance {
    let mut p = run_parts(g);
    while wrong_state && p.state == GroundType::Unit {
        p = run_parts(g);
    }
    let w = closed(g, &p.state);
    let v = closed(g, &p.body_ty);
    let w2 = if wrong_state { other_value(g, &p.state, &w) } else { w.clone() };
    Instance { lhs: run_of(&p, &w, ret(v.clone())), rhs: finally_return(&p.fin, &v, &w2) }
}

fn run_return(g: &mut Gen) -> Instance {
    run_return_with(g, false)
}

fn run_raise(g: &mut Gen) -> Instance {
    let mut p = run_parts(g);
    if p.body_eff.excs.is_empty() {
        let all = g.all_excs();
        let e = g.pick(&all);
        p.body_eff.excs.push(e);
        p.fin = g.finally(&GCtx::new(), &p.t, &p.eff, &p.body_ty, &p.state, &p.body_eff.excs, &sigs_of(&p.fin), D);
    }
    let e = g.pick(&p.body_eff.excs);
    let w = closed(g, &p.state);
    let (c, n) = p.fin.raise_clause(&e).unwrap();
    Instance { lhs: run_of(&p, &w, uc(UserKind::Raise(e.clone(), None))), rhs: subst_u(n, c, &w) }
}

fn sigs_of(f: &Finally) -> Vec<Name> {
    f.kills.iter().map(|(s, _)| s.clone()).collect()
}

fn run_op_with(g: &mut Gen, skip_runner: bool) -> Instance {
    let p = run_parts(g);
    let w = closed(g, &p.state);
    let op = g.pick(&p.body_eff.ops);
    let c = user_op(g, &GCtx::new(), &p.body_ty, &p.body_eff, Some(op.clone()));
    let lhs = run_of(&p, &w, uc(UserKind::Op(c.clone())));
    if skip_runner {
        let sig = g.tables.ops[&op].clone();
        let b = closed(g, &sig.result);
        return Instance { lhs, rhs: run_of(&p, &w, subst_u(&c.body, &c.var, &b)) };
    }
    let clause = p.runner.clause(&op).unwrap();
    let k = subst_k(&clause.body, &clause.param, &c.arg);
    let (x, c1) = (g.fresh("x"), g.fresh("c"));
    let cont = run_of(&p, &Value::var(&c1), subst_u(&c.body, &c.var, &Value::var(&x)));
    let raises = c
        .handlers
        .iter()
        .map(|(e, n)| {
            let c2 = g.fresh("c");
            (e.clone(), c2.clone(), a(run_of(&p, &Value::var(&c2), n.as_ref().clone())))
        })
        .collect();
    let f2 = Finally { ret: (x, c1, a(cont)), raises, kills: p.fin.kills.clone() };
    Instance { lhs, rhs: uc(UserKind::Kernel(a(k), w, f2)) }
}

fn run_op(g: &mut Gen) -> Instance {
    run_op_with(g, false)
}

/// Pieces of a kernel switch.
struct SwitchParts {
    keff: KEff,
    carrier: GroundType,
    fin: Finally,
    eff: UEff,
    t: GroundType,
}

fn switch_parts(g: &mut Gen) -> SwitchParts {
    let eff = top_eff(g);
    let mut keff = kernel_eff(g);
    keff.ops = eff.ops.clone();
    let (carrier, t) = (g.ground_type(), g.ground_type());
    let fin = g.finally(&GCtx::new(), &t, &eff, &carrier, &keff.state, &keff.excs, &keff.sigs, D);
    SwitchParts { keff, carrier, fin, eff, t }
}

fn switch(k: KernelComp, w: &Value, f: &Finally) -> UserComp {
    uc(UserKind::Kernel(a(k), w.clone(), f.clone()))
}

fn kernel_return(g: &mut Gen) -> Instance {
    let p = switch_parts(g);
    let (w, v) = (closed(g, &p.keff.state), closed(g, &p.carrier));
    Instance { lhs: switch(kc(KernelKind::Return(v.clone())), &w, &p.fin), rhs: finally_return(&p.fin, &v, &w) }
}

fn kernel_raise(g: &mut Gen) -> Instance {
    let mut p = switch_parts(g);
    if p.keff.excs.is_empty() {
        let all = g.all_excs();
        p.keff.excs.push(g.pick(&all));
        p.fin = g.finally(&GCtx::new(), &p.t, &p.eff, &p.carrier, &p.keff.state, &p.keff.excs, &p.keff.sigs, D);
    }
    let e = g.pick(&p.keff.excs);
    let w = closed(g, &p.keff.state);
    let (c, n) = p.fin.raise_clause(&e).unwrap();
    Instance { lhs: switch(kc(KernelKind::Raise(e.clone(), None)), &w, &p.fin), rhs: subst_u(n, c, &w) }
}

fn kernel_kill(g: &mut Gen) -> Instance {
    let mut p = switch_parts(g);
    if p.keff.sigs.is_empty() {
        let all = g.all_sigs();
        p.keff.sigs.push(g.pick(&all));
        p.fin = g.finally(&GCtx::new(), &p.t, &p.eff, &p.carrier, &p.keff.state, &p.keff.excs, &p.keff.sigs, D);
    }
    let s = g.pick(&p.keff.sigs);
    let w = closed(g, &p.keff.state);
    let n = p.fin.kill_clause(&s).unwrap().as_ref().clone();
    Instance { lhs: switch(kc(KernelKind::Kill(s, Some(p.carrier.to_value()))), &w, &p.fin), rhs: n }
}

fn kernel_getenv_with(g: &mut Gen, wrong: bool) -> Instance {
    let mut p = switch_parts(g);
    while wrong && p.keff.state == GroundType::Unit {
        p = switch_parts(g);
    }
    let c = g.fresh("c");
    let k = g.kernel(&GCtx::new().with(&c, &p.keff.state), &p.carrier, &p.keff, D, false);
    let w = closed(g, &p.keff.state);
    let w2 = if wrong { other_value(g, &p.keff.state, &w) } else { w.clone() };
    Instance {
        lhs: switch(kc(KernelKind::Getenv(c.clone(), a(k.clone()))), &w, &p.fin),
        rhs: switch(subst_k(&k, &c, &w2), &w, &p.fin),
    }
}

fn kernel_getenv(g: &mut Gen) -> Instance {
    kernel_getenv_with(g, false)
}

fn kernel_setenv_with(g: &mut Gen, ignore: bool) -> Instance {
    let mut p = switch_parts(g);
    while ignore && p.keff.state == GroundType::Unit {
        p = switch_parts(g);
    }
    let k = g.kernel(&GCtx::new(), &p.carrier, &p.keff, D, false);
    let w = closed(g, &p.keff.state);
    let v = if ignore { other_value(g, &p.keff.state, &w) } else { closed(g, &p.keff.state) };
    Instance {
        lhs: switch(kc(KernelKind::Setenv(v.clone(), a(k.clone()))), &w, &p.fin),
        rhs: switch(k, if ignore { &w } else { &v }, &p.fin),
    }
}

fn kernel_setenv(g: &mut Gen) -> Instance {
    kernel_setenv_with(g, false)
}

fn kernel_op_switch(g: &mut Gen) -> Instance {
    let p = switch_parts(g);
    let c = kernel_op(g, &GCtx::new(), &p.carrier, &p.keff);
    let w = closed(g, &p.keff.state);
    let rhs = map_op(&c, &mut |k| switch(k.clone(), &w, &p.fin));
    Instance { lhs: switch(kc(KernelKind::Op(c.clone())), &w, &p.fin), rhs: uc(UserKind::Op(rhs)) }
}

// ---------------------------------------------------------------------------
// Kernel mode.

fn kernel_setup(g: &mut Gen) -> (KEff, GroundType, GroundType) {
    let keff = kernel_eff(g);
    (keff, g.ground_type(), g.ground_type())
}

fn funk_beta(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let x = g.fresh("x");
    let k = g.kernel(&GCtx::new().with(&x, &s), &t, &keff, D, false);
    let v = closed(g, &s);
    let f = Value::FunK(x.clone(), s.to_value(), keff.state.clone(), a(k.clone()));
    let (l, r) = (kc(KernelKind::App(f, v.clone())), subst_k(&k, &x, &v));
    kernel_instance(g, &keff, &t, l, r)
}

fn ktry_return(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.5);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let v = closed(g, &s);
    let (l, r) = (kc(KernelKind::Try(a(KernelComp::ret(v.clone())), h.clone())), subst_k(&h.ret.1, &h.ret.0, &v));
    kernel_instance(g, &keff, &t, l, r)
}

fn ktry_raise(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let e = g.pick(&all);
    let mut handled = g.subset(&all, 0.5);
    if !handled.contains(&e) {
        handled.push(e.clone());
    }
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let n = h.raise_clause(&e).unwrap().as_ref().clone();
    let l = kc(KernelKind::Try(a(kc(KernelKind::Raise(e, Some(s.to_value())))), h));
    kernel_instance(g, &keff, &t, l, n)
}

fn ktry_kill_with(g: &mut Gen, as_raise: bool) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let mut handled = g.subset(&all, 0.5);
    if as_raise && handled.is_empty() {
        handled.push(g.pick(&all));
    }
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let sigs = g.all_sigs();
    let sig = g.pick(&sigs);
    let l = kc(KernelKind::Try(a(kc(KernelKind::Kill(sig.clone(), Some(s.to_value())))), h.clone()));
    let r = if as_raise {
        h.raises[0].1.as_ref().clone()
    } else {
        kc(KernelKind::Kill(sig, Some(t.to_value())))
    };
    kernel_instance(g, &keff, &t, l, r)
}

fn ktry_kill(g: &mut Gen) -> Instance {
    ktry_kill_with(g, false)
}

fn ktry_op(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.6);
    let c = kernel_op(g, &GCtx::new(), &s, &keff);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let l = kc(KernelKind::Try(a(kc(KernelKind::Op(c.clone()))), h.clone()));
    let r = kc(KernelKind::Op(map_op(&c, &mut |k| kc(KernelKind::Try(a(k.clone()), h.clone())))));
    kernel_instance(g, &keff, &t, l, r)
}

fn ktry_getenv(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.6);
    let c = g.fresh("c");
    let k = g.kernel(&GCtx::new().with(&c, &keff.state), &s, &keff, D, false);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let l = kc(KernelKind::Try(a(kc(KernelKind::Getenv(c.clone(), a(k.clone())))), h.clone()));
    let r = kc(KernelKind::Getenv(c, a(kc(KernelKind::Try(a(k), h)))));
    kernel_instance(g, &keff, &t, l, r)
}

fn ktry_setenv(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.6);
    let k = g.kernel(&GCtx::new(), &s, &keff, D, false);
    let v = closed(g, &keff.state);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let l = kc(KernelKind::Try(a(kc(KernelKind::Setenv(v.clone(), a(k.clone())))), h.clone()));
    let r = kc(KernelKind::Setenv(v, a(kc(KernelKind::Try(a(k), h)))));
    kernel_instance(g, &keff, &t, l, r)
}

fn kmatch_pair(g: &mut Gen) -> Instance {
    let (keff, s1, t) = kernel_setup(g);
    let s2 = g.ground_type();
    let (x, y) = (g.fresh("x"), g.fresh("y"));
    let k = g.kernel(&GCtx::new().with(&x, &s1).with(&y, &s2), &t, &keff, D, false);
    let (v, w) = (closed(g, &s1), closed(g, &s2));
    let l = kc(KernelKind::MatchPair(Value::pair(v.clone(), w.clone()), x.clone(), y.clone(), a(k.clone())));
    let r = subst_k(&subst_k(&k, &x, &v), &y, &w);
    kernel_instance(g, &keff, &t, l, r)
}

fn kmatch_sum(g: &mut Gen, left: bool) -> Instance {
    let (keff, s1, t) = kernel_setup(g);
    let s2 = g.ground_type();
    let (x, y) = (g.fresh("x"), g.fresh("y"));
    let k = g.kernel(&GCtx::new().with(&x, &s1), &t, &keff, D, false);
    let l2 = g.kernel(&GCtx::new().with(&y, &s2), &t, &keff, D, false);
    let (lt, rt) = (s1.to_value(), s2.to_value());
    let (scrut, taken) = if left {
        let v = closed(g, &s1);
        (Value::Inl(Box::new(v.clone()), lt, rt), subst_k(&k, &x, &v))
    } else {
        let v = closed(g, &s2);
        (Value::Inr(Box::new(v.clone()), lt, rt), subst_k(&l2, &y, &v))
    };
    let l = kc(KernelKind::MatchSum(scrut, x, a(k), y, a(l2)));
    kernel_instance(g, &keff, &t, l, taken)
}

fn kmatch_inl(g: &mut Gen) -> Instance {
    kmatch_sum(g, true)
}

fn kmatch_inr(g: &mut Gen) -> Instance {
    kmatch_sum(g, false)
}

fn user_return(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.5);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let v = closed(g, &s);
    let l = kc(KernelKind::User(a(ret(v.clone())), h.clone()));
    let r = subst_k(&h.ret.1, &h.ret.0, &v);
    kernel_instance(g, &keff, &t, l, r)
}

fn user_raise_with(g: &mut Gen, reraise: bool) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let e = g.pick(&all);
    let mut handled = g.subset(&all, 0.5);
    if !handled.contains(&e) {
        handled.push(e.clone());
    }
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let l = kc(KernelKind::User(a(uc(UserKind::Raise(e.clone(), Some(s.to_value())))), h.clone()));
    let r = if reraise {
        kc(KernelKind::Raise(e, Some(t.to_value())))
    } else {
        h.raise_clause(&e).unwrap().as_ref().clone()
    };
    kernel_instance(g, &keff, &t, l, r)
}

fn user_raise(g: &mut Gen) -> Instance {
    user_raise_with(g, false)
}

fn user_op_switch(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let all = g.all_excs();
    let handled = g.subset(&all, 0.6);
    let ueff = UEff { ops: keff.ops.clone(), excs: g.subset(&all, 0.5) };
    let c = user_op(g, &GCtx::new(), &s, &ueff, None);
    let h = kernel_handler(g, &GCtx::new(), &s, &t, &keff, &handled);
    let l = kc(KernelKind::User(a(uc(UserKind::Op(c.clone()))), h.clone()));
    let r = kc(KernelKind::Op(map_op(&c, &mut |m| kc(KernelKind::User(a(m.clone()), h.clone())))));
    kernel_instance(g, &keff, &t, l, r)
}

// ---------------------------------------------------------------------------
// Eta laws and the kernel theory.

fn unit_eta(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let t = g.ground_type();
    let u = g.fresh("u");
    let m = g.user(&GCtx::new().with(&u, &GroundType::Unit), &t, &eff, D);
    let n = g.user(&GCtx::new(), &t, &eff, D);
    let arg = closed(g, &GroundType::int());
    let call = |body: UserComp| {
        uc(UserKind::Op(OpCall {
            op: crate::names::name("ping"),
            arg: arg.clone(),
            var: u.clone(),
            body: a(body),
            handlers: vec![(crate::names::name("bad"), a(n.clone()))],
        }))
    };
    Instance { lhs: call(m.clone()), rhs: call(subst_u(&m, &u, &Value::Unit)) }
}

/// `let f = return F in let z = f V1 in f V2`.
fn apply_twice(f: Value, v1: Value, v2: Value, fresh: &mut Gen) -> UserComp {
    let (fv, z) = (fresh.fresh("f"), fresh.fresh("z"));
    let body = uc(UserKind::Let(
        z,
        a(uc(UserKind::App(Value::var(&fv), v1))),
        a(uc(UserKind::App(Value::var(&fv), v2))),
    ));
    uc(UserKind::Let(fv, a(ret(f)), a(body)))
}

fn fun_eta(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t) = (g.ground_type(), g.ground_type());
    let y = g.fresh("y");
    let m = g.user(&GCtx::new().with(&y, &s), &t, &eff, D);
    let v = Value::Fun(y, s.to_value(), a(m));
    let x = g.fresh("x");
    let eta = Value::Fun(x.clone(), s.to_value(), a(uc(UserKind::App(v.clone(), Value::var(&x)))));
    let (v1, v2) = (closed(g, &s), closed(g, &s));
    Instance { lhs: apply_twice(eta, v1.clone(), v2.clone(), g), rhs: apply_twice(v, v1, v2, g) }
}

fn funk_eta(g: &mut Gen) -> Instance {
    let (keff, s, t) = kernel_setup(g);
    let y = g.fresh("y");
    let k = g.kernel(&GCtx::new().with(&y, &s), &t, &keff, D, false);
    let v = Value::FunK(y, s.to_value(), keff.state.clone(), a(k));
    let x = g.fresh("x");
    let eta = Value::FunK(x.clone(), s.to_value(), keff.state.clone(), a(kc(KernelKind::App(v.clone(), Value::var(&x)))));
    let (v1, v2) = (closed(g, &s), closed(g, &s));
    let twice = |f: Value, g: &mut Gen| {
        let (fv, z) = (g.fresh("f"), g.fresh("z"));
        let body = kc(KernelKind::Let(
            z,
            a(kc(KernelKind::App(Value::var(&fv), v1.clone()))),
            a(kc(KernelKind::App(Value::var(&fv), v2.clone()))),
        ));
        kc(KernelKind::Let(fv, a(KernelComp::ret(f)), a(body)))
    };
    let (l, r) = (twice(eta, g), twice(v, g));
    kernel_instance(g, &keff, &t, l, r)
}

fn try_eta(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let t = g.ground_type();
    let m = g.user(&GCtx::new(), &t, &eff, D + 1);
    let x = g.fresh("x");
    let raises = eff.excs.iter().map(|e| (e.clone(), a(uc(UserKind::Raise(e.clone(), Some(t.to_value())))))).collect();
    let h = Handler { ret: (x.clone(), a(ret(Value::var(&x)))), raises };
    Instance { lhs: uc(UserKind::Try(a(m.clone()), h)), rhs: m }
}

fn ktry_eta(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let k = g.kernel(&GCtx::new(), &t, &keff, D + 1, false);
    let x = g.fresh("x");
    let raises = keff.excs.iter().map(|e| (e.clone(), a(kc(KernelKind::Raise(e.clone(), Some(t.to_value())))))).collect();
    let h = Handler { ret: (x.clone(), a(KernelComp::ret(Value::var(&x)))), raises };
    kernel_instance(g, &keff, &t, kc(KernelKind::Try(a(k.clone()), h)), k)
}

fn getenv_setenv(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let k = g.kernel(&GCtx::new(), &t, &keff, D, false);
    let c = g.fresh("c");
    let l = kc(KernelKind::Getenv(c.clone(), a(kc(KernelKind::Setenv(Value::var(&c), a(k.clone()))))));
    kernel_instance(g, &keff, &t, l, k)
}

fn setenv_getenv_with(g: &mut Gen, stale: bool) -> Instance {
    let (mut keff, t, _) = kernel_setup(g);
    while stale && keff.state == GroundType::Unit {
        keff.state = g.state_type();
    }
    let c = g.fresh("c");
    let k = g.kernel(&GCtx::new().with(&c, &keff.state), &t, &keff, D, false);
    let v = closed(g, &keff.state);
    let w = closed(g, &keff.state);
    let l = kc(KernelKind::Setenv(v.clone(), a(kc(KernelKind::Getenv(c.clone(), a(k.clone()))))));
    if stale {
        // Reads the initial state instead of the one just set.
        let w2 = other_value(g, &keff.state, &v);
        let r = kc(KernelKind::Setenv(v, a(subst_k(&k, &c, &w2))));
        let tables = g.tables.clone();
        return Instance {
            lhs: reify(&tables, l, &t, &keff.state, w2.clone()),
            rhs: reify(&tables, r, &t, &keff.state, w2),
        };
    }
    let _ = w;
    let r = kc(KernelKind::Setenv(v.clone(), a(subst_k(&k, &c, &v))));
    kernel_instance(g, &keff, &t, l, r)
}

fn setenv_getenv(g: &mut Gen) -> Instance {
    setenv_getenv_with(g, false)
}

fn setenv_setenv_with(g: &mut Gen, keep_first: bool) -> Instance {
    let (mut keff, t, _) = kernel_setup(g);
    while keep_first && keff.state == GroundType::Unit {
        keff.state = g.state_type();
    }
    let k = g.kernel(&GCtx::new(), &t, &keff, D, false);
    let v = closed(g, &keff.state);
    let w = if keep_first { other_value(g, &keff.state, &v) } else { closed(g, &keff.state) };
    let l = kc(KernelKind::Setenv(v.clone(), a(kc(KernelKind::Setenv(w.clone(), a(k.clone()))))));
    let r = kc(KernelKind::Setenv(if keep_first { v } else { w }, a(k)));
    kernel_instance(g, &keff, &t, l, r)
}

fn setenv_setenv(g: &mut Gen) -> Instance {
    setenv_setenv_with(g, false)
}

fn getenv_kill(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let sigs = g.all_sigs();
    let s = g.pick(&sigs);
    let c = g.fresh("c");
    let l = kc(KernelKind::Getenv(c, a(kc(KernelKind::Kill(s.clone(), Some(t.to_value()))))));
    kernel_instance(g, &keff, &t, l, kc(KernelKind::Kill(s, Some(t.to_value()))))
}

fn setenv_kill(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let sigs = g.all_sigs();
    let s = g.pick(&sigs);
    let v = closed(g, &keff.state);
    let l = kc(KernelKind::Setenv(v, a(kc(KernelKind::Kill(s.clone(), Some(t.to_value()))))));
    kernel_instance(g, &keff, &t, l, kc(KernelKind::Kill(s, Some(t.to_value()))))
}

fn getenv_op(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let c = g.fresh("c");
    let op = kernel_op(g, &GCtx::new().with(&c, &keff.state), &t, &keff);
    // The argument must not depend on the state that is read.
    let sig = g.tables.ops[&op.op].clone();
    let op = OpCall { arg: closed(g, &sig.param), ..op };
    let l = kc(KernelKind::Getenv(c.clone(), a(kc(KernelKind::Op(op.clone())))));
    let r = kc(KernelKind::Op(map_op(&op, &mut |k| kc(KernelKind::Getenv(c.clone(), a(k.clone()))))));
    kernel_instance(g, &keff, &t, l, r)
}

fn setenv_op(g: &mut Gen) -> Instance {
    let (keff, t, _) = kernel_setup(g);
    let op = kernel_op(g, &GCtx::new(), &t, &keff);
    let v = closed(g, &keff.state);
    let l = kc(KernelKind::Setenv(v.clone(), a(kc(KernelKind::Op(op.clone())))));
    let r = kc(KernelKind::Op(map_op(&op, &mut |k| kc(KernelKind::Setenv(v.clone(), a(k.clone()))))));
    kernel_instance(g, &keff, &t, l, r)
}

// ---------------------------------------------------------------------------
// Wrong variants.

fn bad_beta(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t0) = (rich_type(g), g.ground_type());
    let x = g.fresh("x");
    // The body observes its argument.
    let m0 = g.user(&GCtx::new().with(&x, &s), &t0, &eff, D);
    let z = g.fresh("z");
    let m = uc(UserKind::Let(z.clone(), a(m0), a(ret(Value::pair(Value::var(&x), Value::var(&z))))));
    let v = closed(g, &s);
    let v2 = other_value(g, &s, &v);
    Instance { lhs: uc(UserKind::App(Value::Fun(x.clone(), s.to_value(), a(m.clone())), v)), rhs: subst_u(&m, &x, &v2) }
}

fn bad_try_raise(g: &mut Gen) -> Instance {
    let eff = top_eff(g);
    let (s, t) = (g.ground_type(), g.ground_type());
    let all = g.all_excs();
    let h = user_handler(g, &GCtx::new(), &s, &t, &eff, &all);
    let e = g.pick(&all);
    let wrong = all.iter().find(|f| **f != e).unwrap().clone();
    let n = h.raise_clause(&wrong).unwrap().as_ref().clone();
    Instance { lhs: uc(UserKind::Try(a(uc(UserKind::Raise(e, Some(s.to_value())))), h)), rhs: n }
}

fn bad_match_inl(g: &mut Gen) -> Instance {
    match_sum_with(g, true, true)
}

fn bad_run_return(g: &mut Gen) -> Instance {
    run_return_with(g, true)
}

fn bad_run_op(g: &mut Gen) -> Instance {
    run_op_with(g, true)
}

fn bad_kernel_setenv(g: &mut Gen) -> Instance {
    kernel_setenv_with(g, true)
}

fn bad_kernel_getenv(g: &mut Gen) -> Instance {
    kernel_getenv_with(g, true)
}

fn bad_try_op(g: &mut Gen) -> Instance {
    try_op_with(g, false, true)
}

fn bad_ktry_kill(g: &mut Gen) -> Instance {
    ktry_kill_with(g, true)
}

fn bad_user_raise(g: &mut Gen) -> Instance {
    user_raise_with(g, true)
}

fn bad_setenv_getenv(g: &mut Gen) -> Instance {
    setenv_getenv_with(g, true)
}

fn bad_setenv_setenv(g: &mut Gen) -> Instance {
    setenv_setenv_with(g, true)
}

macro_rules! schema {
    ($id:literal, $group:literal, $law:literal, $f:ident) => {
        Schema { id: $id, group: $group, law: $law, gen: $f }
    };
}

pub fn schemas() -> Vec<Schema> {
    vec![
        schema!("fun-beta", "user", "(fun x -> M) V == M[V/x]", fun_beta),
        schema!("try-return", "user", "try (return V) with H == N[V/x]", try_return),
        schema!("try-raise", "user", "try (raise e) with H == N_e", try_raise),
        schema!("try-op", "user", "try op(V, x.M, N') with H == op(V, x. try M with H, try N' with H)", try_op),
        schema!("match-pair", "user", "match (V, W) with (x, y) -> M == M[V/x, W/y]", match_pair),
        schema!("match-inl", "user", "match inl V with inl x -> M, inr y -> N == M[V/x]", match_inl),
        schema!("match-inr", "user", "match inr W with inl x -> M, inr y -> N == N[W/y]", match_inr),
        schema!("run-return", "user", "using R @ W run (return V) finally F == N[V/x, W/c]", run_return),
        schema!("run-raise", "user", "using R @ W run (raise e) finally F == N_e[W/c]", run_raise),
        schema!("run-op", "user", "using R @ W run op(V, x.M, N') finally F == kernel K_op[V/x] @ W finally F'", run_op),
        schema!("kernel-return", "user", "kernel (return V) @ W finally F == N[V/x, W/c]", kernel_return),
        schema!("kernel-raise", "user", "kernel (raise e) @ W finally F == N_e[W/c]", kernel_raise),
        schema!("kernel-kill", "user", "kernel (kill s) @ W finally F == N_s", kernel_kill),
        schema!("kernel-getenv", "user", "kernel (getenv (c. K)) @ W finally F == kernel K[W/c] @ W finally F", kernel_getenv),
        schema!("kernel-setenv", "user", "kernel (setenv (V, K)) @ W finally F == kernel K @ V finally F", kernel_setenv),
        schema!("kernel-op", "user", "kernel op(V, x.K, L) @ W finally F == op(V, x. kernel K @ W finally F, ...)", kernel_op_switch),
        schema!("funk-beta", "kernel", "(funK x -> K) V == K[V/x]", funk_beta),
        schema!("ktry-return", "kernel", "try (return V) with G == L[V/x]", ktry_return),
        schema!("ktry-raise", "kernel", "try (raise e) with G == L_e", ktry_raise),
        schema!("ktry-kill", "kernel", "try (kill s) with G == kill s", ktry_kill),
        schema!("ktry-op", "kernel", "try op(V, x.K, L') with G == op(V, x. try K with G, try L' with G)", ktry_op),
        schema!("ktry-getenv", "kernel", "try (getenv (c. K)) with G == getenv (c. try K with G)", ktry_getenv),
        schema!("ktry-setenv", "kernel", "try (setenv (V, K)) with G == setenv (V, try K with G)", ktry_setenv),
        schema!("kmatch-pair", "kernel", "match (V, W) with (x, y) -> K == K[V/x, W/y]", kmatch_pair),
        schema!("kmatch-inl", "kernel", "match inl V with inl x -> K, inr y -> L == K[V/x]", kmatch_inl),
        schema!("kmatch-inr", "kernel", "match inr W with inl x -> K, inr y -> L == L[W/y]", kmatch_inr),
        schema!("user-return", "kernel", "user (return V) with G == L[V/x]", user_return),
        schema!("user-raise", "kernel", "user (raise e) with G == L_e", user_raise),
        schema!("user-op", "kernel", "user op(V, x.M, N') with G == op(V, x. user M with G, user N' with G)", user_op_switch),
        schema!("unit-eta", "other", "V == () : unit", unit_eta),
        schema!("fun-eta", "other", "fun x -> V x == V", fun_eta),
        schema!("funk-eta", "other", "funK x -> V x == V", funk_eta),
        schema!("try-eta", "other", "try M with {return x -> return x, raise e -> raise e} == M", try_eta),
        schema!("ktry-eta", "other", "try K with {return x -> return x, raise e -> raise e} == K", ktry_eta),
        schema!("getenv-setenv", "other", "getenv (c. setenv (c, K)) == K", getenv_setenv),
        schema!("setenv-getenv", "other", "setenv (V, getenv (c. K)) == setenv (V, K[V/c])", setenv_getenv),
        schema!("setenv-setenv", "other", "setenv (V, setenv (W, K)) == setenv (W, K)", setenv_setenv),
        schema!("getenv-kill", "other", "getenv (c. kill s) == kill s", getenv_kill),
        schema!("setenv-kill", "other", "setenv (V, kill s) == kill s", setenv_kill),
        schema!("getenv-op", "other", "getenv (c. op(V, x.K, L)) == op(V, x. getenv (c. K), getenv (c. L))", getenv_op),
        schema!("setenv-op", "other", "setenv (V, op(W, x.K, L)) == op(W, x. setenv (V, K), setenv (V, L))", setenv_op),
    ]
}

pub fn mutations() -> Vec<Schema> {
    vec![
        schema!("bad-beta", "mutation", "(fun x -> M) V == M[V'/x]", bad_beta),
        schema!("bad-try-raise", "mutation", "try (raise e) with H == N_e' for e' != e", bad_try_raise),
        schema!("bad-try-op", "mutation", "try op(V, x.M, N') with H == op(V, x. try M with H, N')", bad_try_op),
        schema!("bad-match-inl", "mutation", "match inl V with inl x -> M, inr y -> N == N[V/y]", bad_match_inl),
        schema!("bad-run-return", "mutation", "using R @ W run (return V) finally F == N[V/x, W'/c]", bad_run_return),
        schema!("bad-run-op", "mutation", "using R @ W run op(V, x.M) finally F == using R @ W run M[b/x] finally F", bad_run_op),
        schema!("bad-kernel-setenv", "mutation", "kernel (setenv (V, K)) @ W finally F == kernel K @ W finally F", bad_kernel_setenv),
        schema!("bad-kernel-getenv", "mutation", "kernel (getenv (c. K)) @ W finally F == kernel K[W'/c] @ W finally F", bad_kernel_getenv),
        schema!("bad-ktry-kill", "mutation", "try (kill s) with G == L_e", bad_ktry_kill),
        schema!("bad-user-raise", "mutation", "user (raise e) with G == raise e", bad_user_raise),
        schema!("bad-setenv-getenv", "mutation", "setenv (V, getenv (c. K)) == setenv (V, K[W/c])", bad_setenv_getenv),
        schema!("bad-setenv-setenv", "mutation", "setenv (V, setenv (W, K)) == setenv (V, K)", bad_setenv_setenv),
    ]
}

/// Typechecks both sides, then compares their denotations as trees and
/// their evaluations against the same scripted top level.
pub fn check_equation(tables: &EffectTables, inst: &Instance, script_seed: u64) -> Verdict {
    for (side, m) in [("left", &inst.lhs), ("right", &inst.rhs)] {
        if let Err(d) = infer_user(tables, &Ctx::new(), m) {
            return Verdict::Invalid(format!("{side} side is ill-typed: {d}"));
        }
    }
    let denote = |m: &UserComp| Oracle::new(tables).user(&DEnv::new(), m);
    let (l, r) = (denote(&inst.lhs), denote(&inst.rhs));
    match (&l, &r) {
        (Err(e @ (OracleError::Budget(_) | OracleError::Fragment(_))), _)
        | (_, Err(e @ (OracleError::Budget(_) | OracleError::Fragment(_)))) => {
            return Verdict::Invalid(e.to_string());
        }
        (Ok(a), Ok(b)) if a != b => return Verdict::Differ(format!("denotations differ:\n  {a}\n  {b}")),
        (Ok(_), Ok(_)) => {}
        (Err(a), Err(b)) if a == b => {}
        (a, b) => return Verdict::Differ(format!("denotations differ: {a:?} / {b:?}")),
    }
    let (ol, sl) = observe_eval(&mut Script::new(tables, script_seed), &inst.lhs);
    let (or, sr) = observe_eval(&mut Script::new(tables, script_seed), &inst.rhs);
    if sl.affinity_violations + sr.affinity_violations > 0 {
        return Verdict::Differ("a continuation was resumed twice".into());
    }
    if ol != or {
        return Verdict::Differ(format!("evaluations differ: {ol} / {or}"));
    }
    if let (Observed::Error(e), _) = (&ol, &or) {
        return Verdict::Invalid(e.clone());
    }
    Verdict::Equal
}

#[derive(Clone, Debug, Default)]
pub struct SchemaReport {
    pub id: String,
    pub cases: usize,
    pub failures: usize,
    pub invalid: usize,
    pub counterexample: Option<String>,
}

/// Seed of case `i` of schema `id`.
pub fn case_seed(seed: u64, id: &str, i: usize) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    h.wrapping_add(i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d)
}

/// Runs `cases` valid instances of a schema. Invalid instances are
/// regenerated, up to as many attempts again as cases.
pub fn run_schema(schema: &Schema, seed: u64, cases: usize) -> SchemaReport {
    let mut rep = SchemaReport { id: schema.id.to_string(), ..Default::default() };
    let mut i = 0;
    while rep.cases < cases && i < 2 * cases {
        let s = case_seed(seed, schema.id, i);
        i += 1;
        let mut g = Gen::new(s);
        let inst = (schema.gen)(&mut g);
        match check_equation(&g.tables, &inst, s) {
            Verdict::Equal => rep.cases += 1,
            Verdict::Differ(why) => {
                rep.cases += 1;
                rep.failures += 1;
                if rep.counterexample.is_none() {
                    rep.counterexample = Some(format!(
                        "{why}\n  lhs: {}\n  rhs: {}",
                        crate::parse::print_user(&inst.lhs),
                        crate::parse::print_user(&inst.rhs)
                    ));
                }
            }
            Verdict::Invalid(why) => {
                rep.invalid += 1;
                if rep.invalid == 1 && std::env::var_os("COOP_DEBUG").is_some() {
                    eprintln!("{}: invalid instance: {why}", schema.id);
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<_> = schemas().iter().chain(mutations().iter()).map(|s| s.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert!(schemas().len() >= 35);
        assert!(mutations().len() >= 10);
    }

    #[test]
    fn setenv_setenv_holds_and_its_mutation_fails() {
        let s = schemas().into_iter().find(|s| s.id == "setenv-setenv").unwrap();
        let rep = run_schema(&s, 3, 30);
        assert_eq!((rep.cases, rep.failures), (30, 0), "{:?}", rep.counterexample);
        let m = mutations().into_iter().find(|s| s.id == "bad-setenv-setenv").unwrap();
        assert!(run_schema(&m, 3, 30).failures > 0);
    }
}
