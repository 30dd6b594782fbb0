//! Bidirectional type-and-effect checking.
//!
//! Synthesis computes least effect rows. Checking sites synthesise and
//! then apply subsumption; when that fails, [`blame`] walks back into the
//! term to report the construct responsible, named after its typing rule.
//!
//! Synthesis also elaborates: `let x = M in N` becomes
//! `try M with { return x -> N, raise e -> raise e, ... }` over the
//! inferred exceptions of `M`.

mod blame;
pub mod skeleton;
pub mod subtype;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::diag::Diagnostic;
use crate::names::{display_name, Name};
use crate::syntax::*;
use crate::types::{EffSet, EffectTables, GroundType, KernelType, RunnerType, UserType, ValueType};
pub use subtype::{join, meet, subtype_kernel, subtype_runner, subtype_user, subtype_value, Carrier};
use subtype::{carrier_sub, join_carrier};

pub type CResult<T> = Result<T, Diagnostic>;

/// Typing context; lookup finds the rightmost binding. A `None` entry
/// stands for an ill-typed top-level binding.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    entries: Vec<(Name, Option<ValueType>)>,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx::default()
    }

    pub fn extend(&self, x: &Name, t: ValueType) -> Ctx {
        let mut c = self.clone();
        c.entries.push((x.clone(), Some(t)));
        c
    }

    pub fn push(&mut self, x: &Name, t: Option<ValueType>) {
        self.entries.push((x.clone(), t));
    }

    pub fn lookup(&self, x: &str) -> Option<&Option<ValueType>> {
        self.entries.iter().rev().find(|(k, _)| &**k == x).map(|(_, t)| t)
    }
}

/// Least row of a user computation.
#[derive(Clone, Debug, PartialEq)]
pub struct URow {
    pub carrier: Carrier,
    pub ops: EffSet,
    pub excs: EffSet,
}

/// Least row of a kernel computation; the state is fixed by context.
#[derive(Clone, Debug, PartialEq)]
pub struct KRow {
    pub carrier: Carrier,
    pub ops: EffSet,
    pub excs: EffSet,
    pub sigs: EffSet,
}

impl URow {
    fn pure(t: ValueType) -> Self {
        URow { carrier: Some(t), ops: EffSet::new(), excs: EffSet::new() }
    }

    pub fn to_type(&self) -> UserType {
        UserType {
            carrier: self.carrier.clone().unwrap_or(ValueType::Empty),
            ops: self.ops.clone(),
            excs: self.excs.clone(),
        }
    }

    pub fn fits(&self, t: &UserType) -> bool {
        carrier_sub(&self.carrier, &t.carrier) && self.ops.is_subset(&t.ops) && self.excs.is_subset(&t.excs)
    }
}

impl KRow {
    fn pure(t: ValueType) -> Self {
        KRow { carrier: Some(t), ops: EffSet::new(), excs: EffSet::new(), sigs: EffSet::new() }
    }

    pub fn to_type(&self, state: &GroundType) -> KernelType {
        KernelType {
            carrier: self.carrier.clone().unwrap_or(ValueType::Empty),
            ops: self.ops.clone(),
            excs: self.excs.clone(),
            sigs: self.sigs.clone(),
            state: state.clone(),
        }
    }

    pub fn fits(&self, t: &KernelType) -> bool {
        carrier_sub(&self.carrier, &t.carrier)
            && self.ops.is_subset(&t.ops)
            && self.excs.is_subset(&t.excs)
            && self.sigs.is_subset(&t.sigs)
    }
}

fn set_str(s: &EffSet) -> String {
    let items: Vec<&str> = s.iter().map(|n| display_name(n)).collect();
    format!("{{{}}}", items.join(", "))
}

fn carrier_str(c: &Carrier) -> String {
    match c {
        Some(t) => t.to_string(),
        None => "empty".to_string(),
    }
}

pub struct Checker<'a> {
    pub tables: &'a EffectTables,
}

impl<'a> Checker<'a> {
    pub fn new(tables: &'a EffectTables) -> Self {
        Checker { tables }
    }

    fn err(&self, pos: Pos, rule: &str, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(pos, rule, msg)
    }

    // -- values -------------------------------------------------------------

    pub fn synth_value(&self, ctx: &Ctx, v: &Value, pos: Pos) -> CResult<(ValueType, Value)> {
        Ok(match v {
            Value::Var(x) => match ctx.lookup(x) {
                Some(Some(t)) => (t.clone(), v.clone()),
                Some(None) => {
                    return Err(self.err(pos, "TyValue-Var", format!("`{}` refers to an ill-typed binding", display_name(x))))
                }
                None => return Err(self.err(pos, "TyValue-Var", format!("unbound variable `{}`", display_name(x)))),
            },
            Value::Lit(l) => (
                match l {
                    Literal::Int(_) => ValueType::int(),
                    Literal::Bool(_) => ValueType::bool(),
                    Literal::Str(_) => ValueType::str(),
                },
                v.clone(),
            ),
            Value::Prim(p, args) => {
                let (params, result) = p.signature();
                if params.len() != args.len() {
                    return Err(self.err(pos, "TyValue-Const", format!("`{}` expects {} argument(s)", p.symbol(), params.len())));
                }
                let mut out = Vec::new();
                for (a, want) in args.iter().zip(&params) {
                    let (t, a) = self.synth_value(ctx, a, pos)?;
                    if !subtype_value(&t, &want.to_value()) {
                        return Err(self
                            .err(pos, "TyValue-Const", format!("argument of `{}` has the wrong type", p.symbol()))
                            .with_types(want, &t));
                    }
                    out.push(a);
                }
                (result.to_value(), Value::Prim(*p, out))
            }
            Value::Unit => (ValueType::Unit, Value::Unit),
            Value::Pair(a, b) => {
                let (ta, a) = self.synth_value(ctx, a, pos)?;
                let (tb, b) = self.synth_value(ctx, b, pos)?;
                (ValueType::prod(ta, tb), Value::pair(a, b))
            }
            Value::Inl(a, x, y) => {
                let a = self.check_value(ctx, a, x, pos, "TyValue-Inl")?;
                (ValueType::sum(x.clone(), y.clone()), Value::Inl(Box::new(a), x.clone(), y.clone()))
            }
            Value::Inr(b, x, y) => {
                let b = self.check_value(ctx, b, y, pos, "TyValue-Inr")?;
                (ValueType::sum(x.clone(), y.clone()), Value::Inr(Box::new(b), x.clone(), y.clone()))
            }
            Value::Fun(x, t, m) => {
                let (row, m) = self.synth_user(&ctx.extend(x, t.clone()), m)?;
                (ValueType::user_fun(t.clone(), row.to_type()), Value::Fun(x.clone(), t.clone(), Arc::new(m)))
            }
            Value::FunK(x, t, c, k) => {
                let (row, k) = self.synth_kernel(&ctx.extend(x, t.clone()), k, c)?;
                (
                    ValueType::kernel_fun(t.clone(), row.to_type(c)),
                    Value::FunK(x.clone(), t.clone(), c.clone(), Arc::new(k)),
                )
            }
            Value::Runner(r) => {
                let (rt, r) = self.synth_runner(ctx, r, pos)?;
                (ValueType::Runner(rt), Value::Runner(Arc::new(r)))
            }
        })
    }

    fn synth_runner(&self, ctx: &Ctx, r: &RunnerLit, pos: Pos) -> CResult<(RunnerType, RunnerLit)> {
        let mut handled = EffSet::new();
        let mut external = EffSet::new();
        let mut signals = EffSet::new();
        let mut clauses = Vec::new();
        for cl in &r.clauses {
            let sig = self.tables.op(&cl.op).ok_or_else(|| {
                self.err(pos, "TyValue-Runner", format!("undeclared operation `{}`", cl.op))
            })?;
            if !handled.insert(cl.op.clone()) {
                return Err(self.err(cl.body.pos, "TyValue-Runner", format!("duplicate co-operation for `{}`", cl.op)));
            }
            let (row, body) = self.synth_kernel(&ctx.extend(&cl.param, sig.param.to_value()), &cl.body, &r.state)?;
            if let Some(e) = row.excs.iter().find(|e| !sig.excs.contains(*e)) {
                return Err(self.err(
                    cl.body.pos,
                    "TyValue-Runner",
                    format!(
                        "co-operation for `{}` may raise `{}`, which is not among its exceptions {}",
                        cl.op,
                        e,
                        set_str(&sig.excs)
                    ),
                ));
            }
            if !carrier_sub(&row.carrier, &sig.result.to_value()) {
                return Err(self
                    .err(cl.body.pos, "TyValue-Runner", format!("co-operation for `{}` returns the wrong type", cl.op))
                    .with_types(&sig.result, carrier_str(&row.carrier)));
            }
            external.extend(row.ops);
            signals.extend(row.sigs);
            clauses.push(CoopClause { op: cl.op.clone(), param: cl.param.clone(), body: Arc::new(body) });
        }
        Ok((
            RunnerType { handled, external, signals, state: r.state.clone() },
            RunnerLit { clauses, state: r.state.clone() },
        ))
    }

    /// Synthesises and applies subsumption; on failure the blame walker
    /// names the construct at fault, falling back to `fallback_rule`.
    pub fn check_value(&self, ctx: &Ctx, v: &Value, want: &ValueType, pos: Pos, fallback_rule: &str) -> CResult<Value> {
        let (t, v2) = self.synth_value(ctx, v, pos)?;
        if subtype_value(&t, want) {
            return Ok(v2);
        }
        Err(self.blame_value(ctx, v, want, pos).unwrap_or_else(|| {
            self.err(pos, fallback_rule, "value does not have the expected type").with_types(want, &t)
        }))
    }

    fn check_ground(&self, ctx: &Ctx, v: &Value, want: &GroundType, pos: Pos, rule: &str, what: &str) -> CResult<Value> {
        let (t, v2) = self.synth_value(ctx, v, pos)?;
        if !subtype_value(&t, &want.to_value()) {
            return Err(self.err(pos, rule, what.to_string()).with_types(want, &t));
        }
        Ok(v2)
    }

    // -- user computations --------------------------------------------------

    pub fn synth_user(&self, ctx: &Ctx, m: &UserComp) -> CResult<(URow, UserComp)> {
        let pos = m.pos;
        let (row, kind) = match &m.kind {
            UserKind::Return(v) => {
                let (t, v) = self.synth_value(ctx, v, pos)?;
                (URow::pure(t), UserKind::Return(v))
            }
            UserKind::App(f, a) => {
                let (tf, f2) = self.synth_value(ctx, f, pos)?;
                let ValueType::UserFun(x, u) = tf else {
                    return Err(self
                        .err(pos, "TyUser-Apply", "applied value is not a user function")
                        .with_types("a user function type", &tf));
                };
                let a2 = self.check_value(ctx, a, &x, pos, "TyUser-Apply")?;
                (URow { carrier: Some(u.carrier.clone()), ops: u.ops.clone(), excs: u.excs.clone() }, UserKind::App(f2, a2))
            }
            UserKind::Try(b, h) => {
                let (rb, b2) = self.synth_user(ctx, b)?;
                let (row, h2) = self.user_handler(ctx, &rb, h, pos, "TyUser-Try")?;
                (row, UserKind::Try(Arc::new(b2), h2))
            }
            UserKind::Let(x, b, n) => {
                let (rb, b2) = self.synth_user(ctx, b)?;
                let xt = rb.carrier.clone().unwrap_or(ValueType::Empty);
                let (rn, n2) = self.synth_user(&ctx.extend(x, xt), n)?;
                let row = URow { carrier: rn.carrier, ops: &rb.ops | &rn.ops, excs: &rb.excs | &rn.excs };
                let raises = rb
                    .excs
                    .iter()
                    .map(|e| (e.clone(), Arc::new(UserComp::at(pos, UserKind::Raise(e.clone(), None)))))
                    .collect();
                (row, UserKind::Try(Arc::new(b2), Handler { ret: (x.clone(), Arc::new(n2)), raises }))
            }
            UserKind::MatchPair(v, x, y, b) => {
                let (t, v2) = self.synth_value(ctx, v, pos)?;
                let ValueType::Prod(tx, ty) = expand_empty(t.clone(), ValueType::prod) else {
                    return Err(self.err(pos, "TyUser-MatchPair", "scrutinee is not a pair").with_types("a product type", &t));
                };
                let (rb, b2) = self.synth_user(&ctx.extend(x, *tx).extend(y, *ty), b)?;
                (rb, UserKind::MatchPair(v2, x.clone(), y.clone(), Arc::new(b2)))
            }
            UserKind::MatchEmpty(v, t) => {
                let v2 = self.check_value(ctx, v, &ValueType::Empty, pos, "TyUser-MatchEmpty")?;
                (URow::pure(t.clone()), UserKind::MatchEmpty(v2, t.clone()))
            }
            UserKind::MatchSum(v, x, b1, y, b2) => {
                let (t, v2) = self.synth_value(ctx, v, pos)?;
                let ValueType::Sum(tx, ty) = expand_empty(t.clone(), ValueType::sum) else {
                    return Err(self.err(pos, "TyUser-MatchSum", "scrutinee is not a sum").with_types("a sum type", &t));
                };
                let (r1, c1) = self.synth_user(&ctx.extend(x, *tx), b1)?;
                let (r2, c2) = self.synth_user(&ctx.extend(y, *ty), b2)?;
                let row = self.join_urows(&[r1, r2], pos, "TyUser-MatchSum")?;
                (row, UserKind::MatchSum(v2, x.clone(), Arc::new(c1), y.clone(), Arc::new(c2)))
            }
            UserKind::Op(c) => {
                let sig = self
                    .tables
                    .op(&c.op)
                    .ok_or_else(|| self.err(pos, "TyUser-Op", format!("undeclared operation `{}`", c.op)))?;
                self.check_handler_coverage(c, &sig.excs, pos, "TyUser-Op")?;
                let arg = self.check_ground(ctx, &c.arg, &sig.param, pos, "TyUser-Op", "operation argument has the wrong type")?;
                let (rb, body) = self.synth_user(&ctx.extend(&c.var, sig.result.to_value()), &c.body)?;
                let mut rows = vec![rb];
                let mut handlers = Vec::new();
                for (e, n) in &c.handlers {
                    let (rn, n2) = self.synth_user(ctx, n)?;
                    rows.push(rn);
                    handlers.push((e.clone(), Arc::new(n2)));
                }
                let mut row = self.join_urows(&rows, pos, "TyUser-Op")?;
                row.ops.insert(c.op.clone());
                (row, UserKind::Op(OpCall { op: c.op.clone(), arg, var: c.var.clone(), body: Arc::new(body), handlers }))
            }
            UserKind::Raise(e, t) => (
                URow { carrier: t.clone(), ops: EffSet::new(), excs: [e.clone()].into_iter().collect() },
                UserKind::Raise(e.clone(), t.clone()),
            ),
            UserKind::Run(r, w, b, f) => {
                let (tr, r2) = self.synth_value(ctx, r, pos)?;
                let ValueType::Runner(rt) = tr else {
                    return Err(self.err(pos, "TyUser-Run", "`using` needs a runner").with_types("a runner type", &tr));
                };
                let w2 = self.check_ground(ctx, w, &rt.state, pos, "TyUser-Run", "initial state has the wrong type")?;
                let (rb, b2) = self.synth_user(ctx, b)?;
                if let Some(op) = rb.ops.iter().find(|op| !rt.handled.contains(*op)) {
                    return Err(self.err(
                        b.pos,
                        "TyUser-Run",
                        format!("unhandled operation `{op}` at run: the runner implements {}", set_str(&rt.handled)),
                    ));
                }
                let (mut row, f2) = self.finally(ctx, &rb.carrier, &rb.excs, &rt.signals, &rt.state, f, pos, "TyUser-Run")?;
                row.ops.extend(rt.external.iter().cloned());
                (row, UserKind::Run(r2, w2, Arc::new(b2), f2))
            }
            UserKind::Kernel(k, w, f) => {
                let (tw, w2) = self.synth_value(ctx, w, pos)?;
                let Some(state) = tw.as_ground() else {
                    return Err(self.err(pos, "TyUser-Kernel", "kernel state must have a ground type").with_types("a ground type", &tw));
                };
                let (rk, k2) = self.synth_kernel(ctx, k, &state)?;
                let (mut row, f2) = self.finally(ctx, &rk.carrier, &rk.excs, &rk.sigs, &state, f, pos, "TyUser-Kernel")?;
                row.ops.extend(rk.ops.iter().cloned());
                (row, UserKind::Kernel(Arc::new(k2), w2, f2))
            }
        };
        Ok((row, UserComp::at(pos, kind)))
    }

    fn check_handler_coverage<B>(&self, c: &OpCall<B>, excs: &EffSet, pos: Pos, rule: &str) -> CResult<()> {
        let given: BTreeSet<&Name> = c.handlers.iter().map(|(e, _)| e).collect();
        if given.len() != c.handlers.len() {
            return Err(self.err(pos, rule, format!("duplicate exception continuation in call of `{}`", c.op)));
        }
        if let Some(e) = excs.iter().find(|e| !given.contains(e)) {
            return Err(self.err(pos, rule, format!("call of `{}` lacks an exception continuation for `{e}`", c.op)));
        }
        if let Some(e) = given.iter().find(|e| !excs.contains(**e)) {
            return Err(self.err(pos, rule, format!("`{}` cannot raise `{e}`", c.op)));
        }
        Ok(())
    }

    fn join_urows(&self, rows: &[URow], pos: Pos, rule: &str) -> CResult<URow> {
        let mut out = URow { carrier: None, ops: EffSet::new(), excs: EffSet::new() };
        for r in rows {
            out.carrier = join_carrier(&out.carrier, &r.carrier).ok_or_else(|| {
                self.err(pos, rule, "branches have incompatible types")
                    .with_types(carrier_str(&out.carrier), carrier_str(&r.carrier))
            })?;
            out.ops.extend(r.ops.iter().cloned());
            out.excs.extend(r.excs.iter().cloned());
        }
        Ok(out)
    }

    fn join_krows(&self, rows: &[KRow], pos: Pos, rule: &str) -> CResult<KRow> {
        let mut out = KRow { carrier: None, ops: EffSet::new(), excs: EffSet::new(), sigs: EffSet::new() };
        for r in rows {
            out.carrier = join_carrier(&out.carrier, &r.carrier).ok_or_else(|| {
                self.err(pos, rule, "branches have incompatible types")
                    .with_types(carrier_str(&out.carrier), carrier_str(&r.carrier))
            })?;
            out.ops.extend(r.ops.iter().cloned());
            out.excs.extend(r.excs.iter().cloned());
            out.sigs.extend(r.sigs.iter().cloned());
        }
        Ok(out)
    }

    /// Handler of a user-mode `try`. Exceptions without a clause propagate.
    fn user_handler(&self, ctx: &Ctx, rb: &URow, h: &Handler<UserComp>, pos: Pos, rule: &str) -> CResult<(URow, Handler<UserComp>)> {
        let xt = rb.carrier.clone().unwrap_or(ValueType::Empty);
        let (rn, n2) = self.synth_user(&ctx.extend(&h.ret.0, xt), &h.ret.1)?;
        let mut rows = vec![rn];
        let mut raises = Vec::new();
        for (e, n) in &h.raises {
            let (re, n2) = self.synth_user(ctx, n)?;
            rows.push(re);
            raises.push((e.clone(), Arc::new(n2)));
        }
        let mut row = self.join_urows(&rows, pos, rule)?;
        row.ops.extend(rb.ops.iter().cloned());
        row.excs.extend(rb.excs.iter().filter(|e| h.raise_clause(e).is_none()).cloned());
        Ok((row, Handler { ret: (h.ret.0.clone(), Arc::new(n2)), raises }))
    }

    #[allow(clippy::too_many_arguments)]
    fn finally(
        &self,
        ctx: &Ctx,
        carrier: &Carrier,
        excs: &EffSet,
        sigs: &EffSet,
        state: &GroundType,
        f: &Finally,
        pos: Pos,
        rule: &str,
    ) -> CResult<(URow, Finally)> {
        for e in excs {
            if f.raise_clause(e).is_none() {
                return Err(self.err(pos, rule, format!("missing finalisation clause for exception `{e}`")));
            }
        }
        for s in sigs {
            if f.kill_clause(s).is_none() {
                return Err(self.err(pos, rule, format!("missing finalisation clause for signal `{s}`")));
            }
        }
        let (x, c, n) = &f.ret;
        let xt = carrier.clone().unwrap_or(ValueType::Empty);
        let (rn, n2) = self.synth_user(&ctx.extend(c, state.to_value()).extend(x, xt), n)?;
        let mut rows = vec![rn];
        let mut raises = Vec::new();
        for (e, c, n) in &f.raises {
            let (re, n2) = self.synth_user(&ctx.extend(c, state.to_value()), n)?;
            rows.push(re);
            raises.push((e.clone(), c.clone(), Arc::new(n2)));
        }
        let mut kills = Vec::new();
        for (s, n) in &f.kills {
            let (rs, n2) = self.synth_user(ctx, n)?;
            rows.push(rs);
            kills.push((s.clone(), Arc::new(n2)));
        }
        let row = self.join_urows(&rows, pos, rule)?;
        Ok((row, Finally { ret: (x.clone(), c.clone(), Arc::new(n2)), raises, kills }))
    }

    // -- kernel computations ------------------------------------------------

    pub fn synth_kernel(&self, ctx: &Ctx, k: &KernelComp, state: &GroundType) -> CResult<(KRow, KernelComp)> {
        let pos = k.pos;
        let (row, kind) = match &k.kind {
            KernelKind::Return(v) => {
                let (t, v) = self.synth_value(ctx, v, pos)?;
                (KRow::pure(t), KernelKind::Return(v))
            }
            KernelKind::App(f, a) => {
                let (tf, f2) = self.synth_value(ctx, f, pos)?;
                let ValueType::KernelFun(x, kt) = tf else {
                    return Err(self
                        .err(pos, "TyKernel-Apply", "applied value is not a kernel function")
                        .with_types("a kernel function type", &tf));
                };
                // A state of uninhabited type only occurs in unreachable code.
                if kt.state != *state && !state.is_uninhabited() {
                    return Err(self
                        .err(pos, "TyKernel-Apply", "kernel function expects a different state type")
                        .with_types(state, &kt.state));
                }
                let a2 = self.check_value(ctx, a, &x, pos, "TyKernel-Apply")?;
                (
                    KRow { carrier: Some(kt.carrier.clone()), ops: kt.ops.clone(), excs: kt.excs.clone(), sigs: kt.sigs.clone() },
                    KernelKind::App(f2, a2),
                )
            }
            KernelKind::Try(b, h) => {
                let (rb, b2) = self.synth_kernel(ctx, b, state)?;
                let (row, h2) = self.kernel_handler(ctx, &rb, h, state, pos, "TyKernel-Try")?;
                (row, KernelKind::Try(Arc::new(b2), h2))
            }
            KernelKind::Let(x, b, n) => {
                let (rb, b2) = self.synth_kernel(ctx, b, state)?;
                let xt = rb.carrier.clone().unwrap_or(ValueType::Empty);
                let (rn, n2) = self.synth_kernel(&ctx.extend(x, xt), n, state)?;
                let row = KRow {
                    carrier: rn.carrier,
                    ops: &rb.ops | &rn.ops,
                    excs: &rb.excs | &rn.excs,
                    sigs: &rb.sigs | &rn.sigs,
                };
                let raises = rb
                    .excs
                    .iter()
                    .map(|e| (e.clone(), Arc::new(KernelComp::at(pos, KernelKind::Raise(e.clone(), None)))))
                    .collect();
                (row, KernelKind::Try(Arc::new(b2), Handler { ret: (x.clone(), Arc::new(n2)), raises }))
            }
            KernelKind::MatchPair(v, x, y, b) => {
                let (t, v2) = self.synth_value(ctx, v, pos)?;
                let ValueType::Prod(tx, ty) = expand_empty(t.clone(), ValueType::prod) else {
                    return Err(self.err(pos, "TyKernel-MatchPair", "scrutinee is not a pair").with_types("a product type", &t));
                };
                let (rb, b2) = self.synth_kernel(&ctx.extend(x, *tx).extend(y, *ty), b, state)?;
                (rb, KernelKind::MatchPair(v2, x.clone(), y.clone(), Arc::new(b2)))
            }
            KernelKind::MatchEmpty(v, t) => {
                let v2 = self.check_value(ctx, v, &ValueType::Empty, pos, "TyKernel-MatchEmpty")?;
                (KRow::pure(t.clone()), KernelKind::MatchEmpty(v2, t.clone()))
            }
            KernelKind::MatchSum(v, x, b1, y, b2) => {
                let (t, v2) = self.synth_value(ctx, v, pos)?;
                let ValueType::Sum(tx, ty) = expand_empty(t.clone(), ValueType::sum) else {
                    return Err(self.err(pos, "TyKernel-MatchSum", "scrutinee is not a sum").with_types("a sum type", &t));
                };
                let (r1, c1) = self.synth_kernel(&ctx.extend(x, *tx), b1, state)?;
                let (r2, c2) = self.synth_kernel(&ctx.extend(y, *ty), b2, state)?;
                let row = self.join_krows(&[r1, r2], pos, "TyKernel-MatchSum")?;
                (row, KernelKind::MatchSum(v2, x.clone(), Arc::new(c1), y.clone(), Arc::new(c2)))
            }
            KernelKind::Op(c) => {
                let sig = self
                    .tables
                    .op(&c.op)
                    .ok_or_else(|| self.err(pos, "TyKernel-Op", format!("undeclared operation `{}`", c.op)))?;
                self.check_handler_coverage(c, &sig.excs, pos, "TyKernel-Op")?;
                let arg =
                    self.check_ground(ctx, &c.arg, &sig.param, pos, "TyKernel-Op", "operation argument has the wrong type")?;
                let (rb, body) = self.synth_kernel(&ctx.extend(&c.var, sig.result.to_value()), &c.body, state)?;
                let mut rows = vec![rb];
                let mut handlers = Vec::new();
                for (e, n) in &c.handlers {
                    let (rn, n2) = self.synth_kernel(ctx, n, state)?;
                    rows.push(rn);
                    handlers.push((e.clone(), Arc::new(n2)));
                }
                let mut row = self.join_krows(&rows, pos, "TyKernel-Op")?;
                row.ops.insert(c.op.clone());
                (row, KernelKind::Op(OpCall { op: c.op.clone(), arg, var: c.var.clone(), body: Arc::new(body), handlers }))
            }
            KernelKind::Raise(e, t) => (
                KRow { carrier: t.clone(), ops: EffSet::new(), excs: [e.clone()].into_iter().collect(), sigs: EffSet::new() },
                KernelKind::Raise(e.clone(), t.clone()),
            ),
            KernelKind::Kill(s, t) => (
                KRow { carrier: t.clone(), ops: EffSet::new(), excs: EffSet::new(), sigs: [s.clone()].into_iter().collect() },
                KernelKind::Kill(s.clone(), t.clone()),
            ),
            KernelKind::Getenv(c, b) => {
                let (rb, b2) = self.synth_kernel(&ctx.extend(c, state.to_value()), b, state)?;
                (rb, KernelKind::Getenv(c.clone(), Arc::new(b2)))
            }
            KernelKind::Setenv(v, b) => {
                let v2 = if state.is_uninhabited() {
                    self.synth_value(ctx, v, pos)?.1
                } else {
                    self.check_ground(ctx, v, state, pos, "TyKernel-Setenv", "new state has the wrong type")?
                };
                let (rb, b2) = self.synth_kernel(ctx, b, state)?;
                (rb, KernelKind::Setenv(v2, Arc::new(b2)))
            }
            KernelKind::User(m, h) => {
                let (rm, m2) = self.synth_user(ctx, m)?;
                let xt = rm.carrier.clone().unwrap_or(ValueType::Empty);
                let (rn, n2) = self.synth_kernel(&ctx.extend(&h.ret.0, xt), &h.ret.1, state)?;
                let mut rows = vec![rn];
                let mut raises = Vec::new();
                for (e, n) in &h.raises {
                    let (re, n2) = self.synth_kernel(ctx, n, state)?;
                    rows.push(re);
                    raises.push((e.clone(), Arc::new(n2)));
                }
                let mut row = self.join_krows(&rows, pos, "TyKernel-User")?;
                row.ops.extend(rm.ops.iter().cloned());
                row.excs.extend(rm.excs.iter().filter(|e| h.raise_clause(e).is_none()).cloned());
                (row, KernelKind::User(Arc::new(m2), Handler { ret: (h.ret.0.clone(), Arc::new(n2)), raises }))
            }
        };
        Ok((row, KernelComp::at(pos, kind)))
    }

    fn kernel_handler(
        &self,
        ctx: &Ctx,
        rb: &KRow,
        h: &Handler<KernelComp>,
        state: &GroundType,
        pos: Pos,
        rule: &str,
    ) -> CResult<(KRow, Handler<KernelComp>)> {
        let xt = rb.carrier.clone().unwrap_or(ValueType::Empty);
        let (rn, n2) = self.synth_kernel(&ctx.extend(&h.ret.0, xt), &h.ret.1, state)?;
        let mut rows = vec![rn];
        let mut raises = Vec::new();
        for (e, n) in &h.raises {
            let (re, n2) = self.synth_kernel(ctx, n, state)?;
            rows.push(re);
            raises.push((e.clone(), Arc::new(n2)));
        }
        let mut row = self.join_krows(&rows, pos, rule)?;
        row.ops.extend(rb.ops.iter().cloned());
        row.sigs.extend(rb.sigs.iter().cloned());
        row.excs.extend(rb.excs.iter().filter(|e| h.raise_clause(e).is_none()).cloned());
        Ok((row, Handler { ret: (h.ret.0.clone(), Arc::new(n2)), raises }))
    }

    /// Checks a user computation against an expected type.
    pub fn check_user(&self, ctx: &Ctx, m: &UserComp, want: &UserType) -> CResult<UserComp> {
        let (row, m2) = self.synth_user(ctx, m)?;
        if row.fits(want) {
            return Ok(m2);
        }
        Err(self.blame_user(ctx, m, want).unwrap_or_else(|| {
            self.err(m.pos, "Subsume-User", "computation does not have the expected type").with_types(want, row.to_type())
        }))
    }

    /// Checks a kernel computation against an expected type.
    pub fn check_kernel(&self, ctx: &Ctx, k: &KernelComp, want: &KernelType) -> CResult<KernelComp> {
        let (row, k2) = self.synth_kernel(ctx, k, &want.state)?;
        if row.fits(want) {
            return Ok(k2);
        }
        Err(self.blame_kernel(ctx, k, want).unwrap_or_else(|| {
            self.err(k.pos, "Subsume-Kernel", "computation does not have the expected type")
                .with_types(want, row.to_type(&want.state))
        }))
    }
}

// ---------------------------------------------------------------------------
// Public entry points.

/// A binder of the empty type only occurs in dead code; it eliminates as
/// a pair or sum of empty components.
fn expand_empty(t: ValueType, f: fn(ValueType, ValueType) -> ValueType) -> ValueType {
    match t {
        ValueType::Empty => f(ValueType::Empty, ValueType::Empty),
        t => t,
    }
}

pub fn infer_value(tables: &EffectTables, ctx: &Ctx, v: &Value) -> CResult<ValueType> {
    Checker::new(tables).synth_value(ctx, v, Pos::default()).map(|(t, _)| t)
}

pub fn infer_user(tables: &EffectTables, ctx: &Ctx, m: &UserComp) -> CResult<UserType> {
    Checker::new(tables).synth_user(ctx, m).map(|(r, _)| r.to_type())
}

pub fn infer_kernel(tables: &EffectTables, ctx: &Ctx, k: &KernelComp, state: &GroundType) -> CResult<KernelType> {
    Checker::new(tables).synth_kernel(ctx, k, state).map(|(r, _)| r.to_type(state))
}

/// Least row of a user computation, keeping "never returns" distinct from
/// returning a value of type `empty`.
pub fn infer_user_row(tables: &EffectTables, ctx: &Ctx, m: &UserComp) -> CResult<URow> {
    Checker::new(tables).synth_user(ctx, m).map(|(r, _)| r)
}

pub fn infer_kernel_row(tables: &EffectTables, ctx: &Ctx, k: &KernelComp, state: &GroundType) -> CResult<KRow> {
    Checker::new(tables).synth_kernel(ctx, k, state).map(|(r, _)| r)
}

/// Expands every `let` into `try`, using the inferred exceptions of the
/// bound computation. Fails on ill-typed input.
pub fn elaborate_user(tables: &EffectTables, ctx: &Ctx, m: &UserComp) -> CResult<UserComp> {
    Checker::new(tables).synth_user(ctx, m).map(|(_, m)| m)
}

pub fn elaborate_kernel(tables: &EffectTables, ctx: &Ctx, k: &KernelComp, state: &GroundType) -> CResult<KernelComp> {
    Checker::new(tables).synth_kernel(ctx, k, state).map(|(_, k)| k)
}

#[derive(Clone, Debug)]
pub struct CheckedProgram {
    /// Per top-level binding: its name and type, or the error that made it
    /// ill-typed.
    pub bindings: Vec<(Name, CResult<UserType>)>,
    pub main: CResult<UserType>,
    /// The whole program with lets expanded, present when every part
    /// typechecks.
    pub elaborated: Option<UserComp>,
    /// Type of the whole program.
    pub program_type: Option<UserType>,
}

impl CheckedProgram {
    /// All diagnostics, skipping ones that only repeat an earlier failure.
    pub fn errors(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = Vec::new();
        let all = self.bindings.iter().filter_map(|(_, r)| r.as_ref().err()).chain(self.main.as_ref().err());
        for d in all {
            if !d.message.contains("refers to an ill-typed binding") || out.is_empty() {
                out.push(d.clone());
            }
        }
        out
    }

    pub fn is_ok(&self) -> bool {
        self.elaborated.is_some()
    }
}

/// Checks every top-level binding and the main computation. A failing
/// binding does not stop the others from being checked.
pub fn check_program(p: &Program) -> CheckedProgram {
    let checker = Checker::new(&p.tables);
    let mut ctx = Ctx::new();
    let mut bindings = Vec::new();
    let mut elaborated = Vec::new();
    let mut total = Some(URow { carrier: None, ops: EffSet::new(), excs: EffSet::new() });
    for (x, m) in &p.bindings {
        match checker.synth_user(&ctx, m) {
            Ok((row, m2)) => {
                ctx.push(x, Some(row.carrier.clone().unwrap_or(ValueType::Empty)));
                if let Some(t) = total.as_mut() {
                    t.ops.extend(row.ops.iter().cloned());
                    t.excs.extend(row.excs.iter().cloned());
                }
                bindings.push((x.clone(), Ok(row.to_type())));
                elaborated.push((x.clone(), row, m2));
            }
            Err(d) => {
                ctx.push(x, None);
                total = None;
                bindings.push((x.clone(), Err(d)));
            }
        }
    }
    let main = checker.synth_user(&ctx, &p.main);
    let (main_ty, elaborated, program_type) = match main {
        Ok((row, m2)) => {
            let program_type = total.map(|mut t| {
                t.carrier = row.carrier.clone();
                t.ops.extend(row.ops.iter().cloned());
                t.excs.extend(row.excs.iter().cloned());
                t.to_type()
            });
            let elab = program_type.as_ref().map(|_| {
                let mut comp = m2;
                for (x, row, m) in elaborated.into_iter().rev() {
                    let pos = m.pos;
                    let raises = row
                        .excs
                        .iter()
                        .map(|e| (e.clone(), Arc::new(UserComp::at(pos, UserKind::Raise(e.clone(), None)))))
                        .collect();
                    comp = UserComp::at(pos, UserKind::Try(Arc::new(m), Handler { ret: (x, Arc::new(comp)), raises }));
                }
                comp
            });
            (Ok(row.to_type()), elab, program_type)
        }
        Err(d) => (Err(d), None, None),
    };
    CheckedProgram { bindings, main: main_ty, elaborated, program_type }
}

/// `name : type` lines for `check --emit-types`. Bindings without effects
/// print their value type; others print the full user type.
pub fn describe_bindings(c: &CheckedProgram) -> Vec<String> {
    c.bindings
        .iter()
        .filter_map(|(x, t)| {
            let t = t.as_ref().ok()?;
            let shown = if t.ops.is_empty() && t.excs.is_empty() { t.carrier.to_string() } else { t.to_string() };
            Some(format!("{} : {}", display_name(x), shown))
        })
        .collect()
}
