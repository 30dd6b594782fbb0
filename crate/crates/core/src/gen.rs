//! Seeded generators over a small test signature: closed well-typed
//! programs, finite runners, computation trees, and a scripted top level
//! that answers operations deterministically.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{run_toplevel, Handle, Outcome, Reply};
use crate::ground::{enumerate, GroundValue};
use crate::names::{name, Name};
use crate::oracle::{FiniteRunner, KPay, Tree, UPay};
use crate::syntax::*;
use crate::types::{EffSet, EffectTables, GroundType, OpSig};

/// `flip : unit ~> bool ! {oops}`, `pick : bool ~> int`,
/// `ping : int ~> unit ! {bad}`, exceptions `oops`, `bad`, `ugh`,
/// signals `halt`, `stop`.
pub fn test_tables() -> EffectTables {
    let mut t = EffectTables::default();
    let excs = |es: &[&str]| es.iter().map(|e| name(e)).collect::<EffSet>();
    t.ops.insert(name("flip"), OpSig { param: GroundType::Unit, result: GroundType::bool(), excs: excs(&["oops"]) });
    t.ops.insert(name("pick"), OpSig { param: GroundType::bool(), result: GroundType::int(), excs: excs(&[]) });
    t.ops.insert(name("ping"), OpSig { param: GroundType::int(), result: GroundType::Unit, excs: excs(&["bad"]) });
    t.exceptions = excs(&["oops", "bad", "ugh"]);
    t.signals = excs(&["halt", "stop"]);
    t
}

/// Ground variables in scope.
#[derive(Clone, Debug, Default)]
pub struct GCtx(Vec<(Name, GroundType)>);

impl GCtx {
    pub fn new() -> Self {
        GCtx(Vec::new())
    }

    pub fn with(&self, x: &Name, t: &GroundType) -> GCtx {
        let mut v = self.0.clone();
        v.push((x.clone(), t.clone()));
        GCtx(v)
    }

    fn vars_of(&self, t: &GroundType) -> Vec<Name> {
        self.0.iter().filter(|(_, u)| u == t).map(|(x, _)| x.clone()).collect()
    }
}

/// Effects a generated user computation may use.
#[derive(Clone, Debug, Default)]
pub struct UEff {
    pub ops: Vec<Name>,
    pub excs: Vec<Name>,
}

/// Effects a generated kernel computation may use.
#[derive(Clone, Debug)]
pub struct KEff {
    pub ops: Vec<Name>,
    pub excs: Vec<Name>,
    pub sigs: Vec<Name>,
    pub state: GroundType,
}

pub struct Gen {
    rng: ChaCha8Rng,
    pub tables: EffectTables,
    pub int_bound: i64,
    next: u64,
}

fn uc(kind: UserKind) -> UserComp {
    UserComp::new(kind)
}

fn kc(kind: KernelKind) -> KernelComp {
    KernelComp::new(kind)
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), tables: test_tables(), int_bound: 3, next: 0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        self.next += 1;
        name(&format!("{base}{}", self.next))
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("nonempty choice").clone()
    }

    pub fn subset(&mut self, xs: &[Name], p: f64) -> Vec<Name> {
        xs.iter().filter(|_| self.rng.gen_bool(p)).cloned().collect()
    }

    pub fn all_ops(&self) -> Vec<Name> {
        self.tables.ops.keys().cloned().collect()
    }

    pub fn all_excs(&self) -> Vec<Name> {
        self.tables.exceptions.iter().cloned().collect()
    }

    pub fn all_sigs(&self) -> Vec<Name> {
        self.tables.signals.iter().cloned().collect()
    }

    fn sig(&self, op: &Name) -> OpSig {
        self.tables.ops[op].clone()
    }

    pub fn ground_type(&mut self) -> GroundType {
        match self.below(6) {
            0 | 1 => GroundType::int(),
            2 => GroundType::bool(),
            3 => GroundType::Unit,
            4 => GroundType::prod(GroundType::int(), GroundType::bool()),
            _ => GroundType::sum(GroundType::Unit, GroundType::int()),
        }
    }

    pub fn state_type(&mut self) -> GroundType {
        match self.below(4) {
            0 | 1 => GroundType::int(),
            2 => GroundType::bool(),
            _ => GroundType::Unit,
        }
    }

    /// A value of type `t`. With `small`, integers are literals below the
    /// oracle's bound, so they may serve as operation results.
    pub fn value(&mut self, ctx: &GCtx, t: &GroundType, d: u32, small: bool) -> Value {
        let vars = ctx.vars_of(t);
        let var_ok = !vars.is_empty() && !(small && contains_int(t));
        if var_ok && self.chance(0.45) {
            return Value::Var(self.pick(&vars));
        }
        match t {
            GroundType::Base(crate::types::BaseType::Int) => {
                if small {
                    return Value::int(self.rng.gen_range(0..self.int_bound));
                }
                if d > 0 && self.chance(0.3) {
                    let p = self.pick(&[Prim::Add, Prim::Sub, Prim::Mul]);
                    let a = self.value(ctx, t, d - 1, false);
                    let b = self.value(ctx, t, d - 1, false);
                    return Value::Prim(p, vec![a, b]);
                }
                Value::int(self.rng.gen_range(0..5))
            }
            GroundType::Base(crate::types::BaseType::Bool) => {
                if d > 0 && self.chance(0.3) {
                    let p = self.pick(&[Prim::Eq, Prim::Lt]);
                    let a = self.value(ctx, &GroundType::int(), d - 1, false);
                    let b = self.value(ctx, &GroundType::int(), d - 1, false);
                    return Value::Prim(p, vec![a, b]);
                }
                Value::bool(self.chance(0.5))
            }
            GroundType::Base(crate::types::BaseType::Str) => Value::str(self.pick(&["", "a", "bc"])),
            GroundType::Unit => Value::Unit,
            GroundType::Empty => unreachable!("no values of the empty type"),
            GroundType::Prod(a, b) => {
                let x = self.value(ctx, a, d.saturating_sub(1), small);
                let y = self.value(ctx, b, d.saturating_sub(1), small);
                Value::pair(x, y)
            }
            GroundType::Sum(a, b) => {
                if **a == GroundType::Unit && **b == GroundType::Unit && d > 0 && self.chance(0.4) {
                    let c = self.value(ctx, &GroundType::bool(), d - 1, false);
                    return Value::Prim(Prim::Cond, vec![c]);
                }
                let (l, r) = (a.to_value(), b.to_value());
                if self.chance(0.5) {
                    Value::Inl(Box::new(self.value(ctx, a, d.saturating_sub(1), small)), l, r)
                } else {
                    Value::Inr(Box::new(self.value(ctx, b, d.saturating_sub(1), small)), l, r)
                }
            }
        }
    }

    fn scrutinee_sum(&mut self) -> GroundType {
        if self.chance(0.5) {
            GroundType::sum(GroundType::Unit, GroundType::Unit)
        } else {
            GroundType::sum(GroundType::Unit, GroundType::int())
        }
    }

    /// A closed-over-`ctx` user computation of type `t ! eff`.
    pub fn user(&mut self, ctx: &GCtx, t: &GroundType, eff: &UEff, d: u32) -> UserComp {
        if d == 0 {
            return self.user_leaf(ctx, t, eff);
        }
        let mut choices: Vec<(u32, u8)> = vec![(2, 0), (2, 3), (2, 4), (1, 5), (1, 6), (1, 7)];
        if !eff.excs.is_empty() {
            choices.push((1, 1));
        }
        if !eff.ops.is_empty() {
            choices.push((3, 2));
        }
        if d >= 2 {
            choices.push((2, 8));
            choices.push((1, 9));
        }
        let total: u32 = choices.iter().map(|c| c.0).sum();
        let mut r = self.rng.gen_range(0..total);
        let mut pick = 0;
        for (w, c) in choices {
            if r < w {
                pick = c;
                break;
            }
            r -= w;
        }
        match pick {
            0 => uc(UserKind::Return(self.value(ctx, t, 2, false))),
            1 => uc(UserKind::Raise(self.pick(&eff.excs), self.annotation(t))),
            2 => {
                let op = self.pick(&eff.ops);
                let sig = self.sig(&op);
                let arg = self.value(ctx, &sig.param, 1, false);
                let x = self.fresh("x");
                let body = self.user(&ctx.with(&x, &sig.result), t, eff, d - 1);
                let handlers = sig.excs.iter().map(|e| (e.clone(), Arc::new(self.user(ctx, t, eff, d - 1)))).collect();
                uc(UserKind::Op(OpCall { op, arg, var: x, body: Arc::new(body), handlers }))
            }
            3 => {
                let u = self.ground_type();
                let x = self.fresh("x");
                let m = self.user(ctx, &u, eff, d - 1);
                let n = self.user(&ctx.with(&x, &u), t, eff, d - 1);
                uc(UserKind::Let(x, Arc::new(m), Arc::new(n)))
            }
            4 => {
                let u = self.ground_type();
                let all = self.all_excs();
                let extra = self.subset(&all, 0.4);
                let inner = UEff { ops: eff.ops.clone(), excs: union(&eff.excs, &extra) };
                let m = self.user(ctx, &u, &inner, d - 1);
                let x = self.fresh("x");
                let ret = (x.clone(), Arc::new(self.user(&ctx.with(&x, &u), t, eff, d - 1)));
                let mut raises = Vec::new();
                for e in &inner.excs {
                    if !eff.excs.contains(e) || self.chance(0.5) {
                        raises.push((e.clone(), Arc::new(self.user(ctx, t, eff, d - 1))));
                    }
                }
                uc(UserKind::Try(Arc::new(m), Handler { ret, raises }))
            }
            5 => {
                let (a, b) = (self.ground_type(), self.ground_type());
                let v = self.value(ctx, &GroundType::prod(a.clone(), b.clone()), 2, false);
                let (x, y) = (self.fresh("x"), self.fresh("y"));
                let m = self.user(&ctx.with(&x, &a).with(&y, &b), t, eff, d - 1);
                uc(UserKind::MatchPair(v, x, y, Arc::new(m)))
            }
            6 => {
                let s = self.scrutinee_sum();
                let GroundType::Sum(a, b) = &s else { unreachable!() };
                let v = self.value(ctx, &s, 2, false);
                let (x, y) = (self.fresh("x"), self.fresh("y"));
                let m = self.user(&ctx.with(&x, a), t, eff, d - 1);
                let n = self.user(&ctx.with(&y, b), t, eff, d - 1);
                uc(UserKind::MatchSum(v, x, Arc::new(m), y, Arc::new(n)))
            }
            7 => {
                let u = self.ground_type();
                let x = self.fresh("x");
                let m = self.user(&ctx.with(&x, &u), t, eff, d - 1);
                let a = self.value(ctx, &u, 2, false);
                uc(UserKind::App(Value::Fun(x, u.to_value(), Arc::new(m)), a))
            }
            8 => self.run(ctx, t, eff, d),
            _ => self.kernel_switch(ctx, t, eff, d),
        }
    }

    fn annotation(&mut self, t: &GroundType) -> Option<crate::types::ValueType> {
        self.chance(0.5).then(|| t.to_value())
    }

    fn user_leaf(&mut self, ctx: &GCtx, t: &GroundType, eff: &UEff) -> UserComp {
        if !eff.excs.is_empty() && self.chance(0.2) {
            uc(UserKind::Raise(self.pick(&eff.excs), self.annotation(t)))
        } else {
            uc(UserKind::Return(self.value(ctx, t, 1, false)))
        }
    }

    /// `using R @ W run M finally F` where `R` implements a random set of
    /// operations in terms of `eff.ops`.
    pub fn run(&mut self, ctx: &GCtx, t: &GroundType, eff: &UEff, d: u32) -> UserComp {
        let all_ops = self.all_ops();
        let mut inner_ops = self.subset(&all_ops, 0.6);
        if inner_ops.is_empty() {
            inner_ops.push(self.pick(&all_ops));
        }
        let state = self.state_type();
        let all_sigs = self.all_sigs();
        let sigs = self.subset(&all_sigs, 0.4);
        let r = self.runner(ctx, &inner_ops, &eff.ops, &sigs, &state, d - 1);
        let all_excs = self.all_excs();
        let body_eff = UEff { ops: inner_ops, excs: self.subset(&all_excs, 0.4) };
        let u = self.ground_type();
        let m = self.user(ctx, &u, &body_eff, d - 1);
        let w = self.value(ctx, &state, 1, false);
        let f = self.finally(ctx, t, eff, &u, &state, &body_eff.excs, &sigs, d - 1);
        uc(UserKind::Run(Value::Runner(Arc::new(r)), w, Arc::new(m), f))
    }

    /// `kernel K @ W finally F`.
    pub fn kernel_switch(&mut self, ctx: &GCtx, t: &GroundType, eff: &UEff, d: u32) -> UserComp {
        let state = self.state_type();
        let (all_excs, all_sigs) = (self.all_excs(), self.all_sigs());
        let keff = KEff {
            ops: eff.ops.clone(),
            excs: self.subset(&all_excs, 0.4),
            sigs: self.subset(&all_sigs, 0.4),
            state: state.clone(),
        };
        let u = self.ground_type();
        let k = self.kernel(ctx, &u, &keff, d - 1, false);
        let w = self.value(ctx, &state, 1, false);
        let f = self.finally(ctx, t, eff, &u, &state, &keff.excs, &keff.sigs, d - 1);
        uc(UserKind::Kernel(Arc::new(k), w, f))
    }

    pub fn runner(&mut self, ctx: &GCtx, ops: &[Name], ext: &[Name], sigs: &[Name], state: &GroundType, d: u32) -> RunnerLit {
        let mut clauses = Vec::new();
        for op in ops {
            let sig = self.sig(op);
            let a = self.fresh("a");
            let keff = KEff { ops: ext.to_vec(), excs: sig.excs.iter().cloned().collect(), sigs: sigs.to_vec(), state: state.clone() };
            let body = self.kernel(&ctx.with(&a, &sig.param), &sig.result, &keff, d, true);
            clauses.push(CoopClause { op: op.clone(), param: a, body: Arc::new(body) });
        }
        RunnerLit { clauses, state: state.clone() }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finally(
        &mut self,
        ctx: &GCtx,
        t: &GroundType,
        eff: &UEff,
        x_ty: &GroundType,
        state: &GroundType,
        excs: &[Name],
        sigs: &[Name],
        d: u32,
    ) -> Finally {
        let (x, c) = (self.fresh("x"), self.fresh("c"));
        let n = self.user(&ctx.with(&x, x_ty).with(&c, state), t, eff, d);
        let mut raises = Vec::new();
        for e in excs {
            let c = self.fresh("c");
            let n = self.user(&ctx.with(&c, state), t, eff, d);
            raises.push((e.clone(), c, Arc::new(n)));
        }
        let kills = sigs.iter().map(|s| (s.clone(), Arc::new(self.user(ctx, t, eff, d)))).collect();
        Finally { ret: (x, c, Arc::new(n)), raises, kills }
    }

    /// A kernel computation of type `t ! eff`. With `small`, returned
    /// integers stay below the oracle's bound.
    pub fn kernel(&mut self, ctx: &GCtx, t: &GroundType, eff: &KEff, d: u32, small: bool) -> KernelComp {
        if d == 0 {
            return self.kernel_leaf(ctx, t, eff, small);
        }
        let mut choices: Vec<(u32, u8)> = vec![(2, 0), (2, 4), (1, 5), (1, 6), (1, 7), (1, 8), (2, 9), (2, 10), (1, 11)];
        if !eff.excs.is_empty() {
            choices.push((1, 1));
        }
        if !eff.sigs.is_empty() {
            choices.push((1, 2));
        }
        if !eff.ops.is_empty() {
            choices.push((3, 3));
        }
        let total: u32 = choices.iter().map(|c| c.0).sum();
        let mut r = self.rng.gen_range(0..total);
        let mut pick = 0;
        for (w, c) in choices {
            if r < w {
                pick = c;
                break;
            }
            r -= w;
        }
        match pick {
            0 => kc(KernelKind::Return(self.value(ctx, t, 2, small))),
            1 => kc(KernelKind::Raise(self.pick(&eff.excs), self.annotation(t))),
            2 => kc(KernelKind::Kill(self.pick(&eff.sigs), self.annotation(t))),
            3 => {
                let op = self.pick(&eff.ops);
                let sig = self.sig(&op);
                let arg = self.value(ctx, &sig.param, 1, false);
                let x = self.fresh("x");
                let body = self.kernel(&ctx.with(&x, &sig.result), t, eff, d - 1, small);
                let handlers =
                    sig.excs.iter().map(|e| (e.clone(), Arc::new(self.kernel(ctx, t, eff, d - 1, small)))).collect();
                kc(KernelKind::Op(OpCall { op, arg, var: x, body: Arc::new(body), handlers }))
            }
            4 => {
                let u = self.ground_type();
                let x = self.fresh("x");
                let k = self.kernel(ctx, &u, eff, d - 1, false);
                let l = self.kernel(&ctx.with(&x, &u), t, eff, d - 1, small);
                kc(KernelKind::Let(x, Arc::new(k), Arc::new(l)))
            }
            5 => {
                let u = self.ground_type();
                let all = self.all_excs();
                let extra = self.subset(&all, 0.4);
                let inner = KEff { excs: union(&eff.excs, &extra), ..eff.clone() };
                let k = self.kernel(ctx, &u, &inner, d - 1, false);
                let x = self.fresh("x");
                let ret = (x.clone(), Arc::new(self.kernel(&ctx.with(&x, &u), t, eff, d - 1, small)));
                let mut raises = Vec::new();
                for e in &inner.excs {
                    if !eff.excs.contains(e) || self.chance(0.5) {
                        raises.push((e.clone(), Arc::new(self.kernel(ctx, t, eff, d - 1, small))));
                    }
                }
                kc(KernelKind::Try(Arc::new(k), Handler { ret, raises }))
            }
            6 => {
                let (a, b) = (self.ground_type(), self.ground_type());
                let v = self.value(ctx, &GroundType::prod(a.clone(), b.clone()), 2, false);
                let (x, y) = (self.fresh("x"), self.fresh("y"));
                let k = self.kernel(&ctx.with(&x, &a).with(&y, &b), t, eff, d - 1, small);
                kc(KernelKind::MatchPair(v, x, y, Arc::new(k)))
            }
            7 => {
                let s = self.scrutinee_sum();
                let GroundType::Sum(a, b) = &s else { unreachable!() };
                let v = self.value(ctx, &s, 2, false);
                let (x, y) = (self.fresh("x"), self.fresh("y"));
                let k = self.kernel(&ctx.with(&x, a), t, eff, d - 1, small);
                let l = self.kernel(&ctx.with(&y, b), t, eff, d - 1, small);
                kc(KernelKind::MatchSum(v, x, Arc::new(k), y, Arc::new(l)))
            }
            8 => {
                let u = self.ground_type();
                let x = self.fresh("x");
                let k = self.kernel(&ctx.with(&x, &u), t, eff, d - 1, small);
                let a = self.value(ctx, &u, 2, false);
                kc(KernelKind::App(Value::FunK(x, u.to_value(), eff.state.clone(), Arc::new(k)), a))
            }
            9 => {
                let c = self.fresh("c");
                let k = self.kernel(&ctx.with(&c, &eff.state), t, eff, d - 1, small);
                kc(KernelKind::Getenv(c, Arc::new(k)))
            }
            10 => {
                let v = self.value(ctx, &eff.state, 2, false);
                let k = self.kernel(ctx, t, eff, d - 1, small);
                kc(KernelKind::Setenv(v, Arc::new(k)))
            }
            _ => {
                let u = self.ground_type();
                let all = self.all_excs();
                let excs = union(&eff.excs, &self.subset(&all, 0.4));
                let m = self.user(ctx, &u, &UEff { ops: eff.ops.clone(), excs: excs.clone() }, d - 1);
                let x = self.fresh("x");
                let ret = (x.clone(), Arc::new(self.kernel(&ctx.with(&x, &u), t, eff, d - 1, small)));
                let mut raises = Vec::new();
                for e in &excs {
                    if !eff.excs.contains(e) || self.chance(0.5) {
                        raises.push((e.clone(), Arc::new(self.kernel(ctx, t, eff, d - 1, small))));
                    }
                }
                kc(KernelKind::User(Arc::new(m), Handler { ret, raises }))
            }
        }
    }

    fn kernel_leaf(&mut self, ctx: &GCtx, t: &GroundType, eff: &KEff, small: bool) -> KernelComp {
        if !eff.excs.is_empty() && self.chance(0.15) {
            kc(KernelKind::Raise(self.pick(&eff.excs), self.annotation(t)))
        } else if !eff.sigs.is_empty() && self.chance(0.15) {
            kc(KernelKind::Kill(self.pick(&eff.sigs), self.annotation(t)))
        } else {
            kc(KernelKind::Return(self.value(ctx, t, 1, small)))
        }
    }

    /// A closed program with no operations escaping to the top level.
    pub fn pure_program(&mut self, depth: u32) -> (UserComp, GroundType) {
        let t = self.ground_type();
        let all = self.all_excs();
        let eff = UEff { ops: Vec::new(), excs: self.subset(&all, 0.3) };
        (self.user(&GCtx::new(), &t, &eff, depth), t)
    }

    /// A closed program whose operations may reach the top level.
    pub fn effectful_program(&mut self, depth: u32) -> (UserComp, GroundType) {
        let t = self.ground_type();
        let (ops, all) = (self.all_ops(), self.all_excs());
        let eff = UEff { ops, excs: self.subset(&all, 0.3) };
        (self.user(&GCtx::new(), &t, &eff, depth), t)
    }

    /// A random tree over `ops` with leaves drawn from `leaves`.
    pub fn tree<P: Clone>(&mut self, ops: &BTreeMap<Name, OpSig>, leaves: &[P], depth: u32) -> Tree<P> {
        if depth == 0 || ops.is_empty() || self.chance(0.3) {
            return Tree::Leaf(self.pick(leaves));
        }
        let names: Vec<Name> = ops.keys().cloned().collect();
        let op = self.pick(&names);
        let sig = &ops[&op];
        let args = enumerate(&sig.param, self.int_bound).expect("enumerable parameter");
        let arg = self.pick(&args);
        let results = enumerate(&sig.result, self.int_bound).expect("enumerable result");
        let children = results.into_iter().map(|b| (b, self.tree(ops, leaves, depth - 1))).collect();
        let excs = sig.excs.iter().map(|e| (e.clone(), self.tree(ops, leaves, depth - 1))).collect();
        Tree::Node { op, arg, children, excs }
    }

    /// A runner for `internal` given by random co-operation trees over
    /// `external`, of depth at most `depth`.
    pub fn finite_runner(
        &mut self,
        internal: &BTreeMap<Name, OpSig>,
        external: &BTreeMap<Name, OpSig>,
        state: &GroundType,
        sigs: &[Name],
        depth: u32,
    ) -> FiniteRunner {
        let states = enumerate(state, self.int_bound).expect("enumerable state");
        let mut coops = BTreeMap::new();
        for (op, sig) in internal {
            let mut leaves = Vec::new();
            for c in &states {
                for b in enumerate(&sig.result, self.int_bound).expect("enumerable result") {
                    leaves.push(KPay::Val(b, c.clone()));
                }
                for e in &sig.excs {
                    leaves.push(KPay::Exc(e.clone(), c.clone()));
                }
            }
            leaves.extend(sigs.iter().map(|s| KPay::Sig(s.clone())));
            for a in enumerate(&sig.param, self.int_bound).expect("enumerable parameter") {
                for c in &states {
                    coops.insert((op.clone(), a.clone(), c.clone()), self.tree(external, &leaves, depth));
                }
            }
        }
        FiniteRunner { state: state.clone(), ops: internal.clone(), coops }
    }
}

fn union(a: &[Name], b: &[Name]) -> Vec<Name> {
    let mut v: Vec<Name> = a.to_vec();
    for x in b {
        if !v.contains(x) {
            v.push(x.clone());
        }
    }
    v
}

fn contains_int(t: &GroundType) -> bool {
    match t {
        GroundType::Base(crate::types::BaseType::Int) => true,
        GroundType::Prod(a, b) | GroundType::Sum(a, b) => contains_int(a) || contains_int(b),
        _ => false,
    }
}

/// A top level answering operations from a seeded stream: results are
/// drawn from the oracle's enumeration, exceptions of the operation are
/// raised occasionally, and a signal can be injected at a given call.
#[derive(Clone, Debug)]
pub struct Script {
    tables: EffectTables,
    rng: ChaCha8Rng,
    int_bound: i64,
    pub calls: usize,
    pub kill_at: Option<usize>,
}

impl Script {
    pub fn new(tables: &EffectTables, seed: u64) -> Self {
        Script { tables: tables.clone(), rng: ChaCha8Rng::seed_from_u64(seed), int_bound: 3, calls: 0, kill_at: None }
    }

    pub fn with_kill_at(mut self, n: usize) -> Self {
        self.kill_at = Some(n);
        self
    }
}

impl Handle for Script {
    fn handle(&mut self, op: &str, _arg: &GroundValue) -> Option<Reply> {
        let sig = self.tables.op(op)?;
        let n = self.calls;
        self.calls += 1;
        if self.kill_at == Some(n) {
            return Some(Reply::Kill(name("halt")));
        }
        let excs: Vec<&Name> = sig.excs.iter().collect();
        if !excs.is_empty() && self.rng.gen_bool(0.2) {
            return Some(Reply::Raise((*excs.choose(&mut self.rng)?).clone()));
        }
        let results = enumerate(&sig.result, self.int_bound)?;
        results.choose(&mut self.rng).cloned().map(Reply::Return)
    }
}

/// An observable result, comparable between the evaluator and the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observed {
    Return(GroundValue),
    Raise(Name),
    Kill(Name),
    /// Evaluation or denotation failed.
    Error(String),
}

impl std::fmt::Display for Observed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observed::Return(v) => write!(f, "return {v}"),
            Observed::Raise(e) => write!(f, "raise {e}"),
            Observed::Kill(s) => write!(f, "kill {s}"),
            Observed::Error(m) => write!(f, "error: {m}"),
        }
    }
}

/// Evaluates `m` against `top`.
pub fn observe_eval(top: &mut dyn Handle, m: &UserComp) -> (Observed, crate::eval::Session) {
    let ev = run_toplevel(top, m);
    let obs = match ev.outcome {
        Ok(Outcome::Return(v)) => match v.to_ground() {
            Some(g) => Observed::Return(g),
            None => Observed::Error(format!("non-ground result {v}")),
        },
        Ok(Outcome::Raise(e)) => Observed::Raise(e),
        Ok(Outcome::Kill(s)) => Observed::Kill(s),
        Err(e) => Observed::Error(e.to_string()),
    };
    (obs, ev.session)
}

/// Follows the path of `t` chosen by `top`'s replies.
pub fn observe_tree(top: &mut dyn Handle, t: &Tree<UPay<crate::oracle::DVal>>) -> Observed {
    let mut cur = t;
    loop {
        match cur {
            Tree::Leaf(UPay::Val(v)) => {
                return match v.ground() {
                    Some(g) => Observed::Return(g.clone()),
                    None => Observed::Error(format!("non-ground result {v}")),
                }
            }
            Tree::Leaf(UPay::Exc(e)) => return Observed::Raise(e.clone()),
            Tree::Node { op, arg, children, excs } => match top.handle(op, arg) {
                Some(Reply::Return(b)) => match children.get(&b) {
                    Some(c) => cur = c,
                    None => return Observed::Error(format!("no child {b} of `{op}`")),
                },
                Some(Reply::Raise(e)) => match excs.get(&e) {
                    Some(c) => cur = c,
                    None => return Observed::Error(format!("no exception child {e} of `{op}`")),
                },
                Some(Reply::Kill(s)) => return Observed::Kill(s),
                None => return Observed::Error(format!("operation `{op}` unanswered")),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{infer_user, Ctx};

    #[test]
    fn generated_programs_typecheck() {
        let mut g = Gen::new(7);
        for _ in 0..200 {
            let (m, t) = g.pure_program(5);
            let ty = infer_user(&g.tables, &Ctx::new(), &m)
                .unwrap_or_else(|e| panic!("{}\n{}", e.render(""), crate::parse::print_user(&m)));
            assert!(ty.ops.is_empty());
            assert!(crate::check::subtype_value(&ty.carrier, &t.to_value()));
        }
    }

    #[test]
    fn effectful_programs_typecheck() {
        let mut g = Gen::new(8);
        for _ in 0..200 {
            let (m, _) = g.effectful_program(4);
            if let Err(e) = infer_user(&g.tables, &Ctx::new(), &m) {
                panic!("{}\n{}", e.render(""), crate::parse::print_user(&m));
            }
        }
    }

    #[test]
    fn finite_runner_covers_inputs() {
        let mut g = Gen::new(1);
        let t = g.tables.ops.clone();
        let r = g.finite_runner(&t, &t, &GroundType::bool(), &[name("halt")], 2);
        // flip: 1 arg, pick: 2 args, ping: 3 args; two states each.
        assert_eq!(r.coops.len(), 12);
    }
}
