//! Denotations of terms: values denote semantic values, user computations
//! denote user trees, kernel computations denote functions from the
//! initial state to kernel trees. Functions and runners denote host
//! closures over semantic environments; nothing here shares code with the
//! evaluator.

use std::cell::Cell;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use super::runner::{finalisation_apply, morphism, run_fused, GKTree};
use super::tree::{KPay, OResult, OracleError, Tree, UPay};
use crate::ground::{apply_prim, enumerate, GroundValue};
use crate::names::Name;
use crate::syntax::*;
use crate::types::EffectTables;

#[derive(Clone)]
pub enum DVal {
    Ground(GroundValue),
    Pair(Rc<DVal>, Rc<DVal>),
    Inl(Rc<DVal>),
    Inr(Rc<DVal>),
    Fun(Rc<DFun<UserComp>>),
    FunK(Rc<DFun<KernelComp>>),
    Runner(Rc<DRunner>),
}

pub struct DFun<B> {
    param: Name,
    body: Arc<B>,
    env: DEnv,
}

pub struct DRunner {
    lit: Arc<RunnerLit>,
    env: DEnv,
}

impl DVal {
    fn pair(a: DVal, b: DVal) -> DVal {
        match (a, b) {
            (DVal::Ground(a), DVal::Ground(b)) => DVal::Ground(GroundValue::pair(a, b)),
            (a, b) => DVal::Pair(Rc::new(a), Rc::new(b)),
        }
    }

    fn inl(a: DVal) -> DVal {
        match a {
            DVal::Ground(a) => DVal::Ground(GroundValue::inl(a)),
            a => DVal::Inl(Rc::new(a)),
        }
    }

    fn inr(a: DVal) -> DVal {
        match a {
            DVal::Ground(a) => DVal::Ground(GroundValue::inr(a)),
            a => DVal::Inr(Rc::new(a)),
        }
    }

    pub fn ground(&self) -> Option<&GroundValue> {
        match self {
            DVal::Ground(g) => Some(g),
            _ => None,
        }
    }

    fn split_pair(&self) -> Option<(DVal, DVal)> {
        match self {
            DVal::Ground(GroundValue::Pair(a, b)) => Some((DVal::Ground((**a).clone()), DVal::Ground((**b).clone()))),
            DVal::Pair(a, b) => Some(((**a).clone(), (**b).clone())),
            _ => None,
        }
    }

    fn split_sum(&self) -> Option<(bool, DVal)> {
        match self {
            DVal::Ground(GroundValue::Inl(a)) => Some((true, DVal::Ground((**a).clone()))),
            DVal::Ground(GroundValue::Inr(a)) => Some((false, DVal::Ground((**a).clone()))),
            DVal::Inl(a) => Some((true, (**a).clone())),
            DVal::Inr(a) => Some((false, (**a).clone())),
            _ => None,
        }
    }
}

/// Ground values compare structurally; closures by identity.
impl PartialEq for DVal {
    fn eq(&self, other: &DVal) -> bool {
        match (self, other) {
            (DVal::Ground(a), DVal::Ground(b)) => a == b,
            (DVal::Pair(a, b), DVal::Pair(c, d)) => a == c && b == d,
            (DVal::Inl(a), DVal::Inl(b)) | (DVal::Inr(a), DVal::Inr(b)) => a == b,
            (DVal::Fun(a), DVal::Fun(b)) => Rc::ptr_eq(a, b),
            (DVal::FunK(a), DVal::FunK(b)) => Rc::ptr_eq(a, b),
            (DVal::Runner(a), DVal::Runner(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for DVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DVal::Ground(g) => write!(f, "{g}"),
            DVal::Pair(a, b) => write!(f, "({a}, {b})"),
            DVal::Inl(a) => write!(f, "inl({a})"),
            DVal::Inr(a) => write!(f, "inr({a})"),
            DVal::Fun(_) => write!(f, "<fun>"),
            DVal::FunK(_) => write!(f, "<funK>"),
            DVal::Runner(_) => write!(f, "<runner>"),
        }
    }
}

impl fmt::Debug for DVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Default)]
pub struct DEnv(Option<Rc<(Name, DVal, DEnv)>>);

impl DEnv {
    pub fn new() -> Self {
        DEnv(None)
    }

    pub fn with(&self, x: &Name, v: DVal) -> DEnv {
        DEnv(Some(Rc::new((x.clone(), v, self.clone()))))
    }

    fn get(&self, x: &str) -> Option<DVal> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if &*node.0 == x {
                return Some(node.1.clone());
            }
            cur = &node.2;
        }
        None
    }
}

pub type UTree = Tree<UPay<DVal>>;
pub type KTree = Tree<KPay<DVal>>;

pub const DEFAULT_INT_BOUND: i64 = 3;
pub const DEFAULT_BUDGET: usize = 10_000;

pub struct Oracle<'a> {
    pub tables: &'a EffectTables,
    /// Operation results of type `int` range over `[0, int_bound)`.
    pub int_bound: i64,
    pub budget: usize,
    used: Cell<usize>,
    /// When set, every run is also computed in two steps, through the
    /// kernel tree of its body, and compared with the fused result.
    pub check_factoring: bool,
    factoring: Cell<Factoring>,
}

/// Tally of two-step run computations compared with fused ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Factoring {
    pub checked: usize,
    pub failed: usize,
}

fn bottom<T>(msg: impl Into<String>) -> OResult<T> {
    Err(OracleError::Bottom(msg.into()))
}

impl<'a> Oracle<'a> {
    pub fn new(tables: &'a EffectTables) -> Self {
        Oracle {
            tables,
            int_bound: DEFAULT_INT_BOUND,
            budget: DEFAULT_BUDGET,
            used: Cell::new(0),
            check_factoring: false,
            factoring: Cell::new(Factoring::default()),
        }
    }

    pub fn factoring(&self) -> Factoring {
        self.factoring.get()
    }

    fn spend(&self) -> OResult<()> {
        let n = self.used.get() + 1;
        self.used.set(n);
        if n > self.budget {
            return Err(OracleError::Budget(self.budget));
        }
        Ok(())
    }

    fn results(&self, op: &Name) -> OResult<(Vec<GroundValue>, Vec<Name>)> {
        let Some(sig) = self.tables.op(op) else { return bottom(format!("undeclared operation `{op}`")) };
        let rs = enumerate(&sig.result, self.int_bound)
            .ok_or_else(|| OracleError::Fragment(format!("results of `{op}` are not enumerable")))?;
        Ok((rs, sig.excs.iter().cloned().collect()))
    }

    pub fn value(&self, env: &DEnv, v: &Value) -> OResult<DVal> {
        Ok(match v {
            Value::Var(x) => match env.get(x) {
                Some(d) => d,
                None => return bottom(format!("unbound `{x}`")),
            },
            Value::Lit(l) => DVal::Ground(GroundValue::from_literal(l)),
            Value::Prim(p, args) => {
                let mut gs = Vec::new();
                for a in args {
                    match self.value(env, a)? {
                        DVal::Ground(g) => gs.push(g),
                        _ => return bottom("constant applied to a non-ground value"),
                    }
                }
                match apply_prim(*p, &gs) {
                    Some(g) => DVal::Ground(g),
                    None => return bottom("constant applied to ill-typed arguments"),
                }
            }
            Value::Unit => DVal::Ground(GroundValue::Unit),
            Value::Pair(a, b) => DVal::pair(self.value(env, a)?, self.value(env, b)?),
            Value::Inl(a, _, _) => DVal::inl(self.value(env, a)?),
            Value::Inr(a, _, _) => DVal::inr(self.value(env, a)?),
            Value::Fun(x, _, m) => DVal::Fun(Rc::new(DFun { param: x.clone(), body: m.clone(), env: env.clone() })),
            Value::FunK(x, _, _, k) => DVal::FunK(Rc::new(DFun { param: x.clone(), body: k.clone(), env: env.clone() })),
            Value::Runner(r) => DVal::Runner(Rc::new(DRunner { lit: r.clone(), env: env.clone() })),
        })
    }

    pub fn user(&self, env: &DEnv, m: &UserComp) -> OResult<UTree> {
        match &m.kind {
            UserKind::Return(v) => Ok(Tree::Leaf(UPay::Val(self.value(env, v)?))),
            UserKind::App(f, a) => {
                let DVal::Fun(f) = self.value(env, f)? else { return bottom("application of a non-function") };
                let a = self.value(env, a)?;
                self.user(&f.env.with(&f.param, a), &f.body)
            }
            UserKind::Try(b, h) => {
                let t = self.user(env, b)?;
                t.bind(&mut |p| match p {
                    UPay::Val(v) => self.user(&env.with(&h.ret.0, v), &h.ret.1),
                    UPay::Exc(e) => match h.raise_clause(&e) {
                        Some(n) => self.user(env, n),
                        None => Ok(Tree::Leaf(UPay::Exc(e))),
                    },
                })
            }
            UserKind::Let(x, b, n) => {
                let t = self.user(env, b)?;
                t.bind(&mut |p| match p {
                    UPay::Val(v) => self.user(&env.with(x, v), n),
                    UPay::Exc(e) => Ok(Tree::Leaf(UPay::Exc(e))),
                })
            }
            UserKind::MatchPair(v, x, y, b) => {
                let Some((a, c)) = self.value(env, v)?.split_pair() else { return bottom("pair match") };
                self.user(&env.with(x, a).with(y, c), b)
            }
            UserKind::MatchEmpty(..) => bottom("empty match"),
            UserKind::MatchSum(v, x, b1, y, b2) => match self.value(env, v)?.split_sum() {
                Some((true, a)) => self.user(&env.with(x, a), b1),
                Some((false, a)) => self.user(&env.with(y, a), b2),
                None => bottom("sum match"),
            },
            UserKind::Op(c) => {
                self.spend()?;
                let DVal::Ground(arg) = self.value(env, &c.arg)? else { return bottom("non-ground argument") };
                let (results, excs) = self.results(&c.op)?;
                let mut children = std::collections::BTreeMap::new();
                for b in results {
                    let t = self.user(&env.with(&c.var, DVal::Ground(b.clone())), &c.body)?;
                    children.insert(b, t);
                }
                let mut ex = std::collections::BTreeMap::new();
                for e in excs {
                    let Some(n) = c.handler(&e) else { return bottom(format!("no continuation for `{e}`")) };
                    ex.insert(e, self.user(env, n)?);
                }
                Ok(Tree::Node { op: c.op.clone(), arg, children, excs: ex })
            }
            UserKind::Raise(e, _) => Ok(Tree::Leaf(UPay::Exc(e.clone()))),
            UserKind::Run(r, w, b, f) => {
                let DVal::Runner(r) = self.value(env, r)? else { return bottom("run of a non-runner") };
                let DVal::Ground(w) = self.value(env, w)? else { return bottom("non-ground state") };
                let t = self.user(env, b)?;
                let mut coop = |op: &Name, a: &GroundValue, c: &GroundValue| self.coop(&r, op, a, c);
                let mut phi = |p: KPay<DVal>| self.finalise(env, f, p);
                let result = run_fused(&mut coop, &mut phi, &t, &w)?;
                if self.check_factoring {
                    let witness = morphism(&mut coop, &t, &w)?;
                    let two_step = finalisation_apply(&mut phi, witness)?;
                    let mut tally = self.factoring.get();
                    tally.checked += 1;
                    if two_step != result {
                        tally.failed += 1;
                    }
                    self.factoring.set(tally);
                }
                Ok(result)
            }
            UserKind::Kernel(k, w, f) => {
                let DVal::Ground(w) = self.value(env, w)? else { return bottom("non-ground state") };
                let t = self.kernel(env, &w, k)?;
                t.bind(&mut |p| self.finalise(env, f, p))
            }
        }
    }

    /// The co-operation of `r` for `op`, at argument `a` and state `c`.
    pub fn coop(&self, r: &DRunner, op: &Name, a: &GroundValue, c: &GroundValue) -> OResult<GKTree> {
        let Some(cl) = r.lit.clause(op) else { return bottom(format!("runner does not implement `{op}`")) };
        let t = self.kernel(&r.env.with(&cl.param, DVal::Ground(a.clone())), c, &cl.body)?;
        t.bind(&mut |p| {
            Ok(Tree::Leaf(match p {
                KPay::Val(DVal::Ground(b), c) => KPay::Val(b, c),
                KPay::Val(..) => return bottom("co-operation returned a non-ground value"),
                KPay::Exc(e, c) => KPay::Exc(e, c),
                KPay::Sig(s) => KPay::Sig(s),
            }))
        })
    }

    /// The finalisation map of clauses `f`.
    pub fn finalise(&self, env: &DEnv, f: &Finally, p: KPay<DVal>) -> OResult<UTree> {
        match p {
            KPay::Val(x, c) => {
                let (xn, cn, n) = &f.ret;
                self.user(&env.with(cn, DVal::Ground(c)).with(xn, x), n)
            }
            KPay::Exc(e, c) => match f.raise_clause(&e) {
                Some((cn, n)) => self.user(&env.with(cn, DVal::Ground(c)), n),
                None => bottom(format!("no finalisation clause for `{e}`")),
            },
            KPay::Sig(s) => match f.kill_clause(&s) {
                Some(n) => self.user(env, n),
                None => bottom(format!("no finalisation clause for `{s}`")),
            },
        }
    }

    /// Runner denotation of a runner value, for factoring checks.
    pub fn runner_of(&self, env: &DEnv, v: &Value) -> OResult<Rc<DRunner>> {
        match self.value(env, v)? {
            DVal::Runner(r) => Ok(r),
            _ => bottom("not a runner"),
        }
    }

    pub fn kernel(&self, env: &DEnv, state: &GroundValue, k: &KernelComp) -> OResult<KTree> {
        match &k.kind {
            KernelKind::Return(v) => Ok(Tree::Leaf(KPay::Val(self.value(env, v)?, state.clone()))),
            KernelKind::App(f, a) => {
                let DVal::FunK(f) = self.value(env, f)? else { return bottom("application of a non-function") };
                let a = self.value(env, a)?;
                self.kernel(&f.env.with(&f.param, a), state, &f.body)
            }
            KernelKind::Try(b, h) => {
                let t = self.kernel(env, state, b)?;
                t.bind(&mut |p| match p {
                    KPay::Val(v, c) => self.kernel(&env.with(&h.ret.0, v), &c, &h.ret.1),
                    KPay::Exc(e, c) => match h.raise_clause(&e) {
                        Some(n) => self.kernel(env, &c, n),
                        None => Ok(Tree::Leaf(KPay::Exc(e, c))),
                    },
                    KPay::Sig(s) => Ok(Tree::Leaf(KPay::Sig(s))),
                })
            }
            KernelKind::Let(x, b, n) => {
                let t = self.kernel(env, state, b)?;
                t.bind(&mut |p| match p {
                    KPay::Val(v, c) => self.kernel(&env.with(x, v), &c, n),
                    KPay::Exc(e, c) => Ok(Tree::Leaf(KPay::Exc(e, c))),
                    KPay::Sig(s) => Ok(Tree::Leaf(KPay::Sig(s))),
                })
            }
            KernelKind::MatchPair(v, x, y, b) => {
                let Some((a, c)) = self.value(env, v)?.split_pair() else { return bottom("pair match") };
                self.kernel(&env.with(x, a).with(y, c), state, b)
            }
            KernelKind::MatchEmpty(..) => bottom("empty match"),
            KernelKind::MatchSum(v, x, b1, y, b2) => match self.value(env, v)?.split_sum() {
                Some((true, a)) => self.kernel(&env.with(x, a), state, b1),
                Some((false, a)) => self.kernel(&env.with(y, a), state, b2),
                None => bottom("sum match"),
            },
            KernelKind::Op(c) => {
                self.spend()?;
                let DVal::Ground(arg) = self.value(env, &c.arg)? else { return bottom("non-ground argument") };
                let (results, excs) = self.results(&c.op)?;
                let mut children = std::collections::BTreeMap::new();
                for b in results {
                    let t = self.kernel(&env.with(&c.var, DVal::Ground(b.clone())), state, &c.body)?;
                    children.insert(b, t);
                }
                let mut ex = std::collections::BTreeMap::new();
                for e in excs {
                    let Some(n) = c.handler(&e) else { return bottom(format!("no continuation for `{e}`")) };
                    ex.insert(e, self.kernel(env, state, n)?);
                }
                Ok(Tree::Node { op: c.op.clone(), arg, children, excs: ex })
            }
            KernelKind::Raise(e, _) => Ok(Tree::Leaf(KPay::Exc(e.clone(), state.clone()))),
            KernelKind::Kill(s, _) => Ok(Tree::Leaf(KPay::Sig(s.clone()))),
            KernelKind::Getenv(c, b) => self.kernel(&env.with(c, DVal::Ground(state.clone())), state, b),
            KernelKind::Setenv(v, b) => {
                let DVal::Ground(s) = self.value(env, v)? else { return bottom("non-ground state") };
                self.kernel(env, &s, b)
            }
            KernelKind::User(m, h) => {
                let t = self.user(env, m)?;
                t.bind(&mut |p| match p {
                    UPay::Val(v) => self.kernel(&env.with(&h.ret.0, v), state, &h.ret.1),
                    UPay::Exc(e) => match h.raise_clause(&e) {
                        Some(n) => self.kernel(env, state, n),
                        None => Ok(Tree::Leaf(KPay::Exc(e, state.clone()))),
                    },
                })
            }
        }
    }
}

/// Denotation of a closed user computation.
pub fn denote_user(tables: &EffectTables, m: &UserComp) -> OResult<UTree> {
    Oracle::new(tables).user(&DEnv::new(), m)
}
