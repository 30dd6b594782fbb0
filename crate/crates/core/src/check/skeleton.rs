//! Skeletal typing: types with every effect annotation erased.
//!
//! This pass is independent of the effectful checker. For a well-typed
//! term, the skeleton of its synthesised type equals the skeleton computed
//! here.

use crate::syntax::*;
use crate::types::{EffectTables, GroundType, SkelType, ValueType};

/// Skeleton of a computation result; `None` when it never returns.
pub type SkelCarrier = Option<SkelType>;

#[derive(Clone, Default)]
pub struct SkelCtx {
    entries: Vec<(crate::names::Name, SkelType)>,
}

impl SkelCtx {
    pub fn new() -> Self {
        SkelCtx::default()
    }

    pub fn extend(&self, x: &str, t: SkelType) -> SkelCtx {
        let mut c = self.clone();
        c.entries.push((x.into(), t));
        c
    }

    fn lookup(&self, x: &str) -> Option<&SkelType> {
        self.entries.iter().rev().find(|(k, _)| &**k == x).map(|(_, t)| t)
    }
}

fn merge(a: SkelCarrier, b: SkelCarrier) -> Option<SkelCarrier> {
    match (a, b) {
        (None, c) | (c, None) => Some(c),
        (Some(a), Some(b)) if a == b => Some(Some(a)),
        _ => None,
    }
}

fn carrier_skel(t: &ValueType) -> SkelType {
    t.skeleton()
}

pub struct Skeletal<'a> {
    pub tables: &'a EffectTables,
}

impl Skeletal<'_> {
    pub fn value(&self, ctx: &SkelCtx, v: &Value) -> Option<SkelType> {
        Some(match v {
            Value::Var(x) => ctx.lookup(x)?.clone(),
            Value::Lit(Literal::Int(_)) => ValueType::int().skeleton(),
            Value::Lit(Literal::Bool(_)) => ValueType::bool().skeleton(),
            Value::Lit(Literal::Str(_)) => ValueType::str().skeleton(),
            Value::Prim(p, args) => {
                let (params, res) = p.signature();
                if params.len() != args.len() {
                    return None;
                }
                for (a, t) in args.iter().zip(params) {
                    if self.value(ctx, a)? != t.skeleton() {
                        return None;
                    }
                }
                res.skeleton()
            }
            Value::Unit => SkelType::Unit,
            Value::Pair(a, b) => SkelType::Prod(Box::new(self.value(ctx, a)?), Box::new(self.value(ctx, b)?)),
            Value::Inl(a, x, y) => {
                if self.value(ctx, a)? != x.skeleton() {
                    return None;
                }
                SkelType::Sum(Box::new(x.skeleton()), Box::new(y.skeleton()))
            }
            Value::Inr(b, x, y) => {
                if self.value(ctx, b)? != y.skeleton() {
                    return None;
                }
                SkelType::Sum(Box::new(x.skeleton()), Box::new(y.skeleton()))
            }
            Value::Fun(x, t, m) => {
                let r = self.user(&ctx.extend(x, t.skeleton()), m)?;
                SkelType::UserFun(Box::new(t.skeleton()), Box::new(r.unwrap_or(SkelType::Empty)))
            }
            Value::FunK(x, t, c, k) => {
                let r = self.kernel(&ctx.extend(x, t.skeleton()), k, c)?;
                SkelType::KernelFun(Box::new(t.skeleton()), Box::new(r.unwrap_or(SkelType::Empty)), c.clone())
            }
            Value::Runner(r) => {
                for cl in &r.clauses {
                    let sig = self.tables.op(&cl.op)?;
                    let res = self.kernel(&ctx.extend(&cl.param, sig.param.skeleton()), &cl.body, &r.state)?;
                    merge(res, Some(sig.result.skeleton()))?;
                }
                SkelType::Runner(r.state.clone())
            }
        })
    }

    pub fn user(&self, ctx: &SkelCtx, m: &UserComp) -> Option<SkelCarrier> {
        Some(match &m.kind {
            UserKind::Return(v) => Some(self.value(ctx, v)?),
            UserKind::App(f, a) => {
                let SkelType::UserFun(x, r) = self.value(ctx, f)? else { return None };
                if self.value(ctx, a)? != *x {
                    return None;
                }
                Some(*r)
            }
            UserKind::Try(b, h) => {
                let rb = self.user(ctx, b)?;
                let mut out = self.user(&ctx.extend(&h.ret.0, rb.unwrap_or(SkelType::Empty)), &h.ret.1)?;
                for (_, n) in &h.raises {
                    out = merge(out, self.user(ctx, n)?)?;
                }
                out
            }
            UserKind::Let(x, b, n) => {
                let rb = self.user(ctx, b)?;
                self.user(&ctx.extend(x, rb.unwrap_or(SkelType::Empty)), n)?
            }
            UserKind::MatchPair(v, x, y, b) => {
                let SkelType::Prod(a, c) = self.value(ctx, v)? else { return None };
                self.user(&ctx.extend(x, *a).extend(y, *c), b)?
            }
            UserKind::MatchEmpty(v, t) => {
                if self.value(ctx, v)? != SkelType::Empty {
                    return None;
                }
                Some(carrier_skel(t))
            }
            UserKind::MatchSum(v, x, b1, y, b2) => {
                let SkelType::Sum(a, c) = self.value(ctx, v)? else { return None };
                merge(self.user(&ctx.extend(x, *a), b1)?, self.user(&ctx.extend(y, *c), b2)?)?
            }
            UserKind::Op(c) => {
                let sig = self.tables.op(&c.op)?;
                if self.value(ctx, &c.arg)? != sig.param.skeleton() {
                    return None;
                }
                let mut out = self.user(&ctx.extend(&c.var, sig.result.skeleton()), &c.body)?;
                for (_, n) in &c.handlers {
                    out = merge(out, self.user(ctx, n)?)?;
                }
                out
            }
            UserKind::Raise(_, t) => t.as_ref().map(carrier_skel),
            UserKind::Run(r, w, b, f) => {
                let SkelType::Runner(state) = self.value(ctx, r)? else { return None };
                if self.value(ctx, w)? != state.skeleton() {
                    return None;
                }
                let rb = self.user(ctx, b)?;
                self.finally(ctx, rb, &state, f)?
            }
            UserKind::Kernel(k, w, f) => {
                let state = ground_of(&self.value(ctx, w)?)?;
                let rk = self.kernel(ctx, k, &state)?;
                self.finally(ctx, rk, &state, f)?
            }
        })
    }

    fn finally(&self, ctx: &SkelCtx, carrier: SkelCarrier, state: &GroundType, f: &Finally) -> Option<SkelCarrier> {
        let (x, c, n) = &f.ret;
        let inner = ctx.extend(c, state.skeleton()).extend(x, carrier.unwrap_or(SkelType::Empty));
        let mut out = self.user(&inner, n)?;
        for (_, c, n) in &f.raises {
            out = merge(out, self.user(&ctx.extend(c, state.skeleton()), n)?)?;
        }
        for (_, n) in &f.kills {
            out = merge(out, self.user(ctx, n)?)?;
        }
        Some(out)
    }

    pub fn kernel(&self, ctx: &SkelCtx, k: &KernelComp, state: &GroundType) -> Option<SkelCarrier> {
        Some(match &k.kind {
            KernelKind::Return(v) => Some(self.value(ctx, v)?),
            KernelKind::App(f, a) => {
                let SkelType::KernelFun(x, r, c) = self.value(ctx, f)? else { return None };
                if self.value(ctx, a)? != *x || c != *state {
                    return None;
                }
                Some(*r)
            }
            KernelKind::Try(b, h) => {
                let rb = self.kernel(ctx, b, state)?;
                let mut out = self.kernel(&ctx.extend(&h.ret.0, rb.unwrap_or(SkelType::Empty)), &h.ret.1, state)?;
                for (_, n) in &h.raises {
                    out = merge(out, self.kernel(ctx, n, state)?)?;
                }
                out
            }
            KernelKind::Let(x, b, n) => {
                let rb = self.kernel(ctx, b, state)?;
                self.kernel(&ctx.extend(x, rb.unwrap_or(SkelType::Empty)), n, state)?
            }
            KernelKind::MatchPair(v, x, y, b) => {
                let SkelType::Prod(a, c) = self.value(ctx, v)? else { return None };
                self.kernel(&ctx.extend(x, *a).extend(y, *c), b, state)?
            }
            KernelKind::MatchEmpty(v, t) => {
                if self.value(ctx, v)? != SkelType::Empty {
                    return None;
                }
                Some(carrier_skel(t))
            }
            KernelKind::MatchSum(v, x, b1, y, b2) => {
                let SkelType::Sum(a, c) = self.value(ctx, v)? else { return None };
                merge(self.kernel(&ctx.extend(x, *a), b1, state)?, self.kernel(&ctx.extend(y, *c), b2, state)?)?
            }
            KernelKind::Op(c) => {
                let sig = self.tables.op(&c.op)?;
                if self.value(ctx, &c.arg)? != sig.param.skeleton() {
                    return None;
                }
                let mut out = self.kernel(&ctx.extend(&c.var, sig.result.skeleton()), &c.body, state)?;
                for (_, n) in &c.handlers {
                    out = merge(out, self.kernel(ctx, n, state)?)?;
                }
                out
            }
            KernelKind::Raise(_, t) | KernelKind::Kill(_, t) => t.as_ref().map(carrier_skel),
            KernelKind::Getenv(c, b) => self.kernel(&ctx.extend(c, state.skeleton()), b, state)?,
            KernelKind::Setenv(v, b) => {
                if self.value(ctx, v)? != state.skeleton() {
                    return None;
                }
                self.kernel(ctx, b, state)?
            }
            KernelKind::User(m, h) => {
                let rm = self.user(ctx, m)?;
                let mut out = self.kernel(&ctx.extend(&h.ret.0, rm.unwrap_or(SkelType::Empty)), &h.ret.1, state)?;
                for (_, n) in &h.raises {
                    out = merge(out, self.kernel(ctx, n, state)?)?;
                }
                out
            }
        })
    }
}

fn ground_of(t: &SkelType) -> Option<GroundType> {
    Some(match t {
        SkelType::Base(b) => GroundType::Base(*b),
        SkelType::Unit => GroundType::Unit,
        SkelType::Empty => GroundType::Empty,
        SkelType::Prod(a, b) => GroundType::prod(ground_of(a)?, ground_of(b)?),
        SkelType::Sum(a, b) => GroundType::sum(ground_of(a)?, ground_of(b)?),
        _ => return None,
    })
}
