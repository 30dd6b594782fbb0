//! Locating the construct responsible for a failed subsumption.
//!
//! Each function is called with a term whose synthesised type does not fit
//! `want`. It descends to the innermost subterm that still does not fit and
//! reports it under the rule of that construct. `None` means no more
//! specific culprit was found.

use crate::diag::Diagnostic;
use crate::syntax::*;
use crate::types::{KernelType, UserType, ValueType};

use super::subtype::subtype_value;
use super::{Checker, Ctx};

impl Checker<'_> {
    pub(super) fn blame_value(&self, ctx: &Ctx, v: &Value, want: &ValueType, pos: Pos) -> Option<Diagnostic> {
        match (v, want) {
            (Value::Pair(a, b), ValueType::Prod(ta, tb)) => {
                self.value_misfit(ctx, a, ta, pos).or_else(|| self.value_misfit(ctx, b, tb, pos))
            }
            (Value::Fun(x, t, m), ValueType::UserFun(a, u)) if subtype_value(a, t) => {
                self.blame_user(&ctx.extend(x, t.clone()), m, u)
            }
            (Value::FunK(x, t, c, k), ValueType::KernelFun(a, kt)) if subtype_value(a, t) && *c == kt.state => {
                self.blame_kernel(&ctx.extend(x, t.clone()), k, kt)
            }
            (Value::Runner(r), ValueType::Runner(rt)) if r.state == rt.state => {
                if let Some(op) = rt.handled.iter().find(|op| r.clause(op).is_none()) {
                    return Some(Diagnostic::new(
                        pos,
                        "TyValue-Runner",
                        format!("runner lacks a co-operation for `{op}`"),
                    ));
                }
                for cl in &r.clauses {
                    let sig = self.tables.op(&cl.op)?;
                    let kt = KernelType {
                        carrier: sig.result.to_value(),
                        ops: rt.external.clone(),
                        excs: sig.excs.clone(),
                        sigs: rt.signals.clone(),
                        state: rt.state.clone(),
                    };
                    let inner = ctx.extend(&cl.param, sig.param.to_value());
                    if let Some(d) = self.kernel_misfit(&inner, &cl.body, &kt) {
                        return Some(d);
                    }
                }
                None
            }
            _ => None,
        }
    }

    fn value_misfit(&self, ctx: &Ctx, v: &Value, want: &ValueType, pos: Pos) -> Option<Diagnostic> {
        let (t, _) = self.synth_value(ctx, v, pos).ok()?;
        if subtype_value(&t, want) {
            None
        } else {
            self.blame_value(ctx, v, want, pos)
        }
    }

    fn user_misfit(&self, ctx: &Ctx, m: &UserComp, want: &UserType) -> Option<Diagnostic> {
        let (row, _) = self.synth_user(ctx, m).ok()?;
        if row.fits(want) {
            None
        } else {
            self.blame_user(ctx, m, want)
        }
    }

    fn kernel_misfit(&self, ctx: &Ctx, k: &KernelComp, want: &KernelType) -> Option<Diagnostic> {
        let (row, _) = self.synth_kernel(ctx, k, &want.state).ok()?;
        if row.fits(want) {
            None
        } else {
            self.blame_kernel(ctx, k, want)
        }
    }

    /// `want` with the carrier replaced by whatever `m` synthesises, so that
    /// only the effect rows are compared.
    fn any_carrier_user(&self, ctx: &Ctx, m: &UserComp, want: &UserType) -> Option<UserType> {
        let (row, _) = self.synth_user(ctx, m).ok()?;
        Some(UserType { carrier: row.carrier.unwrap_or(ValueType::Empty), ..want.clone() })
    }

    fn any_carrier_kernel(&self, ctx: &Ctx, k: &KernelComp, want: &KernelType) -> Option<KernelType> {
        let (row, _) = self.synth_kernel(ctx, k, &want.state).ok()?;
        Some(KernelType { carrier: row.carrier.unwrap_or(ValueType::Empty), ..want.clone() })
    }

    fn bound_type(&self, ctx: &Ctx, m: &UserComp) -> Option<ValueType> {
        let (row, _) = self.synth_user(ctx, m).ok()?;
        Some(row.carrier.unwrap_or(ValueType::Empty))
    }

    fn bound_type_kernel(&self, ctx: &Ctx, k: &KernelComp, want: &KernelType) -> Option<ValueType> {
        let (row, _) = self.synth_kernel(ctx, k, &want.state).ok()?;
        Some(row.carrier.unwrap_or(ValueType::Empty))
    }

    pub(super) fn blame_user(&self, ctx: &Ctx, m: &UserComp, want: &UserType) -> Option<Diagnostic> {
        let pos = m.pos;
        match &m.kind {
            UserKind::Raise(e, _) if !want.excs.contains(e) => Some(Diagnostic::new(
                pos,
                "TyUser-Raise",
                format!("exception `{e}` may not be raised here"),
            )),
            UserKind::Return(v) => self.value_misfit(ctx, v, &want.carrier, pos),
            UserKind::Op(c) => {
                if !want.ops.contains(&c.op) {
                    return Some(Diagnostic::new(pos, "TyUser-Op", format!("operation `{}` is not allowed here", c.op)));
                }
                let sig = self.tables.op(&c.op)?;
                self.user_misfit(&ctx.extend(&c.var, sig.result.to_value()), &c.body, want)
                    .or_else(|| c.handlers.iter().find_map(|(_, n)| self.user_misfit(ctx, n, want)))
            }
            UserKind::Try(b, h) => {
                let mut inner = self.any_carrier_user(ctx, b, want)?;
                inner.excs.extend(h.raises.iter().map(|(e, _)| e.clone()));
                let xt = self.bound_type(ctx, b)?;
                self.user_misfit(ctx, b, &inner)
                    .or_else(|| self.user_misfit(&ctx.extend(&h.ret.0, xt), &h.ret.1, want))
                    .or_else(|| h.raises.iter().find_map(|(_, n)| self.user_misfit(ctx, n, want)))
            }
            UserKind::Let(x, b, n) => {
                let inner = self.any_carrier_user(ctx, b, want)?;
                let xt = self.bound_type(ctx, b)?;
                self.user_misfit(ctx, b, &inner).or_else(|| self.user_misfit(&ctx.extend(x, xt), n, want))
            }
            UserKind::MatchPair(v, x, y, b) => {
                let (ValueType::Prod(tx, ty), _) = self.synth_value(ctx, v, pos).ok()? else { return None };
                self.user_misfit(&ctx.extend(x, *tx).extend(y, *ty), b, want)
            }
            UserKind::MatchSum(v, x, b1, y, b2) => {
                let (ValueType::Sum(tx, ty), _) = self.synth_value(ctx, v, pos).ok()? else { return None };
                self.user_misfit(&ctx.extend(x, *tx), b1, want).or_else(|| self.user_misfit(&ctx.extend(y, *ty), b2, want))
            }
            UserKind::Run(r, _, _, f) => {
                let (ValueType::Runner(rt), _) = self.synth_value(ctx, r, pos).ok()? else { return None };
                if let Some(op) = rt.external.iter().find(|op| !want.ops.contains(*op)) {
                    return Some(Diagnostic::new(
                        pos,
                        "TyUser-Run",
                        format!("runner may call operation `{op}`, which is not allowed here"),
                    ));
                }
                self.finally_misfit(ctx, m, f, &rt.state.to_value(), want)
            }
            UserKind::Kernel(k, w, f) => {
                let (tw, _) = self.synth_value(ctx, w, pos).ok()?;
                let state = tw.as_ground()?;
                let (rk, _) = self.synth_kernel(ctx, k, &state).ok()?;
                let inner = KernelType {
                    carrier: rk.carrier.unwrap_or(ValueType::Empty),
                    ops: want.ops.clone(),
                    excs: rk.excs,
                    sigs: rk.sigs,
                    state,
                };
                self.kernel_misfit(ctx, k, &inner).or_else(|| self.finally_misfit(ctx, m, f, &tw, want))
            }
            _ => None,
        }
    }

    /// Checks the finalisation clauses of a run or kernel switch `m`.
    fn finally_misfit(&self, ctx: &Ctx, m: &UserComp, f: &Finally, state: &ValueType, want: &UserType) -> Option<Diagnostic> {
        let carrier = match &m.kind {
            UserKind::Run(_, _, b, _) => self.bound_type(ctx, b)?,
            UserKind::Kernel(k, _, _) => {
                let st = state.as_ground()?;
                let (row, _) = self.synth_kernel(ctx, k, &st).ok()?;
                row.carrier.unwrap_or(ValueType::Empty)
            }
            _ => return None,
        };
        let (x, c, n) = &f.ret;
        self.user_misfit(&ctx.extend(c, state.clone()).extend(x, carrier), n, want)
            .or_else(|| f.raises.iter().find_map(|(_, c, n)| self.user_misfit(&ctx.extend(c, state.clone()), n, want)))
            .or_else(|| f.kills.iter().find_map(|(_, n)| self.user_misfit(ctx, n, want)))
    }

    pub(super) fn blame_kernel(&self, ctx: &Ctx, k: &KernelComp, want: &KernelType) -> Option<Diagnostic> {
        let pos = k.pos;
        match &k.kind {
            KernelKind::Raise(e, _) if !want.excs.contains(e) => Some(Diagnostic::new(
                pos,
                "TyKernel-Raise",
                format!("exception `{e}` may not be raised here"),
            )),
            KernelKind::Kill(s, _) if !want.sigs.contains(s) => Some(Diagnostic::new(
                pos,
                "TyKernel-Kill",
                format!("signal `{s}` may not be sent here"),
            )),
            KernelKind::Return(v) => self.value_misfit(ctx, v, &want.carrier, pos),
            KernelKind::Op(c) => {
                if !want.ops.contains(&c.op) {
                    return Some(Diagnostic::new(pos, "TyKernel-Op", format!("operation `{}` is not allowed here", c.op)));
                }
                let sig = self.tables.op(&c.op)?;
                self.kernel_misfit(&ctx.extend(&c.var, sig.result.to_value()), &c.body, want)
                    .or_else(|| c.handlers.iter().find_map(|(_, n)| self.kernel_misfit(ctx, n, want)))
            }
            KernelKind::Try(b, h) => {
                let mut inner = self.any_carrier_kernel(ctx, b, want)?;
                inner.excs.extend(h.raises.iter().map(|(e, _)| e.clone()));
                let xt = self.bound_type_kernel(ctx, b, want)?;
                self.kernel_misfit(ctx, b, &inner)
                    .or_else(|| self.kernel_misfit(&ctx.extend(&h.ret.0, xt), &h.ret.1, want))
                    .or_else(|| h.raises.iter().find_map(|(_, n)| self.kernel_misfit(ctx, n, want)))
            }
            KernelKind::Let(x, b, n) => {
                let inner = self.any_carrier_kernel(ctx, b, want)?;
                let xt = self.bound_type_kernel(ctx, b, want)?;
                self.kernel_misfit(ctx, b, &inner).or_else(|| self.kernel_misfit(&ctx.extend(x, xt), n, want))
            }
            KernelKind::MatchPair(v, x, y, b) => {
                let (ValueType::Prod(tx, ty), _) = self.synth_value(ctx, v, pos).ok()? else { return None };
                self.kernel_misfit(&ctx.extend(x, *tx).extend(y, *ty), b, want)
            }
            KernelKind::MatchSum(v, x, b1, y, b2) => {
                let (ValueType::Sum(tx, ty), _) = self.synth_value(ctx, v, pos).ok()? else { return None };
                self.kernel_misfit(&ctx.extend(x, *tx), b1, want)
                    .or_else(|| self.kernel_misfit(&ctx.extend(y, *ty), b2, want))
            }
            KernelKind::Getenv(c, b) => self.kernel_misfit(&ctx.extend(c, want.state.to_value()), b, want),
            KernelKind::Setenv(_, b) => self.kernel_misfit(ctx, b, want),
            KernelKind::User(m, h) => {
                let (rm, _) = self.synth_user(ctx, m).ok()?;
                let mut excs = want.excs.clone();
                excs.extend(h.raises.iter().map(|(e, _)| e.clone()));
                let inner = UserType { carrier: rm.carrier.clone().unwrap_or(ValueType::Empty), ops: want.ops.clone(), excs };
                let xt = rm.carrier.unwrap_or(ValueType::Empty);
                self.user_misfit(ctx, m, &inner)
                    .or_else(|| self.kernel_misfit(&ctx.extend(&h.ret.0, xt), &h.ret.1, want))
                    .or_else(|| h.raises.iter().find_map(|(_, n)| self.kernel_misfit(ctx, n, want)))
            }
            _ => None,
        }
    }
}
