//! Conversion from the surface syntax to values, user computations and
//! kernel computations: name resolution with fresh renaming, generic
//! operation desugaring, and hoisting of computations out of value
//! positions.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::surface::{spine, Arms, Binder, Expr, ExprKind, Pattern, SurfaceFinally, SurfaceHandler};
use crate::diag::Diagnostic;
use crate::names::{Fresh, Name};
use crate::syntax::*;
use crate::types::EffectTables;

type CResult<T> = Result<T, Diagnostic>;

pub struct Converter<'a> {
    pub tables: &'a EffectTables,
    pub fresh: &'a mut Fresh,
    pub strict: bool,
    scope: Vec<(String, Name)>,
    pattern_counter: u64,
}

/// Computations found in value positions, to be bound just outside the
/// enclosing computation.
type Hoists = Vec<(Name, Expr)>;

impl<'a> Converter<'a> {
    pub fn new(tables: &'a EffectTables, fresh: &'a mut Fresh, strict: bool) -> Self {
        Converter { tables, fresh, strict, scope: Vec::new(), pattern_counter: 0 }
    }

    /// Re-enters a top-level binding made while converting an earlier item.
    pub fn restore(&mut self, source: &str, n: &Name) {
        self.scope.push((source.to_string(), n.clone()));
    }

    /// Brings a top-level binding into scope for the rest of the program.
    pub fn bind_toplevel(&mut self, source: &str) -> Name {
        let n = self.fresh.rename(source);
        self.scope.push((source.to_string(), n.clone()));
        n
    }

    fn push(&mut self, b: &Binder) -> Name {
        match b {
            Binder::Named(s) => {
                let n = self.fresh.rename(if s.starts_with('%') { "p" } else { s });
                self.scope.push((s.clone(), n.clone()));
                n
            }
            Binder::Wild => {
                let n = self.fresh.rename("_");
                self.scope.push(("_".to_string(), n.clone()));
                n
            }
        }
    }

    fn pop(&mut self, k: usize) {
        for _ in 0..k {
            self.scope.pop();
        }
    }

    fn lookup(&self, s: &str) -> Option<Name> {
        self.scope.iter().rev().find(|(k, _)| k == s).map(|(_, v)| v.clone())
    }

    fn check_exception(&self, e: &str, pos: Pos) -> CResult<Name> {
        if self.tables.exceptions.contains(e) {
            Ok(Name::from(e))
        } else {
            Err(Diagnostic::new(pos, "Parse-Undeclared", format!("undeclared exception `{e}`")))
        }
    }

    fn check_signal(&self, s: &str, pos: Pos) -> CResult<Name> {
        if self.tables.signals.contains(s) {
            Ok(Name::from(s))
        } else {
            Err(Diagnostic::new(pos, "Parse-Undeclared", format!("undeclared signal `{s}`")))
        }
    }

    // -- values -------------------------------------------------------------

    fn hoist(&mut self, e: &Expr, h: &mut Hoists) -> CResult<Value> {
        if self.strict {
            return Err(Diagnostic::new(
                e.pos,
                "Parse-Value",
                "computation in value position (rejected by --strict-values)",
            ));
        }
        let z = self.fresh.rename("v");
        h.push((z.clone(), e.clone()));
        Ok(Value::Var(z))
    }

    fn value(&mut self, e: &Expr, h: &mut Hoists) -> CResult<Value> {
        Ok(match &e.kind {
            ExprKind::Ident(s) => match self.lookup(s) {
                Some(n) => Value::Var(n),
                None if self.tables.ops.contains_key(s.as_str()) => {
                    return Err(Diagnostic::new(e.pos, "Parse-Syntax", format!("operation `{s}` needs an argument")));
                }
                None if Prim::from_word(s).is_some() => {
                    return Err(Diagnostic::new(e.pos, "Parse-Syntax", format!("constant `{s}` needs its arguments")));
                }
                None => return Err(Diagnostic::new(e.pos, "Parse-Undeclared", format!("unbound variable `{s}`"))),
            },
            ExprKind::Int(n) => Value::int(*n),
            ExprKind::Bool(b) => Value::bool(*b),
            ExprKind::Str(s) => Value::str(s),
            ExprKind::Unit => Value::Unit,
            ExprKind::Tuple(a, b) => {
                let a = self.value(a, h)?;
                let b = self.value(b, h)?;
                Value::pair(a, b)
            }
            ExprKind::Inj { left, ann, arg } => {
                let v = Box::new(self.value(arg, h)?);
                if *left {
                    Value::Inl(v, ann.0.clone(), ann.1.clone())
                } else {
                    Value::Inr(v, ann.0.clone(), ann.1.clone())
                }
            }
            ExprKind::Fun(x, t, body) => {
                let n = self.push(x);
                let m = self.user(body);
                self.pop(1);
                Value::Fun(n, t.clone(), Arc::new(m?))
            }
            ExprKind::FunK(x, t, c, body) => {
                let n = self.push(x);
                let k = self.kernel(body);
                self.pop(1);
                Value::FunK(n, t.clone(), c.clone(), Arc::new(k?))
            }
            ExprKind::Runner(clauses, state) => {
                let mut out = Vec::new();
                let mut seen = BTreeSet::new();
                for cl in clauses {
                    if !self.tables.ops.contains_key(cl.op.as_str()) {
                        return Err(Diagnostic::new(
                            cl.pos,
                            "Parse-Undeclared",
                            format!("undeclared operation `{}`", cl.op),
                        ));
                    }
                    if !seen.insert(cl.op.clone()) {
                        return Err(Diagnostic::new(
                            cl.pos,
                            "Parse-Duplicate",
                            format!("duplicate co-operation for `{}`", cl.op),
                        ));
                    }
                    let x = self.push(&cl.param);
                    let body = self.kernel(&cl.body);
                    self.pop(1);
                    out.push(CoopClause { op: Name::from(cl.op.as_str()), param: x, body: Arc::new(body?) });
                }
                Value::Runner(Arc::new(RunnerLit { clauses: out, state: state.clone() }))
            }
            ExprKind::Binop(p, a, b) => {
                let a = self.value(a, h)?;
                let b = self.value(b, h)?;
                Value::Prim(*p, vec![a, b])
            }
            ExprKind::App(..) => {
                let (head, args) = spine(e);
                if let ExprKind::Ident(w) = &head.kind {
                    if self.lookup(w).is_none() {
                        if let Some(p) = Prim::from_word(w) {
                            let arity = p.signature().0.len();
                            if args.len() != arity {
                                return Err(Diagnostic::new(
                                    e.pos,
                                    "Parse-Syntax",
                                    format!("constant `{w}` takes {arity} argument(s), given {}", args.len()),
                                ));
                            }
                            let mut vs = Vec::new();
                            for a in args {
                                vs.push(self.value(a, h)?);
                            }
                            return Ok(Value::Prim(p, vs));
                        }
                    }
                }
                self.hoist(e, h)?
            }
            _ => self.hoist(e, h)?,
        })
    }

    // -- computations -------------------------------------------------------

    pub fn user(&mut self, e: &Expr) -> CResult<UserComp> {
        let mut h = Vec::new();
        let inner = self.user_inner(e, &mut h)?;
        self.wrap_user(inner, h)
    }

    pub fn kernel(&mut self, e: &Expr) -> CResult<KernelComp> {
        let mut h = Vec::new();
        let inner = self.kernel_inner(e, &mut h)?;
        self.wrap_kernel(inner, h)
    }

    fn wrap_user(&mut self, mut comp: UserComp, h: Hoists) -> CResult<UserComp> {
        // Hoisted computations are evaluated left to right, so the first
        // one becomes the outermost let.
        let mut bound = Vec::new();
        for (z, e) in &h {
            bound.push((z.clone(), self.user(e)?, e.pos));
        }
        for (z, m, pos) in bound.into_iter().rev() {
            comp = UserComp::at(pos, UserKind::Let(z, Arc::new(m), Arc::new(comp)));
        }
        Ok(comp)
    }

    fn wrap_kernel(&mut self, mut comp: KernelComp, h: Hoists) -> CResult<KernelComp> {
        let mut bound = Vec::new();
        for (z, e) in &h {
            bound.push((z.clone(), self.kernel(e)?, e.pos));
        }
        for (z, k, pos) in bound.into_iter().rev() {
            comp = KernelComp::at(pos, KernelKind::Let(z, Arc::new(k), Arc::new(comp)));
        }
        Ok(comp)
    }

    /// Rewrites a pair pattern into nested pair matches on fresh binders.
    fn flatten_pattern(&mut self, pat: &Pattern, body: &Expr) -> (Binder, Expr) {
        match pat {
            Pattern::Bind(b) => (b.clone(), body.clone()),
            Pattern::Pair(p, q) => {
                let (yb, body) = self.flatten_pattern(q, body);
                let (xb, body) = self.flatten_pattern(p, &body);
                self.pattern_counter += 1;
                let z = format!("%p{}", self.pattern_counter);
                let pos = body.pos;
                let scrut = Expr { pos, kind: ExprKind::Ident(z.clone()) };
                let m = Expr { pos, kind: ExprKind::Match(Box::new(scrut), Arms::Pair(xb, yb, Box::new(body))) };
                (Binder::Named(z), m)
            }
        }
    }

    fn user_pattern(&mut self, pat: &Pattern, body: &Expr) -> CResult<(Name, UserComp)> {
        let (b, body) = self.flatten_pattern(pat, body);
        self.bind_user(&b, &body)
    }

    fn kernel_pattern(&mut self, pat: &Pattern, body: &Expr) -> CResult<(Name, KernelComp)> {
        let (b, body) = self.flatten_pattern(pat, body);
        self.bind_kernel(&b, &body)
    }

    fn bind_user(&mut self, b: &Binder, body: &Expr) -> CResult<(Name, UserComp)> {
        let n = self.push(b);
        let r = self.user(body);
        self.pop(1);
        Ok((n, r?))
    }

    fn bind_kernel(&mut self, b: &Binder, body: &Expr) -> CResult<(Name, KernelComp)> {
        let n = self.push(b);
        let r = self.kernel(body);
        self.pop(1);
        Ok((n, r?))
    }

    fn user_handler(&mut self, hd: &SurfaceHandler) -> CResult<Handler<UserComp>> {
        let (ret_pat, ret_body) = hd
            .ret
            .as_ref()
            .ok_or_else(|| Diagnostic::new(hd.pos, "Parse-Syntax", "handler needs a `return` clause"))?;
        let (x, n) = self.user_pattern(ret_pat, ret_body)?;
        let mut raises = Vec::new();
        for (e, pos, body) in &hd.raises {
            let en = self.check_exception(e, *pos)?;
            if raises.iter().any(|(k, _): &(Name, _)| *k == en) {
                return Err(Diagnostic::new(*pos, "Parse-Duplicate", format!("duplicate clause for exception `{e}`")));
            }
            raises.push((en, Arc::new(self.user(body)?)));
        }
        Ok(Handler { ret: (x, Arc::new(n)), raises })
    }

    fn kernel_handler(&mut self, hd: &SurfaceHandler) -> CResult<Handler<KernelComp>> {
        let (ret_pat, ret_body) = hd
            .ret
            .as_ref()
            .ok_or_else(|| Diagnostic::new(hd.pos, "Parse-Syntax", "handler needs a `return` clause"))?;
        let (x, n) = self.kernel_pattern(ret_pat, ret_body)?;
        let mut raises = Vec::new();
        for (e, pos, body) in &hd.raises {
            let en = self.check_exception(e, *pos)?;
            if raises.iter().any(|(k, _): &(Name, _)| *k == en) {
                return Err(Diagnostic::new(*pos, "Parse-Duplicate", format!("duplicate clause for exception `{e}`")));
            }
            raises.push((en, Arc::new(self.kernel(body)?)));
        }
        Ok(Handler { ret: (x, Arc::new(n)), raises })
    }

    fn finally(&mut self, f: &SurfaceFinally) -> CResult<Finally> {
        let (pat, c, body) = f
            .ret
            .as_ref()
            .ok_or_else(|| Diagnostic::new(f.pos, "Parse-Syntax", "finally block needs a `return` clause"))?;
        // `return x @ c -> N`: c is in scope in N, and so is x.
        let cn = self.push(c);
        let r = self.user_pattern(pat, body);
        self.pop(1);
        let (x, n) = r?;
        let mut raises: Vec<(Name, Name, Arc<UserComp>)> = Vec::new();
        for (e, pos, c, body) in &f.raises {
            let en = self.check_exception(e, *pos)?;
            if raises.iter().any(|(k, _, _)| *k == en) {
                return Err(Diagnostic::new(*pos, "Parse-Duplicate", format!("duplicate clause for exception `{e}`")));
            }
            let (cn, b) = self.bind_user(c, body)?;
            raises.push((en, cn, Arc::new(b)));
        }
        let mut kills: Vec<(Name, Arc<UserComp>)> = Vec::new();
        for (s, pos, body) in &f.kills {
            let sn = self.check_signal(s, *pos)?;
            if kills.iter().any(|(k, _)| *k == sn) {
                return Err(Diagnostic::new(*pos, "Parse-Duplicate", format!("duplicate clause for signal `{s}`")));
            }
            kills.push((sn, Arc::new(self.user(body)?)));
        }
        Ok(Finally { ret: (x, cn, Arc::new(n)), raises, kills })
    }

    /// Shared structure of explicit operation calls in both modes.
    fn op_parts(&mut self, op: &str, pos: Pos, handlers: &[(String, Pos, Expr)]) -> CResult<BTreeSet<Name>> {
        let sig = self
            .tables
            .op(op)
            .ok_or_else(|| Diagnostic::new(pos, "Parse-Undeclared", format!("undeclared operation `{op}`")))?;
        let mut seen = BTreeSet::new();
        for (e, hpos, _) in handlers {
            let en = self.check_exception(e, *hpos)?;
            if !sig.excs.contains(&en) {
                return Err(Diagnostic::new(
                    *hpos,
                    "Parse-Syntax",
                    format!("operation `{op}` cannot raise `{e}`"),
                ));
            }
            if !seen.insert(en) {
                return Err(Diagnostic::new(*hpos, "Parse-Duplicate", format!("duplicate clause for exception `{e}`")));
            }
        }
        if let Some(missing) = sig.excs.iter().find(|e| !seen.contains(*e)) {
            return Err(Diagnostic::new(
                pos,
                "Parse-Syntax",
                format!("operation call `{op}` lacks an exception continuation for `{missing}`"),
            ));
        }
        Ok(seen)
    }

    fn generic_op(&mut self, op: &str) -> (Name, Vec<Name>) {
        let var = self.fresh.rename("y");
        let excs = self.tables.ops[op].excs.iter().cloned().collect();
        (var, excs)
    }

    fn user_inner(&mut self, e: &Expr, h: &mut Hoists) -> CResult<UserComp> {
        let pos = e.pos;
        let kind = match &e.kind {
            ExprKind::Return(v) => UserKind::Return(self.value(v, h)?),
            ExprKind::App(..) => {
                let (head, args) = spine(e);
                match &head.kind {
                    ExprKind::Ident(s) if self.lookup(s).is_none() && self.tables.ops.contains_key(s.as_str()) => {
                        if args.len() != 1 {
                            return Err(Diagnostic::new(pos, "Parse-Syntax", format!("operation `{s}` takes one argument")));
                        }
                        let arg = self.value(args[0], h)?;
                        let (var, excs) = self.generic_op(s);
                        UserKind::Op(OpCall {
                            op: Name::from(s.as_str()),
                            arg,
                            var: var.clone(),
                            body: Arc::new(UserComp::at(pos, UserKind::Return(Value::Var(var)))),
                            handlers: excs
                                .into_iter()
                                .map(|e| (e.clone(), Arc::new(UserComp::at(pos, UserKind::Raise(e, None)))))
                                .collect(),
                        })
                    }
                    ExprKind::Ident(s) if self.lookup(s).is_none() && Prim::from_word(s).is_some() => {
                        UserKind::Return(self.value(e, h)?)
                    }
                    _ => {
                        let ExprKind::App(f, a) = &e.kind else { unreachable!() };
                        let fv = self.value(f, h)?;
                        let av = self.value(a, h)?;
                        UserKind::App(fv, av)
                    }
                }
            }
            ExprKind::Let(pat, m, n) => {
                let m = self.user(m)?;
                let (x, n) = self.user_pattern(pat, n)?;
                UserKind::Let(x, Arc::new(m), Arc::new(n))
            }
            ExprKind::Seq(m, n) => {
                let m = self.user(m)?;
                let (x, n) = self.bind_user(&Binder::Wild, n)?;
                UserKind::Let(x, Arc::new(m), Arc::new(n))
            }
            ExprKind::Try(m, hd) => {
                let m = self.user(m)?;
                UserKind::Try(Arc::new(m), self.user_handler(hd)?)
            }
            ExprKind::Match(v, arms) => {
                let v = self.value(v, h)?;
                match arms {
                    Arms::Pair(x, y, body) => {
                        let xn = self.push(x);
                        let yn = self.push(y);
                        let b = self.user(body);
                        self.pop(2);
                        UserKind::MatchPair(v, xn, yn, Arc::new(b?))
                    }
                    Arms::Sum(x, m, y, n) => {
                        let (xn, m) = self.bind_user(x, m)?;
                        let (yn, n) = self.bind_user(y, n)?;
                        UserKind::MatchSum(v, xn, Arc::new(m), yn, Arc::new(n))
                    }
                    Arms::Empty(t) => UserKind::MatchEmpty(v, t.clone()),
                }
            }
            ExprKind::If(c, m, n) => {
                let c = self.value(c, h)?;
                let (xn, m) = self.bind_user(&Binder::Wild, m)?;
                let (yn, n) = self.bind_user(&Binder::Wild, n)?;
                UserKind::MatchSum(Value::Prim(Prim::Cond, vec![c]), xn, Arc::new(m), yn, Arc::new(n))
            }
            ExprKind::OpCall { op, arg, var, body, handlers } => {
                self.op_parts(op, pos, handlers)?;
                let arg = self.value(arg, h)?;
                let (x, body) = self.bind_user(var, body)?;
                let mut hs = Vec::new();
                for (en, _, hb) in handlers {
                    hs.push((Name::from(en.as_str()), Arc::new(self.user(hb)?)));
                }
                UserKind::Op(OpCall { op: Name::from(op.as_str()), arg, var: x, body: Arc::new(body), handlers: hs })
            }
            ExprKind::Raise(en, ann) => UserKind::Raise(self.check_exception(en, pos)?, ann.clone()),
            ExprKind::Using { runner, state, body, fin } => {
                let r = self.value(runner, h)?;
                let w = self.value(state, h)?;
                let m = self.user(body)?;
                let f = self.finally(fin)?;
                UserKind::Run(r, w, Arc::new(m), f)
            }
            ExprKind::Kernel { body, state, fin } => {
                let k = self.kernel(body)?;
                let w = self.value(state, h)?;
                let f = self.finally(fin)?;
                UserKind::Kernel(Arc::new(k), w, f)
            }
            ExprKind::Kill(..) | ExprKind::Getenv(_) | ExprKind::Setenv(..) | ExprKind::User(..) => {
                return Err(Diagnostic::new(pos, "Parse-Mode", "kernel-mode construct used in user mode"));
            }
            _ => UserKind::Return(self.value(e, h)?),
        };
        Ok(UserComp::at(pos, kind))
    }

    fn kernel_inner(&mut self, e: &Expr, h: &mut Hoists) -> CResult<KernelComp> {
        let pos = e.pos;
        let kind = match &e.kind {
            ExprKind::Return(v) => KernelKind::Return(self.value(v, h)?),
            ExprKind::App(..) => {
                let (head, args) = spine(e);
                match &head.kind {
                    ExprKind::Ident(s) if self.lookup(s).is_none() && self.tables.ops.contains_key(s.as_str()) => {
                        if args.len() != 1 {
                            return Err(Diagnostic::new(pos, "Parse-Syntax", format!("operation `{s}` takes one argument")));
                        }
                        let arg = self.value(args[0], h)?;
                        let (var, excs) = self.generic_op(s);
                        KernelKind::Op(OpCall {
                            op: Name::from(s.as_str()),
                            arg,
                            var: var.clone(),
                            body: Arc::new(KernelComp::at(pos, KernelKind::Return(Value::Var(var)))),
                            handlers: excs
                                .into_iter()
                                .map(|e| (e.clone(), Arc::new(KernelComp::at(pos, KernelKind::Raise(e, None)))))
                                .collect(),
                        })
                    }
                    ExprKind::Ident(s) if self.lookup(s).is_none() && Prim::from_word(s).is_some() => {
                        KernelKind::Return(self.value(e, h)?)
                    }
                    _ => {
                        let ExprKind::App(f, a) = &e.kind else { unreachable!() };
                        let fv = self.value(f, h)?;
                        let av = self.value(a, h)?;
                        KernelKind::App(fv, av)
                    }
                }
            }
            ExprKind::Let(pat, m, n) => {
                let m = self.kernel(m)?;
                let (x, n) = self.kernel_pattern(pat, n)?;
                KernelKind::Let(x, Arc::new(m), Arc::new(n))
            }
            ExprKind::Seq(m, n) => {
                let m = self.kernel(m)?;
                let (x, n) = self.bind_kernel(&Binder::Wild, n)?;
                KernelKind::Let(x, Arc::new(m), Arc::new(n))
            }
            ExprKind::Try(m, hd) => {
                let m = self.kernel(m)?;
                KernelKind::Try(Arc::new(m), self.kernel_handler(hd)?)
            }
            ExprKind::User(m, hd) => {
                let m = self.user(m)?;
                KernelKind::User(Arc::new(m), self.kernel_handler(hd)?)
            }
            ExprKind::Match(v, arms) => {
                let v = self.value(v, h)?;
                match arms {
                    Arms::Pair(x, y, body) => {
                        let xn = self.push(x);
                        let yn = self.push(y);
                        let b = self.kernel(body);
                        self.pop(2);
                        KernelKind::MatchPair(v, xn, yn, Arc::new(b?))
                    }
                    Arms::Sum(x, m, y, n) => {
                        let (xn, m) = self.bind_kernel(x, m)?;
                        let (yn, n) = self.bind_kernel(y, n)?;
                        KernelKind::MatchSum(v, xn, Arc::new(m), yn, Arc::new(n))
                    }
                    Arms::Empty(t) => KernelKind::MatchEmpty(v, t.clone()),
                }
            }
            ExprKind::If(c, m, n) => {
                let c = self.value(c, h)?;
                let (xn, m) = self.bind_kernel(&Binder::Wild, m)?;
                let (yn, n) = self.bind_kernel(&Binder::Wild, n)?;
                KernelKind::MatchSum(Value::Prim(Prim::Cond, vec![c]), xn, Arc::new(m), yn, Arc::new(n))
            }
            ExprKind::OpCall { op, arg, var, body, handlers } => {
                self.op_parts(op, pos, handlers)?;
                let arg = self.value(arg, h)?;
                let (x, body) = self.bind_kernel(var, body)?;
                let mut hs = Vec::new();
                for (en, _, hb) in handlers {
                    hs.push((Name::from(en.as_str()), Arc::new(self.kernel(hb)?)));
                }
                KernelKind::Op(OpCall { op: Name::from(op.as_str()), arg, var: x, body: Arc::new(body), handlers: hs })
            }
            ExprKind::Raise(en, ann) => KernelKind::Raise(self.check_exception(en, pos)?, ann.clone()),
            ExprKind::Kill(sn, ann) => KernelKind::Kill(self.check_signal(sn, pos)?, ann.clone()),
            ExprKind::Getenv(None) => {
                let c = self.fresh.rename("c");
                KernelKind::Getenv(c.clone(), Arc::new(KernelComp::at(pos, KernelKind::Return(Value::Var(c)))))
            }
            ExprKind::Getenv(Some((c, body))) => {
                let (cn, k) = self.bind_kernel(c, body)?;
                KernelKind::Getenv(cn, Arc::new(k))
            }
            ExprKind::Setenv(v, None) => {
                let v = self.value(v, h)?;
                KernelKind::Setenv(v, Arc::new(KernelComp::at(pos, KernelKind::Return(Value::Unit))))
            }
            ExprKind::Setenv(v, Some(k)) => {
                let v = self.value(v, h)?;
                let k = self.kernel(k)?;
                KernelKind::Setenv(v, Arc::new(k))
            }
            ExprKind::Using { .. } | ExprKind::Kernel { .. } => {
                return Err(Diagnostic::new(pos, "Parse-Mode", "user-mode construct used in kernel mode"));
            }
            _ => KernelKind::Return(self.value(e, h)?),
        };
        Ok(KernelComp::at(pos, kind))
    }
}
