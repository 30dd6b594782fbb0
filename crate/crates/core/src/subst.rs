//! Capture-avoiding substitution, free variables and alpha-equivalence.
//!
//! All three are instances of one binder-aware traversal: free variable
//! occurrences are handed to a callback, and every binder may be renamed.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::names::{Fresh, Name};
use crate::syntax::*;

struct Walker<'a> {
    /// Bound names in scope, innermost last, with their new names.
    env: Vec<(Name, Name)>,
    on_free: &'a mut dyn FnMut(&Name) -> Value,
    on_bind: &'a mut dyn FnMut(&Name, usize) -> Name,
}

impl Walker<'_> {
    fn bind(&mut self, x: &Name) -> Name {
        let depth = self.env.len();
        let y = (self.on_bind)(x, depth);
        self.env.push((x.clone(), y.clone()));
        y
    }

    fn unbind(&mut self, k: usize) {
        let n = self.env.len();
        self.env.truncate(n - k);
    }

    fn var(&mut self, x: &Name) -> Value {
        match self.env.iter().rev().find(|(k, _)| k == x) {
            Some((_, y)) => Value::Var(y.clone()),
            None => (self.on_free)(x),
        }
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var(x) => self.var(x),
            Value::Lit(_) | Value::Unit => v.clone(),
            Value::Prim(p, args) => Value::Prim(*p, args.iter().map(|a| self.value(a)).collect()),
            Value::Pair(a, b) => Value::pair(self.value(a), self.value(b)),
            Value::Inl(a, x, y) => Value::Inl(Box::new(self.value(a)), x.clone(), y.clone()),
            Value::Inr(a, x, y) => Value::Inr(Box::new(self.value(a)), x.clone(), y.clone()),
            Value::Fun(x, t, m) => {
                let y = self.bind(x);
                let m = self.user(m);
                self.unbind(1);
                Value::Fun(y, t.clone(), Arc::new(m))
            }
            Value::FunK(x, t, c, k) => {
                let y = self.bind(x);
                let k = self.kernel(k);
                self.unbind(1);
                Value::FunK(y, t.clone(), c.clone(), Arc::new(k))
            }
            Value::Runner(r) => {
                let clauses = r
                    .clauses
                    .iter()
                    .map(|cl| {
                        let y = self.bind(&cl.param);
                        let body = self.kernel(&cl.body);
                        self.unbind(1);
                        CoopClause { op: cl.op.clone(), param: y, body: Arc::new(body) }
                    })
                    .collect();
                Value::Runner(Arc::new(RunnerLit { clauses, state: r.state.clone() }))
            }
        }
    }

    fn user_under(&mut self, xs: &[&Name], m: &UserComp) -> (Vec<Name>, Arc<UserComp>) {
        let ys: Vec<Name> = xs.iter().map(|x| self.bind(x)).collect();
        let m = self.user(m);
        self.unbind(xs.len());
        (ys, Arc::new(m))
    }

    fn kernel_under(&mut self, xs: &[&Name], k: &KernelComp) -> (Vec<Name>, Arc<KernelComp>) {
        let ys: Vec<Name> = xs.iter().map(|x| self.bind(x)).collect();
        let k = self.kernel(k);
        self.unbind(xs.len());
        (ys, Arc::new(k))
    }

    fn user_handler(&mut self, h: &Handler<UserComp>) -> Handler<UserComp> {
        let (ys, ret) = self.user_under(&[&h.ret.0], &h.ret.1);
        let raises = h.raises.iter().map(|(e, n)| (e.clone(), Arc::new(self.user(n)))).collect();
        Handler { ret: (ys[0].clone(), ret), raises }
    }

    fn kernel_handler(&mut self, h: &Handler<KernelComp>) -> Handler<KernelComp> {
        let (ys, ret) = self.kernel_under(&[&h.ret.0], &h.ret.1);
        let raises = h.raises.iter().map(|(e, n)| (e.clone(), Arc::new(self.kernel(n)))).collect();
        Handler { ret: (ys[0].clone(), ret), raises }
    }

    /// The state binder `c` is outer and the value binder `x` inner.
    fn finally(&mut self, f: &Finally) -> Finally {
        let (ys, ret) = self.user_under(&[&f.ret.1, &f.ret.0], &f.ret.2);
        let raises = f
            .raises
            .iter()
            .map(|(e, c, n)| {
                let (cs, n) = self.user_under(&[c], n);
                (e.clone(), cs[0].clone(), n)
            })
            .collect();
        let kills = f.kills.iter().map(|(s, n)| (s.clone(), Arc::new(self.user(n)))).collect();
        Finally { ret: (ys[1].clone(), ys[0].clone(), ret), raises, kills }
    }

    pub fn user(&mut self, m: &UserComp) -> UserComp {
        let kind = match &m.kind {
            UserKind::Return(v) => UserKind::Return(self.value(v)),
            UserKind::App(f, a) => UserKind::App(self.value(f), self.value(a)),
            UserKind::Try(b, h) => {
                let b = Arc::new(self.user(b));
                UserKind::Try(b, self.user_handler(h))
            }
            UserKind::Let(x, b, n) => {
                let b = Arc::new(self.user(b));
                let (ys, n) = self.user_under(&[x], n);
                UserKind::Let(ys[0].clone(), b, n)
            }
            UserKind::MatchPair(v, x, y, b) => {
                let v = self.value(v);
                let (ys, b) = self.user_under(&[x, y], b);
                UserKind::MatchPair(v, ys[0].clone(), ys[1].clone(), b)
            }
            UserKind::MatchEmpty(v, t) => UserKind::MatchEmpty(self.value(v), t.clone()),
            UserKind::MatchSum(v, x, b1, y, b2) => {
                let v = self.value(v);
                let (xs, b1) = self.user_under(&[x], b1);
                let (ys, b2) = self.user_under(&[y], b2);
                UserKind::MatchSum(v, xs[0].clone(), b1, ys[0].clone(), b2)
            }
            UserKind::Op(c) => {
                let arg = self.value(&c.arg);
                let (ys, body) = self.user_under(&[&c.var], &c.body);
                let handlers = c.handlers.iter().map(|(e, n)| (e.clone(), Arc::new(self.user(n)))).collect();
                UserKind::Op(OpCall { op: c.op.clone(), arg, var: ys[0].clone(), body, handlers })
            }
            UserKind::Raise(e, t) => UserKind::Raise(e.clone(), t.clone()),
            UserKind::Run(r, w, b, f) => {
                let r = self.value(r);
                let w = self.value(w);
                let b = Arc::new(self.user(b));
                UserKind::Run(r, w, b, self.finally(f))
            }
            UserKind::Kernel(k, w, f) => {
                let k = Arc::new(self.kernel(k));
                let w = self.value(w);
                UserKind::Kernel(k, w, self.finally(f))
            }
        };
        UserComp::at(m.pos, kind)
    }

    pub fn kernel(&mut self, k: &KernelComp) -> KernelComp {
        let kind = match &k.kind {
            KernelKind::Return(v) => KernelKind::Return(self.value(v)),
            KernelKind::App(f, a) => KernelKind::App(self.value(f), self.value(a)),
            KernelKind::Try(b, h) => {
                let b = Arc::new(self.kernel(b));
                KernelKind::Try(b, self.kernel_handler(h))
            }
            KernelKind::Let(x, b, n) => {
                let b = Arc::new(self.kernel(b));
                let (ys, n) = self.kernel_under(&[x], n);
                KernelKind::Let(ys[0].clone(), b, n)
            }
            KernelKind::MatchPair(v, x, y, b) => {
                let v = self.value(v);
                let (ys, b) = self.kernel_under(&[x, y], b);
                KernelKind::MatchPair(v, ys[0].clone(), ys[1].clone(), b)
            }
            KernelKind::MatchEmpty(v, t) => KernelKind::MatchEmpty(self.value(v), t.clone()),
            KernelKind::MatchSum(v, x, b1, y, b2) => {
                let v = self.value(v);
                let (xs, b1) = self.kernel_under(&[x], b1);
                let (ys, b2) = self.kernel_under(&[y], b2);
                KernelKind::MatchSum(v, xs[0].clone(), b1, ys[0].clone(), b2)
            }
            KernelKind::Op(c) => {
                let arg = self.value(&c.arg);
                let (ys, body) = self.kernel_under(&[&c.var], &c.body);
                let handlers = c.handlers.iter().map(|(e, n)| (e.clone(), Arc::new(self.kernel(n)))).collect();
                KernelKind::Op(OpCall { op: c.op.clone(), arg, var: ys[0].clone(), body, handlers })
            }
            KernelKind::Raise(e, t) => KernelKind::Raise(e.clone(), t.clone()),
            KernelKind::Kill(s, t) => KernelKind::Kill(s.clone(), t.clone()),
            KernelKind::Getenv(c, b) => {
                let (cs, b) = self.kernel_under(&[c], b);
                KernelKind::Getenv(cs[0].clone(), b)
            }
            KernelKind::Setenv(v, b) => {
                let v = self.value(v);
                KernelKind::Setenv(v, Arc::new(self.kernel(b)))
            }
            KernelKind::User(m, h) => {
                let m = Arc::new(self.user(m));
                KernelKind::User(m, self.kernel_handler(h))
            }
        };
        KernelComp::at(k.pos, kind)
    }
}

/// Runs a walker that keeps binder names, with `on_free` for free
/// occurrences.
fn walk_free<T>(on_free: &mut dyn FnMut(&Name) -> Value, f: impl FnOnce(&mut Walker) -> T) -> T {
    let mut keep = |x: &Name, _: usize| x.clone();
    let mut w = Walker { env: Vec::new(), on_free, on_bind: &mut keep };
    f(&mut w)
}

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut collect = |x: &Name| {
        out.insert(x.clone());
        Value::Var(x.clone())
    };
    walk_free(&mut collect, |w| match t {
        Term::Value(v) => drop(w.value(v)),
        Term::User(m) => drop(w.user(m)),
        Term::Kernel(k) => drop(w.kernel(k)),
    });
    out
}

pub fn free_vars_value(v: &Value) -> BTreeSet<Name> {
    free_vars(&Term::Value(v.clone()))
}

/// `body[replacement/var]`. Binders that would capture a free variable of
/// the replacement are renamed with `fresh`.
pub fn substitute(body: &Term, var: &Name, replacement: &Value, fresh: &mut Fresh) -> Term {
    let fv = free_vars_value(replacement);
    let mut on_free = |x: &Name| if x == var { replacement.clone() } else { Value::Var(x.clone()) };
    let mut on_bind = |x: &Name, _: usize| if fv.contains(x) { fresh.rename(x) } else { x.clone() };
    let mut w = Walker { env: Vec::new(), on_free: &mut on_free, on_bind: &mut on_bind };
    match body {
        Term::Value(v) => Term::Value(w.value(v)),
        Term::User(m) => Term::User(w.user(m)),
        Term::Kernel(k) => Term::Kernel(w.kernel(k)),
    }
}

pub fn subst_user(m: &UserComp, var: &Name, v: &Value, fresh: &mut Fresh) -> UserComp {
    match substitute(&Term::User(m.clone()), var, v, fresh) {
        Term::User(m) => m,
        _ => unreachable!(),
    }
}

pub fn subst_kernel(k: &KernelComp, var: &Name, v: &Value, fresh: &mut Fresh) -> KernelComp {
    match substitute(&Term::Kernel(k.clone()), var, v, fresh) {
        Term::Kernel(k) => k,
        _ => unreachable!(),
    }
}

pub fn subst_value(t: &Value, var: &Name, v: &Value, fresh: &mut Fresh) -> Value {
    match substitute(&Term::Value(t.clone()), var, v, fresh) {
        Term::Value(v) => v,
        _ => unreachable!(),
    }
}

/// Nameless form: every bound variable is renamed after its binding depth.
/// `#` never occurs in source names, so bound and free names cannot mix.
pub fn nameless(t: &Term) -> Term {
    let mut on_free = |x: &Name| Value::Var(x.clone());
    let mut on_bind = |_: &Name, depth: usize| Name::from(format!("#{depth}").as_str());
    let mut w = Walker { env: Vec::new(), on_free: &mut on_free, on_bind: &mut on_bind };
    match t {
        Term::Value(v) => Term::Value(w.value(v)),
        Term::User(m) => Term::User(w.user(m)),
        Term::Kernel(k) => Term::Kernel(w.kernel(k)),
    }
}

pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    nameless(a) == nameless(b)
}

pub fn alpha_equal_user(a: &UserComp, b: &UserComp) -> bool {
    alpha_equal(&Term::User(a.clone()), &Term::User(b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::name;
    use crate::types::ValueType;

    fn ret(v: Value) -> Arc<UserComp> {
        Arc::new(UserComp::ret(v))
    }

    #[test]
    fn direct_replacement() {
        let x = name("x");
        let m = UserComp::ret(Value::var(&x));
        let out = subst_user(&m, &x, &Value::Unit, &mut Fresh::new());
        assert_eq!(out, UserComp::ret(Value::Unit));
    }

    #[test]
    fn bound_occurrence_is_shadowed() {
        let x = name("x");
        let f = Value::Fun(x.clone(), ValueType::Unit, ret(Value::var(&x)));
        let out = subst_value(&f, &x, &Value::Unit, &mut Fresh::new());
        assert_eq!(out, f);
    }

    #[test]
    fn capturing_binder_is_renamed() {
        let (y, z) = (name("y"), name("z"));
        // fun (y:unit) -> return (z, y), replacing z by y
        let f = Value::Fun(y.clone(), ValueType::Unit, ret(Value::pair(Value::var(&z), Value::var(&y))));
        let out = subst_value(&f, &z, &Value::var(&y), &mut Fresh::starting_at(7));
        let Value::Fun(y1, _, body) = &out else { panic!() };
        assert_ne!(*y1, y);
        assert_eq!(body.kind, UserKind::Return(Value::pair(Value::var(&y), Value::var(y1))));
        // The oracle: compare against the expected term up to renaming.
        let w = name("w");
        let expected = Value::Fun(w.clone(), ValueType::Unit, ret(Value::pair(Value::var(&y), Value::var(&w))));
        assert!(alpha_equal(&Term::Value(out), &Term::Value(expected)));
    }

    #[test]
    fn alpha_basics() {
        let (x, y) = (name("x"), name("y"));
        let fx = Value::Fun(x.clone(), ValueType::Unit, ret(Value::var(&x)));
        let fy = Value::Fun(y.clone(), ValueType::Unit, ret(Value::var(&y)));
        assert!(alpha_equal(&Term::Value(fx), &Term::Value(fy)));
        assert!(!alpha_equal(
            &Term::User(UserComp::ret(Value::var(&x))),
            &Term::User(UserComp::ret(Value::var(&y)))
        ));
    }

    #[test]
    fn free_variables() {
        let (x, y) = (name("x"), name("y"));
        let f = Value::Fun(x.clone(), ValueType::Unit, ret(Value::pair(Value::var(&x), Value::var(&y))));
        let fv = free_vars_value(&f);
        assert!(fv.contains(&y) && !fv.contains(&x));
    }
}
