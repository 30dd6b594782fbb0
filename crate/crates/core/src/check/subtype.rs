//! Subtyping, and the joins and meets used at branch merges.

use crate::types::{EffSet, KernelType, RunnerType, UserType, ValueType};

pub fn subtype_value(x: &ValueType, y: &ValueType) -> bool {
    use ValueType as V;
    match (x, y) {
        (V::Base(a), V::Base(b)) => a == b,
        (V::Empty, _) => true,
        (V::Unit, V::Unit) => true,
        (V::Prod(a, b), V::Prod(c, d)) | (V::Sum(a, b), V::Sum(c, d)) => subtype_value(a, c) && subtype_value(b, d),
        (V::UserFun(a, u), V::UserFun(b, v)) => subtype_value(b, a) && subtype_user(u, v),
        (V::KernelFun(a, k), V::KernelFun(b, l)) => subtype_value(b, a) && subtype_kernel(k, l),
        (V::Runner(r), V::Runner(s)) => subtype_runner(r, s),
        _ => false,
    }
}

pub fn subtype_runner(r: &RunnerType, s: &RunnerType) -> bool {
    s.handled.is_subset(&r.handled)
        && r.external.is_subset(&s.external)
        && r.signals.is_subset(&s.signals)
        && r.state == s.state
}

pub fn subtype_user(u: &UserType, v: &UserType) -> bool {
    subtype_value(&u.carrier, &v.carrier) && u.ops.is_subset(&v.ops) && u.excs.is_subset(&v.excs)
}

pub fn subtype_kernel(k: &KernelType, l: &KernelType) -> bool {
    subtype_value(&k.carrier, &l.carrier)
        && k.ops.is_subset(&l.ops)
        && k.excs.is_subset(&l.excs)
        && k.sigs.is_subset(&l.sigs)
        && k.state == l.state
}

/// A carrier that may be absent: computations that never return (a bare
/// `raise` or `kill`) have no carrier and fit any expected one.
pub type Carrier = Option<ValueType>;

pub fn carrier_sub(x: &Carrier, y: &ValueType) -> bool {
    match x {
        None => true,
        Some(x) => subtype_value(x, y),
    }
}

pub fn join_carrier(x: &Carrier, y: &Carrier) -> Option<Carrier> {
    match (x, y) {
        (None, c) | (c, None) => Some(c.clone()),
        (Some(a), Some(b)) => join(a, b).map(Some),
    }
}

fn union(a: &EffSet, b: &EffSet) -> EffSet {
    a.union(b).cloned().collect()
}

fn inter(a: &EffSet, b: &EffSet) -> EffSet {
    a.intersection(b).cloned().collect()
}

/// Least upper bound, if one exists. `empty` is the least type; other
/// ground parts must agree exactly.
pub fn join(x: &ValueType, y: &ValueType) -> Option<ValueType> {
    use ValueType as V;
    Some(match (x, y) {
        (V::Empty, t) | (t, V::Empty) => t.clone(),
        (V::Base(a), V::Base(b)) if a == b => x.clone(),
        (V::Unit, V::Unit) => V::Unit,
        (V::Prod(a, b), V::Prod(c, d)) => V::prod(join(a, c)?, join(b, d)?),
        (V::Sum(a, b), V::Sum(c, d)) => V::sum(join(a, c)?, join(b, d)?),
        (V::UserFun(a, u), V::UserFun(b, v)) => V::user_fun(
            meet(a, b)?,
            UserType { carrier: join(&u.carrier, &v.carrier)?, ops: union(&u.ops, &v.ops), excs: union(&u.excs, &v.excs) },
        ),
        (V::KernelFun(a, k), V::KernelFun(b, l)) if k.state == l.state => V::kernel_fun(
            meet(a, b)?,
            KernelType {
                carrier: join(&k.carrier, &l.carrier)?,
                ops: union(&k.ops, &l.ops),
                excs: union(&k.excs, &l.excs),
                sigs: union(&k.sigs, &l.sigs),
                state: k.state.clone(),
            },
        ),
        (V::Runner(r), V::Runner(s)) if r.state == s.state => V::Runner(RunnerType {
            handled: inter(&r.handled, &s.handled),
            external: union(&r.external, &s.external),
            signals: union(&r.signals, &s.signals),
            state: r.state.clone(),
        }),
        _ => return None,
    })
}

/// Greatest lower bound, if one exists.
pub fn meet(x: &ValueType, y: &ValueType) -> Option<ValueType> {
    use ValueType as V;
    Some(match (x, y) {
        (V::Empty, _) | (_, V::Empty) => V::Empty,
        (V::Base(a), V::Base(b)) if a == b => x.clone(),
        (V::Unit, V::Unit) => V::Unit,
        (V::Prod(a, b), V::Prod(c, d)) => V::prod(meet(a, c)?, meet(b, d)?),
        (V::Sum(a, b), V::Sum(c, d)) => V::sum(meet(a, c)?, meet(b, d)?),
        (V::UserFun(a, u), V::UserFun(b, v)) => V::user_fun(
            join(a, b)?,
            UserType { carrier: meet(&u.carrier, &v.carrier)?, ops: inter(&u.ops, &v.ops), excs: inter(&u.excs, &v.excs) },
        ),
        (V::KernelFun(a, k), V::KernelFun(b, l)) if k.state == l.state => V::kernel_fun(
            join(a, b)?,
            KernelType {
                carrier: meet(&k.carrier, &l.carrier)?,
                ops: inter(&k.ops, &l.ops),
                excs: inter(&k.excs, &l.excs),
                sigs: inter(&k.sigs, &l.sigs),
                state: k.state.clone(),
            },
        ),
        (V::Runner(r), V::Runner(s)) if r.state == s.state => V::Runner(RunnerType {
            handled: union(&r.handled, &s.handled),
            external: inter(&r.external, &s.external),
            signals: inter(&r.signals, &s.signals),
            state: r.state.clone(),
        }),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::name;
    use crate::types::GroundType;

    fn set(xs: &[&str]) -> EffSet {
        xs.iter().map(|x| name(x)).collect()
    }

    fn runner(h: &[&str], e: &[&str], s: &[&str], c: GroundType) -> ValueType {
        ValueType::Runner(RunnerType { handled: set(h), external: set(e), signals: set(s), state: c })
    }

    #[test]
    fn runner_subtyping() {
        let a = runner(&["op1", "op2"], &["op3"], &["s"], GroundType::int());
        let b = runner(&["op1"], &["op3", "op4"], &["s", "t"], GroundType::int());
        assert!(subtype_value(&a, &b));
        assert!(!subtype_value(&b, &a));
        let c = runner(&["op1"], &["op3", "op4"], &["s", "t"], GroundType::bool());
        assert!(!subtype_value(&a, &c));
    }

    #[test]
    fn user_rows() {
        let pure = UserType::pure(ValueType::int());
        let eff = UserType { carrier: ValueType::int(), ops: set(&["op"]), excs: set(&["e"]) };
        assert!(subtype_user(&pure, &eff));
        assert!(!subtype_user(&eff, &pure));
        assert!(subtype_user(&pure, &pure));
    }

    #[test]
    fn kernel_state_is_invariant() {
        let k = KernelType::pure(ValueType::int(), GroundType::int());
        let l = KernelType::pure(ValueType::int(), GroundType::bool());
        assert!(!subtype_kernel(&k, &l));
    }

    #[test]
    fn joins_of_functions() {
        let f = ValueType::user_fun(ValueType::int(), UserType { carrier: ValueType::Unit, ops: set(&["a"]), excs: set(&[]) });
        let g = ValueType::user_fun(ValueType::int(), UserType { carrier: ValueType::Unit, ops: set(&["b"]), excs: set(&["e"]) });
        let j = join(&f, &g).unwrap();
        assert!(subtype_value(&f, &j) && subtype_value(&g, &j));
        let m = meet(&f, &g).unwrap();
        assert!(subtype_value(&m, &f) && subtype_value(&m, &g));
        assert!(join(&ValueType::int(), &ValueType::bool()).is_none());
    }
}
