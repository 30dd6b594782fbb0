//! Runtime values of ground types, shared by the evaluator, the oracle and
//! the containers.

use std::fmt;
use std::sync::Arc;

use crate::syntax::{Literal, Prim};
use crate::types::{BaseType, GroundType};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundValue {
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
    Unit,
    Pair(Box<GroundValue>, Box<GroundValue>),
    Inl(Box<GroundValue>),
    Inr(Box<GroundValue>),
}

impl GroundValue {
    pub fn pair(a: GroundValue, b: GroundValue) -> Self {
        GroundValue::Pair(Box::new(a), Box::new(b))
    }
    pub fn inl(a: GroundValue) -> Self {
        GroundValue::Inl(Box::new(a))
    }
    pub fn inr(a: GroundValue) -> Self {
        GroundValue::Inr(Box::new(a))
    }
    pub fn str(s: &str) -> Self {
        GroundValue::Str(Arc::from(s))
    }

    pub fn from_literal(l: &Literal) -> Self {
        match l {
            Literal::Int(n) => GroundValue::Int(*n),
            Literal::Bool(b) => GroundValue::Bool(*b),
            Literal::Str(s) => GroundValue::Str(s.clone()),
        }
    }

    pub fn has_type(&self, t: &GroundType) -> bool {
        match (self, t) {
            (GroundValue::Int(_), GroundType::Base(BaseType::Int)) => true,
            (GroundValue::Bool(_), GroundType::Base(BaseType::Bool)) => true,
            (GroundValue::Str(_), GroundType::Base(BaseType::Str)) => true,
            (GroundValue::Unit, GroundType::Unit) => true,
            (GroundValue::Pair(a, b), GroundType::Prod(s, t)) => a.has_type(s) && b.has_type(t),
            (GroundValue::Inl(a), GroundType::Sum(s, _)) => a.has_type(s),
            (GroundValue::Inr(b), GroundType::Sum(_, t)) => b.has_type(t),
            _ => false,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroundValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            GroundValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// Applies a built-in constant. Integer arithmetic wraps.
pub fn apply_prim(p: Prim, args: &[GroundValue]) -> Option<GroundValue> {
    use GroundValue as G;
    Some(match (p, args) {
        (Prim::Add, [G::Int(a), G::Int(b)]) => G::Int(a.wrapping_add(*b)),
        (Prim::Sub, [G::Int(a), G::Int(b)]) => G::Int(a.wrapping_sub(*b)),
        (Prim::Mul, [G::Int(a), G::Int(b)]) => G::Int(a.wrapping_mul(*b)),
        (Prim::Eq, [G::Int(a), G::Int(b)]) => G::Bool(a == b),
        (Prim::Lt, [G::Int(a), G::Int(b)]) => G::Bool(a < b),
        (Prim::Concat, [G::Str(a), G::Str(b)]) => G::Str(Arc::from(format!("{a}{b}").as_str())),
        (Prim::Cond, [G::Bool(b)]) => {
            if *b {
                G::inl(G::Unit)
            } else {
                G::inr(G::Unit)
            }
        }
        _ => return None,
    })
}

/// Lists every value of a ground type, with integers confined to
/// `[0, int_bound)`. Strings are not enumerable.
pub fn enumerate(t: &GroundType, int_bound: i64) -> Option<Vec<GroundValue>> {
    Some(match t {
        GroundType::Base(BaseType::Int) => (0..int_bound).map(GroundValue::Int).collect(),
        GroundType::Base(BaseType::Bool) => vec![GroundValue::Bool(false), GroundValue::Bool(true)],
        GroundType::Base(BaseType::Str) => return None,
        GroundType::Unit => vec![GroundValue::Unit],
        GroundType::Empty => vec![],
        GroundType::Prod(a, b) => {
            let xs = enumerate(a, int_bound)?;
            let ys = enumerate(b, int_bound)?;
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for x in &xs {
                for y in &ys {
                    out.push(GroundValue::pair(x.clone(), y.clone()));
                }
            }
            out
        }
        GroundType::Sum(a, b) => {
            let mut out: Vec<_> = enumerate(a, int_bound)?.into_iter().map(GroundValue::inl).collect();
            out.extend(enumerate(b, int_bound)?.into_iter().map(GroundValue::inr));
            out
        }
    })
}

pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundValue::Int(n) => write!(f, "{n}"),
            GroundValue::Bool(b) => write!(f, "{b}"),
            GroundValue::Str(s) => write!(f, "{}", escape_str(s)),
            GroundValue::Unit => write!(f, "()"),
            GroundValue::Pair(a, b) => write!(f, "({a}, {b})"),
            GroundValue::Inl(a) => write!(f, "inl({a})"),
            GroundValue::Inr(a) => write!(f, "inr({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_sizes() {
        let t = GroundType::prod(GroundType::bool(), GroundType::sum(GroundType::Unit, GroundType::int()));
        let vs = enumerate(&t, 3).unwrap();
        assert_eq!(vs.len(), 2 * 4);
        assert!(vs.iter().all(|v| v.has_type(&t)));
        assert!(enumerate(&GroundType::Empty, 3).unwrap().is_empty());
        assert!(enumerate(&GroundType::str(), 3).is_none());
    }

    #[test]
    fn prims() {
        use GroundValue as G;
        assert_eq!(apply_prim(Prim::Add, &[G::Int(2), G::Int(3)]), Some(G::Int(5)));
        assert_eq!(apply_prim(Prim::Cond, &[G::Bool(false)]), Some(G::inr(G::Unit)));
        assert_eq!(apply_prim(Prim::Concat, &[G::str("a"), G::str("b")]), Some(G::str("ab")));
        assert_eq!(apply_prim(Prim::Add, &[G::Unit]), None);
    }

    #[test]
    fn display() {
        let v = GroundValue::pair(GroundValue::Int(1), GroundValue::inl(GroundValue::str("a\"b")));
        assert_eq!(v.to_string(), "(1, inl(\"a\\\"b\"))");
    }
}
