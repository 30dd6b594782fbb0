//! Finite computation trees: the free model over a signature.
//!
//! A node records the operation, its argument and one subtree per possible
//! result (in the enumeration order of the result type) and per exception
//! of the operation.

use std::collections::BTreeMap;
use std::fmt;

use crate::ground::GroundValue;
use crate::names::Name;

#[derive(Clone, Debug, PartialEq)]
pub enum Tree<P> {
    Leaf(P),
    Node {
        op: Name,
        arg: GroundValue,
        children: BTreeMap<GroundValue, Tree<P>>,
        excs: BTreeMap<Name, Tree<P>>,
    },
}

/// Leaf of a user tree: a returned value or a raised exception.
#[derive(Clone, Debug, PartialEq)]
pub enum UPay<V> {
    Val(V),
    Exc(Name),
}

/// Leaf of a kernel tree: a value or exception with the final state, or a
/// signal, which carries no state.
#[derive(Clone, Debug, PartialEq)]
pub enum KPay<V> {
    Val(V, GroundValue),
    Exc(Name, GroundValue),
    Sig(Name),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("node budget of {0} exceeded")]
    Budget(usize),
    #[error("runtime error: {0}")]
    Bottom(String),
    #[error("outside the oracle fragment: {0}")]
    Fragment(String),
}

pub type OResult<T> = Result<T, OracleError>;

impl<P> Tree<P> {
    pub fn leaf(p: P) -> Self {
        Tree::Leaf(p)
    }

    /// Kleisli extension: replaces every leaf `p` by `f(p)`.
    pub fn bind<Q>(self, f: &mut dyn FnMut(P) -> OResult<Tree<Q>>) -> OResult<Tree<Q>> {
        Ok(match self {
            Tree::Leaf(p) => f(p)?,
            Tree::Node { op, arg, children, excs } => {
                let mut ch = BTreeMap::new();
                for (b, t) in children {
                    ch.insert(b, t.bind(f)?);
                }
                let mut ex = BTreeMap::new();
                for (e, t) in excs {
                    ex.insert(e, t.bind(f)?);
                }
                Tree::Node { op, arg, children: ch, excs: ex }
            }
        })
    }

    /// Infallible Kleisli extension on a borrowed tree.
    pub fn bind_ref<Q>(&self, f: &dyn Fn(&P) -> Tree<Q>) -> Tree<Q> {
        match self {
            Tree::Leaf(p) => f(p),
            Tree::Node { op, arg, children, excs } => Tree::Node {
                op: op.clone(),
                arg: arg.clone(),
                children: children.iter().map(|(b, t)| (b.clone(), t.bind_ref(f))).collect(),
                excs: excs.iter().map(|(e, t)| (e.clone(), t.bind_ref(f))).collect(),
            },
        }
    }

    pub fn map<Q>(&self, f: &dyn Fn(&P) -> Q) -> Tree<Q> {
        self.bind_ref(&|p| Tree::Leaf(f(p)))
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, excs, .. } => {
                1 + children.values().chain(excs.values()).map(Tree::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, excs, .. } => 1 + children.values().chain(excs.values()).map(Tree::size).sum::<usize>(),
        }
    }

    pub fn as_leaf(&self) -> Option<&P> {
        match self {
            Tree::Leaf(p) => Some(p),
            _ => None,
        }
    }

    /// Operations occurring in the tree.
    pub fn ops(&self, out: &mut std::collections::BTreeSet<Name>) {
        if let Tree::Node { op, children, excs, .. } = self {
            out.insert(op.clone());
            for t in children.values().chain(excs.values()) {
                t.ops(out);
            }
        }
    }
}

impl<V: fmt::Display> fmt::Display for UPay<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UPay::Val(v) => write!(f, "return {v}"),
            UPay::Exc(e) => write!(f, "raise {e}"),
        }
    }
}

impl<V: fmt::Display> fmt::Display for KPay<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPay::Val(v, c) => write!(f, "return {v} @ {c}"),
            KPay::Exc(e, c) => write!(f, "raise {e} @ {c}"),
            KPay::Sig(s) => write!(f, "kill {s}"),
        }
    }
}

impl<P: fmt::Display> fmt::Display for Tree<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(p) => write!(f, "{p}"),
            Tree::Node { op, arg, children, excs } => {
                write!(f, "{op}({arg}; ")?;
                for (i, (b, t)) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{b} => {t}")?;
                }
                for (e, t) in excs {
                    write!(f, " | !{e} => {t}")?;
                }
                write!(f, ")")
            }
        }
    }
}
