//! Runtime values and environments.

use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::ground::GroundValue;
use crate::names::Name;
use crate::syntax::{KernelComp, RunnerLit, UserComp};

#[derive(Clone)]
pub enum RValue {
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
    Unit,
    Pair(Rc<RValue>, Rc<RValue>),
    Inl(Rc<RValue>),
    Inr(Rc<RValue>),
    Fun(Rc<Closure<UserComp>>),
    FunK(Rc<Closure<KernelComp>>),
    /// Runner closures never capture kernel state; it is supplied at `run`.
    Runner(Rc<RunnerClosure>),
}

pub struct Closure<B> {
    pub param: Name,
    pub body: Arc<B>,
    pub env: Env,
}

pub struct RunnerClosure {
    pub lit: Arc<RunnerLit>,
    pub env: Env,
}

impl RValue {
    pub fn pair(a: RValue, b: RValue) -> RValue {
        RValue::Pair(Rc::new(a), Rc::new(b))
    }

    pub fn to_ground(&self) -> Option<GroundValue> {
        Some(match self {
            RValue::Int(n) => GroundValue::Int(*n),
            RValue::Bool(b) => GroundValue::Bool(*b),
            RValue::Str(s) => GroundValue::Str(s.clone()),
            RValue::Unit => GroundValue::Unit,
            RValue::Pair(a, b) => GroundValue::pair(a.to_ground()?, b.to_ground()?),
            RValue::Inl(a) => GroundValue::inl(a.to_ground()?),
            RValue::Inr(a) => GroundValue::inr(a.to_ground()?),
            _ => return None,
        })
    }

    pub fn from_ground(g: &GroundValue) -> RValue {
        match g {
            GroundValue::Int(n) => RValue::Int(*n),
            GroundValue::Bool(b) => RValue::Bool(*b),
            GroundValue::Str(s) => RValue::Str(s.clone()),
            GroundValue::Unit => RValue::Unit,
            GroundValue::Pair(a, b) => RValue::pair(RValue::from_ground(a), RValue::from_ground(b)),
            GroundValue::Inl(a) => RValue::Inl(Rc::new(RValue::from_ground(a))),
            GroundValue::Inr(a) => RValue::Inr(Rc::new(RValue::from_ground(a))),
        }
    }
}

impl fmt::Display for RValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RValue::Pair(a, b) => write!(f, "({a}, {b})"),
            RValue::Inl(a) => write!(f, "inl({a})"),
            RValue::Inr(a) => write!(f, "inr({a})"),
            RValue::Fun(_) => write!(f, "<fun>"),
            RValue::FunK(_) => write!(f, "<funK>"),
            RValue::Runner(_) => write!(f, "<runner>"),
            other => write!(f, "{}", other.to_ground().expect("ground literal")),
        }
    }
}

impl fmt::Debug for RValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Persistent environment; lookup finds the most recent binding.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: RValue,
    next: Env,
}

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &Name, value: RValue) -> Env {
        Env(Some(Rc::new(EnvNode { name: name.clone(), value, next: self.clone() })))
    }

    pub fn lookup(&self, name: &str) -> Option<&RValue> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}
