//! Types: ground types, value types, user and kernel computation types,
//! runner types, operation signatures and skeletons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::names::{display_name, Name};

pub type EffSet = BTreeSet<Name>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Int,
    Bool,
    Str,
}

impl BaseType {
    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Bool => "bool",
            BaseType::Str => "str",
        }
    }
}

/// Types usable as operation parameters/results and as kernel state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundType {
    Base(BaseType),
    Unit,
    Empty,
    Prod(Box<GroundType>, Box<GroundType>),
    Sum(Box<GroundType>, Box<GroundType>),
}

impl GroundType {
    /// True when no closed value has this type.
    pub fn is_uninhabited(&self) -> bool {
        match self {
            GroundType::Empty => true,
            GroundType::Prod(a, b) => a.is_uninhabited() || b.is_uninhabited(),
            GroundType::Sum(a, b) => a.is_uninhabited() && b.is_uninhabited(),
            GroundType::Base(_) | GroundType::Unit => false,
        }
    }

    pub fn int() -> Self {
        GroundType::Base(BaseType::Int)
    }
    pub fn bool() -> Self {
        GroundType::Base(BaseType::Bool)
    }
    pub fn str() -> Self {
        GroundType::Base(BaseType::Str)
    }
    pub fn prod(a: GroundType, b: GroundType) -> Self {
        GroundType::Prod(Box::new(a), Box::new(b))
    }
    pub fn sum(a: GroundType, b: GroundType) -> Self {
        GroundType::Sum(Box::new(a), Box::new(b))
    }

    pub fn to_value(&self) -> ValueType {
        match self {
            GroundType::Base(b) => ValueType::Base(*b),
            GroundType::Unit => ValueType::Unit,
            GroundType::Empty => ValueType::Empty,
            GroundType::Prod(a, b) => ValueType::prod(a.to_value(), b.to_value()),
            GroundType::Sum(a, b) => ValueType::sum(a.to_value(), b.to_value()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Base(BaseType),
    Unit,
    Empty,
    Prod(Box<ValueType>, Box<ValueType>),
    Sum(Box<ValueType>, Box<ValueType>),
    UserFun(Box<ValueType>, Box<UserType>),
    KernelFun(Box<ValueType>, Box<KernelType>),
    Runner(RunnerType),
}

impl ValueType {
    pub fn int() -> Self {
        ValueType::Base(BaseType::Int)
    }
    pub fn bool() -> Self {
        ValueType::Base(BaseType::Bool)
    }
    pub fn str() -> Self {
        ValueType::Base(BaseType::Str)
    }
    pub fn prod(a: ValueType, b: ValueType) -> Self {
        ValueType::Prod(Box::new(a), Box::new(b))
    }
    pub fn sum(a: ValueType, b: ValueType) -> Self {
        ValueType::Sum(Box::new(a), Box::new(b))
    }
    pub fn user_fun(arg: ValueType, res: UserType) -> Self {
        ValueType::UserFun(Box::new(arg), Box::new(res))
    }
    pub fn kernel_fun(arg: ValueType, res: KernelType) -> Self {
        ValueType::KernelFun(Box::new(arg), Box::new(res))
    }

    /// The ground type this value type denotes, if it contains no
    /// functions or runners.
    pub fn as_ground(&self) -> Option<GroundType> {
        Some(match self {
            ValueType::Base(b) => GroundType::Base(*b),
            ValueType::Unit => GroundType::Unit,
            ValueType::Empty => GroundType::Empty,
            ValueType::Prod(a, b) => GroundType::prod(a.as_ground()?, b.as_ground()?),
            ValueType::Sum(a, b) => GroundType::sum(a.as_ground()?, b.as_ground()?),
            _ => return None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.as_ground().is_some()
    }
}

impl From<GroundType> for ValueType {
    fn from(g: GroundType) -> Self {
        g.to_value()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserType {
    pub carrier: ValueType,
    pub ops: EffSet,
    pub excs: EffSet,
}

impl UserType {
    pub fn pure(carrier: ValueType) -> Self {
        UserType { carrier, ops: EffSet::new(), excs: EffSet::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KernelType {
    pub carrier: ValueType,
    pub ops: EffSet,
    pub excs: EffSet,
    pub sigs: EffSet,
    pub state: GroundType,
}

impl KernelType {
    pub fn pure(carrier: ValueType, state: GroundType) -> Self {
        KernelType {
            carrier,
            ops: EffSet::new(),
            excs: EffSet::new(),
            sigs: EffSet::new(),
            state,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunnerType {
    pub handled: EffSet,
    pub external: EffSet,
    pub signals: EffSet,
    pub state: GroundType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSig {
    pub param: GroundType,
    pub result: GroundType,
    pub excs: EffSet,
}

/// Declared operations, exceptions and signals of a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EffectTables {
    pub ops: BTreeMap<Name, OpSig>,
    pub exceptions: EffSet,
    pub signals: EffSet,
}

impl EffectTables {
    pub fn op(&self, name: &str) -> Option<&OpSig> {
        self.ops.get(name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.ops.contains_key(name)
            || self.exceptions.contains(name)
            || self.signals.contains(name)
    }
}

/// Types with all effect information erased.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkelType {
    Base(BaseType),
    Unit,
    Empty,
    Prod(Box<SkelType>, Box<SkelType>),
    Sum(Box<SkelType>, Box<SkelType>),
    UserFun(Box<SkelType>, Box<SkelType>),
    KernelFun(Box<SkelType>, Box<SkelType>, GroundType),
    Runner(GroundType),
}

/// Skeleton of a computation type: `P!` or `P ↯ C`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkelComp {
    User(SkelType),
    Kernel(SkelType, GroundType),
}

impl ValueType {
    pub fn skeleton(&self) -> SkelType {
        match self {
            ValueType::Base(b) => SkelType::Base(*b),
            ValueType::Unit => SkelType::Unit,
            ValueType::Empty => SkelType::Empty,
            ValueType::Prod(a, b) => SkelType::Prod(Box::new(a.skeleton()), Box::new(b.skeleton())),
            ValueType::Sum(a, b) => SkelType::Sum(Box::new(a.skeleton()), Box::new(b.skeleton())),
            ValueType::UserFun(a, u) => {
                SkelType::UserFun(Box::new(a.skeleton()), Box::new(u.carrier.skeleton()))
            }
            ValueType::KernelFun(a, k) => SkelType::KernelFun(
                Box::new(a.skeleton()),
                Box::new(k.carrier.skeleton()),
                k.state.clone(),
            ),
            ValueType::Runner(r) => SkelType::Runner(r.state.clone()),
        }
    }
}

impl UserType {
    pub fn skeleton(&self) -> SkelComp {
        SkelComp::User(self.carrier.skeleton())
    }
}

impl KernelType {
    pub fn skeleton(&self) -> SkelComp {
        SkelComp::Kernel(self.carrier.skeleton(), self.state.clone())
    }
}

impl GroundType {
    pub fn skeleton(&self) -> SkelType {
        self.to_value().skeleton()
    }
}

// ---------------------------------------------------------------------------
// Printing. Output is valid surface syntax for types.

fn fmt_set(f: &mut fmt::Formatter<'_>, set: &EffSet) -> fmt::Result {
    write!(f, "{{")?;
    for (i, n) in set.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", display_name(n))?;
    }
    write!(f, "}}")
}

// Precedence levels: 0 = arrow, 1 = sum, 2 = product, 3 = atom.
fn fmt_value(f: &mut fmt::Formatter<'_>, t: &ValueType, prec: u8) -> fmt::Result {
    match t {
        ValueType::Base(b) => write!(f, "{}", b.keyword()),
        ValueType::Unit => write!(f, "unit"),
        ValueType::Empty => write!(f, "empty"),
        ValueType::Sum(a, b) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            fmt_value(f, a, 2)?;
            write!(f, " + ")?;
            fmt_value(f, b, 1)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        ValueType::Prod(a, b) => {
            if prec > 2 {
                write!(f, "(")?;
            }
            fmt_value(f, a, 3)?;
            write!(f, " * ")?;
            fmt_value(f, b, 2)?;
            if prec > 2 {
                write!(f, ")")?;
            }
            Ok(())
        }
        ValueType::UserFun(a, u) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            fmt_value(f, a, 1)?;
            write!(f, " -> ")?;
            fmt_value(f, &u.carrier, 1)?;
            write!(f, " ! (")?;
            fmt_set(f, &u.ops)?;
            write!(f, ", ")?;
            fmt_set(f, &u.excs)?;
            write!(f, ")")?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        ValueType::KernelFun(a, k) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            fmt_value(f, a, 1)?;
            write!(f, " -> ")?;
            fmt_value(f, &k.carrier, 1)?;
            write!(f, " !! (")?;
            fmt_set(f, &k.ops)?;
            write!(f, ", ")?;
            fmt_set(f, &k.excs)?;
            write!(f, ", ")?;
            fmt_set(f, &k.sigs)?;
            write!(f, ", {})", k.state)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        ValueType::Runner(r) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            write!(f, "runner ")?;
            fmt_set(f, &r.handled)?;
            write!(f, " => (")?;
            fmt_set(f, &r.external)?;
            write!(f, ", ")?;
            fmt_set(f, &r.signals)?;
            write!(f, ", {})", r.state)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_value(f, self, 0)
    }
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_value(f, &self.to_value(), 0)
    }
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_value(f, &self.carrier, 1)?;
        write!(f, " ! (")?;
        fmt_set(f, &self.ops)?;
        write!(f, ", ")?;
        fmt_set(f, &self.excs)?;
        write!(f, ")")
    }
}

impl fmt::Display for KernelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_value(f, &self.carrier, 1)?;
        write!(f, " !! (")?;
        fmt_set(f, &self.ops)?;
        write!(f, ", ")?;
        fmt_set(f, &self.excs)?;
        write!(f, ", ")?;
        fmt_set(f, &self.sigs)?;
        write!(f, ", {})", self.state)
    }
}

impl fmt::Display for OpSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~> {} ! ", self.param, self.result)?;
        fmt_set(f, &self.excs)
    }
}

impl fmt::Display for SkelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkelType::Base(b) => write!(f, "{}", b.keyword()),
            SkelType::Unit => write!(f, "unit"),
            SkelType::Empty => write!(f, "empty"),
            SkelType::Prod(a, b) => write!(f, "({a} * {b})"),
            SkelType::Sum(a, b) => write!(f, "({a} + {b})"),
            SkelType::UserFun(a, b) => write!(f, "({a} -> {b}!)"),
            SkelType::KernelFun(a, b, c) => write!(f, "({a} -> {b} !! {c})"),
            SkelType::Runner(c) => write!(f, "runner {c}"),
        }
    }
}

impl fmt::Display for SkelComp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkelComp::User(p) => write!(f, "{p}!"),
            SkelComp::Kernel(p, c) => write!(f, "{p} !! {c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> EffSet {
        xs.iter().map(|x| Name::from(*x)).collect()
    }

    #[test]
    fn skeleton_of_user_type_drops_effects() {
        let u = UserType { carrier: ValueType::int(), ops: set(&["op1"]), excs: set(&["e"]) };
        assert_eq!(u.skeleton(), SkelComp::User(SkelType::Base(BaseType::Int)));
    }

    #[test]
    fn skeleton_of_ground_is_itself() {
        let g = GroundType::prod(GroundType::int(), GroundType::sum(GroundType::Unit, GroundType::bool()));
        assert_eq!(g.to_value().skeleton(), g.skeleton());
        assert_eq!(g.to_value().as_ground(), Some(g));
    }

    #[test]
    fn skeleton_of_runner_keeps_state() {
        let r = ValueType::Runner(RunnerType {
            handled: set(&["op"]),
            external: set(&["op2"]),
            signals: set(&["s"]),
            state: GroundType::int(),
        });
        assert_eq!(r.skeleton(), SkelType::Runner(GroundType::int()));
    }

    #[test]
    fn display_is_surface_syntax() {
        let t = ValueType::user_fun(
            ValueType::prod(ValueType::int(), ValueType::sum(ValueType::Unit, ValueType::bool())),
            UserType { carrier: ValueType::str(), ops: set(&["a", "b"]), excs: set(&[]) },
        );
        assert_eq!(t.to_string(), "int * (unit + bool) -> str ! ({a, b}, {})");
    }
}
