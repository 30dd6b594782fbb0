//! Abstract syntax of values, user computations and kernel computations.
//!
//! Computations carry a source position for diagnostics. Positions never
//! take part in term equality.

use std::fmt;
use std::sync::Arc;

use crate::names::Name;
use crate::types::{EffectTables, GroundType, ValueType};

/// Source position. All positions compare equal, so syntax trees compare
/// by structure alone.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _other: &Pos) -> bool {
        true
    }
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
}

/// Built-in ground constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    Concat,
    Cond,
}

impl Prim {
    pub const ALL: [Prim; 7] =
        [Prim::Add, Prim::Sub, Prim::Mul, Prim::Eq, Prim::Lt, Prim::Concat, Prim::Cond];

    pub fn signature(self) -> (Vec<GroundType>, GroundType) {
        use GroundType as G;
        match self {
            Prim::Add | Prim::Sub | Prim::Mul => (vec![G::int(), G::int()], G::int()),
            Prim::Eq | Prim::Lt => (vec![G::int(), G::int()], G::bool()),
            Prim::Concat => (vec![G::str(), G::str()], G::str()),
            Prim::Cond => (vec![G::bool()], G::sum(G::Unit, G::Unit)),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Eq => "=",
            Prim::Lt => "<",
            Prim::Concat => "concat",
            Prim::Cond => "cond",
        }
    }

    pub fn is_infix(self) -> bool {
        !matches!(self, Prim::Concat | Prim::Cond)
    }

    pub fn from_word(w: &str) -> Option<Prim> {
        match w {
            "concat" => Some(Prim::Concat),
            "cond" => Some(Prim::Cond),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Var(Name),
    Lit(Literal),
    Prim(Prim, Vec<Value>),
    Unit,
    Pair(Box<Value>, Box<Value>),
    /// `inl[X, Y] V`
    Inl(Box<Value>, ValueType, ValueType),
    Inr(Box<Value>, ValueType, ValueType),
    Fun(Name, ValueType, Arc<UserComp>),
    /// `funK (x : X) @ C -> K`
    FunK(Name, ValueType, GroundType, Arc<KernelComp>),
    Runner(Arc<RunnerLit>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Lit(Literal::Int(n))
    }
    pub fn bool(b: bool) -> Value {
        Value::Lit(Literal::Bool(b))
    }
    pub fn str(s: &str) -> Value {
        Value::Lit(Literal::Str(Arc::from(s)))
    }
    pub fn var(n: &Name) -> Value {
        Value::Var(n.clone())
    }
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoopClause {
    pub op: Name,
    pub param: Name,
    pub body: Arc<KernelComp>,
}

/// `{ op x -> K, ... } @ C`
#[derive(Clone, Debug, PartialEq)]
pub struct RunnerLit {
    pub clauses: Vec<CoopClause>,
    pub state: GroundType,
}

impl RunnerLit {
    pub fn clause(&self, op: &str) -> Option<&CoopClause> {
        self.clauses.iter().find(|c| &*c.op == op)
    }
}

/// `{ return x -> B, raise e -> B, ... }` for try-with and user switches.
#[derive(Clone, Debug, PartialEq)]
pub struct Handler<B> {
    pub ret: (Name, Arc<B>),
    pub raises: Vec<(Name, Arc<B>)>,
}

impl<B> Handler<B> {
    pub fn raise_clause(&self, e: &str) -> Option<&Arc<B>> {
        self.raises.iter().find(|(n, _)| &**n == e).map(|(_, b)| b)
    }
}

/// `op(V, x. B, { e -> B, ... })`
#[derive(Clone, Debug, PartialEq)]
pub struct OpCall<B> {
    pub op: Name,
    pub arg: Value,
    pub var: Name,
    pub body: Arc<B>,
    pub handlers: Vec<(Name, Arc<B>)>,
}

impl<B> OpCall<B> {
    pub fn handler(&self, e: &str) -> Option<&Arc<B>> {
        self.handlers.iter().find(|(n, _)| &**n == e).map(|(_, b)| b)
    }
}

/// Finalisation clauses of `run` and kernel switches.
#[derive(Clone, Debug, PartialEq)]
pub struct Finally {
    /// `return x @ c -> N`
    pub ret: (Name, Name, Arc<UserComp>),
    /// `raise e @ c -> N`
    pub raises: Vec<(Name, Name, Arc<UserComp>)>,
    /// `kill s -> N`
    pub kills: Vec<(Name, Arc<UserComp>)>,
}

impl Finally {
    pub fn raise_clause(&self, e: &str) -> Option<(&Name, &Arc<UserComp>)> {
        self.raises.iter().find(|(n, _, _)| &**n == e).map(|(_, c, b)| (c, b))
    }
    pub fn kill_clause(&self, s: &str) -> Option<&Arc<UserComp>> {
        self.kills.iter().find(|(n, _)| &**n == s).map(|(_, b)| b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserComp {
    pub pos: Pos,
    pub kind: UserKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UserKind {
    Return(Value),
    App(Value, Value),
    Try(Arc<UserComp>, Handler<UserComp>),
    /// `let x = M in N`; expanded into `try` by the typechecker.
    Let(Name, Arc<UserComp>, Arc<UserComp>),
    MatchPair(Value, Name, Name, Arc<UserComp>),
    MatchEmpty(Value, ValueType),
    MatchSum(Value, Name, Arc<UserComp>, Name, Arc<UserComp>),
    Op(OpCall<UserComp>),
    Raise(Name, Option<ValueType>),
    Run(Value, Value, Arc<UserComp>, Finally),
    Kernel(Arc<KernelComp>, Value, Finally),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelComp {
    pub pos: Pos,
    pub kind: KernelKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    Return(Value),
    App(Value, Value),
    Try(Arc<KernelComp>, Handler<KernelComp>),
    Let(Name, Arc<KernelComp>, Arc<KernelComp>),
    MatchPair(Value, Name, Name, Arc<KernelComp>),
    MatchEmpty(Value, ValueType),
    MatchSum(Value, Name, Arc<KernelComp>, Name, Arc<KernelComp>),
    Op(OpCall<KernelComp>),
    Raise(Name, Option<ValueType>),
    Kill(Name, Option<ValueType>),
    Getenv(Name, Arc<KernelComp>),
    Setenv(Value, Arc<KernelComp>),
    User(Arc<UserComp>, Handler<KernelComp>),
}

impl UserComp {
    pub fn new(kind: UserKind) -> Self {
        UserComp { pos: Pos::default(), kind }
    }
    pub fn at(pos: Pos, kind: UserKind) -> Self {
        UserComp { pos, kind }
    }
    pub fn ret(v: Value) -> Self {
        UserComp::new(UserKind::Return(v))
    }
}

impl KernelComp {
    pub fn new(kind: KernelKind) -> Self {
        KernelComp { pos: Pos::default(), kind }
    }
    pub fn at(pos: Pos, kind: KernelKind) -> Self {
        KernelComp { pos, kind }
    }
    pub fn ret(v: Value) -> Self {
        KernelComp::new(KernelKind::Return(v))
    }
}

/// A parsed source file: declarations, top-level bindings, main computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub tables: EffectTables,
    pub bindings: Vec<(Name, UserComp)>,
    pub main: UserComp,
}

impl Program {
    /// The whole program as one computation: bindings become nested lets
    /// around the main computation.
    pub fn assembled(&self) -> UserComp {
        let mut comp = self.main.clone();
        for (x, m) in self.bindings.iter().rev() {
            let pos = m.pos;
            comp = UserComp::at(pos, UserKind::Let(x.clone(), Arc::new(m.clone()), Arc::new(comp)));
        }
        comp
    }
}

/// A term of any of the three sorts.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Value(Value),
    User(UserComp),
    Kernel(KernelComp),
}
