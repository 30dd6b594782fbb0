//! The core of the coop interpreter: syntax, parser, typechecker,
//! evaluator, containers and a denotational oracle for a calculus of
//! runners of algebraic effects.

pub mod diag;
pub mod equations;
pub mod eval;
pub mod gen;
pub mod ground;
pub mod names;
pub mod oracle;
pub mod parse;
pub mod check;
pub mod containers;
pub mod corpus;
pub mod criteria;
pub mod subst;
pub mod syntax;
pub mod types;
