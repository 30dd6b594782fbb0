//! An independent denotational model: terms denote finite computation
//! trees, runs are interpreted by the monad morphism a runner induces.

pub mod denote;
pub mod runner;
pub mod tree;

pub use denote::{denote_user, DEnv, DVal, Factoring, Oracle};
pub use runner::{all_trees, finalisation_apply, generic_tree, morphism, run_fused, FiniteRunner, GKTree, GTree};
pub use tree::{KPay, OResult, OracleError, Tree, UPay};
