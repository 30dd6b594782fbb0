//! Runners as data, the monad morphism a runner induces, and the
//! finalisation map applied to kernel trees.

use std::collections::BTreeMap;

use super::tree::{KPay, OResult, OracleError, Tree, UPay};
use crate::ground::{enumerate, GroundValue};
use crate::names::Name;
use crate::types::{GroundType, OpSig};

pub type GTree = Tree<UPay<GroundValue>>;
pub type GKTree = Tree<KPay<GroundValue>>;

/// Co-operation lookup: operation, argument and state to a kernel tree
/// over the external signature.
pub type CoopFn<'a> = dyn FnMut(&Name, &GroundValue, &GroundValue) -> OResult<GKTree> + 'a;

/// The homomorphism induced by a runner, applied to `t` at initial state
/// `c`. Leaves become state-passing returns; each node is replaced by its
/// co-operation with the continuation extended over it.
pub fn morphism<V: Clone>(coop: &mut CoopFn<'_>, t: &Tree<UPay<V>>, c: &GroundValue) -> OResult<Tree<KPay<V>>> {
    match t {
        Tree::Leaf(UPay::Val(x)) => Ok(Tree::Leaf(KPay::Val(x.clone(), c.clone()))),
        Tree::Leaf(UPay::Exc(e)) => Ok(Tree::Leaf(KPay::Exc(e.clone(), c.clone()))),
        Tree::Node { op, arg, children, excs } => {
            let k = coop(op, arg, c)?;
            k.bind(&mut |p| match p {
                KPay::Val(b, c2) => {
                    let child = children
                        .get(&b)
                        .ok_or_else(|| OracleError::Fragment(format!("result {b} of `{op}` is not enumerated")))?;
                    morphism(coop, child, &c2)
                }
                KPay::Exc(e, c2) => {
                    let child = excs
                        .get(&e)
                        .ok_or_else(|| OracleError::Bottom(format!("co-operation for `{op}` raised `{e}`")))?;
                    morphism(coop, child, &c2)
                }
                KPay::Sig(s) => Ok(Tree::Leaf(KPay::Sig(s))),
            })
        }
    }
}

/// Running `t` at state `c` and finalising with `phi`, in one traversal
/// that never materialises the intermediate kernel tree.
pub fn run_fused<V: Clone, W>(
    coop: &mut CoopFn<'_>,
    phi: &mut dyn FnMut(KPay<V>) -> OResult<Tree<W>>,
    t: &Tree<UPay<V>>,
    c: &GroundValue,
) -> OResult<Tree<W>> {
    match t {
        Tree::Leaf(UPay::Val(x)) => phi(KPay::Val(x.clone(), c.clone())),
        Tree::Leaf(UPay::Exc(e)) => phi(KPay::Exc(e.clone(), c.clone())),
        Tree::Node { op, arg, children, excs } => {
            let k = coop(op, arg, c)?;
            k.bind(&mut |p| match p {
                KPay::Val(b, c2) => {
                    let child = children
                        .get(&b)
                        .ok_or_else(|| OracleError::Fragment(format!("result {b} of `{op}` is not enumerated")))?;
                    run_fused(coop, phi, child, &c2)
                }
                KPay::Exc(e, c2) => {
                    let child = excs
                        .get(&e)
                        .ok_or_else(|| OracleError::Bottom(format!("co-operation for `{op}` raised `{e}`")))?;
                    run_fused(coop, phi, child, &c2)
                }
                KPay::Sig(s) => phi(KPay::Sig(s)),
            })
        }
    }
}

/// Extends the finalisation map `phi` over a kernel tree.
pub fn finalisation_apply<V, W>(
    phi: &mut dyn FnMut(KPay<V>) -> OResult<Tree<W>>,
    t: Tree<KPay<V>>,
) -> OResult<Tree<W>> {
    t.bind(phi)
}

/// `op(a, b. return b, {e -> raise e})`.
pub fn generic_tree(op: &Name, a: &GroundValue, sig: &OpSig, int_bound: i64) -> OResult<GTree> {
    let results = enumerate(&sig.result, int_bound)
        .ok_or_else(|| OracleError::Fragment(format!("results of `{op}` are not enumerable")))?;
    Ok(Tree::Node {
        op: op.clone(),
        arg: a.clone(),
        children: results.into_iter().map(|b| (b.clone(), Tree::Leaf(UPay::Val(b)))).collect(),
        excs: sig.excs.iter().map(|e| (e.clone(), Tree::Leaf(UPay::Exc(e.clone())))).collect(),
    })
}

/// A runner given by a finite table of co-operations.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteRunner {
    pub state: GroundType,
    pub ops: BTreeMap<Name, OpSig>,
    pub coops: BTreeMap<(Name, GroundValue, GroundValue), GKTree>,
}

impl FiniteRunner {
    pub fn coop(&self, op: &Name, a: &GroundValue, c: &GroundValue) -> OResult<GKTree> {
        self.coops
            .get(&(op.clone(), a.clone(), c.clone()))
            .cloned()
            .ok_or_else(|| OracleError::Bottom(format!("runner does not cover `{op}` at {a}, {c}")))
    }

    pub fn morphism(&self, t: &GTree, c: &GroundValue) -> OResult<GKTree> {
        morphism(&mut |op, a, c| self.coop(op, a, c), t, c)
    }

    /// Recovers a runner from a monad morphism by applying it to generic
    /// operation trees.
    pub fn from_morphism(
        theta: &dyn Fn(&GTree, &GroundValue) -> OResult<GKTree>,
        ops: &BTreeMap<Name, OpSig>,
        state: &GroundType,
        int_bound: i64,
    ) -> OResult<FiniteRunner> {
        let states = enumerate(state, int_bound).ok_or_else(|| OracleError::Fragment("state".into()))?;
        let mut coops = BTreeMap::new();
        for (op, sig) in ops {
            let args = enumerate(&sig.param, int_bound).ok_or_else(|| OracleError::Fragment("params".into()))?;
            for a in &args {
                let g = generic_tree(op, a, sig, int_bound)?;
                for c in &states {
                    coops.insert((op.clone(), a.clone(), c.clone()), theta(&g, c)?);
                }
            }
        }
        Ok(FiniteRunner { state: state.clone(), ops: ops.clone(), coops })
    }
}

/// Every tree of depth at most `depth` over `ops`, with leaves drawn from
/// `leaves`.
pub fn all_trees(ops: &BTreeMap<Name, OpSig>, leaves: &[UPay<GroundValue>], depth: usize, int_bound: i64) -> Vec<GTree> {
    let mut out: Vec<GTree> = leaves.iter().cloned().map(Tree::Leaf).collect();
    if depth == 0 {
        return out;
    }
    let smaller = all_trees(ops, leaves, depth - 1, int_bound);
    for (op, sig) in ops {
        let (Some(args), Some(results)) = (enumerate(&sig.param, int_bound), enumerate(&sig.result, int_bound)) else {
            continue;
        };
        let slots: Vec<Option<&GroundValue>> =
            results.iter().map(Some).chain(sig.excs.iter().map(|_| None)).collect();
        for a in &args {
            // Cartesian product over the subtree slots.
            let mut combos: Vec<Vec<&GTree>> = vec![Vec::new()];
            for _ in &slots {
                let mut next = Vec::with_capacity(combos.len() * smaller.len());
                for c in &combos {
                    for t in &smaller {
                        let mut c2 = c.clone();
                        c2.push(t);
                        next.push(c2);
                    }
                }
                combos = next;
            }
            for combo in combos {
                let mut children = BTreeMap::new();
                let mut excs = BTreeMap::new();
                let mut ei = sig.excs.iter();
                for (slot, t) in slots.iter().zip(combo) {
                    match slot {
                        Some(b) => {
                            children.insert((*b).clone(), t.clone());
                        }
                        None => {
                            excs.insert(ei.next().expect("exception slot").clone(), t.clone());
                        }
                    }
                }
                out.push(Tree::Node { op: op.clone(), arg: a.clone(), children, excs });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::name;

    fn flip_sig() -> BTreeMap<Name, OpSig> {
        let mut ops = BTreeMap::new();
        ops.insert(name("flip"), OpSig { param: GroundType::Unit, result: GroundType::bool(), excs: Default::default() });
        ops
    }

    #[test]
    fn tree_counts() {
        let leaves = [UPay::Val(GroundValue::Int(0)), UPay::Exc(name("oops"))];
        let counts: Vec<usize> = (0..4).map(|d| all_trees(&flip_sig(), &leaves, d, 3).len()).collect();
        assert_eq!(counts, vec![2, 6, 38, 1446]);
    }

    #[test]
    fn morphism_of_return() {
        let r = FiniteRunner { state: GroundType::int(), ops: flip_sig(), coops: BTreeMap::new() };
        let t = Tree::Leaf(UPay::Val(GroundValue::Unit));
        assert_eq!(r.morphism(&t, &GroundValue::Int(2)).unwrap(), Tree::Leaf(KPay::Val(GroundValue::Unit, GroundValue::Int(2))));
    }
}
