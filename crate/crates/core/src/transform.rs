//! Structure-rewriting operations: edge pruning, root splitting and cleanup.
//!
//! Every transform produces a fresh arena through [`rebuild`], which drops
//! dead and unreachable nodes, collapses single-child nodes and restores the
//! children-before-parents ordering.

use std::collections::HashMap;

use crate::circuit::{Circuit, Node, NodeId};
use crate::error::{Error, Result};

/// Sum-node input edges scheduled for removal, as `(parent, child ordinal)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneSet {
    pub edges: Vec<(NodeId, usize)>,
}

impl PruneSet {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }
}

/// Reference into the arena under construction, scaled by `factor`.
#[derive(Debug, Copy, Clone)]
struct Scaled {
    target: usize,
    factor: f64,
}

struct Rebuilder {
    out: Vec<Node>,
    leaves: HashMap<(usize, bool), usize>,
    folded: HashMap<(usize, u64), usize>,
}

impl Rebuilder {
    fn push(&mut self, node: Node) -> usize {
        self.out.push(node);
        self.out.len() - 1
    }

    /// A node id whose value equals `factor * target`.
    fn materialize(&mut self, s: Scaled) -> usize {
        if s.factor == 1.0 {
            return s.target;
        }
        if let Some(id) = self.folded.get(&(s.target, s.factor.to_bits())) {
            return *id;
        }
        let id = self.push(Node::Sum { children: vec![NodeId(s.target)], weights: vec![s.factor] });
        self.folded.insert((s.target, s.factor.to_bits()), id);
        id
    }
}

/// Rebuilds `circuit` with the leaves flagged in `killed` set to constant
/// zero and the edges flagged in `removed` (indexed by
/// [`Circuit::edge_index`]) deleted. Either slice may be empty.
///
/// Returns `None` when the root loses all support.
pub(crate) fn rebuild(circuit: &Circuit, killed: &[bool], removed: &[bool]) -> Option<Circuit> {
    let nodes = circuit.nodes();
    let mut rb = Rebuilder { out: Vec::new(), leaves: HashMap::new(), folded: HashMap::new() };
    let mut rep: Vec<Option<Scaled>> = Vec::with_capacity(nodes.len());

    for (i, node) in nodes.iter().enumerate() {
        let id = NodeId(i);
        let r = match node {
            Node::Leaf { var, value } => {
                if killed.get(i).copied().unwrap_or(false) {
                    None
                } else {
                    let target = match rb.leaves.get(&(*var, *value)) {
                        Some(t) => *t,
                        None => {
                            let t = rb.push(node.clone());
                            rb.leaves.insert((*var, *value), t);
                            t
                        }
                    };
                    Some(Scaled { target, factor: 1.0 })
                }
            }
            Node::Product { children } => {
                let reps: Option<Vec<Scaled>> = children.iter().map(|c| rep[c.0]).collect();
                match reps {
                    None => None,
                    Some(reps) if reps.len() == 1 => Some(reps[0]),
                    Some(reps) => {
                        let kids = reps.into_iter().map(|s| NodeId(rb.materialize(s))).collect();
                        Some(Scaled { target: rb.push(Node::Product { children: kids }), factor: 1.0 })
                    }
                }
            }
            Node::Sum { children, weights } => {
                let mut kids: Vec<NodeId> = Vec::with_capacity(children.len());
                let mut ws: Vec<f64> = Vec::with_capacity(children.len());
                for (k, (c, w)) in children.iter().zip(weights).enumerate() {
                    if removed.get(circuit.edge_index(id, k)).copied().unwrap_or(false) {
                        continue;
                    }
                    let Some(s) = rep[c.0] else { continue };
                    let w = w * s.factor;
                    match kids.iter().position(|k| k.0 == s.target) {
                        Some(pos) => ws[pos] += w,
                        None => {
                            kids.push(NodeId(s.target));
                            ws.push(w);
                        }
                    }
                }
                match kids.len() {
                    0 => None,
                    1 => Some(Scaled { target: kids[0].0, factor: ws[0] }),
                    _ => Some(Scaled {
                        target: rb.push(Node::Sum { children: kids, weights: ws }),
                        factor: 1.0,
                    }),
                }
            }
        };
        rep.push(r);
    }

    let root_rep = rep[circuit.root().0]?;
    let root = rb.materialize(root_rep);
    Some(compact(circuit.num_vars(), rb.out, root))
}

/// Drops nodes unreachable from `root`, preserving relative order.
fn compact(num_vars: usize, nodes: Vec<Node>, root: usize) -> Circuit {
    let mut reachable = vec![false; nodes.len()];
    reachable[root] = true;
    for i in (0..=root).rev() {
        if reachable[i] {
            for c in nodes[i].children() {
                reachable[c.0] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::with_capacity(nodes.len());
    for (i, node) in nodes.into_iter().enumerate().take(root + 1) {
        if !reachable[i] {
            continue;
        }
        remap[i] = kept.len();
        let node = match node {
            Node::Leaf { .. } => node,
            Node::Product { children } => Node::Product {
                children: children.into_iter().map(|c| NodeId(remap[c.0])).collect(),
            },
            Node::Sum { children, weights } => Node::Sum {
                children: children.into_iter().map(|c| NodeId(remap[c.0])).collect(),
                weights,
            },
        };
        kept.push(node);
    }
    let root = NodeId(remap[root]);
    Circuit::new(num_vars, kept, root).expect("rebuild preserves arena invariants")
}

/// Removes unreachable nodes, folds single-child chains and reindexes.
pub fn cleanup(circuit: &Circuit) -> Result<Circuit> {
    rebuild(circuit, &[], &[]).ok_or(Error::EmptyCircuit)
}

/// Deletes the given sum-node input edges and cascades dead nodes away.
pub fn prune_edges(circuit: &Circuit, prune: &PruneSet) -> Result<Circuit> {
    if prune.is_empty() {
        return Ok(circuit.clone());
    }
    let mut removed = vec![false; circuit.num_edges()];
    for &(parent, ordinal) in &prune.edges {
        let bad = |reason: &str| Error::InvalidNode { node: parent, reason: reason.to_string() };
        match circuit.nodes().get(parent.0) {
            Some(Node::Sum { children, .. }) if ordinal < children.len() => {}
            Some(Node::Sum { .. }) => return Err(bad("edge ordinal out of range")),
            Some(_) => return Err(bad("only sum-node edges can be pruned")),
            None => return Err(bad("node out of range")),
        }
        removed[circuit.edge_index(parent, ordinal)] = true;
    }
    rebuild(circuit, &[], &removed).ok_or(Error::OverPruned)
}

/// Replaces the root by `1*C<X=1> + 1*C<X=0>`.
///
/// Only nodes whose scope contains `var` are copied; everything else is
/// shared between the two branches.
pub fn split(circuit: &Circuit, var: usize) -> Result<Circuit> {
    let num_vars = circuit.num_vars();
    if var >= num_vars {
        return Err(Error::InvalidVariable { var, num_vars });
    }
    let old_root = circuit.root();
    let (_, mut nodes, _) = circuit.clone().into_parts();

    if !circuit.scope(old_root).contains(var) {
        let base = nodes.len();
        nodes.push(Node::Leaf { var, value: true });
        nodes.push(Node::Leaf { var, value: false });
        nodes.push(Node::Product { children: vec![NodeId(base), old_root] });
        nodes.push(Node::Product { children: vec![NodeId(base + 1), old_root] });
        nodes.push(Node::Sum {
            children: vec![NodeId(base + 2), NodeId(base + 3)],
            weights: vec![1.0, 1.0],
        });
        let c = Circuit::new(num_vars, nodes, NodeId(base + 4))?;
        return cleanup(&c);
    }

    let mut branch_roots = Vec::with_capacity(2);
    for value in [true, false] {
        let mut copy: Vec<Option<NodeId>> = Vec::with_capacity(old_root.0 + 1);
        for i in 0..=old_root.0 {
            let id = NodeId(i);
            let mapped = if !circuit.scope(id).contains(var) {
                Some(id)
            } else {
                match circuit.node(id) {
                    Node::Leaf { value: v, .. } => (*v == value).then_some(id),
                    Node::Product { children } => {
                        let kids: Option<Vec<NodeId>> = children.iter().map(|c| copy[c.0]).collect();
                        kids.map(|children| {
                            nodes.push(Node::Product { children });
                            NodeId(nodes.len() - 1)
                        })
                    }
                    Node::Sum { children, weights } => {
                        let (kids, ws): (Vec<NodeId>, Vec<f64>) = children
                            .iter()
                            .zip(weights)
                            .filter_map(|(c, w)| copy[c.0].map(|k| (k, *w)))
                            .unzip();
                        (!kids.is_empty()).then(|| {
                            nodes.push(Node::Sum { children: kids, weights: ws });
                            NodeId(nodes.len() - 1)
                        })
                    }
                }
            };
            copy.push(mapped);
        }
        if let Some(r) = copy[old_root.0] {
            branch_roots.push(r);
        }
    }
    if branch_roots.is_empty() {
        return Err(Error::EmptyCircuit);
    }
    let weights = vec![1.0; branch_roots.len()];
    nodes.push(Node::Sum { children: branch_roots, weights });
    let root = NodeId(nodes.len() - 1);
    cleanup(&Circuit::new(num_vars, nodes, root)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, Literal};
    use crate::fixtures::{f1, f2};

    fn joint(c: &Circuit) -> Vec<f64> {
        let n = c.num_vars();
        (0..1usize << n)
            .map(|bits| {
                let a: Vec<Option<bool>> = (0..n).map(|v| Some(bits >> v & 1 == 1)).collect();
                c.evaluate_dense(&a)
            })
            .collect()
    }

    #[test]
    fn cleanup_is_a_fixpoint_on_clean_circuits() {
        assert_eq!(cleanup(&f1()).unwrap(), f1());
        assert_eq!(cleanup(&f2()).unwrap(), f2());
    }

    #[test]
    fn cleanup_folds_single_child_chains() {
        let mut b = CircuitBuilder::new(1);
        let leaf = b.leaf(0, true);
        let inner = b.sum(vec![leaf], vec![0.5]);
        let outer = b.sum(vec![inner], vec![1.0]);
        let c = cleanup(&b.build(outer).unwrap()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.num_edges(), 1);
        match c.node(c.root()) {
            Node::Sum { weights, .. } => assert_eq!(weights, &vec![0.5]),
            other => panic!("unexpected root {other:?}"),
        }
    }

    #[test]
    fn killing_a_leaf_removes_its_branch() {
        let c = f1();
        let mut killed = vec![false; c.len()];
        killed[1] = true;
        let out = rebuild(&c, &killed, &[]).unwrap();
        assert!((out.evaluate_marginal(&[]).unwrap() - 0.6).abs() < 1e-12);
        assert!(out.len() < c.len());
    }

    #[test]
    fn prune_keeps_unaffected_marginals() {
        let c = f1();
        let pruned = prune_edges(&c, &PruneSet { edges: vec![(NodeId(8), 1)] }).unwrap();
        let x1 = [Literal::new(0, true)];
        assert!((pruned.evaluate_marginal(&x1).unwrap() - 0.6).abs() < 1e-12);
        assert!((pruned.evaluate_marginal(&[]).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(prune_edges(&c, &PruneSet::default()).unwrap(), c);
    }

    #[test]
    fn pruning_every_root_edge_kills_the_root() {
        let edges = vec![(NodeId(8), 0), (NodeId(8), 1)];
        assert!(matches!(prune_edges(&f1(), &PruneSet { edges }), Err(Error::OverPruned)));
    }

    #[test]
    fn product_edges_are_not_prunable() {
        let edges = vec![(NodeId(6), 0)];
        assert!(prune_edges(&f1(), &PruneSet { edges }).is_err());
    }

    #[test]
    fn split_f2_separates_masses() {
        let s = split(&f2(), 0).unwrap();
        let masses = s.masses();
        let Node::Sum { children, weights } = s.node(s.root()) else { panic!("root is not a sum") };
        let branch: Vec<f64> = children.iter().zip(weights).map(|(c, w)| w * masses[c.0]).collect();
        assert_eq!(branch.len(), 2);
        assert!((branch[0] - 0.55).abs() < 1e-12);
        assert!((branch[1] - 0.45).abs() < 1e-12);
    }

    #[test]
    fn split_preserves_joint() {
        let c = f1();
        for var in 0..2 {
            let s = split(&c, var).unwrap();
            for (a, b) in joint(&c).iter().zip(joint(&s)) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            assert!(s.len() <= 2 * c.len());
            assert!(s.check_smooth().is_ok() && s.check_decomposable().is_ok());
        }
        let twice = split(&split(&c, 0).unwrap(), 0).unwrap();
        for (a, b) in joint(&c).iter().zip(joint(&twice)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn split_on_variable_outside_scope() {
        let mut b = CircuitBuilder::new(2);
        let l = b.leaf(0, true);
        let nl = b.leaf(0, false);
        let root = b.sum(vec![l, nl], vec![0.3, 0.7]);
        let c = b.build(root).unwrap();
        let s = split(&c, 1).unwrap();
        assert!(s.scope(s.root()).contains(1));
        let full = Literal::new(1, true);
        assert!((s.evaluate_marginal(&[full]).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.evaluate_marginal(&[]).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(split(&c, 5), Err(Error::InvalidVariable { .. })));
    }
}
