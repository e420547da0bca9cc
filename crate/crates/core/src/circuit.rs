//! Circuit data model.
//!
//! A circuit is an arena of nodes stored in topological order: every child
//! index is strictly smaller than its parent's index, so a forward scan over
//! the arena is a feedforward pass and a reverse scan is a backward pass.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single variable fixed to a binary value.
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub value: bool,
}

impl Literal {
    pub fn new(var: usize, value: bool) -> Self {
        Literal { var, value }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.var, u8::from(self.value))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Indicator `[X_var = value]`.
    Leaf { var: usize, value: bool },
    Product { children: Vec<NodeId> },
    Sum { children: Vec<NodeId>, weights: Vec<f64> },
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::Leaf { .. } => &[],
            Node::Product { children } | Node::Sum { children, .. } => children,
        }
    }

    pub fn is_sum(&self) -> bool {
        matches!(self, Node::Sum { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    nodes: Vec<Node>,
    root: NodeId,
    num_vars: usize,
    scopes: Vec<FixedBitSet>,
    edge_offsets: Vec<usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.root == other.root && self.nodes == other.nodes
    }
}

impl Circuit {
    /// Validates the arena and caches scopes and edge offsets.
    pub fn new(num_vars: usize, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if root.0 >= nodes.len() {
            return Err(Error::InvalidNode { node: root, reason: "root out of range".into() });
        }
        let mut scopes: Vec<FixedBitSet> = Vec::with_capacity(nodes.len());
        let mut edge_offsets = Vec::with_capacity(nodes.len() + 1);
        let mut edges = 0;
        for (i, node) in nodes.iter().enumerate() {
            let id = NodeId(i);
            let bad = |reason: &str| Error::InvalidNode { node: id, reason: reason.to_string() };
            edge_offsets.push(edges);
            let mut scope = FixedBitSet::with_capacity(num_vars);
            match node {
                Node::Leaf { var, .. } => {
                    if *var >= num_vars {
                        return Err(Error::InvalidVariable { var: *var, num_vars });
                    }
                    scope.insert(*var);
                }
                Node::Product { children } | Node::Sum { children, .. } => {
                    if children.is_empty() {
                        return Err(bad("internal node without children"));
                    }
                    for c in children {
                        if c.0 >= i {
                            return Err(bad("child does not precede its parent"));
                        }
                        scope.union_with(&scopes[c.0]);
                    }
                    edges += children.len();
                }
            }
            if let Node::Sum { children, weights } = node {
                if weights.len() != children.len() {
                    return Err(bad("weight count differs from child count"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(bad("sum weights must be finite and positive"));
                }
            }
            scopes.push(scope);
        }
        edge_offsets.push(edges);
        Ok(Circuit { nodes, root, num_vars, scopes, edge_offsets })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        *self.edge_offsets.last().unwrap_or(&0)
    }

    pub fn scope(&self, id: NodeId) -> &FixedBitSet {
        &self.scopes[id.0]
    }

    /// Dense index of the edge from `parent` to its `ordinal`-th child.
    #[inline]
    pub fn edge_index(&self, parent: NodeId, ordinal: usize) -> usize {
        self.edge_offsets[parent.0] + ordinal
    }

    /// Iterates `(parent, ordinal, child)` over every edge in arena order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, usize, NodeId)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(i, n)| {
            n.children().iter().enumerate().map(move |(k, c)| (NodeId(i), k, *c))
        })
    }

    /// Expands a literal list into a per-variable assignment.
    pub fn dense_assignment(&self, literals: &[Literal]) -> Result<Vec<Option<bool>>> {
        let mut dense = vec![None; self.num_vars];
        for lit in literals {
            if lit.var >= self.num_vars {
                return Err(Error::InvalidVariable { var: lit.var, num_vars: self.num_vars });
            }
            dense[lit.var] = Some(lit.value);
        }
        Ok(dense)
    }

    /// Marginal value `C(partial)`; unassigned variables are summed out.
    pub fn evaluate_marginal(&self, partial: &[Literal]) -> Result<f64> {
        Ok(self.evaluate_dense(&self.dense_assignment(partial)?))
    }

    pub fn evaluate_dense(&self, assignment: &[Option<bool>]) -> f64 {
        self.node_values(assignment)[self.root.0]
    }

    /// Marginal value of every node under `assignment`.
    pub fn node_values(&self, assignment: &[Option<bool>]) -> Vec<f64> {
        let mut values = vec![0.0; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            values[i] = match node {
                Node::Leaf { var, value } => match assignment[*var] {
                    Some(v) if v != *value => 0.0,
                    _ => 1.0,
                },
                Node::Product { children } => children.iter().map(|c| values[c.0]).product(),
                Node::Sum { children, weights } => {
                    children.iter().zip(weights).map(|(c, w)| w * values[c.0]).sum()
                }
            };
        }
        values
    }

    /// Total (unnormalised) mass below every node.
    pub fn masses(&self) -> Vec<f64> {
        self.node_values(&vec![None; self.num_vars])
    }

    /// `Err` carries the first sum node whose children disagree on scope.
    pub fn check_smooth(&self) -> std::result::Result<(), NodeId> {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Sum { children, .. } = node {
                let first = &self.scopes[children[0].0];
                if children[1..].iter().any(|c| &self.scopes[c.0] != first) {
                    return Err(NodeId(i));
                }
            }
        }
        Ok(())
    }

    /// `Err` carries the first product node whose children share a variable.
    pub fn check_decomposable(&self) -> std::result::Result<(), NodeId> {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Product { children } = node {
                let mut seen = FixedBitSet::with_capacity(self.num_vars);
                for c in children {
                    let scope = &self.scopes[c.0];
                    if !seen.is_disjoint(scope) {
                        return Err(NodeId(i));
                    }
                    seen.union_with(scope);
                }
            }
        }
        Ok(())
    }

    /// Incorporates evidence by zeroing inconsistent leaves and cleaning up.
    pub fn condition(&self, evidence: &[Literal]) -> Result<Circuit> {
        let dense = self.dense_assignment(evidence)?;
        let killed: Vec<bool> = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { var, value } => dense[*var].is_some_and(|v| v != *value),
                _ => false,
            })
            .collect();
        crate::transform::rebuild(self, &killed, &[])
            .ok_or(Error::InfeasibleEvidence)
    }

    pub fn into_parts(self) -> (usize, Vec<Node>, NodeId) {
        (self.num_vars, self.nodes, self.root)
    }
}

/// Appends nodes in topological order. Leaves are shared per literal.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    num_vars: usize,
    nodes: Vec<Node>,
    leaves: HashMap<(usize, bool), NodeId>,
}

impl CircuitBuilder {
    pub fn new(num_vars: usize) -> Self {
        CircuitBuilder { num_vars, ..Default::default() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, var: usize, value: bool) -> NodeId {
        if let Some(id) = self.leaves.get(&(var, value)) {
            return *id;
        }
        let id = self.push(Node::Leaf { var, value });
        self.leaves.insert((var, value), id);
        id
    }

    pub fn product(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(Node::Product { children })
    }

    pub fn sum(&mut self, children: Vec<NodeId>, weights: Vec<f64>) -> NodeId {
        self.push(Node::Sum { children, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn build(self, root: NodeId) -> Result<Circuit> {
        Circuit::new(self.num_vars, self.nodes, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::f1;

    fn lit(var: usize, value: u8) -> Literal {
        Literal::new(var, value == 1)
    }

    #[test]
    fn f1_marginals() {
        let c = f1();
        assert!((c.evaluate_marginal(&[lit(0, 1), lit(1, 1)]).unwrap() - 0.42).abs() < 1e-12);
        assert!((c.evaluate_marginal(&[lit(0, 1)]).unwrap() - 0.6).abs() < 1e-12);
        assert!((c.evaluate_marginal(&[]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_variable_is_rejected() {
        let err = f1().evaluate_marginal(&[lit(2, 1)]).unwrap_err();
        assert!(matches!(err, Error::InvalidVariable { var: 2, num_vars: 2 }));
    }

    #[test]
    fn conditioning_matches_joint_marginals() {
        let c = f1();
        let on_x2 = c.condition(&[lit(1, 1)]).unwrap();
        assert!((on_x2.evaluate_marginal(&[lit(0, 1)]).unwrap() - 0.42).abs() < 1e-12);
        let on_x1 = c.condition(&[lit(0, 1)]).unwrap();
        assert!((on_x1.evaluate_marginal(&[]).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(c.condition(&[]).unwrap(), c);
    }

    #[test]
    fn contradictory_evidence_is_infeasible() {
        let mut b = CircuitBuilder::new(2);
        let a = b.leaf(0, true);
        let x = b.leaf(1, true);
        let root = b.product(vec![a, x]);
        let c = b.build(root).unwrap();
        assert!(matches!(c.condition(&[lit(0, 0)]), Err(Error::InfeasibleEvidence)));
    }

    #[test]
    fn smoothness_check() {
        assert!(f1().check_smooth().is_ok());
        let mut b = CircuitBuilder::new(2);
        let x1 = b.leaf(0, true);
        let nx1 = b.leaf(0, false);
        let nx2 = b.leaf(1, false);
        let p = b.product(vec![nx1, nx2]);
        let s = b.sum(vec![x1, p], vec![0.5, 0.5]);
        assert_eq!(b.build(s).unwrap().check_smooth(), Err(s));

        let mut b = CircuitBuilder::new(1);
        let l = b.leaf(0, true);
        let single = b.build(l).unwrap();
        assert!(single.check_smooth().is_ok());
        assert!(single.check_decomposable().is_ok());
    }

    #[test]
    fn decomposability_check() {
        assert!(f1().check_decomposable().is_ok());
        let mut b = CircuitBuilder::new(1);
        let x1 = b.leaf(0, true);
        let nx1 = b.leaf(0, false);
        let s = b.sum(vec![x1, nx1], vec![0.5, 0.5]);
        let p = b.product(vec![x1, s]);
        assert_eq!(b.build(p).unwrap().check_decomposable(), Err(p));
    }

    #[test]
    fn arena_validation() {
        let nodes = vec![Node::Product { children: vec![NodeId(0)] }];
        assert!(Circuit::new(1, nodes, NodeId(0)).is_err());
        let nodes = vec![
            Node::Leaf { var: 0, value: true },
            Node::Sum { children: vec![NodeId(0)], weights: vec![0.0] },
        ];
        assert!(Circuit::new(1, nodes, NodeId(1)).is_err());
    }
}
