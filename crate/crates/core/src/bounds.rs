//! Upper and lower bounds on the marginal MAP value.
//!
//! * [`output_bounds`]: feedforward max/sum pass bounding every node's best
//!   output over query assignments.
//! * [`edge_bounds`]: backward pass bounding, for every edge, the best root
//!   value among assignments whose activated subcircuit uses that edge.
//! * [`lower_bound`]: max-product-style pass plus state extraction; the
//!   marginal of the extracted state is a valid lower bound.
//!
//! All arithmetic is in the linear domain. The edge-bound update subtracts,
//! which has no direct log-space counterpart.

use crate::circuit::{Circuit, Literal, Node, NodeId};
use crate::support::QDetMap;

/// Scratch registers of one edge-bound pass.
#[derive(Debug, Clone)]
pub struct BoundRegisters {
    /// Output bound per node.
    pub m: Vec<f64>,
    /// Best root value among assignments whose subcircuit reaches the node.
    pub r_node: Vec<f64>,
    /// Edge bounds, indexed by [`Circuit::edge_index`].
    pub r_edge: Vec<f64>,
    /// Minimum root-to-node path weight: sum weights times the sibling
    /// bounds met at products.
    pub t: Vec<f64>,
}

impl BoundRegisters {
    pub fn edge(&self, circuit: &Circuit, parent: NodeId, ordinal: usize) -> f64 {
        self.r_edge[circuit.edge_index(parent, ordinal)]
    }

    pub fn root_bound(&self, circuit: &Circuit) -> f64 {
        self.m[circuit.root().0]
    }
}

/// Edge bound for the input `(n, c)` of a Q-deterministic sum: swap `n`'s
/// contribution `m_n` for `theta * m_c`, scaled by the path weight `t_n`.
#[inline]
pub fn deterministic_edge_bound(node_bound: f64, path_weight: f64, weight: f64, child_bound: f64, node_output: f64) -> f64 {
    node_bound + path_weight * (weight * child_bound - node_output)
}

pub fn output_bounds(circuit: &Circuit, qdet: &QDetMap) -> Vec<f64> {
    let mut m = vec![0.0; circuit.len()];
    for (i, node) in circuit.nodes().iter().enumerate() {
        m[i] = match node {
            Node::Leaf { .. } => 1.0,
            Node::Product { children } => children.iter().map(|c| m[c.0]).product(),
            Node::Sum { children, weights } if qdet.is_qdet(NodeId(i)) => children
                .iter()
                .zip(weights)
                .map(|(c, w)| w * m[c.0])
                .fold(0.0, f64::max),
            Node::Sum { children, weights } => children.iter().zip(weights).map(|(c, w)| w * m[c.0]).sum(),
        };
    }
    m
}

pub fn edge_bounds(circuit: &Circuit, qdet: &QDetMap) -> BoundRegisters {
    let m = output_bounds(circuit, qdet);
    edge_bounds_from(circuit, qdet, m)
}

/// Backward pass given precomputed output bounds `m`.
pub fn edge_bounds_from(circuit: &Circuit, qdet: &QDetMap, m: Vec<f64>) -> BoundRegisters {
    let len = circuit.len();
    let root = circuit.root().0;
    let mut r_node = vec![f64::NEG_INFINITY; len];
    let mut r_edge = vec![f64::NEG_INFINITY; circuit.num_edges()];
    let mut t = vec![f64::INFINITY; len];
    t[root] = 1.0;
    r_node[root] = m[root];

    for i in (0..=root).rev() {
        // t stays infinite for nodes the pass never reaches
        if !t[i].is_finite() {
            continue;
        }
        let id = NodeId(i);
        match circuit.node(id) {
            Node::Leaf { .. } => {}
            Node::Product { children } => {
                // A change at one child reaches the root scaled by the
                // siblings' bounds as well as by the sum weights above.
                for (k, c) in children.iter().enumerate() {
                    let e = circuit.edge_index(id, k);
                    r_edge[e] = r_node[i];
                    r_node[c.0] = r_node[c.0].max(r_edge[e]);
                    let siblings: f64 =
                        children.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, s)| m[s.0]).product();
                    t[c.0] = t[c.0].min(t[i] * siblings);
                }
            }
            Node::Sum { children, weights } => {
                let det = qdet.is_qdet(id);
                for (k, (c, w)) in children.iter().zip(weights).enumerate() {
                    let e = circuit.edge_index(id, k);
                    r_edge[e] = if det {
                        deterministic_edge_bound(r_node[i], t[i], *w, m[c.0], m[i])
                    } else {
                        r_node[i]
                    };
                    r_node[c.0] = r_node[c.0].max(r_edge[e]);
                    t[c.0] = t[c.0].min(w * t[i]);
                }
            }
        }
    }
    BoundRegisters { m, r_node, r_edge, t }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundResult {
    /// Assignment to every query variable, sorted by variable.
    pub state: Vec<Literal>,
    /// Marginal of `state` in the circuit the bound was computed on.
    pub value: f64,
    /// False when some query variable was missing from the extracted
    /// subcircuit and was filled with 0.
    pub complete: bool,
}

/// Sums that are Q-deterministic or have a Q-deterministic descendant.
pub fn maxed_sums(circuit: &Circuit, qdet: &QDetMap) -> Vec<bool> {
    let mut below = vec![false; circuit.len()];
    for (i, node) in circuit.nodes().iter().enumerate() {
        below[i] = qdet.is_qdet(NodeId(i)) || node.children().iter().any(|c| below[c.0]);
    }
    below
}

pub fn lower_bound(circuit: &Circuit, query: &[usize], qdet: &QDetMap) -> LowerBoundResult {
    let maxed = maxed_sums(circuit, qdet);
    let mut m = vec![0.0; circuit.len()];
    for (i, node) in circuit.nodes().iter().enumerate() {
        m[i] = match node {
            Node::Leaf { .. } => 1.0,
            Node::Product { children } => children.iter().map(|c| m[c.0]).product(),
            Node::Sum { children, weights } if maxed[i] => children
                .iter()
                .zip(weights)
                .map(|(c, w)| w * m[c.0])
                .fold(0.0, f64::max),
            Node::Sum { children, weights } => children.iter().zip(weights).map(|(c, w)| w * m[c.0]).sum(),
        };
    }

    let mut in_query = vec![false; circuit.num_vars()];
    for &q in query {
        in_query[q] = true;
    }
    let mut assignment: Vec<Option<bool>> = vec![None; circuit.num_vars()];
    let mut visited = vec![false; circuit.len()];
    let mut stack = vec![circuit.root()];
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut visited[n.0], true) {
            continue;
        }
        match circuit.node(n) {
            Node::Leaf { var, value } => {
                if in_query[*var] {
                    assignment[*var] = Some(*value);
                }
            }
            Node::Product { children } => stack.extend(children.iter().rev()),
            Node::Sum { children, weights } => {
                let mut best = 0;
                for k in 1..children.len() {
                    if weights[k] * m[children[k].0] > weights[best] * m[children[best].0] {
                        best = k;
                    }
                }
                stack.push(children[best]);
            }
        }
    }

    let complete = query.iter().all(|q| assignment[*q].is_some());
    let state: Vec<Literal> = query
        .iter()
        .map(|&q| Literal::new(q, assignment[q].unwrap_or(false)))
        .collect();
    for lit in &state {
        assignment[lit.var] = Some(lit.value);
    }
    let value = circuit.evaluate_dense(&assignment);
    LowerBoundResult { state, value, complete }
}
