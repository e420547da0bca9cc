//! Brute-force reference procedures: exact MMAP by enumeration, activated
//! subcircuits and edge-restricted MMAP.
//!
//! Query assignments are enumerated in lexicographic order over the sorted
//! query variables with value 0 first, so ties resolve to the
//! lexicographically smallest state.

use crate::circuit::{Circuit, Literal, Node, NodeId};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u128 = 1 << 20;

fn check_budget(query: &[usize], budget: u128) -> Result<u128> {
    let needed = 1u128.checked_shl(query.len() as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed)
}

/// Calls `f` with every query assignment in lexicographic order.
fn for_each_state(
    circuit: &Circuit,
    query: &[usize],
    evidence: &[Literal],
    budget: u128,
    mut f: impl FnMut(&[Option<bool>]),
) -> Result<()> {
    let mut query = query.to_vec();
    query.sort_unstable();
    query.dedup();
    if let Some(&var) = query.iter().find(|v| **v >= circuit.num_vars()) {
        return Err(Error::InvalidVariable { var, num_vars: circuit.num_vars() });
    }
    let total = check_budget(&query, budget)? as u64;
    let k = query.len();
    let mut assignment = circuit.dense_assignment(evidence)?;
    for bits in 0..total {
        for (j, &q) in query.iter().enumerate() {
            assignment[q] = Some(bits >> (k - 1 - j) & 1 == 1);
        }
        f(&assignment);
    }
    Ok(())
}

fn project(assignment: &[Option<bool>], query: &[usize]) -> Vec<Literal> {
    let mut state: Vec<Literal> = query.iter().map(|&q| Literal::new(q, assignment[q].unwrap_or(false))).collect();
    state.sort_unstable();
    state.dedup();
    state
}

/// Exact `max_q C(q)` and its lexicographically smallest argmax.
pub fn oracle_mmap(circuit: &Circuit, query: &[usize], evidence: &[Literal], budget: u128) -> Result<(f64, Vec<Literal>)> {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for_each_state(circuit, query, evidence, budget, |a| {
        let v = circuit.evaluate_dense(a);
        if v > best.0 {
            best = (v, project(a, query));
        }
    })?;
    Ok(best)
}

/// Nodes and edges activated when computing the marginal of one assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcircuitMask {
    pub active_nodes: Vec<bool>,
    /// Indexed by [`Circuit::edge_index`].
    pub active_edges: Vec<bool>,
}

impl SubcircuitMask {
    pub fn is_empty(&self) -> bool {
        !self.active_nodes.iter().any(|a| *a)
    }

    pub fn contains_edge(&self, circuit: &Circuit, parent: NodeId, ordinal: usize) -> bool {
        self.active_edges[circuit.edge_index(parent, ordinal)]
    }
}

fn mask_from_values(circuit: &Circuit, values: &[f64]) -> SubcircuitMask {
    let mut active_nodes = vec![false; circuit.len()];
    let mut active_edges = vec![false; circuit.num_edges()];
    let root = circuit.root().0;
    active_nodes[root] = values[root] > 0.0;
    for i in (0..=root).rev() {
        if !active_nodes[i] {
            continue;
        }
        for (k, c) in circuit.nodes()[i].children().iter().enumerate() {
            if values[c.0] > 0.0 {
                active_edges[circuit.edge_index(NodeId(i), k)] = true;
                active_nodes[c.0] = true;
            }
        }
    }
    SubcircuitMask { active_nodes, active_edges }
}

/// The subcircuit activated by `q`: nonzero nodes reachable from the root
/// through nonzero nodes.
pub fn oracle_subcircuit(circuit: &Circuit, q: &[Literal]) -> Result<SubcircuitMask> {
    let values = circuit.node_values(&circuit.dense_assignment(q)?);
    Ok(mask_from_values(circuit, &values))
}

/// For every edge, `max C(q)` over the query states whose subcircuit
/// activates it; `None` when no state does.
pub fn oracle_edge_mmap_all(
    circuit: &Circuit,
    query: &[usize],
    evidence: &[Literal],
    budget: u128,
) -> Result<Vec<Option<f64>>> {
    let mut best: Vec<Option<f64>> = vec![None; circuit.num_edges()];
    for_each_state(circuit, query, evidence, budget, |a| {
        let values = circuit.node_values(a);
        let root_value = values[circuit.root().0];
        let mask = mask_from_values(circuit, &values);
        for (e, active) in mask.active_edges.iter().enumerate() {
            if *active {
                let slot = &mut best[e];
                *slot = Some(slot.map_or(root_value, |b| b.max(root_value)));
            }
        }
    })?;
    Ok(best)
}

pub fn oracle_edge_mmap(
    circuit: &Circuit,
    query: &[usize],
    evidence: &[Literal],
    edge: (NodeId, usize),
    budget: u128,
) -> Result<Option<f64>> {
    let (parent, ordinal) = edge;
    if parent.0 >= circuit.len() || ordinal >= circuit.node(parent).children().len() {
        return Err(Error::InvalidNode { node: parent, reason: "no such edge".into() });
    }
    Ok(oracle_edge_mmap_all(circuit, query, evidence, budget)?[circuit.edge_index(parent, ordinal)])
}

/// Maximum over full assignments (MPE).
pub fn oracle_mpe(circuit: &Circuit, budget: u128) -> Result<(f64, Vec<Literal>)> {
    let all: Vec<usize> = (0..circuit.num_vars()).collect();
    oracle_mmap(circuit, &all, &[], budget)
}

/// Sum nodes with two children simultaneously nonzero under some query state.
pub fn oracle_nondeterministic_sums(circuit: &Circuit, query: &[usize], evidence: &[Literal], budget: u128) -> Result<Vec<bool>> {
    let mut overlap = vec![false; circuit.len()];
    for_each_state(circuit, query, evidence, budget, |a| {
        let values = circuit.node_values(a);
        for (i, node) in circuit.nodes().iter().enumerate() {
            if let Node::Sum { children, .. } = node {
                if children.iter().filter(|c| values[c.0] > 0.0).count() > 1 {
                    overlap[i] = true;
                }
            }
        }
    })?;
    Ok(overlap)
}
