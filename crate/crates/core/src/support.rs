//! Conservative support summaries and Q-determinism detection.
//!
//! For every node we over-approximate, per variable, which values the node's
//! support can take. A sum node is reported Q-deterministic only when every
//! pair of its children is separated by some query variable forced to
//! opposite values. False negatives are possible; false positives are not.

use fixedbitset::FixedBitSet;

use crate::circuit::{Circuit, Node, NodeId};

/// Per-node possible values: `can_be[v]` has bit `x` set when the node's
/// support may contain an assignment with `X_x = v`.
#[derive(Debug, Clone)]
pub struct SupportSummary {
    can_be: [Vec<FixedBitSet>; 2],
}

impl SupportSummary {
    pub fn compute(circuit: &Circuit) -> Self {
        let n = circuit.num_vars();
        let mut zero: Vec<FixedBitSet> = Vec::with_capacity(circuit.len());
        let mut one: Vec<FixedBitSet> = Vec::with_capacity(circuit.len());
        for node in circuit.nodes() {
            let mut z = FixedBitSet::with_capacity(n);
            let mut o = FixedBitSet::with_capacity(n);
            match node {
                Node::Leaf { var, value } => {
                    if *value {
                        o.insert(*var);
                    } else {
                        z.insert(*var);
                    }
                }
                Node::Product { children } | Node::Sum { children, .. } => {
                    for c in children {
                        z.union_with(&zero[c.0]);
                        o.union_with(&one[c.0]);
                    }
                }
            }
            zero.push(z);
            one.push(o);
        }
        SupportSummary { can_be: [zero, one] }
    }

    /// Values variable `var` may take in the support of `node`, as
    /// `(can_be_0, can_be_1)`. Both false when `var` is outside the scope.
    pub fn possible_values(&self, node: NodeId, var: usize) -> (bool, bool) {
        (self.can_be[0][node.0].contains(var), self.can_be[1][node.0].contains(var))
    }

    /// Variables forced to `value` throughout the support of `node`.
    fn forced(&self, node: NodeId, value: bool) -> FixedBitSet {
        let (yes, no) = if value { (1, 0) } else { (0, 1) };
        let mut f = self.can_be[yes][node.0].clone();
        f.difference_with(&self.can_be[no][node.0]);
        f
    }
}

/// Per-sum-node Q-determinism flags with the deciding variable used for
/// pruned-edge attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QDetMap {
    qdet: Vec<bool>,
    deciding: Vec<Option<usize>>,
}

impl QDetMap {
    #[inline]
    pub fn is_qdet(&self, node: NodeId) -> bool {
        self.qdet[node.0]
    }

    /// Lowest query variable separating at least one child pair.
    pub fn deciding_var(&self, node: NodeId) -> Option<usize> {
        self.deciding[node.0]
    }

    pub fn count(&self) -> usize {
        self.qdet.iter().filter(|q| **q).count()
    }

    /// True when every sum whose scope meets `query` is marked.
    pub fn covers_query(&self, circuit: &Circuit, query: &[usize]) -> bool {
        circuit.nodes().iter().enumerate().all(|(i, node)| {
            !matches!(node, Node::Sum { children, .. } if children.len() > 1)
                || self.qdet[i]
                || !query.iter().any(|q| circuit.scope(NodeId(i)).contains(*q))
        })
    }
}

pub fn query_mask(num_vars: usize, query: &[usize]) -> FixedBitSet {
    let mut mask = FixedBitSet::with_capacity(num_vars);
    for &q in query.iter().filter(|q| **q < num_vars) {
        mask.insert(q);
    }
    mask
}

pub fn detect_q_deterministic(circuit: &Circuit, query: &[usize]) -> QDetMap {
    let summary = SupportSummary::compute(circuit);
    detect_with_summary(circuit, &summary, &query_mask(circuit.num_vars(), query))
}

pub fn detect_with_summary(circuit: &Circuit, summary: &SupportSummary, query: &FixedBitSet) -> QDetMap {
    let mut qdet = vec![false; circuit.len()];
    let mut deciding = vec![None; circuit.len()];
    for (i, node) in circuit.nodes().iter().enumerate() {
        let Node::Sum { children, .. } = node else { continue };
        if children.len() < 2 {
            continue;
        }
        let forced: Vec<(FixedBitSet, FixedBitSet)> = children
            .iter()
            .map(|c| {
                let mut f0 = summary.forced(*c, false);
                let mut f1 = summary.forced(*c, true);
                f0.intersect_with(query);
                f1.intersect_with(query);
                (f0, f1)
            })
            .collect();
        let mut separators = FixedBitSet::with_capacity(circuit.num_vars());
        let mut all_separated = true;
        'pairs: for a in 0..forced.len() {
            for b in a + 1..forced.len() {
                let mut sep = forced[a].0.intersection(&forced[b].1).collect::<FixedBitSet>();
                sep.extend(forced[a].1.intersection(&forced[b].0));
                if sep.is_clear() {
                    all_separated = false;
                    break 'pairs;
                }
                separators.union_with(&sep);
            }
        }
        if all_separated {
            qdet[i] = true;
            deciding[i] = separators.minimum();
        }
    }
    QDetMap { qdet, deciding }
}
