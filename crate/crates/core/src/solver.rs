//! Iterative prune-and-split marginal MAP solver.
//!
//! Each iteration computes edge bounds, prunes every sum edge whose bound
//! falls below the incumbent lower bound, splits the root on one remaining
//! query variable and refreshes both bounds. After splitting on every query
//! variable the circuit is deterministic on the query set and the upper bound
//! is exact, so at most `|Q|` iterations run.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use web_time::Instant;

use crate::bounds::{edge_bounds, lower_bound, output_bounds};
use crate::circuit::{Circuit, Literal, Node, NodeId};
use crate::error::{Error, Result};
use crate::instance::MmapInstance;
use crate::support::{detect_q_deterministic, QDetMap};
use crate::transform::{prune_edges, split, PruneSet};

/// Relative slack under the lower bound below which an edge is pruned.
///
/// Edges whose bound equals the lower bound are kept: they may belong to the
/// subcircuit of the very state that produced the lower bound.
pub const PRUNE_MARGIN: f64 = 1e-9;

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Heuristic {
    /// Split on the variable with the most pruned deterministic edges.
    Pruned,
    /// Split on the variable whose conditioned upper bounds look best.
    Ub,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pruned" => Ok(Heuristic::Pruned),
            "ub" => Ok(Heuristic::Ub),
            other => Err(format!("unknown heuristic '{other}', expected pruned|ub")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Pruned => "pruned",
            Heuristic::Ub => "ub",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    pub timeout: Duration,
    /// Relative gap at which `u <= l * (1 + tolerance)` counts as closed.
    pub tolerance: f64,
    /// Keep one record per iteration in the report.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { heuristic: Heuristic::Ub, timeout: Duration::from_secs(3600), tolerance: 1e-9, trace: true }
    }
}

impl SolverConfig {
    pub fn with_heuristic(heuristic: Heuristic) -> Self {
        SolverConfig { heuristic, ..Default::default() }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Status {
    Solved,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Solved => "solved",
            Status::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub upper: f64,
    pub lower: f64,
    pub nodes: usize,
    pub edges: usize,
    pub pruned: usize,
    pub split: Option<usize>,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} u={} l={} size={}/{} pruned={} split=",
            self.iter, self.upper, self.lower, self.nodes, self.edges, self.pruned
        )?;
        match self.split {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Marginal of `state` in the evidence-conditioned input circuit.
    pub value: f64,
    pub upper: f64,
    pub state: Vec<Literal>,
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub final_nodes: usize,
    pub final_edges: usize,
    pub elapsed: Duration,
}

impl SolverReport {
    /// Newline-terminated trace, one record per line.
    pub fn trace(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Argmax of the per-variable pruned-edge counts; ties go to the lowest
/// variable.
pub fn pick_var_pruned(candidates: &[usize], counts: &[u64]) -> usize {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut best = sorted[0];
    for &v in &sorted[1..] {
        if counts.get(v).copied().unwrap_or(0) > counts.get(best).copied().unwrap_or(0) {
            best = v;
        }
    }
    best
}

/// Root upper bound after conditioning on `var = value`; zero when that
/// value is impossible.
pub fn conditioned_bound(circuit: &Circuit, query: &[usize], var: usize, value: bool) -> Result<f64> {
    match circuit.condition(&[Literal::new(var, value)]) {
        Ok(c) => {
            let qdet = detect_q_deterministic(&c, query);
            Ok(output_bounds(&c, &qdet)[c.root().0])
        }
        Err(Error::InfeasibleEvidence) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Selection rule over `(variable, B_{X=0}, B_{X=1})` triples.
pub fn pick_from_bounds(bounds: &[(usize, f64, f64)], lower: f64) -> usize {
    let mut sorted = bounds.to_vec();
    sorted.sort_by_key(|b| b.0);
    let argmin = |items: &mut dyn Iterator<Item = (usize, f64)>| {
        items.fold(None, |best: Option<(usize, f64)>, (v, s)| match best {
            Some((_, bs)) if bs <= s => best,
            _ => Some((v, s)),
        })
    };
    let below = argmin(&mut sorted.iter().filter(|(_, b0, b1)| b0.min(*b1) < lower).map(|(v, b0, b1)| (*v, b0.max(*b1))));
    match below {
        Some((v, _)) => v,
        None => argmin(&mut sorted.iter().map(|(v, b0, b1)| (*v, b0 + b1))).map(|(v, _)| v).expect("candidates nonempty"),
    }
}

pub fn pick_var_ub(circuit: &Circuit, query: &[usize], candidates: &[usize], lower: f64) -> Result<usize> {
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    let bounds = candidates
        .iter()
        .map(|&v| Ok((v, conditioned_bound(circuit, query, v, false)?, conditioned_bound(circuit, query, v, true)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_from_bounds(&bounds, lower))
}

/// Sum edges whose bound is below `lower` by more than [`PRUNE_MARGIN`],
/// with each edge attributed to its parent's deciding variable if any.
pub fn prunable_edges(circuit: &Circuit, qdet: &QDetMap, lower: f64) -> (PruneSet, Vec<usize>) {
    let regs = edge_bounds(circuit, qdet);
    let threshold = lower * (1.0 - PRUNE_MARGIN);
    let mut set = PruneSet::default();
    let mut attributed = Vec::new();
    for (i, node) in circuit.nodes().iter().enumerate() {
        let Node::Sum { children, .. } = node else { continue };
        if !regs.t[i].is_finite() {
            continue;
        }
        let id = NodeId(i);
        for k in 0..children.len() {
            if regs.edge(circuit, id, k) < threshold {
                set.edges.push((id, k));
                if let Some(v) = qdet.deciding_var(id) {
                    attributed.push(v);
                }
            }
        }
    }
    (set, attributed)
}

pub fn iter_solve(circuit: &Circuit, instance: &MmapInstance, config: &SolverConfig) -> Result<SolverReport> {
    let start = Instant::now();
    instance.check_against(circuit)?;
    let reference = circuit.condition(instance.evidence())?;
    let query = instance.query();

    let mut current = reference.clone();
    let mut qdet = detect_q_deterministic(&current, query);
    let mut upper = output_bounds(&current, &qdet)[current.root().0];
    let mut state = lower_bound(&current, query, &qdet).state;
    let mut lower = reference.evaluate_marginal(&state)?;

    let mut remaining = query.to_vec();
    let mut counts = vec![0u64; circuit.num_vars()];
    let mut records = Vec::new();
    let mut iterations = 0;
    let push = |records: &mut Vec<IterationRecord>, rec: IterationRecord| {
        if config.trace {
            records.push(rec);
        }
    };
    push(
        &mut records,
        IterationRecord {
            iter: 0,
            upper,
            lower,
            nodes: current.len(),
            edges: current.num_edges(),
            pruned: 0,
            split: None,
        },
    );

    let status = loop {
        if start.elapsed() > config.timeout {
            break Status::Timeout;
        }
        if upper <= lower * (1.0 + config.tolerance) {
            break Status::Solved;
        }
        if remaining.is_empty() {
            // deterministic on every query variable: the extracted state is optimal
            upper = lower;
            break Status::Solved;
        }

        let (prune, attributed) = prunable_edges(&current, &qdet, lower);
        for v in attributed {
            counts[v] += 1;
        }
        let pruned = prune.len();
        if !prune.is_empty() {
            current = prune_edges(&current, &prune)?;
        }

        let var = match config.heuristic {
            Heuristic::Pruned => pick_var_pruned(&remaining, &counts),
            Heuristic::Ub => pick_var_ub(&current, query, &remaining, lower)?,
        };
        remaining.retain(|v| *v != var);
        current = split(&current, var)?;

        qdet = detect_q_deterministic(&current, query);
        upper = upper.min(output_bounds(&current, &qdet)[current.root().0]);
        let candidate = lower_bound(&current, query, &qdet).state;
        let value = reference.evaluate_marginal(&candidate)?;
        if value > lower {
            lower = value;
            state = candidate;
        }
        iterations += 1;
        push(
            &mut records,
            IterationRecord {
                iter: iterations,
                upper,
                lower,
                nodes: current.len(),
                edges: current.num_edges(),
                pruned,
                split: Some(var),
            },
        );
    };

    Ok(SolverReport {
        value: lower,
        upper,
        state,
        iterations,
        records,
        status,
        final_nodes: current.len(),
        final_edges: current.num_edges(),
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{f1, f2};

    #[test]
    fn pruned_heuristic_tie_breaking() {
        assert_eq!(pick_var_pruned(&[0, 1], &[3, 5]), 1);
        assert_eq!(pick_var_pruned(&[1, 0], &[0, 0]), 0);
        assert_eq!(pick_var_pruned(&[0, 1], &[4, 4]), 0);
    }

    #[test]
    fn ub_heuristic_rules() {
        let c = f2();
        assert!((conditioned_bound(&c, &[0], 0, true).unwrap() - 0.55).abs() < 1e-12);
        assert!((conditioned_bound(&c, &[0], 0, false).unwrap() - 0.45).abs() < 1e-12);
        assert_eq!(pick_var_ub(&c, &[0], &[0], 0.55).unwrap(), 0);
        assert_eq!(pick_from_bounds(&[(0, 0.45, 0.55)], 0.55), 0);
        assert_eq!(pick_from_bounds(&[(0, 0.3, 0.7), (1, 0.4, 0.6)], 0.2), 0);
        assert_eq!(pick_from_bounds(&[(0, 0.3, 0.8), (1, 0.1, 0.6)], 0.2), 1);
        assert_eq!(pick_from_bounds(&[(3, 0.5, 0.5), (1, 0.5, 0.6)], 0.2), 3);
    }

    #[test]
    fn f1_solves_without_iterations() {
        let inst = MmapInstance::new(vec![0], vec![]).unwrap();
        let r = iter_solve(&f1(), &inst, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, Status::Solved);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.state, vec![Literal::new(0, true)]);
        assert!((r.value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn f2_solves_in_one_split() {
        let inst = MmapInstance::new(vec![0], vec![]).unwrap();
        for h in [Heuristic::Pruned, Heuristic::Ub] {
            let r = iter_solve(&f2(), &inst, &SolverConfig::with_heuristic(h)).unwrap();
            assert_eq!(r.iterations, 1);
            assert!((r.value - 0.55).abs() < 1e-12);
            assert!((r.records[0].upper - 0.85).abs() < 1e-12);
            assert!((r.records[0].lower - 0.55).abs() < 1e-12);
            assert_eq!(r.records[1].split, Some(0));
            assert_eq!(r.records[1].pruned, 1);
            assert!((r.records[1].upper - 0.55).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_line_format() {
        let rec = IterationRecord { iter: 2, upper: 0.5, lower: 0.25, nodes: 7, edges: 9, pruned: 3, split: Some(4) };
        assert_eq!(rec.to_string(), "iter=2 u=0.5 l=0.25 size=7/9 pruned=3 split=4");
        let rec = IterationRecord { split: None, ..rec };
        assert!(rec.to_string().ends_with("split=-"));
    }

    #[test]
    fn zero_timeout_reports_timeout() {
        let inst = MmapInstance::new(vec![0], vec![]).unwrap();
        let cfg = SolverConfig { timeout: Duration::ZERO, ..Default::default() };
        assert_eq!(iter_solve(&f2(), &inst, &cfg).unwrap().status, Status::Timeout);
    }
}
