//! Browser bindings for the demo page in `www/`.
//!
//! Every entry point takes circuit and instance text in the CLI file formats
//! and returns JSON, so the page needs no glue beyond `JSON.parse`.

use pcmmap::bounds::{edge_bounds, lower_bound};
use pcmmap::io::{parse_circuit, parse_instance, serialize_circuit, serialize_instance};
use pcmmap::solver::{iter_solve, Heuristic, SolverConfig};
use pcmmap::support::detect_q_deterministic;
use pcmmap::synth::{random_circuit, random_instance, SynthConfig};
use pcmmap::transform::split;
use pcmmap::{Circuit, Literal, MmapInstance, Node};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn load(circuit: &str) -> Result<Circuit, JsError> {
    let c = parse_circuit(circuit).map_err(js_err)?;
    if let Err(n) = c.check_smooth() {
        return Err(js_err(format!("sum node {n} is not smooth")));
    }
    if let Err(n) = c.check_decomposable() {
        return Err(js_err(format!("product node {n} is not decomposable")));
    }
    Ok(c)
}

fn load_instance(text: &str, circuit: &Circuit) -> Result<MmapInstance, JsError> {
    let inst = parse_instance(text).map_err(js_err)?;
    inst.check_against(circuit).map_err(js_err)?;
    Ok(inst)
}

fn state_json(state: &[Literal]) -> Value {
    state.iter().map(|l| json!({ "var": l.var, "value": u8::from(l.value) })).collect()
}

/// Seeded random circuit and instance, as `{circuit, instance}` texts.
#[wasm_bindgen]
pub fn random_example(num_vars: usize, depth: usize, seed: u64) -> Result<String, JsError> {
    if !(1..=16).contains(&num_vars) {
        return Err(js_err("variables must be between 1 and 16"));
    }
    let c = random_circuit(&SynthConfig::new(num_vars, depth.min(8)), seed);
    let inst = random_instance(&c, seed);
    Ok(json!({ "circuit": serialize_circuit(&c), "instance": serialize_instance(&inst) }).to_string())
}

/// Runs the solver and returns the per-iteration bounds for plotting.
#[wasm_bindgen]
pub fn solve(circuit: &str, instance: &str, heuristic: &str) -> Result<String, JsError> {
    let c = load(circuit)?;
    let inst = load_instance(instance, &c)?;
    let heuristic: Heuristic = heuristic.parse().map_err(js_err)?;
    let r = iter_solve(&c, &inst, &SolverConfig::with_heuristic(heuristic)).map_err(js_err)?;
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|x| {
            json!({
                "iter": x.iter, "upper": x.upper, "lower": x.lower,
                "nodes": x.nodes, "edges": x.edges, "pruned": x.pruned, "split": x.split,
            })
        })
        .collect();
    Ok(json!({
        "status": r.status.to_string(),
        "value": r.value,
        "state": state_json(&r.state),
        "iterations": r.iterations,
        "records": records,
    })
    .to_string())
}

/// Output and edge bounds of every sum edge in the evidence-conditioned
/// circuit, with the lower bound they are compared against.
#[wasm_bindgen]
pub fn bounds(circuit: &str, instance: &str) -> Result<String, JsError> {
    let c = load(circuit)?;
    let inst = load_instance(instance, &c)?;
    let cond = c.condition(inst.evidence()).map_err(js_err)?;
    let qdet = detect_q_deterministic(&cond, inst.query());
    let regs = edge_bounds(&cond, &qdet);
    let lb = lower_bound(&cond, inst.query(), &qdet);
    let edges: Vec<Value> = cond
        .edges()
        .filter_map(|(p, k, child)| match cond.node(p) {
            Node::Sum { weights, .. } => Some(json!({
                "parent": p.0, "child": child.0, "weight": weights[k],
                "qdet": qdet.is_qdet(p), "bound": regs.edge(&cond, p, k),
                "pruned": regs.edge(&cond, p, k) < lb.value * (1.0 - pcmmap::solver::PRUNE_MARGIN),
            })),
            _ => None,
        })
        .collect();
    Ok(json!({
        "upper": regs.root_bound(&cond),
        "lower": lb.value,
        "state": state_json(&lb.state),
        "nodes": cond.len(),
        "edges": edges,
    })
    .to_string())
}

/// Splits the root on `var` and returns the new circuit text and sizes.
#[wasm_bindgen]
pub fn split_root(circuit: &str, var: usize) -> Result<String, JsError> {
    let c = load(circuit)?;
    let s = split(&c, var).map_err(js_err)?;
    Ok(json!({
        "circuit": serialize_circuit(&s),
        "before": { "nodes": c.len(), "edges": c.num_edges() },
        "after": { "nodes": s.len(), "edges": s.num_edges() },
    })
    .to_string())
}
