//! Seeded random smooth, decomposable circuits for tests, benchmarks and the
//! demo page.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, CircuitBuilder, Literal, NodeId};
use crate::instance::{sample_world, MmapInstance};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub num_vars: usize,
    /// Maximum number of internal layers below the root.
    pub max_depth: usize,
    /// Probability that a sum node is built deterministic on one variable.
    pub det_prob: f64,
    /// Children per non-deterministic sum node, at least 2.
    pub max_sum_children: usize,
    /// Probability of reusing an already generated node over the same scope.
    pub reuse_prob: f64,
}

impl SynthConfig {
    pub fn new(num_vars: usize, max_depth: usize) -> Self {
        SynthConfig { num_vars, max_depth, det_prob: 0.5, max_sum_children: 3, reuse_prob: 0.3 }
    }
}

struct Gen<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    b: CircuitBuilder,
    by_scope: HashMap<Vec<usize>, Vec<NodeId>>,
}

impl Gen<'_> {
    fn weights(&mut self, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| self.rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn terminal(&mut self, var: usize) -> NodeId {
        if self.rng.gen_bool(0.2) {
            let value = self.rng.gen();
            return self.b.leaf(var, value);
        }
        let one = self.b.leaf(var, true);
        let zero = self.b.leaf(var, false);
        let w = self.weights(2);
        self.b.sum(vec![one, zero], w)
    }

    fn node(&mut self, vars: &[usize], depth: usize) -> NodeId {
        if let Some(seen) = self.by_scope.get(vars) {
            if self.rng.gen_bool(self.cfg.reuse_prob) {
                return *seen.choose(&mut self.rng).expect("nonempty");
            }
        }
        let id = self.fresh(vars, depth);
        self.by_scope.entry(vars.to_vec()).or_default().push(id);
        id
    }

    fn fresh(&mut self, vars: &[usize], depth: usize) -> NodeId {
        if vars.len() == 1 {
            return self.terminal(vars[0]);
        }
        if depth == 0 {
            let kids = vars.iter().map(|v| self.terminal(*v)).collect();
            return self.b.product(kids);
        }
        if self.rng.gen_bool(0.5) {
            let mut shuffled = vars.to_vec();
            shuffled.shuffle(&mut self.rng);
            let blocks = self.rng.gen_range(2..=vars.len().min(3));
            let mut cuts: Vec<usize> = (1..vars.len()).collect();
            cuts.shuffle(&mut self.rng);
            let mut cuts: Vec<usize> = cuts[..blocks - 1].to_vec();
            cuts.sort_unstable();
            let mut kids = Vec::with_capacity(blocks);
            let mut start = 0;
            for end in cuts.into_iter().chain(std::iter::once(vars.len())) {
                let mut block = shuffled[start..end].to_vec();
                block.sort_unstable();
                kids.push(self.node(&block, depth - 1));
                start = end;
            }
            return self.b.product(kids);
        }
        if self.rng.gen_bool(self.cfg.det_prob) {
            let var = *vars.choose(&mut self.rng).expect("nonempty");
            let rest: Vec<usize> = vars.iter().copied().filter(|v| *v != var).collect();
            let mut kids = Vec::with_capacity(2);
            for value in [true, false] {
                let lit = self.b.leaf(var, value);
                let sub = self.node(&rest, depth - 1);
                kids.push(self.b.product(vec![lit, sub]));
            }
            let w = self.weights(2);
            return self.b.sum(kids, w);
        }
        let k = self.rng.gen_range(2..=self.cfg.max_sum_children.max(2));
        let kids: Vec<NodeId> = (0..k).map(|_| self.node(vars, depth - 1)).collect();
        let w = self.weights(k);
        self.b.sum(kids, w)
    }
}

/// Random normalised circuit over all `cfg.num_vars` variables.
pub fn random_circuit(cfg: &SynthConfig, seed: u64) -> Circuit {
    assert!(cfg.num_vars > 0, "need at least one variable");
    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(seed),
        b: CircuitBuilder::new(cfg.num_vars),
        by_scope: HashMap::new(),
    };
    let vars: Vec<usize> = (0..cfg.num_vars).collect();
    let root = g.fresh(&vars, cfg.max_depth);
    let c = g.b.build(root).expect("generator emits valid arenas");
    crate::transform::cleanup(&c).expect("generated circuits have positive mass")
}

/// Random query/evidence/hidden split with a nonempty query set and
/// evidence drawn from the circuit.
pub fn random_instance(circuit: &Circuit, seed: u64) -> MmapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = sample_world(circuit, &circuit.masses(), &mut rng);
    let n = circuit.num_vars();
    let mut query = Vec::new();
    let mut evidence = Vec::new();
    for (v, &value) in world.iter().enumerate() {
        match rng.gen_range(0..10) {
            0..=3 => query.push(v),
            4..=6 => evidence.push(Literal::new(v, value)),
            _ => {}
        }
    }
    if query.is_empty() {
        let v = rng.gen_range(0..n);
        evidence.retain(|e| e.var != v);
        query.push(v);
    }
    MmapInstance::new(query, evidence).expect("disjoint by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_circuits_are_valid_and_normalised() {
        for seed in 0..40 {
            let cfg = SynthConfig::new(4 + (seed as usize % 9), 2 + seed as usize % 5);
            let c = random_circuit(&cfg, seed);
            assert!(c.check_smooth().is_ok());
            assert!(c.check_decomposable().is_ok());
            assert_eq!(c.scope(c.root()).count_ones(..), cfg.num_vars);
            assert!((c.evaluate_marginal(&[]).unwrap() - 1.0).abs() < 1e-9);
            let inst = random_instance(&c, seed);
            assert!(c.evaluate_marginal(inst.evidence()).unwrap() > 0.0);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = SynthConfig::new(8, 4);
        assert_eq!(random_circuit(&cfg, 7), random_circuit(&cfg, 7));
    }
}
