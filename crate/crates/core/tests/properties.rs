use pcmmap::bounds::{edge_bounds, lower_bound, output_bounds};
use pcmmap::oracle::{oracle_edge_mmap_all, oracle_mmap, oracle_nondeterministic_sums, DEFAULT_BUDGET};
use pcmmap::solver::{iter_solve, prunable_edges, Heuristic, SolverConfig, Status};
use pcmmap::support::detect_q_deterministic;
use pcmmap::synth::{random_circuit, random_instance, SynthConfig};
use pcmmap::transform::{prune_edges, split};
use pcmmap::{Circuit, Literal, MmapInstance};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (Circuit, MmapInstance)> {
    (3usize..=8, 2usize..=5, any::<u64>()).prop_map(|(n, depth, seed)| {
        let c = random_circuit(&SynthConfig::new(n, depth), seed);
        let inst = random_instance(&c, seed ^ 0x9e37);
        (c, inst)
    })
}

fn all_worlds(n: usize) -> impl Iterator<Item = Vec<Literal>> {
    (0u32..1 << n).map(move |bits| (0..n).map(|v| Literal::new(v, bits >> v & 1 == 1)).collect())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn marginals_sum_out_hidden((c, inst) in case()) {
        let total = c.evaluate_marginal(&[]).unwrap();
        let split_sum: f64 = [false, true].iter().map(|v| c.evaluate_marginal(&[Literal::new(0, *v)]).unwrap()).sum();
        prop_assert!(close(total, split_sum, 1e-12));
        let cond = c.condition(inst.evidence()).unwrap();
        prop_assert!(close(cond.evaluate_marginal(&[]).unwrap(), c.evaluate_marginal(inst.evidence()).unwrap(), 1e-12));
    }

    #[test]
    fn qdet_detection_is_sound((c, inst) in case()) {
        let cond = c.condition(inst.evidence()).unwrap();
        let qdet = detect_q_deterministic(&cond, inst.query());
        let nondet = oracle_nondeterministic_sums(&cond, inst.query(), &[], DEFAULT_BUDGET).unwrap();
        for (i, bad) in nondet.iter().enumerate() {
            prop_assert!(!(*bad && qdet.is_qdet(pcmmap::NodeId(i))), "node {i} wrongly marked");
        }
    }

    #[test]
    fn bounds_bracket_the_optimum((c, inst) in case()) {
        let cond = c.condition(inst.evidence()).unwrap();
        let qdet = detect_q_deterministic(&cond, inst.query());
        let (best, _) = oracle_mmap(&cond, inst.query(), &[], DEFAULT_BUDGET).unwrap();
        let m = output_bounds(&cond, &qdet);
        prop_assert!(m[cond.root().0] >= best * (1.0 - 1e-12));
        let lb = lower_bound(&cond, inst.query(), &qdet);
        prop_assert!(lb.value <= best * (1.0 + 1e-12));
        let regs = edge_bounds(&cond, &qdet);
        let exact = oracle_edge_mmap_all(&cond, inst.query(), &[], DEFAULT_BUDGET).unwrap();
        for (e, v) in exact.iter().enumerate() {
            if let Some(v) = v {
                prop_assert!(regs.r_edge[e] >= v * (1.0 - 1e-9), "edge {e}: {} < {v}", regs.r_edge[e]);
            }
        }
    }

    #[test]
    fn pruning_keeps_the_optimum((c, inst) in case()) {
        let cond = c.condition(inst.evidence()).unwrap();
        let qdet = detect_q_deterministic(&cond, inst.query());
        let lb = lower_bound(&cond, inst.query(), &qdet);
        let (prune, _) = prunable_edges(&cond, &qdet, lb.value);
        let (best, state) = oracle_mmap(&cond, inst.query(), &[], DEFAULT_BUDGET).unwrap();
        if prune.is_empty() {
            return Ok(());
        }
        let pruned = prune_edges(&cond, &prune).unwrap();
        let (after, after_state) = oracle_mmap(&pruned, inst.query(), &[], DEFAULT_BUDGET).unwrap();
        prop_assert!(close(best, after, 1e-9));
        prop_assert_eq!(state, after_state);
    }

    #[test]
    fn split_preserves_distribution((c, _inst) in case(), pick in any::<prop::sample::Index>()) {
        let var = pick.index(c.num_vars());
        let s = split(&c, var).unwrap();
        prop_assert!(s.len() <= 2 * c.len() + 1);
        for w in all_worlds(c.num_vars()) {
            prop_assert!(close(c.evaluate_marginal(&w).unwrap(), s.evaluate_marginal(&w).unwrap(), 1e-12));
        }
        // with one value impossible the split has a single branch and no new sum
        let both = [false, true].iter().all(|v| c.evaluate_marginal(&[Literal::new(var, *v)]).unwrap() > 0.0);
        if both {
            prop_assert!(detect_q_deterministic(&s, &[var]).is_qdet(s.root()), "var {var}: {s:?}");
        }
    }

    #[test]
    fn solver_is_exact_and_monotone((c, inst) in case(), ub in any::<bool>()) {
        let h = if ub { Heuristic::Ub } else { Heuristic::Pruned };
        let r = iter_solve(&c, &inst, &SolverConfig::with_heuristic(h)).unwrap();
        let (best, _) = oracle_mmap(&c, inst.query(), inst.evidence(), DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(r.status, Status::Solved);
        prop_assert!(close(r.value, best, 1e-9));
        let mut full = r.state.clone();
        full.extend_from_slice(inst.evidence());
        prop_assert!(close(c.evaluate_marginal(&full).unwrap(), best, 1e-9));
        prop_assert!(r.iterations <= inst.query().len());
        for pair in r.records.windows(2) {
            prop_assert!(pair[1].upper <= pair[0].upper && pair[1].lower >= pair[0].lower);
        }
    }
}
