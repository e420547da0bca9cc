//! MMAP instances and seeded instance generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Literal, Node};
use crate::error::{Error, Result};

/// Query variables plus an evidence assignment; every other variable is
/// hidden and summed out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmapInstance {
    query: Vec<usize>,
    evidence: Vec<Literal>,
}

impl MmapInstance {
    pub fn new(mut query: Vec<usize>, mut evidence: Vec<Literal>) -> Result<Self> {
        query.sort_unstable();
        query.dedup();
        evidence.sort_unstable();
        evidence.dedup();
        if query.is_empty() {
            return Err(Error::InvalidInstance("query set is empty".into()));
        }
        if let Some(w) = evidence.windows(2).find(|w| w[0].var == w[1].var) {
            return Err(Error::InvalidInstance(format!("variable {} observed twice", w[0].var)));
        }
        if let Some(e) = evidence.iter().find(|e| query.binary_search(&e.var).is_ok()) {
            return Err(Error::InvalidInstance(format!("variable {} is both query and evidence", e.var)));
        }
        Ok(MmapInstance { query, evidence })
    }

    pub fn query(&self) -> &[usize] {
        &self.query
    }

    pub fn evidence(&self) -> &[Literal] {
        &self.evidence
    }

    pub fn hidden(&self, num_vars: usize) -> Vec<usize> {
        (0..num_vars)
            .filter(|v| self.query.binary_search(v).is_err())
            .filter(|v| !self.evidence.iter().any(|e| e.var == *v))
            .collect()
    }

    pub fn check_against(&self, circuit: &Circuit) -> Result<()> {
        let num_vars = circuit.num_vars();
        let too_big = self.query.iter().copied().chain(self.evidence.iter().map(|e| e.var)).find(|v| *v >= num_vars);
        match too_big {
            Some(var) => Err(Error::InvalidVariable { var, num_vars }),
            None => Ok(()),
        }
    }
}

/// Query/evidence/hidden percentages.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Proportions {
    pub query: u32,
    pub evidence: u32,
    pub hidden: u32,
}

impl Proportions {
    pub fn new(query: u32, evidence: u32, hidden: u32) -> Result<Self> {
        if query + evidence + hidden != 100 {
            return Err(Error::InvalidInstance(format!(
                "proportions {query},{evidence},{hidden} do not sum to 100"
            )));
        }
        Ok(Proportions { query, evidence, hidden })
    }

    /// `(|Q|, |E|, |H|)` for `n` variables: evidence and hidden are rounded
    /// down and the query set takes the remainder.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let e = n * self.evidence as usize / 100;
        let h = n * self.hidden as usize / 100;
        (n - e - h, e, h)
    }
}

impl std::fmt::Display for Proportions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.query, self.evidence, self.hidden)
    }
}

impl std::str::FromStr for Proportions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInstance(format!("bad proportions '{s}'")))?;
        match parts[..] {
            [q, e, h] => Proportions::new(q, e, h),
            _ => Err(Error::InvalidInstance(format!("expected q,e,h proportions, got '{s}'"))),
        }
    }
}

/// Draws a full assignment from the circuit's (normalised) distribution.
///
/// Variables outside the root scope are drawn uniformly.
pub fn sample_world<R: Rng>(circuit: &Circuit, masses: &[f64], rng: &mut R) -> Vec<bool> {
    let mut world: Vec<bool> = (0..circuit.num_vars()).map(|_| rng.gen()).collect();
    let mut stack = vec![circuit.root()];
    while let Some(n) = stack.pop() {
        match circuit.node(n) {
            Node::Leaf { var, value } => world[*var] = *value,
            Node::Product { children } => stack.extend(children.iter().rev()),
            Node::Sum { children, weights } => {
                let total: f64 = children.iter().zip(weights).map(|(c, w)| w * masses[c.0]).sum();
                let mut u = rng.gen::<f64>() * total;
                let mut pick = children[children.len() - 1];
                for (c, w) in children.iter().zip(weights) {
                    u -= w * masses[c.0];
                    if u < 0.0 {
                        pick = *c;
                        break;
                    }
                }
                stack.push(pick);
            }
        }
    }
    world
}

/// Randomly partitions the variables and samples positive-probability
/// evidence. Deterministic for a given seed.
pub fn generate_instance(circuit: &Circuit, proportions: Proportions, seed: u64) -> Result<MmapInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = circuit.num_vars();
    let (_, e, h) = proportions.counts(n);
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(&mut rng);
    let world = sample_world(circuit, &circuit.masses(), &mut rng);
    let evidence = vars[..e].iter().map(|&v| Literal::new(v, world[v])).collect();
    let query = vars[e + h..].to_vec();
    MmapInstance::new(query, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::f1;

    #[test]
    fn rounding_gives_query_the_remainder() {
        let p = Proportions::new(30, 30, 40).unwrap();
        assert_eq!(p.counts(10), (3, 3, 4));
        assert_eq!(Proportions::new(50, 20, 30).unwrap().counts(16), (9, 3, 4));
        assert!(Proportions::new(50, 50, 10).is_err());
        assert_eq!("30,30,40".parse::<Proportions>().unwrap(), p);
    }

    #[test]
    fn generated_evidence_is_feasible_and_seeded() {
        let c = f1();
        let p = Proportions::new(50, 50, 0).unwrap();
        for seed in 0..50 {
            let inst = generate_instance(&c, p, seed).unwrap();
            assert_eq!(inst.query().len(), 1);
            assert_eq!(inst.evidence().len(), 1);
            assert!(c.evaluate_marginal(inst.evidence()).unwrap() > 0.0);
            assert!(c.condition(inst.evidence()).is_ok());
            assert_eq!(generate_instance(&c, p, seed).unwrap(), inst);
        }
    }

    #[test]
    fn instance_validation() {
        assert!(MmapInstance::new(vec![], vec![]).is_err());
        assert!(MmapInstance::new(vec![0], vec![Literal::new(0, true)]).is_err());
        assert!(MmapInstance::new(vec![0], vec![Literal::new(1, true), Literal::new(1, false)]).is_err());
        let inst = MmapInstance::new(vec![2, 0, 2], vec![Literal::new(1, true)]).unwrap();
        assert_eq!(inst.query(), &[0, 2]);
        assert_eq!(inst.hidden(4), vec![3]);
        assert!(inst.check_against(&f1()).is_err());
    }
}
