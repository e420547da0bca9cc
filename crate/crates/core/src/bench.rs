//! Benchmark harness: generate instances per circuit and proportion, solve
//! them on a worker pool and aggregate run times.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::Result;
use crate::instance::{generate_instance, MmapInstance, Proportions};
use crate::oracle::oracle_mmap;
use crate::solver::{iter_solve, SolverConfig, Status};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub proportions: Vec<Proportions>,
    pub instances_per_config: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    /// Cross-check each solved value by enumeration when `2^|Q|` fits.
    pub oracle_budget: Option<u128>,
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub circuit: String,
    pub proportions: Proportions,
    pub index: usize,
    pub instance: MmapInstance,
    pub status: Status,
    pub seconds: f64,
    pub value: f64,
    pub iterations: usize,
    pub final_nodes: usize,
    /// `None` when not checked.
    pub oracle_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub circuit: String,
    pub proportions: Proportions,
    pub instances: usize,
    pub solved: usize,
    /// Mean wall time over solved instances; `None` if nothing was solved.
    pub mean_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchResult {
    pub instances: Vec<InstanceResult>,
    pub rows: Vec<AggregateRow>,
}

/// Circuits named by file stem, plus one warning per skipped file.
pub type Loaded = (Vec<(String, Circuit)>, Vec<String>);

/// Loads every `*.pc` file under `dir`, sorted by name. Unreadable files are
/// returned as warnings instead of failing the whole run.
pub fn load_circuits(dir: &Path) -> Result<Loaded> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pc"))
        .collect();
    paths.sort();
    let mut circuits = Vec::new();
    let mut warnings = Vec::new();
    for path in paths {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match crate::io::read_circuit(&path) {
            Ok(c) => circuits.push((name, c)),
            Err(e) => warnings.push(format!("skipping {}: {e}", path.display())),
        }
    }
    Ok((circuits, warnings))
}

pub fn aggregate(instances: &[InstanceResult]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    for r in instances {
        let pos = rows.iter().position(|row| row.circuit == r.circuit && row.proportions == r.proportions);
        let row = match pos {
            Some(p) => &mut rows[p],
            None => {
                rows.push(AggregateRow {
                    circuit: r.circuit.clone(),
                    proportions: r.proportions,
                    instances: 0,
                    solved: 0,
                    mean_seconds: None,
                });
                rows.last_mut().unwrap()
            }
        };
        row.instances += 1;
        if r.status == Status::Solved {
            let total = row.mean_seconds.unwrap_or(0.0) * row.solved as f64 + r.seconds;
            row.solved += 1;
            row.mean_seconds = Some(total / row.solved as f64);
        }
    }
    rows
}

pub fn bench(circuits: &[(String, Circuit)], cfg: &BenchConfig) -> Result<BenchResult> {
    let mut jobs = Vec::new();
    for (name, circuit) in circuits {
        for &p in &cfg.proportions {
            for index in 0..cfg.instances_per_config {
                let instance = generate_instance(circuit, p, cfg.seed.wrapping_add(index as u64))?;
                jobs.push((name.clone(), circuit, p, index, instance));
            }
        }
    }
    let instances = jobs
        .into_par_iter()
        .map(|(name, circuit, proportions, index, instance)| {
            let report = iter_solve(circuit, &instance, &cfg.solver)?;
            let oracle_ok = match cfg.oracle_budget {
                Some(budget) if report.status == Status::Solved => {
                    match oracle_mmap(circuit, instance.query(), instance.evidence(), budget) {
                        Ok((best, _)) => {
                            let mut full = report.state.clone();
                            full.extend_from_slice(instance.evidence());
                            let attained = circuit.evaluate_marginal(&full)?;
                            let tol = 1e-9 * best.abs();
                            Some((report.value - best).abs() <= tol && (attained - best).abs() <= tol)
                        }
                        Err(_) => None,
                    }
                }
                _ => None,
            };
            Ok(InstanceResult {
                circuit: name,
                proportions,
                index,
                instance,
                status: report.status,
                seconds: report.elapsed.as_secs_f64(),
                value: report.value,
                iterations: report.iterations,
                final_nodes: report.final_nodes,
                oracle_ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = aggregate(&instances);
    Ok(BenchResult { instances, rows })
}

impl BenchResult {
    pub fn solved(&self) -> usize {
        self.instances.iter().filter(|r| r.status == Status::Solved).count()
    }

    /// Aggregate table as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["circuit", "proportions", "instances", "solved", "mean_seconds"])
            .map_err(std::io::Error::other)?;
        for row in &self.rows {
            let mean = row.mean_seconds.map(|s| format!("{s:.6}")).unwrap_or_default();
            w.write_record([
                row.circuit.clone(),
                row.proportions.to_string(),
                row.instances.to_string(),
                row.solved.to_string(),
                mean,
            ])
            .map_err(std::io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<24} {:>10} {:>8} {:>12}\n", "circuit", "q,e,h", "solved", "mean time(s)");
        for row in &self.rows {
            let mean = row.mean_seconds.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:<24} {:>10} {:>8} {:>12}",
                row.circuit,
                row.proportions.to_string(),
                format!("{}/{}", row.solved, row.instances),
                mean
            )
            .unwrap();
        }
        out
    }
}
