use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use pcmmap::bench::{bench, load_circuits, BenchConfig};
use pcmmap::bounds::{lower_bound, output_bounds};
use pcmmap::instance::{generate_instance, Proportions};
use pcmmap::io::{read_circuit, read_instance, serialize_instance};
use pcmmap::oracle::{oracle_mmap, DEFAULT_BUDGET};
use pcmmap::solver::{iter_solve, Heuristic, SolverConfig, Status};
use pcmmap::support::detect_q_deterministic;
use pcmmap::{Circuit, Literal, MmapInstance};

/// Exact marginal MAP for smooth, decomposable probabilistic circuits.
#[derive(Parser)]
#[command(name = "pcmmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a circuit and report its size, smoothness and decomposability.
    Check {
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Solve an instance exactly by pruning and splitting.
    Solve {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "ub")]
        heuristic: Heuristic,
        /// Seconds.
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
        /// Write one line per iteration to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the root upper bound and the extracted lower bound.
    Bound {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve by enumerating every query assignment.
    Oracle {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Maximum number of query assignments to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Generate seeded instances with sampled, nonzero-probability evidence.
    Gen {
        #[arg(long)]
        circuit: PathBuf,
        /// Query, evidence and hidden percentages, e.g. 30,30,40.
        #[arg(long)]
        proportions: Proportions,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate and solve instances for every circuit in a directory.
    Bench {
        #[arg(long)]
        circuits: PathBuf,
        #[arg(long, num_args = 1.., default_values = ["30,30,40", "50,20,30"])]
        proportions: Vec<Proportions>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
        #[arg(long, default_value = "ub")]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cross-check solved values by enumeration when feasible.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn format_state(state: &[Literal]) -> String {
    state.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn load_checked(path: &Path) -> anyhow::Result<Circuit> {
    let c = read_circuit(path).with_context(|| format!("reading {}", path.display()))?;
    if let Err(n) = c.check_smooth() {
        bail!("{}: sum node {n} is not smooth", path.display());
    }
    if let Err(n) = c.check_decomposable() {
        bail!("{}: product node {n} is not decomposable", path.display());
    }
    Ok(c)
}

fn load_instance(path: &Path, circuit: &Circuit) -> anyhow::Result<MmapInstance> {
    let inst = read_instance(path).with_context(|| format!("reading {}", path.display()))?;
    inst.check_against(circuit)?;
    Ok(inst)
}

fn seconds(s: f64) -> anyhow::Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("invalid timeout {s}"))
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Check { circuit } => {
            let c = read_circuit(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            println!("variables: {}", c.num_vars());
            println!("nodes: {}", c.len());
            println!("edges: {}", c.num_edges());
            let smooth = c.check_smooth();
            let decomposable = c.check_decomposable();
            match smooth {
                Ok(()) => println!("smooth: yes"),
                Err(n) => println!("smooth: no (node {n})"),
            }
            match decomposable {
                Ok(()) => println!("decomposable: yes"),
                Err(n) => println!("decomposable: no (node {n})"),
            }
            let ok = smooth.is_ok() && decomposable.is_ok();
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Solve { circuit, instance, heuristic, timeout, trace } => {
            let c = load_checked(&circuit)?;
            let inst = load_instance(&instance, &c)?;
            let cfg = SolverConfig { heuristic, timeout: seconds(timeout)?, trace: trace.is_some(), ..Default::default() };
            let r = iter_solve(&c, &inst, &cfg)?;
            if let Some(path) = trace {
                std::fs::write(&path, r.trace()).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("status: {}", r.status);
            println!("value: {}", r.value);
            println!("upper: {}", r.upper);
            println!("state: {}", format_state(&r.state));
            println!("iterations: {}", r.iterations);
            println!("final size: {}/{}", r.final_nodes, r.final_edges);
            println!("seconds: {:.6}", r.elapsed.as_secs_f64());
            Ok(match r.status {
                Status::Solved => ExitCode::SUCCESS,
                Status::Timeout => ExitCode::from(2),
            })
        }
        Command::Bound { circuit, instance } => {
            let c = load_checked(&circuit)?;
            let inst = load_instance(&instance, &c)?;
            let cond = c.condition(inst.evidence())?;
            let qdet = detect_q_deterministic(&cond, inst.query());
            let m = output_bounds(&cond, &qdet);
            let lb = lower_bound(&cond, inst.query(), &qdet);
            println!("upper: {}", m[cond.root().0]);
            println!("lower: {}", lb.value);
            println!("state: {}", format_state(&lb.state));
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { circuit, instance, budget } => {
            let c = read_circuit(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            let inst = load_instance(&instance, &c)?;
            let (value, state) = oracle_mmap(&c, inst.query(), inst.evidence(), budget)?;
            println!("value: {value}");
            println!("state: {}", format_state(&state));
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { circuit, proportions, count, seed, out } => {
            let c = load_checked(&circuit)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let stem = circuit.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let tag = format!("{}-{}-{}", proportions.query, proportions.evidence, proportions.hidden);
            for i in 0..count {
                let inst = generate_instance(&c, proportions, seed.wrapping_add(i as u64))?;
                let path = out.join(format!("{stem}_{tag}_{i:03}.inst"));
                std::fs::write(&path, serialize_instance(&inst)).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { circuits, proportions, count, timeout, heuristic, seed, verify, out } => {
            let (loaded, warnings) = load_circuits(&circuits)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let cfg = BenchConfig {
                proportions,
                instances_per_config: count,
                solver: SolverConfig { heuristic, timeout: seconds(timeout)?, trace: false, ..Default::default() },
                seed,
                oracle_budget: verify.then_some(DEFAULT_BUDGET),
            };
            let res = bench(&loaded, &cfg)?;
            print!("{}", res.to_table());
            let mismatches = res.instances.iter().filter(|r| r.oracle_ok == Some(false)).count();
            if verify {
                let checked = res.instances.iter().filter(|r| r.oracle_ok.is_some()).count();
                let mut line = format!("verified {checked} solved instances against the oracle");
                if mismatches > 0 {
                    write!(line, ", {mismatches} mismatches").unwrap();
                }
                println!("{line}");
            }
            if let Some(path) = out {
                std::fs::write(&path, res.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
            }
            if mismatches > 0 {
                bail!("{mismatches} instances disagree with the oracle");
            }
            Ok(if res.solved() == res.instances.len() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
