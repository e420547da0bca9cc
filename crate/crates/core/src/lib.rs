//! Exact marginal MAP (MMAP) inference for smooth, decomposable probabilistic
//! circuits over binary variables.
//!
//! The solver never searches. It alternates two circuit transformations:
//! pruning edges whose edge bound cannot beat a known lower bound, and
//! splitting the root on a query variable. Once every remaining query variable
//! is decided by a deterministic sum, the max-product pass is exact.
//!
//! ```
//! use pcmmap::{fixtures, solver::{iter_solve, SolverConfig}, MmapInstance};
//!
//! let circuit = fixtures::f2();
//! let instance = MmapInstance::new(vec![0], vec![]).unwrap();
//! let report = iter_solve(&circuit, &instance, &SolverConfig::default()).unwrap();
//! assert!((report.value - 0.55).abs() < 1e-12);
//! ```

pub mod bench;
pub mod bounds;
pub mod circuit;
mod error;
pub mod fixtures;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod solver;
pub mod support;
pub mod synth;
pub mod transform;

pub use circuit::{Circuit, CircuitBuilder, Literal, Node, NodeId};
pub use error::{Error, Result};
pub use instance::MmapInstance;
pub use support::QDetMap;
