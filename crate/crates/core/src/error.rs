use crate::circuit::NodeId;
use crate::io::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("variable {var} out of range for a circuit over {num_vars} variables")]
    InvalidVariable { var: usize, num_vars: usize },

    #[error("invalid circuit: node {node}: {reason}")]
    InvalidNode { node: NodeId, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("evidence has zero probability under the circuit")]
    InfeasibleEvidence,

    #[error("pruning removed every path to the root")]
    OverPruned,

    #[error("circuit has no support left after cleanup")]
    EmptyCircuit,

    #[error("enumeration needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
