//! Small hand-built circuits used by tests, docs and the demo page.
//!
//! Variables are 0-indexed: `X1` is variable 0 and `X2` is variable 1.

use crate::circuit::{Circuit, Node, NodeId};

/// Two-variable circuit with `p(1,1)=0.42`, `p(1,0)=0.18`, `p(0,1)=0.08`,
/// `p(0,0)=0.32`.
///
/// Arena ids: leaves `0:[X1=1] 1:[X1=0] 2:[X2=1] 3:[X2=0]`, sums
/// `4 = 0.7*2 + 0.3*3`, `5 = 0.2*2 + 0.8*3`, products `6 = 0*4`, `7 = 1*5`,
/// root `8 = 0.6*6 + 0.4*7`.
pub fn f1() -> Circuit {
    let nodes = vec![
        Node::Leaf { var: 0, value: true },
        Node::Leaf { var: 0, value: false },
        Node::Leaf { var: 1, value: true },
        Node::Leaf { var: 1, value: false },
        Node::Sum { children: vec![NodeId(2), NodeId(3)], weights: vec![0.7, 0.3] },
        Node::Sum { children: vec![NodeId(2), NodeId(3)], weights: vec![0.2, 0.8] },
        Node::Product { children: vec![NodeId(0), NodeId(4)] },
        Node::Product { children: vec![NodeId(1), NodeId(5)] },
        Node::Sum { children: vec![NodeId(6), NodeId(7)], weights: vec![0.6, 0.4] },
    ];
    Circuit::new(2, nodes, NodeId(8)).expect("F1 is well formed")
}

/// One-variable mixture that is not deterministic at the root:
/// `0.5*(0.9*[X1=1] + 0.1*[X1=0]) + 0.5*(0.2*[X1=1] + 0.8*[X1=0])`.
pub fn f2() -> Circuit {
    let nodes = vec![
        Node::Leaf { var: 0, value: true },
        Node::Leaf { var: 0, value: false },
        Node::Sum { children: vec![NodeId(0), NodeId(1)], weights: vec![0.9, 0.1] },
        Node::Sum { children: vec![NodeId(0), NodeId(1)], weights: vec![0.2, 0.8] },
        Node::Sum { children: vec![NodeId(2), NodeId(3)], weights: vec![0.5, 0.5] },
    ];
    Circuit::new(1, nodes, NodeId(4)).expect("F2 is well formed")
}
