//! Text formats for circuits and MMAP instances.
//!
//! Circuit files list one node per line with dense, topologically ordered
//! ids and end with the root declaration:
//!
//! ```text
//! pc <num_vars>
//! l <id> <var> <value>
//! p <id> <k> <child_0> ... <child_{k-1}>
//! s <id> <k> <child_0> <w_0> ... <child_{k-1}> <w_{k-1}>
//! r <id>
//! ```
//!
//! Instance files hold `q <var> ...` and `e <var>=<0|1> ...` lines. Both
//! formats accept `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::circuit::{Circuit, Literal, Node, NodeId};
use crate::error::Result;
use crate::instance::MmapInstance;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err<T>(line: usize, reason: impl Into<String>) -> std::result::Result<T, ParseError> {
    Err(ParseError { line, reason: reason.into() })
}

/// Non-empty, comment-stripped lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: Option<&&str>, what: &str) -> std::result::Result<T, ParseError> {
    match tok {
        None => err(line, format!("missing {what}")),
        Some(t) => t.parse().or_else(|_| err(line, format!("invalid {what} '{t}'"))),
    }
}

pub fn parse_circuit(text: &str) -> std::result::Result<Circuit, ParseError> {
    let mut lines = content_lines(text);
    let Some((header_line, header)) = lines.next() else {
        return err(1, "empty file, expected 'pc <num_vars>'");
    };
    if header[0] != "pc" || header.len() != 2 {
        return err(header_line, "expected header 'pc <num_vars>'");
    }
    let num_vars: usize = parse_num(header_line, header.get(1), "variable count")?;

    let mut nodes: Vec<Node> = Vec::new();
    let mut root: Option<NodeId> = None;
    let mut last_line = header_line;
    for (ln, toks) in lines {
        last_line = ln;
        if root.is_some() {
            return err(ln, "content after root declaration");
        }
        let kind = toks[0];
        let id: usize = parse_num(ln, toks.get(1), "node id")?;
        if kind == "r" {
            if toks.len() != 2 {
                return err(ln, "expected 'r <id>'");
            }
            if id >= nodes.len() {
                return err(ln, format!("root {id} refers to an undefined node"));
            }
            root = Some(NodeId(id));
            continue;
        }
        if id < nodes.len() {
            return err(ln, format!("duplicate id {id}"));
        }
        if id > nodes.len() {
            return err(ln, format!("id {id} is not dense, expected {}", nodes.len()));
        }
        let child = |tok: Option<&&str>| -> std::result::Result<NodeId, ParseError> {
            let c: usize = parse_num(ln, tok, "child id")?;
            if c >= id {
                return err(ln, format!("forward reference to node {c}"));
            }
            Ok(NodeId(c))
        };
        let node = match kind {
            "l" => {
                if toks.len() != 4 {
                    return err(ln, "expected 'l <id> <var> <value>'");
                }
                let var: usize = parse_num(ln, toks.get(2), "variable")?;
                if var >= num_vars {
                    return err(ln, format!("variable {var} out of range (num_vars = {num_vars})"));
                }
                let value = match toks[3] {
                    "0" => false,
                    "1" => true,
                    other => return err(ln, format!("leaf value must be 0 or 1, got '{other}'")),
                };
                Node::Leaf { var, value }
            }
            "p" => {
                let k: usize = parse_num(ln, toks.get(2), "child count")?;
                if k == 0 || toks.len() != 3 + k {
                    return err(ln, format!("product declares {k} children but lists {}", toks.len().saturating_sub(3)));
                }
                let children = (0..k).map(|j| child(toks.get(3 + j))).collect::<std::result::Result<_, _>>()?;
                Node::Product { children }
            }
            "s" => {
                let k: usize = parse_num(ln, toks.get(2), "child count")?;
                if k == 0 || toks.len() != 3 + 2 * k {
                    return err(ln, format!("sum declares {k} children but has {} child/weight tokens", toks.len().saturating_sub(3)));
                }
                let mut children = Vec::with_capacity(k);
                let mut weights = Vec::with_capacity(k);
                for j in 0..k {
                    children.push(child(toks.get(3 + 2 * j))?);
                    let w: f64 = parse_num(ln, toks.get(4 + 2 * j), "weight")?;
                    if !w.is_finite() {
                        return err(ln, format!("non-finite weight '{}'", toks[4 + 2 * j]));
                    }
                    if w <= 0.0 {
                        return err(ln, format!("non-positive weight '{}'", toks[4 + 2 * j]));
                    }
                    weights.push(w);
                }
                Node::Sum { children, weights }
            }
            other => return err(ln, format!("unknown node kind '{other}'")),
        };
        nodes.push(node);
    }
    let Some(root) = root else {
        return err(last_line, "missing root line 'r <id>'");
    };
    Circuit::new(num_vars, nodes, root).or_else(|e| err(last_line, e.to_string()))
}

pub fn read_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    Ok(parse_circuit(&std::fs::read_to_string(path)?)?)
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = format!("pc {}\n", circuit.num_vars());
    for (i, node) in circuit.nodes().iter().enumerate() {
        match node {
            Node::Leaf { var, value } => writeln!(out, "l {i} {var} {}", u8::from(*value)),
            Node::Product { children } => {
                write!(out, "p {i} {}", children.len()).unwrap();
                for c in children {
                    write!(out, " {c}").unwrap();
                }
                writeln!(out)
            }
            Node::Sum { children, weights } => {
                write!(out, "s {i} {}", children.len()).unwrap();
                for (c, w) in children.iter().zip(weights) {
                    write!(out, " {c} {w:?}").unwrap();
                }
                writeln!(out)
            }
        }
        .unwrap();
    }
    writeln!(out, "r {}", circuit.root()).unwrap();
    out
}

pub fn parse_instance(text: &str) -> std::result::Result<MmapInstance, ParseError> {
    let mut query = Vec::new();
    let mut evidence = Vec::new();
    let mut last = 1;
    for (ln, toks) in content_lines(text) {
        last = ln;
        match toks[0] {
            "q" => {
                for t in &toks[1..] {
                    query.push(parse_num(ln, Some(t), "query variable")?);
                }
            }
            "e" => {
                for t in &toks[1..] {
                    let Some((var, value)) = t.split_once('=') else {
                        return err(ln, format!("evidence '{t}' is not <var>=<0|1>"));
                    };
                    let var: usize = parse_num(ln, Some(&var), "evidence variable")?;
                    let value = match value {
                        "0" => false,
                        "1" => true,
                        other => return err(ln, format!("evidence value must be 0 or 1, got '{other}'")),
                    };
                    evidence.push(Literal::new(var, value));
                }
            }
            other => return err(ln, format!("unknown instance line kind '{other}'")),
        }
    }
    MmapInstance::new(query, evidence).or_else(|e| err(last, e.to_string()))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<MmapInstance> {
    Ok(parse_instance(&std::fs::read_to_string(path)?)?)
}

pub fn serialize_instance(instance: &MmapInstance) -> String {
    let mut out = String::from("q");
    for q in instance.query() {
        write!(out, " {q}").unwrap();
    }
    out.push('\n');
    if !instance.evidence().is_empty() {
        out.push('e');
        for e in instance.evidence() {
            write!(out, " {e}").unwrap();
        }
        out.push('\n');
    }
    out
}
