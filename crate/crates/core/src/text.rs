//! Line oriented DAG dump, used to replay failing cases.
//!
//! ```text
//! exactdag-dag 1
//! 0 DOUBLE 1 +0x1p+1
//! 1 ROOT 2 0
//! 2 SUBTRACTION 1 1 0
//! root 2
//! ```
//! Leaves carry their exact value as a hex bigfloat; inner nodes list child ids.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bigfloat::BigFloat;
use crate::dag::{reachable, Node, NodeKind};
use crate::real::Real;

const HEADER: &str = "exactdag-dag 1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

pub fn serialize(root: &Real) -> String {
    serialize_node(root.node())
}

pub fn serialize_node(root: &Arc<Node>) -> String {
    let nodes = reachable(root);
    let idx: HashMap<u64, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id(), i)).collect();
    let mut out = String::from(HEADER);
    out.push('\n');
    for (i, n) in nodes.iter().enumerate() {
        let st = n.state.read();
        let kind = st.kind();
        out.push_str(&format!("{i} {} {}", kind.name(), st.degree()));
        match kind {
            NodeKind::Double => out.push_str(&format!(" {}", BigFloat::from_f64(st.interval.get_point()))),
            NodeKind::BigFloat => out.push_str(&format!(" {}", st.data().approx)),
            _ => {
                for c in st.x.iter().chain(st.y.iter()) {
                    out.push_str(&format!(" {}", idx[&c.id()]));
                }
            }
        }
        out.push('\n');
    }
    out.push_str(&format!("root {}\n", idx[&root.id()]));
    out
}

pub fn parse(text: &str) -> Result<Real, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: &str| ParseError { line: line + 1, msg: msg.to_string() };
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        Some((n, _)) => return Err(err(n, "missing header")),
        None => return Err(err(0, "empty input")),
    }
    let mut nodes: Vec<Arc<Node>> = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "root" {
            let i: usize = f.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| err(n, "bad root line"))?;
            return nodes.get(i).cloned().map(Real::from_node).ok_or_else(|| err(n, "root id out of range"));
        }
        if f.len() < 3 {
            return Err(err(n, "too few fields"));
        }
        let id: usize = f[0].parse().map_err(|_| err(n, "bad id"))?;
        if id != nodes.len() {
            return Err(err(n, "ids must be consecutive"));
        }
        let kind = NodeKind::from_name(f[1]).ok_or_else(|| err(n, "unknown kind"))?;
        let degree: u32 = f[2].parse().map_err(|_| err(n, "bad degree"))?;
        let child = |k: usize| -> Result<Arc<Node>, ParseError> {
            let c: usize = f.get(3 + k).and_then(|s| s.parse().ok()).ok_or_else(|| err(n, "bad child id"))?;
            nodes.get(c).cloned().ok_or_else(|| err(n, "child id not defined yet"))
        };
        let node = match kind {
            NodeKind::Double | NodeKind::BigFloat => {
                let v: BigFloat = f.get(3).ok_or_else(|| err(n, "missing payload"))?.parse().map_err(|_| err(n, "bad payload"))?;
                if kind == NodeKind::Double {
                    let d = v.to_f64(crate::bigfloat::RoundingMode::Nearest);
                    if BigFloat::from_f64(d) != v {
                        return Err(err(n, "payload is not a double"));
                    }
                    Node::double(d).map_err(|e| err(n, &e.to_string()))?
                } else {
                    Node::bigfloat(v)
                }
            }
            NodeKind::Negation => Node::neg(&child(0)?),
            NodeKind::Root => Node::root(&child(0)?, degree).map_err(|e| err(n, &e.to_string()))?,
            k => Node::binary(k, &child(0)?, &child(1)?),
        };
        nodes.push(node);
    }
    Err(ParseError { line: text.lines().count(), msg: "missing root line".into() })
}
