use std::fmt::Write as _;

use crate::order::{EdgeKind, EventId, HappensBeforeDag};

fn node_name(e: &EventId) -> String {
    quote(&format!("{}_{}", e.chain, e.height))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Graphviz rendering of the DAG. Nodes are named `chain_height` and
/// labelled `chain:height`; chain links are solid, accepted associations
/// dashed. Nodes and edges appear in (chain, height) order.
pub fn export_dot(dag: &HappensBeforeDag) -> String {
    let mut out = String::from("digraph happens_before {\n  rankdir=LR;\n");
    for e in dag.nodes() {
        writeln!(out, "  {} [label={}];", node_name(e), quote(&e.to_string())).unwrap();
    }
    for edge in dag.edges() {
        let style = match edge.kind {
            EdgeKind::IntraChain => "solid",
            EdgeKind::CrossChain => "dashed",
        };
        writeln!(
            out,
            "  {} -> {} [style={style}];",
            node_name(&edge.from),
            node_name(&edge.to)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
