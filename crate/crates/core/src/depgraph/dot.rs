use std::fmt::Write;

use super::{vertex_name, LabelledDepGraph, SccAnalysis};
use crate::model::Program;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering with one cluster per nontrivial component.
pub fn ledgraph_dot(p: &Program, g: &LabelledDepGraph, scc: &SccAnalysis) -> String {
    let mut s = String::from("digraph ledgraph {\n  rankdir=LR;\n");
    for c in &scc.components {
        let indent = if c.nontrivial {
            let _ = writeln!(s, "  subgraph cluster_{} {{\n    label=\"SCC {}\";", c.id, c.id);
            "    "
        } else {
            "  "
        };
        for &v in &c.vertices {
            let _ = writeln!(s, "{indent}v{} [label={}];", v.0, quote(&vertex_name(p, v)));
        }
        if c.nontrivial {
            s.push_str("  }\n");
        }
    }
    for e in &g.edges {
        let _ = writeln!(
            s,
            "  v{} -> v{} [label={}];",
            e.from.0,
            e.to.0,
            quote(p.var_name(e.label))
        );
    }
    s.push_str("}\n");
    s
}
