//! Graphviz rendering. Leaves are shaded in grey, darker for larger effects.

use std::fmt::Write;

use crate::tree::{CausalTree, TreeNode};

/// Grey level for an effect, from 235 (most negative) down to 45 (most positive).
pub fn shade(ace: f64, max_abs: f64) -> u8 {
    let x = if max_abs > 0.0 { (ace / max_abs).clamp(-1.0, 1.0) } else { 0.0 };
    (140.0 - 95.0 * x).round() as u8
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(tree: &CausalTree) -> String {
    let max_abs = tree
        .root
        .leaves()
        .iter()
        .map(|(_, l)| l.ace.abs())
        .fold(0.0, f64::max);
    let mut out = String::from("digraph causal_tree {\n  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n");
    let mut edges = String::new();
    fn walk(
        node: &TreeNode,
        tree: &CausalTree,
        max_abs: f64,
        next: &mut usize,
        out: &mut String,
        edges: &mut String,
    ) -> usize {
        let id = *next;
        *next += 1;
        match (&node.rule, node.children()) {
            (Some(rule), Some((l, r))) => {
                let name = tree
                    .feature_names
                    .get(rule.feature)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", rule.feature));
                writeln!(
                    out,
                    "  n{id} [label=\"{} <= {}\", fillcolor=\"white\"];",
                    escape(&name),
                    rule.threshold
                )
                .unwrap();
                let li = walk(l, tree, max_abs, next, out, edges);
                let ri = walk(r, tree, max_abs, next, out, edges);
                writeln!(edges, "  n{id} -> n{li} [label=\"yes\"];").unwrap();
                writeln!(edges, "  n{id} -> n{ri} [label=\"no\"];").unwrap();
            }
            _ => {
                let mut label = format!("ACE {}", node.ace);
                if let Some(t) = node.trigger {
                    write!(label, "\\ntrigger >= {t}").unwrap();
                }
                write!(label, "\\nn = {}", node.n_treated + node.n_control).unwrap();
                if let Some(p) = node.p_value {
                    write!(label, "\\np = {p:.3e}").unwrap();
                }
                let g = shade(node.ace, max_abs);
                let font = if g < 110 { "white" } else { "black" };
                writeln!(
                    out,
                    "  n{id} [label=\"{label}\", fillcolor=\"#{g:02x}{g:02x}{g:02x}\", fontcolor=\"{font}\"];"
                )
                .unwrap();
            }
        }
        id
    }
    walk(&tree.root, tree, max_abs, &mut 0, &mut out, &mut edges);
    out.push_str(&edges);
    out.push_str("}\n");
    out
}
