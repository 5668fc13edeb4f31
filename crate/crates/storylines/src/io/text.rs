//! Plain-text and DOT renderings of a tree document.
//!
//! Both renderers consume the export document rather than the in-memory
//! tree, so the values they show (raw-unit thresholds, rounded ranges,
//! sigma) are exactly what the JSON artifact carries.

use std::fmt::Write;

use super::tree_json::{NodeDocument, TreeDocument};
use crate::Result;

fn node_line(node: &NodeDocument) -> String {
    let stats = format!("(n={}, \u{3a3}={:.3})", node.count, node.sigma);
    if node.kind == "internal" {
        let feature = node.feature.as_deref().unwrap_or("?");
        let threshold = node
            .threshold_raw
            .or(node.threshold_normalized)
            .unwrap_or(f64::NAN);
        let unit = node
            .ranges
            .iter()
            .find(|r| r.name == feature)
            .map(|r| r.unit.as_str())
            .unwrap_or("unitless");
        if unit == "unitless" {
            format!("{feature} \u{2264} {threshold} {stats}")
        } else {
            format!("{feature} \u{2264} {threshold} {unit} {stats}")
        }
    } else {
        format!("Storyline {} {stats}", node.label.unwrap_or(0))
    }
}

/// Render an indented tree, one line per node, two spaces per depth level.
///
/// Internal nodes print their split as `feature ≤ threshold unit`; the first
/// child below holds the scenarios satisfying the condition, the second the
/// rest. Leaves print their storyline label. Every line ends with the member
/// count and the decision-space fraction, so the root reads `Σ=1.000`.
pub fn render_tree_text(doc: &TreeDocument) -> Result<String> {
    let mut out = String::new();
    let mut stack = vec![(doc.root, 0usize)];
    while let Some((id, depth)) = stack.pop() {
        let node = &doc.nodes[id];
        writeln!(out, "{}{}", "  ".repeat(depth), node_line(node)).expect("string write");
        if let (Some(left), Some(right)) = (node.left, node.right) {
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
        }
    }
    Ok(out)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Render the tree topology as a Graphviz digraph, ASCII-only so it feeds
/// external graph tooling unchanged. Nodes are emitted in id order, then
/// edges in id order with `<=` / `>` branch labels.
pub fn render_tree_dot(doc: &TreeDocument) -> Result<String> {
    let mut out = String::from("digraph storylines {\n");
    out.push_str("  node [shape=box, fontname=\"sans-serif\"];\n");
    for node in &doc.nodes {
        let label = if node.kind == "internal" {
            format!(
                "{} <= {}\\nn={}, sigma={:.3}",
                dot_escape(node.feature.as_deref().unwrap_or("?")),
                node.threshold_raw
                    .or(node.threshold_normalized)
                    .unwrap_or(f64::NAN),
                node.count,
                node.sigma
            )
        } else {
            format!(
                "Storyline {}\\nn={}, sigma={:.3}",
                node.label.unwrap_or(0),
                node.count,
                node.sigma
            )
        };
        writeln!(out, "  n{} [label=\"{label}\"];", node.id).expect("string write");
    }
    for node in &doc.nodes {
        if let (Some(left), Some(right)) = (node.left, node.right) {
            writeln!(out, "  n{} -> n{left} [label=\"<=\"];", node.id).expect("string write");
            writeln!(out, "  n{} -> n{right} [label=\">\"];", node.id).expect("string write");
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::tree_json::{tree_document, MetaDocument};
    use crate::matrix::DataMatrix;
    use crate::scenario::{LockThresholds, OutputDescriptor};
    use crate::tree::fit_tree;

    fn two_leaf_doc() -> TreeDocument {
        let x = DataMatrix::from_rows(vec![
            vec![1.0, 10.0],
            vec![2.0, 11.0],
            vec![8.0, 30.0],
            vec![9.0, 31.0],
        ])
        .unwrap();
        let names = vec!["heat".to_string(), "wind".to_string()];
        let tree = fit_tree(&x, &[0, 0, 1, 1], 2, &names, LockThresholds::default()).unwrap();
        let descriptors = vec![
            OutputDescriptor::new(
                "heat",
                "%",
                crate::scenario::DescriptorKind::OutputOfInterest,
            ),
            OutputDescriptor::new(
                "wind",
                "EJ/yr",
                crate::scenario::DescriptorKind::OutputOfInterest,
            ),
        ];
        let meta = MetaDocument {
            k: 2,
            d_before: None,
            d_after: None,
            seed: 7,
        };
        tree_document(&tree, &descriptors, None, meta).unwrap()
    }

    #[test]
    fn two_leaf_tree_renders_three_lines() {
        let text = render_tree_text(&two_leaf_doc()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(
            lines[0].contains('\u{2264}'),
            "root shows its split: {}",
            lines[0]
        );
        assert!(lines[0].ends_with("\u{3a3}=1.000)"));
        assert!(lines[1].starts_with("  Storyline 0 "));
        assert!(lines[2].starts_with("  Storyline 1 "));
    }

    #[test]
    fn split_line_carries_the_unit() {
        let text = render_tree_text(&two_leaf_doc()).unwrap();
        assert!(text.contains("heat \u{2264} 5 % (n=4"), "got: {text}");
    }

    #[test]
    fn unitless_columns_omit_the_unit_word() {
        let x = DataMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let names = vec!["y0".to_string()];
        let tree = fit_tree(&x, &[0, 0, 1, 1], 2, &names, LockThresholds::default()).unwrap();
        let descriptors = vec![OutputDescriptor::unitless("y0")];
        let meta = MetaDocument {
            k: 2,
            d_before: None,
            d_after: None,
            seed: 7,
        };
        let doc = tree_document(&tree, &descriptors, None, meta).unwrap();
        let text = render_tree_text(&doc).unwrap();
        assert!(text.contains("y0 \u{2264} 1.5 (n=4"), "got: {text}");
        assert!(!text.contains("unitless"));
    }

    #[test]
    fn repeated_rendering_is_byte_identical() {
        let doc = two_leaf_doc();
        assert_eq!(
            render_tree_text(&doc).unwrap(),
            render_tree_text(&doc).unwrap()
        );
        assert_eq!(
            render_tree_dot(&doc).unwrap(),
            render_tree_dot(&doc).unwrap()
        );
    }

    #[test]
    fn dot_output_is_ascii_with_branch_labels() {
        let dot = render_tree_dot(&two_leaf_doc()).unwrap();
        assert!(dot.is_ascii());
        assert!(dot.starts_with("digraph storylines {"));
        assert!(dot.contains("n0 -> n1 [label=\"<=\"];"));
        assert!(dot.contains("n0 -> n2 [label=\">\"];"));
        assert!(dot.contains("sigma=1.000"));
    }

    #[test]
    fn dot_escapes_quotes_in_names() {
        let mut doc = two_leaf_doc();
        doc.nodes[0].feature = Some("he\"at".to_string());
        let dot = render_tree_dot(&doc).unwrap();
        assert!(dot.contains("he\\\"at"));
    }
}
