//! Tree export as a stable JSON document, and the reverse.
//!
//! The document is self-consistent by construction: range endpoints are
//! rounded to 6 significant digits first, and every node's sigma is the
//! decision-space fraction recomputed from those rounded endpoints (against
//! the root node's ranges, which are the initial ranges), rounded last. A
//! reader recomputing sigma from the document therefore agrees with the
//! stored value to the final rounding, the root's sigma is exactly 1, and
//! decimal rounding is monotone so child ranges stay inside parent ranges
//! and sigma never grows toward the leaves.
//!
//! Thresholds are reported both in the space the tree was fitted on
//! (`threshold_normalized`) and denormalized to raw units (`threshold_raw`);
//! without a normalization the two coincide (discovery trees run on raw
//! inputs). Re-importing routes by `threshold_normalized`, so predictions
//! agree with the original tree up to the 6-digit rounding of thresholds.

use serde::{Deserialize, Serialize};

use super::sig6;
use crate::scenario::{LockLevel, NodeSummary, Normalization, OutputDescriptor};
use crate::tree::{NodeKind, StorylineTree, TreeNode};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDocument {
    pub name: String,
    pub unit: String,
    pub min: f64,
    pub max: f64,
    pub lock: LockLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_normalized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_raw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub count: usize,
    pub sigma: f64,
    pub ranges: Vec<RangeDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDocument {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_before: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_after: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub nodes: Vec<NodeDocument>,
    pub root: usize,
    pub meta: MetaDocument,
}

/// Map a value from the tree's fitted space to raw units, when a
/// normalization is in play.
fn to_raw(norm: Option<&Normalization>, col: usize, v: f64) -> f64 {
    match norm {
        Some(n) => n.denormalize_value(col, v),
        None => v,
    }
}

/// Ratio of a node range to the root range, both already rounded. A root
/// column whose rounded width collapses to zero contributes 1, mirroring
/// how constant inputs are treated during fitting.
fn rounded_ratio(node: (f64, f64), root: (f64, f64)) -> f64 {
    let root_width = root.1 - root.0;
    if root_width > 0.0 {
        (node.1 - node.0) / root_width
    } else {
        1.0
    }
}

/// Build the export document. `descriptors` supply per-feature units in the
/// tree's feature order; `normalization`, when given, maps the fitted space
/// back to raw units for `threshold_raw` and the range endpoints.
pub fn tree_document(
    tree: &StorylineTree,
    descriptors: &[OutputDescriptor],
    normalization: Option<&Normalization>,
    meta: MetaDocument,
) -> Result<TreeDocument> {
    if descriptors.len() != tree.n_features() {
        return Err(Error::DimensionMismatch {
            expected: tree.n_features(),
            got: descriptors.len(),
        });
    }
    let rounded_ranges: Vec<Vec<(f64, f64)>> = tree
        .nodes()
        .iter()
        .map(|node| {
            node.summary
                .ranges
                .iter()
                .enumerate()
                .map(|(col, &(lo, hi))| {
                    (
                        sig6(to_raw(normalization, col, lo)),
                        sig6(to_raw(normalization, col, hi)),
                    )
                })
                .collect()
        })
        .collect();
    let root_ranges = &rounded_ranges[tree.root_id()];
    let nodes = tree
        .nodes()
        .iter()
        .map(|node| {
            let ranges = rounded_ranges[node.id]
                .iter()
                .zip(descriptors)
                .zip(&node.summary.locks)
                .map(|(((lo, hi), d), &lock)| RangeDocument {
                    name: d.name.clone(),
                    unit: d.unit.clone(),
                    min: *lo,
                    max: *hi,
                    lock,
                })
                .collect();
            let sigma = sig6(
                rounded_ranges[node.id]
                    .iter()
                    .zip(root_ranges)
                    .map(|(&node_r, &root_r)| rounded_ratio(node_r, root_r))
                    .product(),
            );
            let (kind, feature, threshold_normalized, threshold_raw, label, left, right) =
                match &node.kind {
                    NodeKind::Internal {
                        feature,
                        threshold,
                        left,
                        right,
                    } => (
                        "internal",
                        Some(descriptors[*feature].name.clone()),
                        Some(sig6(*threshold)),
                        Some(sig6(to_raw(normalization, *feature, *threshold))),
                        None,
                        Some(*left),
                        Some(*right),
                    ),
                    NodeKind::Leaf { label } => {
                        ("leaf", None, None, None, Some(*label), None, None)
                    }
                };
            NodeDocument {
                id: node.id,
                kind: kind.to_string(),
                feature,
                threshold_normalized,
                threshold_raw,
                label,
                count: node.member_count,
                sigma,
                ranges,
                left,
                right,
            }
        })
        .collect();
    Ok(TreeDocument {
        nodes,
        root: tree.root_id(),
        meta,
    })
}

/// Serialize a document to its canonical text form: pretty-printed with a
/// trailing newline, keys in declaration order, byte-identical for equal
/// documents.
pub fn document_to_string(doc: &TreeDocument) -> Result<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

/// [`tree_document`] + [`document_to_string`] in one step.
pub fn export_tree_json(
    tree: &StorylineTree,
    descriptors: &[OutputDescriptor],
    normalization: Option<&Normalization>,
    meta: MetaDocument,
) -> Result<String> {
    document_to_string(&tree_document(tree, descriptors, normalization, meta)?)
}

pub fn parse_tree_json(text: &str) -> Result<TreeDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Rebuild a routable tree from a document.
///
/// Routing uses `threshold_normalized`, so the reconstruction predicts in
/// the same space the original was fitted on. Summaries carry the document's
/// (raw-unit, rounded) ranges and sigma. Children must carry larger ids than
/// their parent, which both matches how trees are grown and rules out cycles.
pub fn tree_from_document(doc: &TreeDocument) -> Result<StorylineTree> {
    let bad = |msg: String| Error::BadTreeDocument(msg);
    if doc.nodes.is_empty() {
        return Err(bad("no nodes".to_string()));
    }
    if doc.root >= doc.nodes.len() {
        return Err(bad(format!("root id {} out of range", doc.root)));
    }
    let feature_names: Vec<String> = doc.nodes[doc.root]
        .ranges
        .iter()
        .map(|r| r.name.clone())
        .collect();
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (idx, n) in doc.nodes.iter().enumerate() {
        if n.id != idx {
            return Err(bad(format!("node at position {idx} carries id {}", n.id)));
        }
        let kind = match n.kind.as_str() {
            "internal" => {
                let feature_name = n
                    .feature
                    .as_ref()
                    .ok_or_else(|| bad(format!("internal node {idx} lacks a feature")))?;
                let feature = feature_names
                    .iter()
                    .position(|f| f == feature_name)
                    .ok_or_else(|| bad(format!("unknown feature '{feature_name}'")))?;
                let threshold = n
                    .threshold_normalized
                    .ok_or_else(|| bad(format!("internal node {idx} lacks a threshold")))?;
                let (left, right) = match (n.left, n.right) {
                    (Some(l), Some(r)) => (l, r),
                    _ => return Err(bad(format!("internal node {idx} lacks children"))),
                };
                if left <= idx
                    || right <= idx
                    || left >= doc.nodes.len()
                    || right >= doc.nodes.len()
                {
                    return Err(bad(format!(
                        "node {idx} children ({left}, {right}) must follow it and exist"
                    )));
                }
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                }
            }
            "leaf" => NodeKind::Leaf {
                label: n
                    .label
                    .ok_or_else(|| bad(format!("leaf node {idx} lacks a label")))?,
            },
            other => return Err(bad(format!("unknown node kind '{other}'"))),
        };
        if n.ranges.len() != feature_names.len() {
            return Err(bad(format!(
                "node {idx} carries {} ranges, expected {}",
                n.ranges.len(),
                feature_names.len()
            )));
        }
        let summary = NodeSummary {
            count: n.count,
            ranges: n.ranges.iter().map(|r| (r.min, r.max)).collect(),
            sigma: n.sigma,
            locks: n.ranges.iter().map(|r| r.lock).collect(),
        };
        nodes.push(TreeNode {
            id: n.id,
            kind,
            member_count: n.count,
            summary,
        });
    }
    let max_leaves = nodes.iter().filter(|n| n.is_leaf()).count();
    Ok(StorylineTree::from_parts(
        nodes,
        doc.root,
        max_leaves,
        feature_names,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DataMatrix;
    use crate::scenario::{
        apply_normalization, build_scenario_matrix, fit_normalization, DescriptorKind,
        LockThresholds,
    };
    use crate::tree::fit_tree;

    fn fixture() -> (StorylineTree, Vec<OutputDescriptor>, Normalization) {
        let columns = vec![
            (
                "heat".to_string(),
                "%".to_string(),
                DescriptorKind::OutputOfInterest,
            ),
            (
                "wind".to_string(),
                "EJ/yr".to_string(),
                DescriptorKind::OutputOfInterest,
            ),
        ];
        let rows = vec![
            vec![10.0, 100.0],
            vec![20.0, 140.0],
            vec![80.0, 420.0],
            vec![90.0, 390.0],
            vec![15.0, 120.0],
            vec![85.0, 400.0],
        ];
        let matrix = build_scenario_matrix(&columns, rows).unwrap();
        let norm = fit_normalization(&matrix);
        let (x, _) = apply_normalization(&matrix, &norm).unwrap();
        let labels = vec![0, 0, 1, 1, 0, 1];
        let tree = fit_tree(
            &x,
            &labels,
            2,
            &matrix.feature_names(),
            LockThresholds::default(),
        )
        .unwrap();
        (tree, matrix.descriptors().to_vec(), norm)
    }

    fn meta() -> MetaDocument {
        MetaDocument {
            k: 2,
            d_before: Some(0.5),
            d_after: Some(0.5),
            seed: 7,
        }
    }

    #[test]
    fn root_sigma_is_exactly_one() {
        let (tree, descriptors, norm) = fixture();
        let doc = tree_document(&tree, &descriptors, Some(&norm), meta()).unwrap();
        assert_eq!(doc.nodes[doc.root].sigma, 1.0);
    }

    /// One unit in the 6th significant decimal digit of `v`.
    fn ulp6(v: f64) -> f64 {
        if v == 0.0 {
            0.0
        } else {
            10f64.powi(v.abs().log10().floor() as i32 - 5)
        }
    }

    #[test]
    fn sigma_recomputes_from_the_exported_ranges() {
        let (tree, descriptors, norm) = fixture();
        let doc = tree_document(&tree, &descriptors, Some(&norm), meta()).unwrap();
        let root = &doc.nodes[doc.root];
        for node in &doc.nodes {
            let recomputed: f64 = node
                .ranges
                .iter()
                .zip(&root.ranges)
                .map(|(n, r)| (n.max - n.min) / (r.max - r.min))
                .product();
            assert!(
                (node.sigma - recomputed).abs() <= ulp6(recomputed) * 1.000001,
                "node {}: stored {} vs recomputed {}",
                node.id,
                node.sigma,
                recomputed
            );
        }
    }

    #[test]
    fn child_ranges_nest_and_sigma_shrinks() {
        let (tree, descriptors, norm) = fixture();
        let doc = tree_document(&tree, &descriptors, Some(&norm), meta()).unwrap();
        for node in &doc.nodes {
            if let (Some(l), Some(r)) = (node.left, node.right) {
                for child in [l, r] {
                    let child = &doc.nodes[child];
                    assert!(child.sigma <= node.sigma);
                    for (c, p) in child.ranges.iter().zip(&node.ranges) {
                        assert!(c.min >= p.min && c.max <= p.max);
                    }
                }
            }
        }
    }

    #[test]
    fn thresholds_come_out_in_both_spaces() {
        let (tree, descriptors, norm) = fixture();
        let doc = tree_document(&tree, &descriptors, Some(&norm), meta()).unwrap();
        let root = &doc.nodes[doc.root];
        assert_eq!(root.kind, "internal");
        let tn = root.threshold_normalized.unwrap();
        let tr = root.threshold_raw.unwrap();
        assert!((0.0..=1.0).contains(&tn));
        assert!(tr > 1.0, "raw threshold should be in raw units, got {tr}");
    }

    #[test]
    fn export_parse_export_is_byte_identical() {
        let (tree, descriptors, norm) = fixture();
        let text = export_tree_json(&tree, &descriptors, Some(&norm), meta()).unwrap();
        let doc = parse_tree_json(&text).unwrap();
        let text2 = document_to_string(&doc).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn reimported_tree_predicts_identically_on_training_points() {
        let (tree, descriptors, norm) = fixture();
        let columns = vec![
            (
                "heat".to_string(),
                "%".to_string(),
                DescriptorKind::OutputOfInterest,
            ),
            (
                "wind".to_string(),
                "EJ/yr".to_string(),
                DescriptorKind::OutputOfInterest,
            ),
        ];
        let rows = vec![
            vec![10.0, 100.0],
            vec![20.0, 140.0],
            vec![80.0, 420.0],
            vec![90.0, 390.0],
            vec![15.0, 120.0],
            vec![85.0, 400.0],
        ];
        let matrix = build_scenario_matrix(&columns, rows).unwrap();
        let (x, _) = apply_normalization(&matrix, &norm).unwrap();
        let text = export_tree_json(&tree, &descriptors, Some(&norm), meta()).unwrap();
        let rebuilt = tree_from_document(&parse_tree_json(&text).unwrap()).unwrap();
        assert_eq!(
            tree.predict_all(&x).unwrap(),
            rebuilt.predict_all(&x).unwrap()
        );
        assert_eq!(rebuilt.feature_names(), tree.feature_names());
    }

    #[test]
    fn single_leaf_document_has_no_thresholds() {
        let x = DataMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let tree = fit_tree(
            &x,
            &[0, 0],
            1,
            &["y0".to_string()],
            LockThresholds::default(),
        )
        .unwrap();
        let descriptors = vec![OutputDescriptor::unitless("y0")];
        let doc = tree_document(&tree, &descriptors, None, meta()).unwrap();
        assert_eq!(doc.nodes.len(), 1);
        assert_eq!(doc.nodes[0].kind, "leaf");
        assert_eq!(doc.nodes[0].sigma, 1.0);
        assert_eq!(doc.nodes[0].threshold_raw, None);
        assert_eq!(doc.nodes[0].feature, None);
        let text = document_to_string(&doc).unwrap();
        assert!(!text.contains("threshold"));
    }

    #[test]
    fn cyclic_or_backward_documents_are_rejected() {
        let (tree, descriptors, norm) = fixture();
        let mut doc = tree_document(&tree, &descriptors, Some(&norm), meta()).unwrap();
        let root = doc.root;
        doc.nodes[root].left = Some(root);
        let err = tree_from_document(&doc).unwrap_err();
        assert!(matches!(err, Error::BadTreeDocument(_)));
    }
}
