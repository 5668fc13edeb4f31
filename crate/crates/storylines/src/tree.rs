//! Leaf-limited greedy classification trees over outputs of interest, and
//! the re-ordering step that makes clusters exactly tree-definable.
//!
//! Trees are grown best-first: among all current leaves, the one whose best
//! split yields the greatest Gini impurity decrease is expanded, until the
//! leaf budget is reached or no split helps. With the budget set to the
//! cluster count k, each leaf becomes one storyline. [`reorder`] then
//! reassigns every scenario to the cluster its leaf predicts, trading a
//! small increase in the distance measure for exact describability.
//!
//! All tie-breaking is deterministic (impurity decrease, then feature index,
//! then threshold, then node id), so identical inputs grow identical trees.

use crate::cluster::{
    centers_from_labels, distance_measure, elbow_curve, ClusterAssignment, KMeansParams,
};
use crate::matrix::DataMatrix;
use crate::scenario::{node_summary_tolerant, LockThresholds, NodeSummary};
use crate::{Error, Result};

/// A winning split: feature column, midpoint threshold, and the weighted
/// Gini impurity decrease it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Node payload: either a split or a storyline label.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub kind: NodeKind,
    pub summary: NodeSummary,
    pub member_count: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// Binary decision tree in the space it was fitted on. Node 0 is created
/// first but [`StorylineTree::root_id`] is authoritative; children carry
/// higher ids than their parent (creation order).
#[derive(Debug, Clone, PartialEq)]
pub struct StorylineTree {
    nodes: Vec<TreeNode>,
    root: usize,
    max_leaves: usize,
    feature_names: Vec<String>,
}

impl StorylineTree {
    /// Assemble a tree from pre-validated parts; used by the JSON importer.
    /// Callers must ensure children ids exceed their parent's id (which also
    /// rules out cycles) and that the root exists.
    pub(crate) fn from_parts(
        nodes: Vec<TreeNode>,
        root: usize,
        max_leaves: usize,
        feature_names: Vec<String>,
    ) -> Self {
        Self {
            nodes,
            root,
            max_leaves,
            feature_names,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root_id(&self) -> usize {
        self.root
    }

    pub fn max_leaves(&self) -> usize {
        self.max_leaves
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    /// Root-to-leaf descent; values at or below a threshold go left.
    pub fn predict(&self, y: &[f64]) -> Result<usize> {
        if y.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: y.len(),
            });
        }
        let mut id = self.root;
        loop {
            match &self.nodes[id].kind {
                NodeKind::Leaf { label } => return Ok(*label),
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if y[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Predicted label per row.
    pub fn predict_all(&self, x: &DataMatrix) -> Result<Vec<usize>> {
        (0..x.n_rows()).map(|i| self.predict(x.row(i))).collect()
    }

    /// Number of internal nodes splitting on each feature, in feature order.
    /// Counts sum to (leaf count − 1); features never split on map to 0.
    pub fn split_counts(&self) -> Vec<(String, usize)> {
        let mut counts = vec![0usize; self.feature_names.len()];
        for node in &self.nodes {
            if let NodeKind::Internal { feature, .. } = node.kind {
                counts[feature] += 1;
            }
        }
        self.feature_names.iter().cloned().zip(counts).collect()
    }

    /// True when some feature is split on more than once; a hint that k may
    /// be larger than the outputs can cleanly describe.
    pub fn has_repeated_split(&self) -> bool {
        self.split_counts().iter().any(|(_, c)| *c >= 2)
    }

    /// Column indices of the features actually split on, ascending.
    pub fn features_used(&self) -> Vec<usize> {
        self.split_counts()
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| *c > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Gini impurity from class counts; `n` is the total count.
fn gini(counts: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

fn class_counts(labels: &[usize], members: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &i in members {
        counts[labels[i]] += 1;
    }
    counts
}

/// Exhaustive best split over the member rows: every feature, every midpoint
/// between consecutive distinct sorted values. Returns `None` when no split
/// strictly reduces the weighted Gini impurity. Ties break to the largest
/// decrease, then the lowest feature index, then the smallest threshold.
pub fn best_split(x: &DataMatrix, labels: &[usize], members: &[usize]) -> Option<SplitCandidate> {
    let n = members.len();
    if n < 2 {
        return None;
    }
    let n_classes = members.iter().map(|&i| labels[i]).max().unwrap() + 1;
    let parent_counts = class_counts(labels, members, n_classes);
    let parent_impurity = gini(&parent_counts, n);
    if parent_impurity == 0.0 {
        return None;
    }
    let mut best: Option<SplitCandidate> = None;
    for feature in 0..x.n_cols() {
        let mut pairs: Vec<(f64, usize)> = members
            .iter()
            .map(|&i| (x.get(i, feature), labels[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_counts = vec![0usize; n_classes];
        let mut n_left = 0usize;
        for w in 0..n - 1 {
            left_counts[pairs[w].1] += 1;
            n_left += 1;
            let (a, b) = (pairs[w].0, pairs[w + 1].0);
            if a == b {
                continue;
            }
            let threshold = 0.5 * (a + b);
            if threshold <= a || threshold >= b {
                continue;
            }
            let n_right = n - n_left;
            let right_counts: Vec<usize> = parent_counts
                .iter()
                .zip(&left_counts)
                .map(|(p, l)| p - l)
                .collect();
            let decrease = parent_impurity
                - (n_left as f64 / n as f64) * gini(&left_counts, n_left)
                - (n_right as f64 / n as f64) * gini(&right_counts, n_right);
            if decrease > best.map_or(0.0, |b| b.decrease) {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

/// Majority label among the member rows, ties to the lowest label.
fn majority_label(labels: &[usize], members: &[usize]) -> usize {
    let n_classes = members.iter().map(|&i| labels[i]).max().unwrap() + 1;
    let counts = class_counts(labels, members, n_classes);
    let mut best = 0;
    for (label, &count) in counts.iter().enumerate() {
        if count > counts[best] {
            best = label;
        }
    }
    best
}

struct GrowNode {
    members: Vec<usize>,
    summary: NodeSummary,
    split: Option<SplitCandidate>,
    resolved: Option<(usize, f64, usize, usize)>,
}

/// Best-first greedy induction with a leaf budget.
///
/// Grows from a single root leaf; each step expands the leaf whose best
/// split gives the greatest impurity decrease (ties: lower node id) until
/// the tree has `max_leaves` leaves or no leaf has an impurity-reducing
/// split. Leaves predict the majority label of their members (ties: lowest
/// label). Every node carries a [`NodeSummary`] relative to the root ranges.
pub fn fit_tree(
    x: &DataMatrix,
    labels: &[usize],
    max_leaves: usize,
    feature_names: &[String],
    lock_thresholds: LockThresholds,
) -> Result<StorylineTree> {
    if max_leaves < 1 {
        return Err(Error::BadLeafBudget {
            min: 1,
            got: max_leaves,
        });
    }
    if x.n_rows() == 0 {
        return Err(Error::EmptyMemberSet);
    }
    if labels.len() != x.n_rows() {
        return Err(Error::RowCountMismatch {
            left: x.n_rows(),
            right: labels.len(),
        });
    }
    if feature_names.len() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            got: feature_names.len(),
        });
    }
    let initial_ranges: Vec<(f64, f64)> = (0..x.n_cols()).map(|c| x.column_extrema(c)).collect();
    let all_rows: Vec<usize> = (0..x.n_rows()).collect();
    let root_summary = node_summary_tolerant(x, &all_rows, &initial_ranges, lock_thresholds)?;
    let root_split = best_split(x, labels, &all_rows);
    let mut nodes = vec![GrowNode {
        members: all_rows,
        summary: root_summary,
        split: root_split,
        resolved: None,
    }];
    let mut n_leaves = 1;
    while n_leaves < max_leaves {
        let mut chosen: Option<(usize, SplitCandidate)> = None;
        for (id, node) in nodes.iter().enumerate() {
            if node.resolved.is_some() {
                continue;
            }
            if let Some(split) = node.split {
                if chosen.is_none_or(|(_, c)| split.decrease > c.decrease) {
                    chosen = Some((id, split));
                }
            }
        }
        let Some((id, split)) = chosen else { break };
        let mut left_members = Vec::new();
        let mut right_members = Vec::new();
        for &row in &nodes[id].members {
            if x.get(row, split.feature) <= split.threshold {
                left_members.push(row);
            } else {
                right_members.push(row);
            }
        }
        debug_assert!(!left_members.is_empty() && !right_members.is_empty());
        let left_id = nodes.len();
        let right_id = left_id + 1;
        for members in [left_members, right_members] {
            let summary = node_summary_tolerant(x, &members, &initial_ranges, lock_thresholds)?;
            let split = best_split(x, labels, &members);
            nodes.push(GrowNode {
                members,
                summary,
                split,
                resolved: None,
            });
        }
        nodes[id].resolved = Some((split.feature, split.threshold, left_id, right_id));
        n_leaves += 1;
    }
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(id, node)| {
            let kind = match node.resolved {
                Some((feature, threshold, left, right)) => NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                },
                None => NodeKind::Leaf {
                    label: majority_label(labels, &node.members),
                },
            };
            TreeNode {
                id,
                kind,
                member_count: node.summary.count,
                summary: node.summary,
            }
        })
        .collect();
    Ok(StorylineTree {
        nodes,
        root: 0,
        max_leaves,
        feature_names: feature_names.to_vec(),
    })
}

/// Outcome of re-ordering points to their tree-predicted clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReorderResult {
    pub labels_before: Vec<usize>,
    pub labels_after: Vec<usize>,
    pub d_before: f64,
    pub d_after: f64,
    pub moved_count: usize,
}

/// Reassign every scenario to the cluster its tree leaf predicts and
/// recompute the distance measure with centers re-derived as the means of
/// the new clusters. Errors if any cluster loses all members: storyline
/// semantics need every cluster populated.
pub fn reorder(
    x: &DataMatrix,
    assignment: &ClusterAssignment,
    tree: &StorylineTree,
) -> Result<ReorderResult> {
    let labels_after = tree.predict_all(x)?;
    for &label in &labels_after {
        if label >= assignment.k {
            return Err(Error::LabelOutOfRange {
                label,
                k: assignment.k,
            });
        }
    }
    let centers = centers_from_labels(x, assignment.k, &labels_after)?;
    let d_after = distance_measure(x, &labels_after, &centers)?;
    let moved_count = assignment
        .labels
        .iter()
        .zip(&labels_after)
        .filter(|(b, a)| b != a)
        .count();
    Ok(ReorderResult {
        labels_before: assignment.labels.clone(),
        labels_after,
        d_before: assignment.distance,
        d_after,
        moved_count,
    })
}

/// Elbow-curve hook that fits a k-leaf tree on each assignment, re-orders,
/// and reports the re-ordered distance.
pub fn tree_reorder_hook<'a>(
    x: &'a DataMatrix,
    feature_names: &'a [String],
    lock_thresholds: LockThresholds,
) -> impl FnMut(&ClusterAssignment) -> Result<Option<f64>> + 'a {
    move |assignment| {
        let tree = fit_tree(
            x,
            &assignment.labels,
            assignment.k,
            feature_names,
            lock_thresholds,
        )?;
        let result = reorder(x, assignment, &tree)?;
        Ok(Some(result.d_after))
    }
}

/// Advisory record for one candidate cluster count.
#[derive(Debug, Clone, PartialEq)]
pub struct KAdvice {
    pub k: usize,
    pub d_initial: f64,
    pub d_reordered: f64,
    /// Some output is split on more than once at this k.
    pub repeated_split: bool,
    /// Distinct outputs the k-leaf tree splits on.
    pub distinct_features: usize,
}

/// Run the full cluster → tree → re-order pipeline for every k in the range
/// and report the elbow values together with split diagnostics. No k is
/// chosen automatically; the table is advisory.
pub fn advise_k(
    x: &DataMatrix,
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
    params: &KMeansParams,
    feature_names: &[String],
    lock_thresholds: LockThresholds,
) -> Result<Vec<KAdvice>> {
    let mut extras: Vec<(bool, usize)> = Vec::new();
    let mut hook = |assignment: &ClusterAssignment| -> Result<Option<f64>> {
        let tree = fit_tree(
            x,
            &assignment.labels,
            assignment.k,
            feature_names,
            lock_thresholds,
        )?;
        let result = reorder(x, assignment, &tree)?;
        extras.push((tree.has_repeated_split(), tree.features_used().len()));
        Ok(Some(result.d_after))
    };
    let curve = elbow_curve(x, k_range, seed, params, Some(&mut hook))?;
    Ok(curve
        .into_iter()
        .zip(extras)
        .map(|(point, (repeated_split, distinct_features))| KAdvice {
            k: point.k,
            d_initial: point.d_initial,
            d_reordered: point.d_reordered.expect("hook always reports a distance"),
            repeated_split,
            distinct_features,
        })
        .collect())
}
