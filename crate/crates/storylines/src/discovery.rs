//! Scenario discovery: which uncertain inputs drive scenarios into which
//! storyline.
//!
//! A classification tree predicts the (re-ordered) cluster label from the
//! uncertain inputs. Trees are scored by interpretability (one over the
//! number of distinct inputs used), training coverage (fraction predicted
//! correctly), and cross-validation coverage (same fraction, pooled over
//! held-out folds). [`discovery_sweep`] traces all three against the leaf
//! budget and [`select_discovery_tree`] picks the most interpretable entry
//! whose cross-validation coverage is close enough to the best.
//!
//! Cross-validation pools predictions: total correct over all folds divided
//! by N, not a mean of per-fold rates, so unequal fold sizes cannot skew it.

use rand::seq::SliceRandom;

use crate::scenario::{LockThresholds, UncertaintyMatrix};
use crate::seed::{rng_for, stream};
use crate::tree::{fit_tree, StorylineTree};
use crate::{Error, Result};

/// Stratified fold assignment for cross-validation.
///
/// Within each cluster label, rows are shuffled (seeded) and dealt
/// round-robin onto folds, with the dealing position carried across labels;
/// every fold ends up within one row of its proportional share of each
/// label, and within one row of the overall fold size.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    n_folds: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn stratified(labels: &[usize], n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 {
            return Err(Error::BadFoldCount { got: n_folds });
        }
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut assignments = vec![0usize; labels.len()];
        let mut rng = rng_for(seed, stream::FOLDS, &[]);
        let mut next_fold = 0usize;
        for label in 0..n_classes {
            let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
            rows.shuffle(&mut rng);
            for row in rows {
                assignments[row] = next_fold;
                next_fold = (next_fold + 1) % n_folds;
            }
        }
        Ok(Self {
            n_folds,
            assignments,
            seed,
        })
    }

    /// Explicit fold assignment, for callers that bring their own plan.
    pub fn from_assignments(assignments: Vec<usize>, n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 {
            return Err(Error::BadFoldCount { got: n_folds });
        }
        for &f in &assignments {
            if f >= n_folds {
                return Err(Error::Internal(format!(
                    "fold id {f} out of range for {n_folds} folds"
                )));
            }
        }
        Ok(Self {
            n_folds,
            assignments,
            seed,
        })
    }

    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Every fold must contain every label, or per-fold training and
    /// pooled scoring are ill-posed.
    fn check_stratification(&self, labels: &[usize]) -> Result<()> {
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut present = vec![false; self.n_folds * n_classes];
        for (i, &fold) in self.assignments.iter().enumerate() {
            present[fold * n_classes + labels[i]] = true;
        }
        for fold in 0..self.n_folds {
            for label in 0..n_classes {
                if !present[fold * n_classes + label] {
                    return Err(Error::FoldMissingLabel { fold, label });
                }
            }
        }
        Ok(())
    }
}

/// Classification tree over the uncertain inputs.
///
/// Same induction as the storyline tree, with the uncertainty matrix as
/// feature space. Categorical columns take part through their integer codes:
/// a split "code ≤ c.5" separates code groups deterministically. The budget
/// must allow at least one split; a single-leaf discovery tree explains
/// nothing.
pub fn discovery_tree(
    theta: &UncertaintyMatrix,
    labels: &[usize],
    max_leaves: usize,
    lock_thresholds: LockThresholds,
) -> Result<StorylineTree> {
    if max_leaves < 2 {
        return Err(Error::BadLeafBudget {
            min: 2,
            got: max_leaves,
        });
    }
    fit_tree(
        theta.values(),
        labels,
        max_leaves,
        &theta.feature_names(),
        lock_thresholds,
    )
}

/// Fraction of scenarios whose label the tree predicts correctly.
pub fn coverage(tree: &StorylineTree, theta: &UncertaintyMatrix, labels: &[usize]) -> Result<f64> {
    if labels.len() != theta.values().n_rows() {
        return Err(Error::RowCountMismatch {
            left: theta.values().n_rows(),
            right: labels.len(),
        });
    }
    let predicted = tree.predict_all(theta.values())?;
    let correct = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Pooled cross-validation coverage: fit on the out-of-fold rows, predict
/// the in-fold rows, and return total correct over N.
pub fn cv_coverage(
    theta: &UncertaintyMatrix,
    labels: &[usize],
    max_leaves: usize,
    plan: &FoldPlan,
    lock_thresholds: LockThresholds,
) -> Result<f64> {
    let n = theta.values().n_rows();
    if labels.len() != n {
        return Err(Error::RowCountMismatch {
            left: n,
            right: labels.len(),
        });
    }
    if plan.assignments.len() != n {
        return Err(Error::RowCountMismatch {
            left: n,
            right: plan.assignments.len(),
        });
    }
    if max_leaves < 2 {
        return Err(Error::BadLeafBudget {
            min: 2,
            got: max_leaves,
        });
    }
    plan.check_stratification(labels)?;
    let names = theta.feature_names();
    let mut correct = 0usize;
    for fold in 0..plan.n_folds {
        let mut train_rows = Vec::new();
        let mut test_rows = Vec::new();
        for (i, &f) in plan.assignments.iter().enumerate() {
            if f == fold {
                test_rows.push(i);
            } else {
                train_rows.push(i);
            }
        }
        let train_x = theta.values().select_rows(&train_rows);
        let train_labels: Vec<usize> = train_rows.iter().map(|&i| labels[i]).collect();
        let tree = fit_tree(&train_x, &train_labels, max_leaves, &names, lock_thresholds)?;
        for &i in &test_rows {
            if tree.predict(theta.values().row(i))? == labels[i] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / n as f64)
}

/// One leaf budget's scores on the discovery curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryEntry {
    pub max_leaves: usize,
    /// 1 / |features_used|, so fewer distinct inputs score higher.
    pub interpretability: f64,
    pub coverage: f64,
    pub cv_coverage: f64,
    /// Names of the inputs the full-data tree splits on, in column order.
    pub features_used: Vec<String>,
}

/// Interpretability, coverage, and cross-validation coverage per leaf budget.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryCurve {
    pub entries: Vec<DiscoveryEntry>,
}

/// Sweep the leaf budget and score the full-data tree at each budget.
/// `features_used` always comes from the full-data tree, not the fold trees.
/// Errors if a budget's tree cannot place a single informative split (the
/// interpretability score is undefined with zero features).
pub fn discovery_sweep(
    theta: &UncertaintyMatrix,
    labels: &[usize],
    leaf_budgets: std::ops::RangeInclusive<usize>,
    plan: &FoldPlan,
    lock_thresholds: LockThresholds,
) -> Result<DiscoveryCurve> {
    if leaf_budgets.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let names = theta.feature_names();
    let mut entries = Vec::new();
    for budget in leaf_budgets {
        let tree = discovery_tree(theta, labels, budget, lock_thresholds)?;
        let used = tree.features_used();
        if used.is_empty() {
            return Err(Error::NoInformativeSplit);
        }
        entries.push(DiscoveryEntry {
            max_leaves: budget,
            interpretability: 1.0 / used.len() as f64,
            coverage: coverage(&tree, theta, labels)?,
            cv_coverage: cv_coverage(theta, labels, budget, plan, lock_thresholds)?,
            features_used: used.iter().map(|&i| names[i].clone()).collect(),
        });
    }
    Ok(DiscoveryCurve { entries })
}

/// How [`select_discovery_tree`] trades coverage for interpretability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy {
    /// Entries within this absolute margin of the best cross-validation
    /// coverage stay eligible.
    pub cv_margin: f64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self { cv_margin: 0.02 }
    }
}

/// Most interpretable entry among those whose cross-validation coverage is
/// within the policy margin of the curve's best; ties go to the smallest
/// leaf budget (leaf counts grow with the budget, so that is also the
/// fewest-leaves tree).
pub fn select_discovery_tree<'a>(
    curve: &'a DiscoveryCurve,
    policy: &SelectionPolicy,
) -> Result<&'a DiscoveryEntry> {
    if curve.entries.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let best_cv = curve
        .entries
        .iter()
        .map(|e| e.cv_coverage)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<&DiscoveryEntry> = None;
    for entry in &curve.entries {
        if entry.cv_coverage < best_cv - policy.cv_margin {
            continue;
        }
        let better = match chosen {
            None => true,
            Some(c) => {
                entry.interpretability > c.interpretability
                    || (entry.interpretability == c.interpretability
                        && entry.max_leaves < c.max_leaves)
            }
        };
        if better {
            chosen = Some(entry);
        }
    }
    Ok(chosen.expect("curve is non-empty and best_cv is attained"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DataMatrix;
    use crate::scenario::{DescriptorKind, OutputDescriptor};
    use rand::Rng;

    fn theta_from_rows(rows: Vec<Vec<f64>>) -> UncertaintyMatrix {
        let p = rows[0].len();
        let descriptors = (0..p)
            .map(|i| {
                OutputDescriptor::new(
                    format!("theta{i}"),
                    "unitless",
                    DescriptorKind::UncertainInput,
                )
            })
            .collect();
        let ids = (0..rows.len()).map(|i| format!("s{i:04}")).collect();
        let values = DataMatrix::from_rows(rows).unwrap();
        let categorical = vec![false; p];
        UncertaintyMatrix::new(descriptors, ids, values, categorical).unwrap()
    }

    fn uniform_theta(n: usize, p: usize, seed: u64) -> UncertaintyMatrix {
        let mut rng = rng_for(seed, 0xF8, &[]);
        theta_from_rows(
            (0..n)
                .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
    }

    /// Labels driven by two columns: 0 when col a is low, else 1 when col b
    /// is low, else 2.
    fn two_driver_labels(theta: &UncertaintyMatrix, a: usize, b: usize) -> Vec<usize> {
        (0..theta.values().n_rows())
            .map(|i| {
                if theta.values().get(i, a) <= 0.5 {
                    0
                } else if theta.values().get(i, b) <= 0.5 {
                    1
                } else {
                    2
                }
            })
            .collect()
    }

    #[test]
    fn one_threshold_relationship_is_fully_recovered() {
        let theta = uniform_theta(200, 3, 5);
        let labels: Vec<usize> = (0..200)
            .map(|i| usize::from(theta.values().get(i, 1) > 0.5))
            .collect();
        let tree = discovery_tree(&theta, &labels, 2, LockThresholds::default()).unwrap();
        assert_eq!(tree.features_used(), vec![1]);
        assert_eq!(coverage(&tree, &theta, &labels).unwrap(), 1.0);
        let plan = FoldPlan::stratified(&labels, 5, 11).unwrap();
        let cv = cv_coverage(&theta, &labels, 2, &plan, LockThresholds::default()).unwrap();
        assert_eq!(cv, 1.0);
    }

    #[test]
    fn single_leaf_budget_is_rejected() {
        let theta = uniform_theta(20, 2, 6);
        let labels = vec![0; 20];
        let err = discovery_tree(&theta, &labels, 1, LockThresholds::default()).unwrap_err();
        assert!(matches!(err, Error::BadLeafBudget { min: 2, got: 1 }));
    }

    #[test]
    fn stratified_folds_balance_every_label() {
        let labels: Vec<usize> = (0..100)
            .map(|i| {
                if i < 50 {
                    0
                } else if i < 80 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let plan = FoldPlan::stratified(&labels, 5, 3).unwrap();
        for fold in 0..5 {
            for label in 0..3 {
                let count = labels
                    .iter()
                    .zip(plan.assignments())
                    .filter(|(l, f)| **l == label && **f == fold)
                    .count();
                let total = labels.iter().filter(|&&l| l == label).count();
                let share = total as f64 / 5.0;
                assert!(
                    (count as f64 - share).abs() <= 1.0,
                    "fold {fold} holds {count} of label {label}, proportional share {share}"
                );
            }
        }
    }

    #[test]
    fn fold_relabeling_does_not_change_cv() {
        let theta = uniform_theta(120, 4, 9);
        let labels = two_driver_labels(&theta, 0, 2);
        let plan = FoldPlan::stratified(&labels, 4, 17).unwrap();
        let relabeled: Vec<usize> = plan.assignments().iter().map(|&f| (f + 2) % 4).collect();
        let permuted = FoldPlan::from_assignments(relabeled, 4, 17).unwrap();
        let a = cv_coverage(&theta, &labels, 3, &plan, LockThresholds::default()).unwrap();
        let b = cv_coverage(&theta, &labels, 3, &permuted, LockThresholds::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_label_in_a_fold_is_an_error() {
        let theta = uniform_theta(8, 2, 4);
        let labels = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let assignments = vec![0, 0, 1, 1, 0, 0, 0, 0];
        let plan = FoldPlan::from_assignments(assignments, 2, 0).unwrap();
        let err = cv_coverage(&theta, &labels, 2, &plan, LockThresholds::default()).unwrap_err();
        assert!(matches!(err, Error::FoldMissingLabel { fold: 1, label: 1 }));
    }

    #[test]
    fn chance_coverage_on_unrelated_labels() {
        let theta = uniform_theta(300, 4, 21);
        let labels: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let plan = FoldPlan::stratified(&labels, 5, 23).unwrap();
        let cv = cv_coverage(&theta, &labels, 3, &plan, LockThresholds::default()).unwrap();
        assert!(
            (cv - 1.0 / 3.0).abs() < 0.1,
            "cv {cv} strays from chance level 1/3"
        );
    }

    #[test]
    fn sweep_recovers_the_two_drivers() {
        let theta = uniform_theta(400, 10, 29);
        let labels = two_driver_labels(&theta, 2, 7);
        let plan = FoldPlan::stratified(&labels, 5, 31).unwrap();
        let curve =
            discovery_sweep(&theta, &labels, 2..=6, &plan, LockThresholds::default()).unwrap();
        assert_eq!(curve.entries.len(), 5);
        for entry in &curve.entries {
            assert_eq!(
                entry.interpretability * entry.features_used.len() as f64,
                1.0
            );
        }
        let chosen = select_discovery_tree(&curve, &SelectionPolicy::default()).unwrap();
        assert_eq!(chosen.features_used, vec!["theta2", "theta7"]);
        assert_eq!(chosen.interpretability, 0.5);
        assert_eq!(chosen.coverage, 1.0);
    }

    #[test]
    fn training_coverage_never_drops_with_more_leaves() {
        let theta = uniform_theta(250, 6, 37);
        let labels = two_driver_labels(&theta, 1, 4);
        let plan = FoldPlan::stratified(&labels, 5, 39).unwrap();
        let curve =
            discovery_sweep(&theta, &labels, 2..=10, &plan, LockThresholds::default()).unwrap();
        for pair in curve.entries.windows(2) {
            assert!(pair[1].coverage >= pair[0].coverage);
        }
    }

    #[test]
    fn selection_prefers_interpretability_within_the_margin() {
        let entry = |leaves: usize, interp: f64, cv: f64| DiscoveryEntry {
            max_leaves: leaves,
            interpretability: interp,
            coverage: cv,
            cv_coverage: cv,
            features_used: vec!["x".into(); (1.0 / interp) as usize],
        };
        let curve = DiscoveryCurve {
            entries: vec![
                entry(2, 1.0, 0.85),
                entry(3, 0.5, 0.90),
                entry(4, 1.0 / 3.0, 0.91),
            ],
        };
        let chosen = select_discovery_tree(&curve, &SelectionPolicy::default()).unwrap();
        assert_eq!(chosen.max_leaves, 3);
        let lax = select_discovery_tree(&curve, &SelectionPolicy { cv_margin: 0.10 }).unwrap();
        assert_eq!(lax.max_leaves, 2);
    }

    #[test]
    fn selection_ties_go_to_the_smallest_budget() {
        let entry = |leaves: usize| DiscoveryEntry {
            max_leaves: leaves,
            interpretability: 0.5,
            coverage: 0.9,
            cv_coverage: 0.9,
            features_used: vec!["a".into(), "b".into()],
        };
        let curve = DiscoveryCurve {
            entries: vec![entry(4), entry(3), entry(5)],
        };
        let chosen = select_discovery_tree(&curve, &SelectionPolicy::default()).unwrap();
        assert_eq!(chosen.max_leaves, 3);
    }

    #[test]
    fn empty_curve_is_an_error() {
        let curve = DiscoveryCurve { entries: vec![] };
        let err = select_discovery_tree(&curve, &SelectionPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCurve));
    }

    #[test]
    fn categorical_codes_split_cleanly() {
        let descriptors = vec![OutputDescriptor::new(
            "variant",
            "unitless",
            DescriptorKind::UncertainInput,
        )];
        let ids = (0..9).map(|i| format!("s{i:04}")).collect();
        let values = DataMatrix::from_rows((0..9).map(|i| vec![(i % 3) as f64]).collect()).unwrap();
        let theta = UncertaintyMatrix::new(descriptors, ids, values, vec![true]).unwrap();
        let labels: Vec<usize> = (0..9).map(|i| usize::from(i % 3 == 2)).collect();
        let tree = discovery_tree(&theta, &labels, 2, LockThresholds::default()).unwrap();
        assert_eq!(coverage(&tree, &theta, &labels).unwrap(), 1.0);
        assert_eq!(tree.predict(&[1.0]).unwrap(), 0);
        assert_eq!(tree.predict(&[2.0]).unwrap(), 1);
    }
}
