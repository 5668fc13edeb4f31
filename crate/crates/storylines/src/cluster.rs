//! k-Means clustering in normalized output space.
//!
//! The objective is the within-cluster sum of squared Euclidean distances to
//! the cluster centers, summed over all clusters. [`kmeans`] runs Lloyd
//! iterations from k-means++ seeding, best of several restarts.
//! [`elbow_curve`] sweeps k and chains each solution into the next k as an
//! extra warm-start candidate, which makes the reported curve non-increasing
//! in k by construction instead of by luck.
//!
//! Determinism: every restart draws from its own seeded RNG stream, all
//! floating-point accumulation runs in fixed row order, ties between restarts
//! go to the lower restart index, and the parallel restart reduction compares
//! by (distance, restart index) so the winner never depends on completion
//! order.

use rand::Rng;
use rayon::prelude::*;

use crate::matrix::{squared_distance, DataMatrix};
use crate::seed::{rng_for, stream};
use crate::{Error, Result};

/// Tunables for one k-Means invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    /// Independent seeded runs; the best (lowest distance) wins.
    pub restarts: usize,
    /// Upper bound on Lloyd iterations per run.
    pub max_iter: usize,
    /// Convergence threshold on the maximum squared center movement.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// Result of a clustering: per-scenario labels, centers in normalized space,
/// and the achieved distance measure.
///
/// Invariants: every label in [0, k) appears at least once, and `distance`
/// equals [`distance_measure`] recomputed from `labels` and `centers`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centers: DataMatrix,
    pub distance: f64,
    pub seed: u64,
    pub restarts_used: usize,
}

/// One point on the elbow curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowPoint {
    pub k: usize,
    /// Distance straight out of k-Means.
    pub d_initial: f64,
    /// Distance after tree-based re-ordering, when a hook supplied it.
    /// Always at least `d_initial` up to floating-point tolerance: the
    /// re-ordering perturbs the k-Means optimum, it cannot improve on it.
    pub d_reordered: Option<f64>,
}

/// Callback run once per k on the best assignment; returns the re-ordered
/// distance to record, or `None` to leave it unset.
pub type ReorderHook<'a> = &'a mut dyn FnMut(&ClusterAssignment) -> Result<Option<f64>>;

/// Within-cluster sum of squared distances: for each cluster, the squared
/// Euclidean distance of each member point to the cluster center, summed
/// over clusters in ascending label order and rows in ascending row order.
pub fn distance_measure(x: &DataMatrix, labels: &[usize], centers: &DataMatrix) -> Result<f64> {
    if labels.len() != x.n_rows() {
        return Err(Error::RowCountMismatch {
            left: x.n_rows(),
            right: labels.len(),
        });
    }
    if centers.n_cols() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            got: centers.n_cols(),
        });
    }
    let k = centers.n_rows();
    for &label in labels {
        if label >= k {
            return Err(Error::LabelOutOfRange { label, k });
        }
    }
    let mut total = 0.0;
    for c in 0..k {
        for (i, &label) in labels.iter().enumerate() {
            if label == c {
                total += squared_distance(x.row(i), centers.row(c));
            }
        }
    }
    Ok(total)
}

/// Cluster means for the given labels, in ascending label order.
/// Errors if any label in [0, k) has no members.
pub fn centers_from_labels(x: &DataMatrix, k: usize, labels: &[usize]) -> Result<DataMatrix> {
    if labels.len() != x.n_rows() {
        return Err(Error::RowCountMismatch {
            left: x.n_rows(),
            right: labels.len(),
        });
    }
    let m = x.n_cols();
    let mut sums = vec![0.0; k * m];
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        if label >= k {
            return Err(Error::LabelOutOfRange { label, k });
        }
        counts[label] += 1;
        let row = x.row(i);
        for j in 0..m {
            sums[label * m + j] += row[j];
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::ClusterVanished { label: c });
        }
        for j in 0..m {
            sums[c * m + j] /= count as f64;
        }
    }
    DataMatrix::from_flat(k, m, sums)
}

struct LloydOutcome {
    labels: Vec<usize>,
    centers: Vec<f64>,
    distance: f64,
    /// Objective after every assignment step, for monotonicity checks.
    #[cfg_attr(not(test), allow(dead_code))]
    objective_trace: Vec<f64>,
}

/// Assign every point to its nearest center (ties to the lowest center
/// index), then repair empty clusters: each empty center is reseeded at the
/// point farthest from its current center, chosen only among clusters that
/// still have at least two members (ties to the lowest row index), and that
/// point is moved over. Both steps can only lower the objective. Returns the
/// objective under the (possibly repaired) centers.
fn assign_and_repair(
    x: &DataMatrix,
    k: usize,
    centers: &mut [f64],
    labels: &mut [usize],
    dists: &mut [f64],
) -> f64 {
    let m = x.n_cols();
    let n = x.n_rows();
    let mut counts = vec![0usize; k];
    for i in 0..n {
        let row = x.row(i);
        let mut best_c = 0;
        let mut best_d = squared_distance(row, &centers[..m]);
        for c in 1..k {
            let d = squared_distance(row, &centers[c * m..(c + 1) * m]);
            if d < best_d {
                best_d = d;
                best_c = c;
            }
        }
        labels[i] = best_c;
        dists[i] = best_d;
        counts[best_c] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut donor = usize::MAX;
        let mut donor_d = f64::NEG_INFINITY;
        for i in 0..n {
            if counts[labels[i]] >= 2 && dists[i] > donor_d {
                donor_d = dists[i];
                donor = i;
            }
        }
        debug_assert!(donor != usize::MAX, "k <= N guarantees a donor exists");
        counts[labels[donor]] -= 1;
        labels[donor] = c;
        counts[c] = 1;
        dists[donor] = 0.0;
        centers[c * m..(c + 1) * m].copy_from_slice(x.row(donor));
    }
    dists.iter().sum()
}

/// Replace centers with per-cluster means; every cluster must be non-empty
/// (guaranteed by repair). Returns the maximum squared center movement.
fn update_centers(x: &DataMatrix, k: usize, labels: &[usize], centers: &mut [f64]) -> f64 {
    let m = x.n_cols();
    let mut sums = vec![0.0; k * m];
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        let row = x.row(i);
        for j in 0..m {
            sums[label * m + j] += row[j];
        }
    }
    let mut max_shift = 0.0;
    for c in 0..k {
        debug_assert!(counts[c] > 0);
        for j in 0..m {
            sums[c * m + j] /= counts[c] as f64;
        }
        let shift = squared_distance(&centers[c * m..(c + 1) * m], &sums[c * m..(c + 1) * m]);
        if shift > max_shift {
            max_shift = shift;
        }
    }
    centers.copy_from_slice(&sums);
    max_shift
}

/// Lloyd iterations from the given initial centers. The final state is
/// self-consistent: labels are the nearest-center assignment under the
/// returned centers (post repair) and `distance` is recomputed from both.
fn lloyd(x: &DataMatrix, k: usize, mut centers: Vec<f64>, params: &KMeansParams) -> LloydOutcome {
    let n = x.n_rows();
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    for _ in 0..params.max_iter {
        let objective = assign_and_repair(x, k, &mut centers, &mut labels, &mut dists);
        trace.push(objective);
        let shift = update_centers(x, k, &labels, &mut centers);
        if shift < params.tol {
            break;
        }
    }
    let objective = assign_and_repair(x, k, &mut centers, &mut labels, &mut dists);
    trace.push(objective);
    let centers_matrix = DataMatrix::from_flat(k, x.n_cols(), centers.clone())
        .expect("centers buffer is k*m by construction");
    let distance = distance_measure(x, &labels, &centers_matrix)
        .expect("labels and centers are valid by construction");
    LloydOutcome {
        labels,
        centers,
        distance,
        objective_trace: trace,
    }
}

fn centers_to_flat(centers: &DataMatrix) -> Vec<f64> {
    let mut flat = Vec::with_capacity(centers.n_rows() * centers.n_cols());
    for r in 0..centers.n_rows() {
        flat.extend_from_slice(centers.row(r));
    }
    flat
}

/// k-means++ seeding: first center uniform over rows, each further center
/// drawn with probability proportional to the squared distance to the
/// nearest already-chosen center. Falls back to a uniform draw when all
/// remaining points coincide with chosen centers.
fn kmeanspp_init(x: &DataMatrix, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let n = x.n_rows();
    let m = x.n_cols();
    let mut centers = Vec::with_capacity(k * m);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(x.row(first));
    let mut best: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(first)))
        .collect();
    while centers.len() < k * m {
        let total: f64 = best.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = n - 1;
            for (i, &w) in best.iter().enumerate() {
                cum += w;
                if target < cum {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(x.row(chosen));
        let new_center = &centers[start..start + m];
        for (i, slot) in best.iter_mut().enumerate() {
            let d = squared_distance(x.row(i), new_center);
            if d < *slot {
                *slot = d;
            }
        }
    }
    centers
}

fn validate_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::BadClusterCount { k, n });
    }
    Ok(())
}

/// Best-of-restarts k-Means. Deterministic for fixed (seed, restarts).
pub fn kmeans(
    x: &DataMatrix,
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<ClusterAssignment> {
    kmeans_with_warm_starts(x, k, seed, params, &[])
}

/// [`kmeans`] with extra warm-start candidates appended after the seeded
/// restarts. Each warm start is a full k×m center matrix run through the
/// same Lloyd iterations; warm candidates get the highest restart indices,
/// so on an exact tie a cold restart wins.
pub fn kmeans_with_warm_starts(
    x: &DataMatrix,
    k: usize,
    seed: u64,
    params: &KMeansParams,
    warm_starts: &[DataMatrix],
) -> Result<ClusterAssignment> {
    let n = x.n_rows();
    validate_k(k, n)?;
    if params.restarts == 0 && warm_starts.is_empty() {
        return Err(Error::Internal("kmeans needs restarts >= 1".into()));
    }
    for w in warm_starts {
        if w.n_rows() != k || w.n_cols() != x.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: k * x.n_cols(),
                got: w.n_rows() * w.n_cols(),
            });
        }
    }
    let total = params.restarts + warm_starts.len();
    let outcomes: Vec<LloydOutcome> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let init = if idx < params.restarts {
                let mut rng = rng_for(seed, stream::KMEANS, &[k as u64, idx as u64]);
                kmeanspp_init(x, k, &mut rng)
            } else {
                centers_to_flat(&warm_starts[idx - params.restarts])
            };
            lloyd(x, k, init, params)
        })
        .collect();
    let best_idx = outcomes
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.distance
                .partial_cmp(&b.distance)
                .expect("distance is never NaN")
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i)
        .expect("at least one candidate run");
    let best = &outcomes[best_idx];
    Ok(ClusterAssignment {
        k,
        labels: best.labels.clone(),
        centers: DataMatrix::from_flat(k, x.n_cols(), best.centers.clone())
            .expect("centers buffer is k*m by construction"),
        distance: best.distance,
        seed,
        restarts_used: total,
    })
}

/// Row of `x` farthest from its assigned center, ties to the lowest row
/// index. Seed material for the next warm-start candidate.
fn farthest_point(x: &DataMatrix, assignment: &ClusterAssignment) -> usize {
    let mut best_i = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, &label) in assignment.labels.iter().enumerate() {
        let d = squared_distance(x.row(i), assignment.centers.row(label));
        if d > best_d {
            best_d = d;
            best_i = i;
        }
    }
    best_i
}

/// Warm-start centers for k clusters from a best (k−1)-cluster solution:
/// the previous centers plus the point farthest from its assigned center.
/// The first assignment step under these centers can only improve on the
/// previous distance, so the elbow curve is non-increasing by construction.
fn chain_candidate(x: &DataMatrix, prev: &ClusterAssignment) -> DataMatrix {
    let m = x.n_cols();
    let mut flat = centers_to_flat(&prev.centers);
    let far = farthest_point(x, prev);
    flat.extend_from_slice(x.row(far));
    DataMatrix::from_flat(prev.k + 1, m, flat).expect("one appended center row")
}

/// Distance measure versus cluster count, one best-of-restarts run per k in
/// ascending order, each k warm-started from the previous solution. When a
/// `reorder_hook` is given it runs on each best assignment and its returned
/// distance lands in [`ElbowPoint::d_reordered`].
pub fn elbow_curve(
    x: &DataMatrix,
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
    params: &KMeansParams,
    mut reorder_hook: Option<ReorderHook<'_>>,
) -> Result<Vec<ElbowPoint>> {
    if k_range.is_empty() {
        return Err(Error::EmptyKRange);
    }
    validate_k(*k_range.start(), x.n_rows())?;
    validate_k(*k_range.end(), x.n_rows())?;
    let mut points = Vec::new();
    let mut prev: Option<ClusterAssignment> = None;
    for k in k_range {
        let warm: Vec<DataMatrix> = match &prev {
            Some(p) if p.k + 1 == k => vec![chain_candidate(x, p)],
            _ => Vec::new(),
        };
        let assignment = kmeans_with_warm_starts(x, k, seed, params, &warm)?;
        let d_reordered = match reorder_hook.as_mut() {
            Some(hook) => hook(&assignment)?,
            None => None,
        };
        points.push(ElbowPoint {
            k,
            d_initial: assignment.distance,
            d_reordered,
        });
        prev = Some(assignment);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn matrix_1d(values: &[f64]) -> DataMatrix {
        DataMatrix::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    /// Minimum distance over every 2-partition of the rows, centers at the
    /// cluster means. Ground truth for small instances.
    fn exhaustive_two_partition_optimum(x: &DataMatrix) -> f64 {
        let n = x.n_rows();
        assert!(n <= 16, "enumeration explodes past 16 rows");
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let centers = centers_from_labels(x, 2, &labels).unwrap();
            let d = distance_measure(x, &labels, &centers).unwrap();
            if d < best {
                best = d;
            }
        }
        best
    }

    #[test]
    fn distance_zero_when_points_sit_on_centers() {
        let x = DataMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let d = distance_measure(&x, &[0, 1], &x.clone()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn distance_two_points_around_center() {
        let x = matrix_1d(&[0.0, 2.0]);
        let centers = matrix_1d(&[1.0]);
        let d = distance_measure(&x, &[0, 0], &centers).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn distance_matches_double_loop_recomputation() {
        let mut rng = rng_for(11, 0xFF, &[]);
        let x = DataMatrix::from_rows(
            (0..6)
                .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
        .unwrap();
        let labels = vec![0, 1, 0, 1, 1, 0];
        let centers = DataMatrix::from_rows(vec![vec![0.3, 0.7], vec![0.6, 0.1]]).unwrap();
        let d = distance_measure(&x, &labels, &centers).unwrap();
        let mut expect = 0.0;
        for c in 0..2 {
            for (i, &label) in labels.iter().enumerate() {
                if label == c {
                    for j in 0..2 {
                        let diff = x.get(i, j) - centers.get(c, j);
                        expect += diff * diff;
                    }
                }
            }
        }
        assert!((d - expect).abs() < 1e-9);
    }

    #[test]
    fn distance_rejects_out_of_range_label() {
        let x = matrix_1d(&[0.0, 1.0]);
        let centers = matrix_1d(&[0.5]);
        let err = distance_measure(&x, &[0, 1], &centers).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { label: 1, k: 1 }));
    }

    #[test]
    fn k_equals_n_gives_zero_distance() {
        let x = matrix_1d(&[1.0, 5.0, 9.0]);
        let a = kmeans(&x, 3, 42, &KMeansParams::default()).unwrap();
        assert_eq!(a.distance, 0.0);
        let mut seen = a.labels.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn k_one_gives_mean_and_total_squared_deviation() {
        let x = matrix_1d(&[1.0, 2.0, 3.0, 6.0]);
        let a = kmeans(&x, 1, 42, &KMeansParams::default()).unwrap();
        assert!((a.centers.get(0, 0) - 3.0).abs() < 1e-12);
        let tss: f64 = [1.0, 2.0, 3.0, 6.0]
            .iter()
            .map(|v| (v - 3.0) * (v - 3.0))
            .sum();
        assert!((a.distance - tss).abs() < 1e-12);
    }

    #[test]
    fn two_tight_pairs_recover_exact_optimum() {
        let x = matrix_1d(&[0.0, 0.1, 10.0, 10.1]);
        let oracle = exhaustive_two_partition_optimum(&x);
        assert!((oracle - 0.01).abs() < 1e-12);
        let a = kmeans(&x, 2, 7, &KMeansParams::default()).unwrap();
        assert!((a.distance - 0.01).abs() < 1e-12);
        let mut centers = [a.centers.get(0, 0), a.centers.get(1, 0)];
        centers.sort_by(f64::total_cmp);
        assert!((centers[0] - 0.05).abs() < 1e-12);
        assert!((centers[1] - 10.05).abs() < 1e-12);
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
    }

    #[test]
    fn rejects_bad_k() {
        let x = matrix_1d(&[0.0, 1.0]);
        assert!(matches!(
            kmeans(&x, 0, 1, &KMeansParams::default()).unwrap_err(),
            Error::BadClusterCount { k: 0, n: 2 }
        ));
        assert!(matches!(
            kmeans(&x, 3, 1, &KMeansParams::default()).unwrap_err(),
            Error::BadClusterCount { k: 3, n: 2 }
        ));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let mut rng = rng_for(3, 0xFE, &[]);
        let x = DataMatrix::from_rows(
            (0..40)
                .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
        .unwrap();
        let a = kmeans(&x, 4, 99, &KMeansParams::default()).unwrap();
        let b = kmeans(&x, 4, 99, &KMeansParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn objective_is_non_increasing_within_a_run() {
        let mut rng = rng_for(5, 0xFD, &[]);
        let x = DataMatrix::from_rows(
            (0..60)
                .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
        .unwrap();
        let mut init_rng = rng_for(5, stream::KMEANS, &[3, 0]);
        let init = kmeanspp_init(&x, 3, &mut init_rng);
        let outcome = lloyd(&x, 3, init, &KMeansParams::default());
        for pair in outcome.objective_trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "objective rose from {} to {}",
                pair[0],
                pair[1]
            );
        }
        assert!((outcome.distance - *outcome.objective_trace.last().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let x = matrix_1d(&[1.0, 1.0, 1.0, 1.0]);
        let a = kmeans(&x, 3, 2, &KMeansParams::default()).unwrap();
        let mut seen = a.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 3);
        assert_eq!(a.distance, 0.0);
    }

    fn three_blobs(n_per: usize, spread: f64, seed: u64) -> DataMatrix {
        let mut rng = rng_for(seed, 0xFC, &[]);
        let noise = Normal::new(0.0, spread).unwrap();
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut rows = Vec::with_capacity(3 * n_per);
        for center in &centers {
            for _ in 0..n_per {
                rows.push(vec![
                    center[0] + noise.sample(&mut rng),
                    center[1] + noise.sample(&mut rng),
                ]);
            }
        }
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn elbow_kinks_at_the_true_cluster_count() {
        let x = three_blobs(50, 0.5, 8);
        let curve = elbow_curve(&x, 1..=6, 21, &KMeansParams::default(), None).unwrap();
        assert_eq!(curve.len(), 6);
        for pair in curve.windows(2) {
            assert!(pair[1].d_initial <= pair[0].d_initial + 1e-9);
        }
        let drop_into_3 = curve[1].d_initial - curve[2].d_initial;
        let drop_past_3 = curve[2].d_initial - curve[3].d_initial;
        assert!(
            drop_into_3 > 5.0 * drop_past_3,
            "no elbow at k=3: {drop_into_3} vs {drop_past_3}"
        );
    }

    #[test]
    fn elbow_single_k_equal_to_n() {
        let x = matrix_1d(&[0.0, 3.0, 7.0]);
        let curve = elbow_curve(&x, 3..=3, 1, &KMeansParams::default(), None).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve[0].d_initial, 0.0);
        assert_eq!(curve[0].d_reordered, None);
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn elbow_rejects_empty_and_oversized_ranges() {
        let x = matrix_1d(&[0.0, 1.0]);
        assert!(matches!(
            elbow_curve(&x, 3..=2, 1, &KMeansParams::default(), None).unwrap_err(),
            Error::EmptyKRange
        ));
        assert!(matches!(
            elbow_curve(&x, 1..=5, 1, &KMeansParams::default(), None).unwrap_err(),
            Error::BadClusterCount { k: 5, n: 2 }
        ));
    }

    #[test]
    fn elbow_hook_receives_every_k() {
        let x = three_blobs(10, 0.3, 4);
        let mut seen = Vec::new();
        let mut hook = |a: &ClusterAssignment| {
            seen.push(a.k);
            Ok(Some(a.distance + 1.0))
        };
        let curve = elbow_curve(&x, 1..=4, 5, &KMeansParams::default(), Some(&mut hook)).unwrap();
        assert_eq!(seen, vec![1, 2, 3, 4]);
        for p in &curve {
            assert_eq!(p.d_reordered, Some(p.d_initial + 1.0));
        }
    }

    #[test]
    fn assignment_recomputation_matches_reported_distance() {
        let x = three_blobs(20, 1.0, 6);
        let a = kmeans(&x, 3, 13, &KMeansParams::default()).unwrap();
        let recomputed = distance_measure(&x, &a.labels, &a.centers).unwrap();
        assert!((a.distance - recomputed).abs() < 1e-9);
    }

    #[test]
    fn centers_from_labels_requires_every_cluster() {
        let x = matrix_1d(&[0.0, 1.0, 2.0]);
        let err = centers_from_labels(&x, 3, &[0, 0, 1]).unwrap_err();
        assert!(matches!(err, Error::ClusterVanished { label: 2 }));
    }
}
