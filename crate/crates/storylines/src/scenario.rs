//! Scenario data model: named output columns, min-max normalization,
//! per-node output ranges, and the decision-space fraction sigma.
//!
//! A [`ScenarioMatrix`] holds N scenarios by m outputs of interest and is the
//! feature space for clustering and storyline trees. An [`UncertaintyMatrix`]
//! holds the sampled uncertain inputs for scenario discovery. Both are
//! immutable after construction; all operations here are pure functions.

use serde::{Deserialize, Serialize};

use crate::matrix::DataMatrix;
use crate::{Error, Result};

/// What a named column represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescriptorKind {
    /// Policy-relevant model output; the clustering/tree feature space.
    OutputOfInterest,
    /// Sampled uncertain model input; the discovery feature space.
    UncertainInput,
    /// Balance entry screened as a candidate output of interest.
    Flow,
}

/// Name, unit and role of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDescriptor {
    pub name: String,
    pub unit: String,
    pub kind: DescriptorKind,
}

impl OutputDescriptor {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, kind: DescriptorKind) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            kind,
        }
    }

    /// Output of interest with no unit attached.
    pub fn unitless(name: impl Into<String>) -> Self {
        Self::new(name, "unitless", DescriptorKind::OutputOfInterest)
    }
}

fn validate_descriptors(descriptors: &[OutputDescriptor]) -> Result<()> {
    for (i, d) in descriptors.iter().enumerate() {
        if d.name.is_empty() {
            return Err(Error::EmptyColumnName { index: i });
        }
        if descriptors[..i].iter().any(|other| other.name == d.name) {
            return Err(Error::DuplicateColumn {
                name: d.name.clone(),
            });
        }
    }
    Ok(())
}

/// N scenarios by m named, unit-annotated outputs of interest.
///
/// Construction validates: all values finite, N >= 2, m >= 1, and every
/// column strictly varying. Constant columns are rejected outright; the
/// screening step exists precisely to weed them out beforehand, and dropping
/// them silently would desynchronize the descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    descriptors: Vec<OutputDescriptor>,
    scenario_ids: Vec<String>,
    values: DataMatrix,
}

impl ScenarioMatrix {
    pub fn new(
        descriptors: Vec<OutputDescriptor>,
        scenario_ids: Vec<String>,
        values: DataMatrix,
    ) -> Result<Self> {
        validate_descriptors(&descriptors)?;
        let (n, m) = (values.n_rows(), values.n_cols());
        if m == 0 || descriptors.is_empty() {
            return Err(Error::NoColumns);
        }
        if descriptors.len() != m {
            return Err(Error::DimensionMismatch {
                expected: descriptors.len(),
                got: m,
            });
        }
        if n < 2 {
            return Err(Error::TooFewScenarios { n });
        }
        if scenario_ids.len() != n {
            return Err(Error::RowCountMismatch {
                left: scenario_ids.len(),
                right: n,
            });
        }
        for row in 0..n {
            for (col, descriptor) in descriptors.iter().enumerate() {
                let v = values.get(row, col);
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        row,
                        col,
                        name: descriptor.name.clone(),
                    });
                }
            }
        }
        for (col, descriptor) in descriptors.iter().enumerate() {
            let (lo, hi) = values.column_extrema(col);
            if hi <= lo {
                return Err(Error::ConstantColumn {
                    name: descriptor.name.clone(),
                    value: lo,
                });
            }
        }
        Ok(Self {
            descriptors,
            scenario_ids,
            values,
        })
    }

    pub fn descriptors(&self) -> &[OutputDescriptor] {
        &self.descriptors
    }

    pub fn scenario_ids(&self) -> &[String] {
        &self.scenario_ids
    }

    pub fn values(&self) -> &DataMatrix {
        &self.values
    }

    pub fn n_scenarios(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_outputs(&self) -> usize {
        self.values.n_cols()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.descriptors.iter().map(|d| d.name.clone()).collect()
    }
}

/// Build a [`ScenarioMatrix`] from named numeric columns, synthesizing
/// sequential scenario ids. Column order is preserved.
pub fn build_scenario_matrix(
    columns: &[(String, String, DescriptorKind)],
    rows: Vec<Vec<f64>>,
) -> Result<ScenarioMatrix> {
    let descriptors: Vec<OutputDescriptor> = columns
        .iter()
        .map(|(name, unit, kind)| OutputDescriptor::new(name.clone(), unit.clone(), *kind))
        .collect();
    let n = rows.len();
    let ids = (0..n).map(|i| format!("s{i:04}")).collect();
    let values = DataMatrix::from_rows(rows)?;
    ScenarioMatrix::new(descriptors, ids, values)
}

/// Per-column (min, max) pairs fitted on a scenario matrix.
///
/// Normalizing maps each value v to (v - min)/(max - min); in-range values
/// land in [0, 1]. Values outside the fitted range are permitted (they map
/// outside [0, 1]) and are reported, not clamped, so distances stay faithful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    bounds: Vec<(f64, f64)>,
}

/// A value that fell outside the fitted range during normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfRange {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Normalization {
    /// Per-column extrema of the matrix. Column ranges are strictly positive
    /// by the `ScenarioMatrix` construction invariant.
    pub fn fit(matrix: &ScenarioMatrix) -> Self {
        let bounds = (0..matrix.n_outputs())
            .map(|c| matrix.values().column_extrema(c))
            .collect();
        Self { bounds }
    }

    pub fn from_bounds(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            // NaN bounds must fail too, so test for "strictly wider" rather
            // than its complement.
            let strictly_wider = hi > lo;
            if !strictly_wider {
                return Err(Error::ZeroInitialRange {
                    name: format!("column {i}"),
                });
            }
        }
        Ok(Self { bounds })
    }

    pub fn n_cols(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    #[inline]
    pub fn normalize_value(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds[col];
        (v - lo) / (hi - lo)
    }

    #[inline]
    pub fn denormalize_value(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds[col];
        lo + v * (hi - lo)
    }

    /// Normalize a whole matrix. Returns the mapped matrix and the list of
    /// out-of-range cells (empty when the matrix is the one the
    /// normalization was fitted on).
    pub fn apply(&self, values: &DataMatrix) -> Result<(DataMatrix, Vec<OutOfRange>)> {
        if values.n_cols() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                got: values.n_cols(),
            });
        }
        let mut warnings = Vec::new();
        let mut data = Vec::with_capacity(values.n_rows() * values.n_cols());
        for row in 0..values.n_rows() {
            for col in 0..values.n_cols() {
                let v = values.get(row, col);
                let (lo, hi) = self.bounds[col];
                if v < lo || v > hi {
                    warnings.push(OutOfRange { row, col, value: v });
                }
                data.push(self.normalize_value(col, v));
            }
        }
        let out = DataMatrix::from_flat(values.n_rows(), values.n_cols(), data)?;
        Ok((out, warnings))
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &v)| self.normalize_value(c, v))
            .collect())
    }
}

/// Fit min-max bounds on a scenario matrix.
pub fn fit_normalization(matrix: &ScenarioMatrix) -> Normalization {
    Normalization::fit(matrix)
}

/// Normalize the matrix values; see [`Normalization::apply`].
pub fn apply_normalization(
    matrix: &ScenarioMatrix,
    norm: &Normalization,
) -> Result<(DataMatrix, Vec<OutOfRange>)> {
    norm.apply(matrix.values())
}

/// N scenarios by p uncertain inputs, aligned row-for-row with a paired
/// [`ScenarioMatrix`]. Categorical columns (e.g. a model variant) carry
/// non-negative integer codes and are split by threshold on the codes.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMatrix {
    descriptors: Vec<OutputDescriptor>,
    scenario_ids: Vec<String>,
    values: DataMatrix,
    categorical: Vec<bool>,
}

impl UncertaintyMatrix {
    pub fn new(
        descriptors: Vec<OutputDescriptor>,
        scenario_ids: Vec<String>,
        values: DataMatrix,
        categorical: Vec<bool>,
    ) -> Result<Self> {
        validate_descriptors(&descriptors)?;
        let (n, p) = (values.n_rows(), values.n_cols());
        if p == 0 {
            return Err(Error::NoColumns);
        }
        if descriptors.len() != p || categorical.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: descriptors.len(),
            });
        }
        if scenario_ids.len() != n {
            return Err(Error::RowCountMismatch {
                left: scenario_ids.len(),
                right: n,
            });
        }
        for row in 0..n {
            for col in 0..p {
                let v = values.get(row, col);
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        row,
                        col,
                        name: descriptors[col].name.clone(),
                    });
                }
                if categorical[col] && (v < 0.0 || v.fract() != 0.0) {
                    return Err(Error::BadCategoricalCode {
                        name: descriptors[col].name.clone(),
                        row,
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            descriptors,
            scenario_ids,
            values,
            categorical,
        })
    }

    /// Check row alignment against the paired scenario matrix.
    pub fn check_aligned(&self, scenarios: &ScenarioMatrix) -> Result<()> {
        if self.values.n_rows() != scenarios.n_scenarios() {
            return Err(Error::RowCountMismatch {
                left: scenarios.n_scenarios(),
                right: self.values.n_rows(),
            });
        }
        for (row, (a, b)) in scenarios
            .scenario_ids()
            .iter()
            .zip(&self.scenario_ids)
            .enumerate()
        {
            if a != b {
                return Err(Error::ScenarioIdMismatch {
                    row,
                    left: a.clone(),
                    right: b.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn descriptors(&self) -> &[OutputDescriptor] {
        &self.descriptors
    }

    pub fn scenario_ids(&self) -> &[String] {
        &self.scenario_ids
    }

    pub fn values(&self) -> &DataMatrix {
        &self.values
    }

    pub fn categorical_flags(&self) -> &[bool] {
        &self.categorical
    }

    pub fn n_inputs(&self) -> usize {
        self.values.n_cols()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.descriptors.iter().map(|d| d.name.clone()).collect()
    }
}

/// Remaining flexibility of one output at a tree node, as the ratio of its
/// node range to its initial range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockLevel {
    Open,
    Partial,
    Locked,
}

/// Ratio bands for the three lock levels. The bands default to equal thirds;
/// both cut points are configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockThresholds {
    /// Ratios above this are open.
    pub partial: f64,
    /// Ratios at or below this are locked.
    pub locked: f64,
}

impl Default for LockThresholds {
    fn default() -> Self {
        Self {
            partial: 2.0 / 3.0,
            locked: 1.0 / 3.0,
        }
    }
}

impl LockThresholds {
    pub fn classify(&self, ratio: f64) -> LockLevel {
        if ratio > self.partial {
            LockLevel::Open
        } else if ratio > self.locked {
            LockLevel::Partial
        } else {
            LockLevel::Locked
        }
    }
}

/// Per-node decision-space summary: member count, per-output ranges, the
/// decision-space fraction sigma, and a lock level per output.
///
/// Sigma is the product over outputs of (node range / initial range). At the
/// root it is exactly 1; it can only shrink toward the leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSummary {
    pub count: usize,
    /// Per-output (min, max) over the scenarios at the node.
    pub ranges: Vec<(f64, f64)>,
    pub sigma: f64,
    pub locks: Vec<LockLevel>,
}

/// Summary of a node given its member rows and the root (initial) ranges.
///
/// Errors on an empty member set or a zero-width initial range; use
/// [`node_summary_tolerant`] where zero-width initial columns are legitimate.
pub fn node_summary(
    values: &DataMatrix,
    member_rows: &[usize],
    initial_ranges: &[(f64, f64)],
    thresholds: LockThresholds,
) -> Result<NodeSummary> {
    for (i, (lo, hi)) in initial_ranges.iter().enumerate() {
        let strictly_wider = hi > lo;
        if !strictly_wider {
            return Err(Error::ZeroInitialRange {
                name: format!("column {i}"),
            });
        }
    }
    node_summary_tolerant(values, member_rows, initial_ranges, thresholds)
}

/// Like [`node_summary`], but a zero-width initial range contributes a ratio
/// of 1 instead of erroring. Needed for discovery trees over uncertainty
/// matrices, which may carry constant columns.
pub fn node_summary_tolerant(
    values: &DataMatrix,
    member_rows: &[usize],
    initial_ranges: &[(f64, f64)],
    thresholds: LockThresholds,
) -> Result<NodeSummary> {
    if member_rows.is_empty() {
        return Err(Error::EmptyMemberSet);
    }
    if initial_ranges.len() != values.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: values.n_cols(),
            got: initial_ranges.len(),
        });
    }
    let m = values.n_cols();
    let mut ranges = Vec::with_capacity(m);
    let mut locks = Vec::with_capacity(m);
    let mut sigma = 1.0;
    for (col, &(init_lo, init_hi)) in initial_ranges.iter().enumerate() {
        let (lo, hi) = values.column_extrema_over(col, member_rows);
        let init_width = init_hi - init_lo;
        let ratio = if init_width > 0.0 {
            (hi - lo) / init_width
        } else {
            1.0
        };
        sigma *= ratio;
        locks.push(thresholds.classify(ratio));
        ranges.push((lo, hi));
    }
    Ok(NodeSummary {
        count: member_rows.len(),
        ranges,
        sigma,
        locks,
    })
}
