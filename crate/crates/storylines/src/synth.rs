//! Seeded synthetic benchmark datasets: Gaussian scenario blobs whose
//! membership is driven by two designated uncertain inputs plus label noise.
//!
//! The generator mirrors the structure the pipeline is built to recover.
//! Uncertain inputs are uniform on [0,1); a decision-list staircase over two
//! driver columns assigns each scenario a label; a configurable fraction of
//! labels gets flipped to a different cluster; the scenario outputs are then
//! drawn from unit-variance Gaussian blobs centered per label. Clustering
//! should recover the blobs, the storyline tree should describe them with
//! one feature per split, and discovery should trace the labels back to
//! exactly the two driver columns with coverage of about one minus the
//! noise rate.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::matrix::DataMatrix;
use crate::scenario::{DescriptorKind, OutputDescriptor, ScenarioMatrix, UncertaintyMatrix};
use crate::seed::{rng_for, stream};
use crate::{Error, Result};

/// Shape of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    /// Cluster (blob) count.
    pub blobs: usize,
    /// Scenario count.
    pub n: usize,
    /// Outputs of interest.
    pub m: usize,
    /// Uncertain inputs.
    pub p: usize,
    /// Probability that a scenario's label flips to a different cluster.
    pub noise: f64,
    /// Distance between consecutive blob centers, in units of the blob
    /// standard deviation (which is 1).
    pub separation: f64,
    /// The two uncertain-input columns that drive the labels.
    pub drivers: (usize, usize),
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            blobs: 3,
            n: 1000,
            m: 5,
            p: 10,
            noise: 0.1,
            separation: 6.0,
            drivers: (2, 7),
            seed: 7,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.blobs < 1 {
            return Err(Error::BadSynthSpec("blob count must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::BadSynthSpec("need at least 2 scenarios".into()));
        }
        if self.m < 1 || self.p < 1 {
            return Err(Error::BadSynthSpec(
                "need at least 1 output and 1 uncertain input".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::BadSynthSpec(format!(
                "noise must be in [0, 1), got {}",
                self.noise
            )));
        }
        if self.separation <= 0.0 {
            return Err(Error::BadSynthSpec(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        let (a, b) = self.drivers;
        if a >= self.p || b >= self.p {
            return Err(Error::BadSynthSpec(format!(
                "driver columns ({a}, {b}) must lie below p = {}",
                self.p
            )));
        }
        if self.blobs > 2 && a == b {
            return Err(Error::BadSynthSpec(
                "driver columns must differ for more than 2 blobs".into(),
            ));
        }
        Ok(())
    }

    /// Threshold for staircase step c: 0.5, 0.5, 0.75, 0.75, 0.875, ...
    /// Consecutive steps alternate between the two driver columns, so each
    /// split leaves roughly half the remaining probability mass behind.
    fn step_threshold(c: usize) -> f64 {
        1.0 - 0.5f64.powi(c as i32 / 2 + 1)
    }

    /// Noise-free label for one row of uncertain inputs: the first staircase
    /// step whose driver value falls at or below its threshold, else the
    /// last blob.
    pub fn staircase_label(&self, theta_row: &[f64]) -> usize {
        let (a, b) = self.drivers;
        for c in 0..self.blobs.saturating_sub(1) {
            let driver = if c % 2 == 0 { a } else { b };
            if theta_row[driver] <= Self::step_threshold(c) {
                return c;
            }
        }
        self.blobs - 1
    }
}

/// A generated dataset: aligned scenario and uncertainty matrices plus the
/// (noisy) labels that placed each scenario's blob.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub scenarios: ScenarioMatrix,
    pub theta: UncertaintyMatrix,
    pub labels: Vec<usize>,
}

/// Blob center for one label: a staircase that advances one coordinate per
/// blob (wrapping past m), so consecutive centers sit exactly `separation`
/// apart and any two centers are at least that far apart.
fn blob_center(label: usize, m: usize, separation: f64) -> Vec<f64> {
    let mut center = vec![0.0; m];
    for step in 0..label {
        center[step % m] += separation;
    }
    center
}

/// Generate a dataset. Byte-identical for identical parameters: every
/// random choice draws from a stream derived from the dataset seed.
pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let mut theta_rng = rng_for(spec.seed, stream::SYNTH_THETA, &[]);
    let mut theta_rows = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        theta_rows.push(
            (0..spec.p)
                .map(|_| theta_rng.random::<f64>())
                .collect::<Vec<f64>>(),
        );
    }

    let mut labels: Vec<usize> = theta_rows
        .iter()
        .map(|row| spec.staircase_label(row))
        .collect();
    if spec.noise > 0.0 && spec.blobs > 1 {
        let mut noise_rng = rng_for(spec.seed, stream::SYNTH_LABEL_NOISE, &[]);
        for label in &mut labels {
            if noise_rng.random::<f64>() < spec.noise {
                let other = noise_rng.random_range(0..spec.blobs - 1);
                *label = if other >= *label { other + 1 } else { other };
            }
        }
    }

    let mut blob_rng = rng_for(spec.seed, stream::SYNTH_BLOBS, &[]);
    let unit_normal = Normal::new(0.0, 1.0).expect("unit variance is valid");
    let centers: Vec<Vec<f64>> = (0..spec.blobs)
        .map(|c| blob_center(c, spec.m, spec.separation))
        .collect();
    let mut scenario_rows = Vec::with_capacity(spec.n);
    for &label in &labels {
        let row: Vec<f64> = centers[label]
            .iter()
            .map(|&c| c + unit_normal.sample(&mut blob_rng))
            .collect();
        scenario_rows.push(row);
    }

    let ids: Vec<String> = (0..spec.n).map(|i| format!("s{i:04}")).collect();
    let scenario_descriptors: Vec<OutputDescriptor> = (0..spec.m)
        .map(|i| {
            OutputDescriptor::new(
                format!("y{i}"),
                "unitless",
                DescriptorKind::OutputOfInterest,
            )
        })
        .collect();
    let scenarios = ScenarioMatrix::new(
        scenario_descriptors,
        ids.clone(),
        DataMatrix::from_rows(scenario_rows)?,
    )?;
    let theta_descriptors: Vec<OutputDescriptor> = (0..spec.p)
        .map(|i| {
            OutputDescriptor::new(
                format!("theta{i}"),
                "unitless",
                DescriptorKind::UncertainInput,
            )
        })
        .collect();
    let theta = UncertaintyMatrix::new(
        theta_descriptors,
        ids,
        DataMatrix::from_rows(theta_rows)?,
        vec![false; spec.p],
    )?;
    Ok(SynthDataset {
        scenarios,
        theta,
        labels,
    })
}
