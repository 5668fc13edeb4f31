//! Streamline large ensembles of energy-system scenarios into a small set of
//! interpretable storylines.
//!
//! The pipeline has three core steps:
//!
//! 1. **Cluster** the scenarios on a handful of stakeholder-chosen outputs of
//!    interest with k-Means ([`cluster`]).
//! 2. **Fit a leaf-limited classification tree** over the same outputs so each
//!    cluster becomes a root-to-leaf path of axis-aligned split rules
//!    ([`tree`]).
//! 3. **Re-order** the points so every cluster is exactly tree-definable
//!    ([`tree::reorder`]).
//!
//! Around that core: [`discovery`] links clusters back to uncertain model
//! inputs with interpretability/coverage-scored classification trees,
//! [`screening`] ranks candidate outputs of interest by their range of
//! variation, [`synth`] generates seeded benchmark datasets, and [`io`]
//! handles CSV ingestion plus deterministic JSON/text/DOT/SVG export.
//!
//! All randomness is fanned out from a single seed (see [`seed`]), and every
//! operation is deterministic for a fixed seed: identical inputs produce
//! byte-identical artifacts.

pub mod cluster;
pub mod discovery;
pub mod error;
pub mod io;
pub mod matrix;
pub mod scenario;
pub mod screening;
pub mod seed;
pub mod synth;
pub mod tree;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
