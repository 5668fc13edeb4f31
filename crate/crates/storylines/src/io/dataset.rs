//! CSV matrix ingestion with an optional JSON metadata sidecar.
//!
//! Matrix CSVs are plain: a header row of column names, then decimal
//! numbers, no id column (scenario ids are synthesized from row order, and
//! row order is what aligns the scenario and uncertainty files). The
//! metadata file annotates columns by name with a unit, a kind, and a
//! categorical flag; columns without metadata default to outputs of interest
//! in the scenario file and uncertain inputs in the theta file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::matrix::DataMatrix;
use crate::scenario::{DescriptorKind, OutputDescriptor, ScenarioMatrix, UncertaintyMatrix};
use crate::{Error, Result};

/// Metadata for one named column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    #[serde(default = "default_unit")]
    pub unit: String,
    #[serde(default = "default_kind", with = "kind_code")]
    pub kind: DescriptorKind,
    #[serde(default)]
    pub categorical: bool,
}

fn default_unit() -> String {
    "unitless".to_string()
}

fn default_kind() -> DescriptorKind {
    DescriptorKind::OutputOfInterest
}

/// The metadata file kinds are three-letter codes; keep parsing/printing in
/// one place.
mod kind_code {
    use super::DescriptorKind;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(kind: &DescriptorKind, s: S) -> Result<S::Ok, S::Error> {
        let code = match kind {
            DescriptorKind::OutputOfInterest => "ooi",
            DescriptorKind::UncertainInput => "theta",
            DescriptorKind::Flow => "flow",
        };
        code.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DescriptorKind, D::Error> {
        let code = String::deserialize(d)?;
        match code.as_str() {
            "ooi" => Ok(DescriptorKind::OutputOfInterest),
            "theta" => Ok(DescriptorKind::UncertainInput),
            "flow" => Ok(DescriptorKind::Flow),
            other => Err(serde::de::Error::custom(format!(
                "unknown column kind '{other}' (expected ooi, theta, or flow)"
            ))),
        }
    }
}

/// Column annotations keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub columns: Vec<ColumnMeta>,
}

impl Metadata {
    fn by_name(&self) -> BTreeMap<&str, &ColumnMeta> {
        self.columns.iter().map(|c| (c.name.as_str(), c)).collect()
    }
}

/// Parse the JSON metadata sidecar.
pub fn read_metadata(path: &Path) -> Result<Metadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::CsvFile {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn synthesized_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:04}")).collect()
}

/// Header names and numeric rows from a matrix CSV. Parse errors report the
/// 1-based data row and the column name.
fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file_err = |msg: String| Error::CsvFile {
        path: path.display().to_string(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| file_err(e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| file_err(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| file_err(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(file_err(format!(
                "data row {} has {} fields, header has {}",
                row_idx + 1,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len());
        for (col_idx, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::CsvCell {
                row: row_idx + 1,
                col: headers[col_idx].clone(),
                msg: format!("'{}' is not a decimal number", cell.trim()),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

/// Read a scenario matrix. Columns default to outputs of interest with unit
/// "unitless"; metadata overrides by name.
pub fn read_scenario_csv(path: &Path, metadata: Option<&Metadata>) -> Result<ScenarioMatrix> {
    let (headers, rows) = read_numeric_csv(path)?;
    let lookup = metadata.map(Metadata::by_name).unwrap_or_default();
    let descriptors: Vec<OutputDescriptor> = headers
        .iter()
        .map(|name| match lookup.get(name.as_str()) {
            Some(meta) => OutputDescriptor::new(name.clone(), meta.unit.clone(), meta.kind),
            None => {
                OutputDescriptor::new(name.clone(), "unitless", DescriptorKind::OutputOfInterest)
            }
        })
        .collect();
    let n = rows.len();
    ScenarioMatrix::new(
        descriptors,
        synthesized_ids(n),
        DataMatrix::from_rows(rows)?,
    )
}

/// Read an uncertainty matrix. Columns default to non-categorical uncertain
/// inputs; metadata sets units and categorical flags by name.
pub fn read_theta_csv(path: &Path, metadata: Option<&Metadata>) -> Result<UncertaintyMatrix> {
    let (headers, rows) = read_numeric_csv(path)?;
    let lookup = metadata.map(Metadata::by_name).unwrap_or_default();
    let mut descriptors = Vec::with_capacity(headers.len());
    let mut categorical = Vec::with_capacity(headers.len());
    for name in &headers {
        match lookup.get(name.as_str()) {
            Some(meta) => {
                descriptors.push(OutputDescriptor::new(
                    name.clone(),
                    meta.unit.clone(),
                    DescriptorKind::UncertainInput,
                ));
                categorical.push(meta.categorical);
            }
            None => {
                descriptors.push(OutputDescriptor::new(
                    name.clone(),
                    "unitless",
                    DescriptorKind::UncertainInput,
                ));
                categorical.push(false);
            }
        }
    }
    let n = rows.len();
    UncertaintyMatrix::new(
        descriptors,
        synthesized_ids(n),
        DataMatrix::from_rows(rows)?,
        categorical,
    )
}

/// A validated pair of scenario and (optional) uncertainty matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub scenarios: ScenarioMatrix,
    pub theta: Option<UncertaintyMatrix>,
}

/// Read and validate a dataset: scenario CSV, optional theta CSV, optional
/// metadata. Every metadata column must exist in one of the files, and the
/// two matrices must align row for row.
pub fn read_dataset(
    scenario_path: &Path,
    theta_path: Option<&Path>,
    metadata: Option<&Metadata>,
) -> Result<DatasetBundle> {
    let scenarios = read_scenario_csv(scenario_path, metadata)?;
    let theta = theta_path
        .map(|p| read_theta_csv(p, metadata))
        .transpose()?;
    if let Some(meta) = metadata {
        for column in &meta.columns {
            let in_scenarios = scenarios
                .descriptors()
                .iter()
                .any(|d| d.name == column.name);
            let in_theta = theta
                .as_ref()
                .is_some_and(|t| t.descriptors().iter().any(|d| d.name == column.name));
            if !in_scenarios && !in_theta {
                return Err(Error::UnknownMetadataColumn {
                    name: column.name.clone(),
                });
            }
        }
    }
    if let Some(t) = &theta {
        t.check_aligned(&scenarios)?;
    }
    Ok(DatasetBundle { scenarios, theta })
}

/// Render named columns of numbers as CSV text. Values print in Rust's
/// shortest round-trip form, so reading the file back reproduces every bit.
pub fn matrix_to_csv(names: &[String], values: &DataMatrix) -> String {
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in values.rows_iter() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}
