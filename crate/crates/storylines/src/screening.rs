//! Systematic selection of outputs of interest: rank candidate flows by
//! their range of variation across scenarios and keep the ones above a
//! threshold or the top n. Wide-ranging flows are where scenarios actually
//! disagree; near-constant flows carry no storyline information.

use crate::scenario::ScenarioMatrix;
use crate::{Error, Result};

/// Selection rule applied to the range ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Keep candidates whose range is strictly greater than the value.
    /// Requires all candidates to share one unit.
    Threshold(f64),
    /// Keep the n largest-range candidates.
    TopN(usize),
}

/// One candidate flow with its observed extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub unit: String,
    pub min: f64,
    pub max: f64,
    pub range: f64,
}

/// Ranked candidates and the subset the rule keeps. Rejected candidates stay
/// in `ranking` so the report shows what was screened out and by how much.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningReport {
    /// Descending by range; equal ranges order by name.
    pub ranking: Vec<Candidate>,
    pub selected: Vec<String>,
    pub rule: Rule,
}

impl ScreeningReport {
    pub fn rejected(&self) -> Vec<&Candidate> {
        self.ranking
            .iter()
            .filter(|c| !self.selected.contains(&c.name))
            .collect()
    }
}

/// Rank all columns by range and apply the rule.
pub fn screen(flows: &ScenarioMatrix, rule: Rule) -> Result<ScreeningReport> {
    if let Rule::Threshold(_) = rule {
        let first = &flows.descriptors()[0].unit;
        for d in flows.descriptors() {
            if &d.unit != first {
                return Err(Error::MixedUnits {
                    first: first.clone(),
                    second: d.unit.clone(),
                });
            }
        }
    }
    let mut ranking: Vec<Candidate> = flows
        .descriptors()
        .iter()
        .enumerate()
        .map(|(col, d)| {
            let (min, max) = flows.values().column_extrema(col);
            Candidate {
                name: d.name.clone(),
                unit: d.unit.clone(),
                min,
                max,
                range: max - min,
            }
        })
        .collect();
    ranking.sort_by(|a, b| {
        b.range
            .total_cmp(&a.range)
            .then_with(|| a.name.cmp(&b.name))
    });
    let selected: Vec<String> = match rule {
        Rule::Threshold(value) => ranking
            .iter()
            .filter(|c| c.range > value)
            .map(|c| c.name.clone())
            .collect(),
        Rule::TopN(n) => ranking.iter().take(n).map(|c| c.name.clone()).collect(),
    };
    Ok(ScreeningReport {
        ranking,
        selected,
        rule,
    })
}

/// Five-number summary of one flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear interpolation between order statistics at position p·(n−1)
/// (inclusive method), exact on small hand cases.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let position = p * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let fraction = position - lower as f64;
    if fraction == 0.0 {
        sorted[lower]
    } else {
        sorted[lower] + fraction * (sorted[lower + 1] - sorted[lower])
    }
}

/// Per-flow five-number summaries, in column order.
pub fn quartiles(flows: &ScenarioMatrix) -> Vec<(String, FiveNumber)> {
    flows
        .descriptors()
        .iter()
        .enumerate()
        .map(|(col, d)| {
            let mut values: Vec<f64> = flows.values().column(col).collect();
            values.sort_by(f64::total_cmp);
            let summary = FiveNumber {
                min: values[0],
                q1: percentile(&values, 0.25),
                median: percentile(&values, 0.5),
                q3: percentile(&values, 0.75),
                max: values[values.len() - 1],
            };
            (d.name.clone(), summary)
        })
        .collect()
}
