//! The six subcommands. Each resolves its configuration (flags over file
//! over defaults), echoes the effective values to `config.json` in the
//! output directory, runs the library pipeline, and writes artifacts
//! atomically. Artifacts carry no timestamps, so identical configs and
//! inputs give byte-identical output directories.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use storylines::cluster::{elbow_curve, kmeans, ClusterAssignment, KMeansParams};
use storylines::discovery::{
    discovery_sweep, discovery_tree, select_discovery_tree, FoldPlan, SelectionPolicy,
};
use storylines::io::dataset::matrix_to_csv;
use storylines::io::dataset::{read_dataset, read_metadata, DatasetBundle};
use storylines::io::svg::{
    render_discovery, render_elbow, render_radar_svg, render_scatter, render_screening, RadarStyle,
};
use storylines::io::text::{render_tree_dot, render_tree_text};
use storylines::io::tree_json::{document_to_string, tree_document, MetaDocument};
use storylines::io::write_atomic;
use storylines::matrix::DataMatrix;
use storylines::scenario::{
    apply_normalization, fit_normalization, LockThresholds, Normalization, ScenarioMatrix,
};
use storylines::screening::screen as screen_columns;
use storylines::synth::{generate, SynthSpec};
use storylines::tree::{advise_k, fit_tree, reorder, tree_reorder_hook, NodeKind};
use storylines::Error;

use crate::config::{parse_rule, rule_to_string, RunConfig};

const DEFAULT_SEED: u64 = 7;

fn require<'a, T>(value: &'a Option<T>, what: &str) -> anyhow::Result<&'a T> {
    value
        .as_ref()
        .with_context(|| format!("{what} is required (flag or config file)"))
}

fn apply_jobs(cfg: &RunConfig) {
    if let Some(jobs) = cfg.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory '{}'", out.display()))?;
    Ok(out)
}

fn lock_thresholds(cfg: &RunConfig) -> anyhow::Result<LockThresholds> {
    let defaults = LockThresholds::default();
    let partial = cfg.lock_partial.unwrap_or(defaults.partial);
    let locked = cfg.lock_locked.unwrap_or(defaults.locked);
    anyhow::ensure!(
        0.0 <= locked && locked <= partial && partial <= 1.0,
        "lock thresholds need 0 <= locked <= partial <= 1, got locked={locked} partial={partial}"
    );
    Ok(LockThresholds { partial, locked })
}

fn kmeans_params(cfg: &RunConfig) -> anyhow::Result<KMeansParams> {
    let restarts = cfg.restarts.unwrap_or(KMeansParams::default().restarts);
    anyhow::ensure!(restarts >= 1, "restarts must be at least 1");
    Ok(KMeansParams {
        restarts,
        ..KMeansParams::default()
    })
}

fn load_bundle(cfg: &RunConfig, input: &Path, with_theta: bool) -> anyhow::Result<DatasetBundle> {
    let metadata = cfg.metadata.as_deref().map(read_metadata).transpose()?;
    let theta_path = if with_theta {
        cfg.theta.as_deref()
    } else {
        None
    };
    Ok(read_dataset(input, theta_path, metadata.as_ref())?)
}

fn normalized(scenarios: &ScenarioMatrix) -> anyhow::Result<(Normalization, DataMatrix)> {
    let norm = fit_normalization(scenarios);
    let (x, _) = apply_normalization(scenarios, &norm)?;
    Ok((norm, x))
}

fn emit(out: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = out.join(name);
    write_atomic(&path, text.as_bytes())
        .with_context(|| format!("cannot write '{}'", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_json<T: Serialize>(out: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, name, &text)
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in &rows {
        writer.write_record(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
    Ok(String::from_utf8(bytes)?)
}

#[derive(Serialize)]
struct ReorderReport {
    d_before: f64,
    d_after: f64,
    moved_count: usize,
    increase_fraction: f64,
}

pub fn pipeline(cfg: &RunConfig) -> anyhow::Result<()> {
    apply_jobs(cfg);
    let input = require(&cfg.input, "an input CSV (--input)")?.clone();
    let k = *require(&cfg.k, "a storyline count (--k)")?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let params = kmeans_params(cfg)?;
    let max_leaves = cfg.max_leaves.unwrap_or(k);
    let locks = lock_thresholds(cfg)?;
    let out = out_dir(cfg)?;
    let echo = RunConfig {
        input: Some(input.clone()),
        theta: cfg.theta.clone(),
        metadata: cfg.metadata.clone(),
        out: Some(out.clone()),
        seed: Some(seed),
        k: Some(k),
        restarts: Some(params.restarts),
        max_leaves: Some(max_leaves),
        lock_partial: Some(locks.partial),
        lock_locked: Some(locks.locked),
        jobs: cfg.jobs,
        ..RunConfig::default()
    };
    emit_json(&out, "config.json", &echo)?;

    let bundle = load_bundle(cfg, &input, true)?;
    let scenarios = bundle.scenarios;
    let (norm, x) = normalized(&scenarios)?;
    let assignment = kmeans(&x, k, seed, &params)?;
    let names = scenarios.feature_names();
    let tree = fit_tree(&x, &assignment.labels, max_leaves, &names, locks)?;
    let moved = reorder(&x, &assignment, &tree)?;

    let rows: Vec<Vec<String>> = scenarios
        .scenario_ids()
        .iter()
        .zip(moved.labels_before.iter().zip(&moved.labels_after))
        .map(|(id, (before, after))| vec![id.clone(), before.to_string(), after.to_string()])
        .collect();
    emit(
        &out,
        "assignment.csv",
        &csv_table(&["scenario_id", "cluster", "storyline"], rows)?,
    )?;

    let doc = tree_document(
        &tree,
        scenarios.descriptors(),
        Some(&norm),
        MetaDocument {
            k,
            d_before: Some(moved.d_before),
            d_after: Some(moved.d_after),
            seed,
        },
    )?;
    emit(&out, "tree.json", &document_to_string(&doc)?)?;
    emit(&out, "tree.txt", &render_tree_text(&doc)?)?;
    emit(&out, "tree.dot", &render_tree_dot(&doc)?)?;

    let increase_fraction = if moved.d_before > 0.0 {
        (moved.d_after - moved.d_before) / moved.d_before
    } else {
        0.0
    };
    emit_json(
        &out,
        "reorder.json",
        &ReorderReport {
            d_before: moved.d_before,
            d_after: moved.d_after,
            moved_count: moved.moved_count,
            increase_fraction,
        },
    )?;

    let initial = tree.nodes()[tree.root_id()].summary.ranges.clone();
    for node in tree.nodes() {
        let color_index = match node.kind {
            NodeKind::Leaf { label } => label,
            NodeKind::Internal { .. } => 7,
        };
        let style = RadarStyle {
            color_index,
            ..RadarStyle::default()
        };
        let svg = render_radar_svg(&node.summary, scenarios.descriptors(), &initial, &style)?;
        emit(&out, &format!("radar_node{:02}.svg", node.id), &svg)?;
    }

    println!(
        "pipeline: {} scenarios, k={k}, d_before={}, d_after={}, moved={}",
        scenarios.n_scenarios(),
        moved.d_before,
        moved.d_after,
        moved.moved_count
    );
    Ok(())
}

/// Resolve the k range for elbow and advise: 1 up to 10, clipped to the
/// scenario count, unless explicit values are given.
fn resolve_k_range(cfg: &RunConfig, n: usize) -> anyhow::Result<(usize, usize)> {
    let k_min = cfg.k_min.unwrap_or(1);
    let k_max = cfg.k_max.unwrap_or_else(|| 10.min(n));
    anyhow::ensure!(
        k_min >= 1 && k_min <= k_max,
        "need 1 <= k-min <= k-max, got k-min={k_min} k-max={k_max}"
    );
    Ok((k_min, k_max))
}

fn range_echo(
    cfg: &RunConfig,
    input: &Path,
    out: &Path,
    seed: u64,
    params: &KMeansParams,
    locks: &LockThresholds,
    (k_min, k_max): (usize, usize),
) -> RunConfig {
    RunConfig {
        input: Some(input.to_path_buf()),
        metadata: cfg.metadata.clone(),
        out: Some(out.to_path_buf()),
        seed: Some(seed),
        k_min: Some(k_min),
        k_max: Some(k_max),
        restarts: Some(params.restarts),
        lock_partial: Some(locks.partial),
        lock_locked: Some(locks.locked),
        jobs: cfg.jobs,
        ..RunConfig::default()
    }
}

pub fn elbow(cfg: &RunConfig) -> anyhow::Result<()> {
    apply_jobs(cfg);
    let input = require(&cfg.input, "an input CSV (--input)")?.clone();
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let params = kmeans_params(cfg)?;
    let locks = lock_thresholds(cfg)?;
    let out = out_dir(cfg)?;

    let bundle = load_bundle(cfg, &input, false)?;
    let scenarios = bundle.scenarios;
    let (k_min, k_max) = resolve_k_range(cfg, scenarios.n_scenarios())?;
    emit_json(
        &out,
        "config.json",
        &range_echo(cfg, &input, &out, seed, &params, &locks, (k_min, k_max)),
    )?;

    let (_norm, x) = normalized(&scenarios)?;
    let names = scenarios.feature_names();
    let mut inner = tree_reorder_hook(&x, &names, locks);
    let mut hook = |assignment: &ClusterAssignment| match inner(assignment) {
        Err(Error::ClusterVanished { label }) => {
            eprintln!(
                "storylines: warning: k={}: storyline {label} vanished during re-ordering; no re-ordered distance at this k",
                assignment.k
            );
            Ok(None)
        }
        other => other,
    };
    let curve = elbow_curve(&x, k_min..=k_max, seed, &params, Some(&mut hook))?;

    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| {
            vec![
                p.k.to_string(),
                p.d_initial.to_string(),
                p.d_reordered.map(|d| d.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    emit(
        &out,
        "elbow.csv",
        &csv_table(&["k", "d_initial", "d_reordered"], rows)?,
    )?;
    emit(&out, "elbow.svg", &render_elbow(&curve)?)?;
    println!(
        "elbow: k={k_min}..{k_max}, d goes {} -> {}",
        curve.first().map(|p| p.d_initial).unwrap_or(f64::NAN),
        curve.last().map(|p| p.d_initial).unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn advise(cfg: &RunConfig) -> anyhow::Result<()> {
    apply_jobs(cfg);
    let input = require(&cfg.input, "an input CSV (--input)")?.clone();
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let params = kmeans_params(cfg)?;
    let locks = lock_thresholds(cfg)?;
    let out = out_dir(cfg)?;

    let bundle = load_bundle(cfg, &input, false)?;
    let scenarios = bundle.scenarios;
    let (k_min, k_max) = resolve_k_range(cfg, scenarios.n_scenarios())?;
    emit_json(
        &out,
        "config.json",
        &range_echo(cfg, &input, &out, seed, &params, &locks, (k_min, k_max)),
    )?;

    let (_norm, x) = normalized(&scenarios)?;
    let names = scenarios.feature_names();
    let advice = advise_k(&x, k_min..=k_max, seed, &params, &names, locks)?;

    let rows: Vec<Vec<String>> = advice
        .iter()
        .map(|a| {
            vec![
                a.k.to_string(),
                a.d_initial.to_string(),
                a.d_reordered.to_string(),
                a.repeated_split.to_string(),
                a.distinct_features.to_string(),
            ]
        })
        .collect();
    emit(
        &out,
        "advise.csv",
        &csv_table(
            &[
                "k",
                "d_initial",
                "d_reordered",
                "repeated_split",
                "distinct_features",
            ],
            rows,
        )?,
    )?;
    for a in &advice {
        println!(
            "k={}: d={} d_reordered={} repeated_split={} distinct_outputs={}",
            a.k, a.d_initial, a.d_reordered, a.repeated_split, a.distinct_features
        );
    }
    Ok(())
}

pub fn discover(cfg: &RunConfig) -> anyhow::Result<()> {
    apply_jobs(cfg);
    let input = require(&cfg.input, "an input CSV (--input)")?.clone();
    require(&cfg.theta, "an uncertain-input CSV (--theta)")?;
    let k = *require(&cfg.k, "a storyline count (--k)")?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let params = kmeans_params(cfg)?;
    let locks = lock_thresholds(cfg)?;
    let folds = cfg.folds.unwrap_or(5);
    let budget_min = cfg.budget_min.unwrap_or(2);
    let budget_max = cfg.budget_max.unwrap_or(8);
    anyhow::ensure!(
        budget_min >= 2 && budget_min <= budget_max,
        "need 2 <= budget-min <= budget-max, got budget-min={budget_min} budget-max={budget_max}"
    );
    let margin = cfg
        .select_margin
        .unwrap_or(SelectionPolicy::default().cv_margin);
    anyhow::ensure!(
        margin >= 0.0,
        "select-margin must be non-negative, got {margin}"
    );
    let out = out_dir(cfg)?;
    let echo = RunConfig {
        input: Some(input.clone()),
        theta: cfg.theta.clone(),
        metadata: cfg.metadata.clone(),
        out: Some(out.clone()),
        seed: Some(seed),
        k: Some(k),
        restarts: Some(params.restarts),
        lock_partial: Some(locks.partial),
        lock_locked: Some(locks.locked),
        folds: Some(folds),
        budget_min: Some(budget_min),
        budget_max: Some(budget_max),
        select_margin: Some(margin),
        jobs: cfg.jobs,
        ..RunConfig::default()
    };
    emit_json(&out, "config.json", &echo)?;

    let bundle = load_bundle(cfg, &input, true)?;
    let scenarios = bundle.scenarios;
    let theta = bundle
        .theta
        .expect("theta path was provided, so the bundle carries it");
    let (_norm, x) = normalized(&scenarios)?;
    let assignment = kmeans(&x, k, seed, &params)?;

    let plan = FoldPlan::stratified(&assignment.labels, folds, seed)?;
    let curve = discovery_sweep(
        &theta,
        &assignment.labels,
        budget_min..=budget_max,
        &plan,
        locks,
    )?;
    let chosen = select_discovery_tree(&curve, &SelectionPolicy { cv_margin: margin })?.clone();
    let tree = discovery_tree(&theta, &assignment.labels, chosen.max_leaves, locks)?;

    let rows: Vec<Vec<String>> = curve
        .entries
        .iter()
        .map(|e| {
            vec![
                e.max_leaves.to_string(),
                e.interpretability.to_string(),
                e.coverage.to_string(),
                e.cv_coverage.to_string(),
                e.features_used.join("|"),
            ]
        })
        .collect();
    emit(
        &out,
        "discovery.csv",
        &csv_table(
            &[
                "max_leaves",
                "interpretability",
                "coverage",
                "cv_coverage",
                "features_used",
            ],
            rows,
        )?,
    )?;
    emit(&out, "discovery.svg", &render_discovery(&curve)?)?;

    let doc = tree_document(
        &tree,
        theta.descriptors(),
        None,
        MetaDocument {
            k,
            d_before: None,
            d_after: None,
            seed,
        },
    )?;
    emit(&out, "discovery_tree.json", &document_to_string(&doc)?)?;
    emit(&out, "discovery_tree.txt", &render_tree_text(&doc)?)?;
    emit(&out, "discovery_tree.dot", &render_tree_dot(&doc)?)?;

    if chosen.features_used.len() == 2 {
        let names = theta.feature_names();
        let cols: Vec<usize> = chosen
            .features_used
            .iter()
            .map(|f| {
                names
                    .iter()
                    .position(|n| n == f)
                    .expect("chosen features come from these columns")
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..theta.values().n_rows())
            .map(|i| {
                vec![
                    theta.values().get(i, cols[0]),
                    theta.values().get(i, cols[1]),
                ]
            })
            .collect();
        let points = DataMatrix::from_rows(rows)?;
        let svg = render_scatter(
            &points,
            (&chosen.features_used[0], &chosen.features_used[1]),
            &assignment.labels,
        )?;
        emit(&out, "scatter.svg", &svg)?;
    }

    println!(
        "discover: chose a {}-leaf tree on [{}], coverage={}, cv_coverage={}",
        chosen.max_leaves,
        chosen.features_used.join(", "),
        chosen.coverage,
        chosen.cv_coverage
    );
    Ok(())
}

pub fn screen(cfg: &RunConfig) -> anyhow::Result<()> {
    apply_jobs(cfg);
    let input = require(&cfg.input, "an input CSV (--input)")?.clone();
    let rule_text = require(&cfg.rule, "a screening rule (--rule)")?;
    let rule = parse_rule(rule_text)?;
    let out = out_dir(cfg)?;
    let echo = RunConfig {
        input: Some(input.clone()),
        metadata: cfg.metadata.clone(),
        out: Some(out.clone()),
        rule: Some(rule_to_string(&rule)),
        jobs: cfg.jobs,
        ..RunConfig::default()
    };
    emit_json(&out, "config.json", &echo)?;

    let bundle = load_bundle(cfg, &input, false)?;
    let report = screen_columns(&bundle.scenarios, rule)?;

    let rows: Vec<Vec<String>> = report
        .ranking
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.unit.clone(),
                c.min.to_string(),
                c.max.to_string(),
                c.range.to_string(),
                report.selected.contains(&c.name).to_string(),
            ]
        })
        .collect();
    emit(
        &out,
        "screening.csv",
        &csv_table(&["name", "unit", "min", "max", "range", "selected"], rows)?,
    )?;
    emit(&out, "screening.svg", &render_screening(&report)?)?;
    println!(
        "screen: selected {} of {} candidates ({})",
        report.selected.len(),
        report.ranking.len(),
        rule_to_string(&report.rule)
    );
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> anyhow::Result<()> {
    let defaults = SynthSpec::default();
    let drivers = match &cfg.drivers {
        Some(pair) => {
            anyhow::ensure!(
                pair.len() == 2,
                "drivers must be exactly two column indices, got {pair:?}"
            );
            (pair[0], pair[1])
        }
        None => defaults.drivers,
    };
    let spec = SynthSpec {
        blobs: cfg.blobs.unwrap_or(defaults.blobs),
        n: cfg.n.unwrap_or(defaults.n),
        m: cfg.m.unwrap_or(defaults.m),
        p: cfg.p.unwrap_or(defaults.p),
        noise: cfg.noise.unwrap_or(defaults.noise),
        separation: cfg.separation.unwrap_or(defaults.separation),
        drivers,
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
    };
    let out = out_dir(cfg)?;
    let echo = RunConfig {
        out: Some(out.clone()),
        seed: Some(spec.seed),
        blobs: Some(spec.blobs),
        n: Some(spec.n),
        m: Some(spec.m),
        p: Some(spec.p),
        noise: Some(spec.noise),
        separation: Some(spec.separation),
        drivers: Some(vec![spec.drivers.0, spec.drivers.1]),
        ..RunConfig::default()
    };
    emit_json(&out, "config.json", &echo)?;

    let data = generate(&spec)?;
    emit(
        &out,
        "scenarios.csv",
        &matrix_to_csv(&data.scenarios.feature_names(), data.scenarios.values()),
    )?;
    emit(
        &out,
        "theta.csv",
        &matrix_to_csv(&data.theta.feature_names(), data.theta.values()),
    )?;
    println!(
        "synth: {} scenarios, {} outputs, {} uncertain inputs, {} blobs, noise {}",
        spec.n, spec.m, spec.p, spec.blobs, spec.noise
    );
    Ok(())
}
