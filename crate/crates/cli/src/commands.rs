//! The four subcommands. Each validates its config, runs, and writes its
//! outputs (plus `.meta.json` sidecars) under the configured output directory.

use std::fmt::Write as _;
use std::path::PathBuf;

use dproute_core::experiment::{run_on_graph, trend_report, ExperimentConfig, TrendReport};
use dproute_core::fmt::g17;
use dproute_core::generators::GraphSpecDraft;
use dproute_core::report::{aggregate_csv, bounds_csv, pairs_csv, records_csv};
use dproute_core::{bound_curve, BoundReport, GraphSpec, WeightedGraph};
use serde::Serialize;

use crate::config::{RunConfig, SweepConfig};
use crate::output::{ensure_dir, write_with_meta};
use crate::CliError;

pub const GRAPH_FILE: &str = "graph.txt";
pub const RECORDS_FILE: &str = "records.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const PAIRS_FILE: &str = "pairs.csv";
pub const TREND_FILE: &str = "trend.json";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const SWEEP_INDEX_FILE: &str = "sweep_index.csv";

/// Provenance written next to every output file.
#[derive(Serialize)]
struct Meta<'a> {
    command: &'static str,
    config: &'a RunConfig,
    graph: GraphSpecDraft,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_reference: Option<f64>,
    node_count: usize,
    edge_count: usize,
}

impl<'a> Meta<'a> {
    fn new(
        command: &'static str,
        config: &'a RunConfig,
        spec: &GraphSpec,
        g: &WeightedGraph,
    ) -> Self {
        Meta {
            command,
            config,
            graph: GraphSpecDraft::from(*spec),
            sigma: None,
            noise_reference: None,
            node_count: g.node_count(),
            edge_count: g.edge_count(),
        }
    }
}

fn prepare(config: &RunConfig) -> Result<(GraphSpec, WeightedGraph, PathBuf), CliError> {
    let spec = config.graph_spec()?;
    let dir = config.output_dir()?.to_path_buf();
    let g = spec.generate()?;
    ensure_dir(&dir)?;
    Ok((spec, g, dir))
}

/// Resolves the privacy block to an absolute sigma for graph `g`.
fn resolve_sigma(
    config: &RunConfig,
    spec: &GraphSpec,
    g: &WeightedGraph,
) -> Result<(f64, f64), CliError> {
    let noise = config.privacy.resolve()?;
    let reference = spec.noise_reference(g);
    Ok((noise.resolve(reference)?, reference))
}

pub fn generate(config: &RunConfig) -> Result<PathBuf, CliError> {
    let (spec, g, dir) = prepare(config)?;
    let meta = Meta::new("generate", config, &spec, &g);
    write_with_meta(&dir, GRAPH_FILE, g.to_text().as_bytes(), &meta)
}

#[derive(Clone, Debug)]
pub struct SimulateOutput {
    pub dir: PathBuf,
    pub sigma: f64,
    pub trend: TrendReport,
}

pub fn simulate(config: &RunConfig) -> Result<SimulateOutput, CliError> {
    config.check_trials()?;
    let noise = config.privacy.resolve()?;
    let seed = config.seed()?;
    let (spec, g, dir) = prepare(config)?;
    let reference = spec.noise_reference(&g);
    let sigma = noise.resolve(reference)?;
    let mut meta = Meta::new("simulate", config, &spec, &g);
    meta.sigma = Some(sigma);
    meta.noise_reference = Some(reference);

    let exp = ExperimentConfig {
        trials: config.trials,
        master_seed: seed,
        pair_sampling: config.pair_sampling,
    };
    let result = run_on_graph(g, sigma, &exp)?;
    let trend = trend_report(&result.table);

    write_with_meta(
        &dir,
        RECORDS_FILE,
        records_csv(&result.records).as_bytes(),
        &meta,
    )?;
    write_with_meta(
        &dir,
        AGGREGATE_FILE,
        aggregate_csv(&result.table).as_bytes(),
        &meta,
    )?;
    write_with_meta(&dir, PAIRS_FILE, pairs_csv(&result.table).as_bytes(), &meta)?;
    let mut json = serde_json::to_string_pretty(&trend)?;
    json.push('\n');
    write_with_meta(&dir, TREND_FILE, json.as_bytes(), &meta)?;
    Ok(SimulateOutput { dir, sigma, trend })
}

pub fn bounds(config: &RunConfig) -> Result<Vec<BoundReport>, CliError> {
    let bc = config.bounds.as_ref().ok_or_else(|| {
        CliError::config("bounds", "the bounds subcommand needs a `bounds` block")
    })?;
    let betas = bc.betas.values()?;
    config.privacy.resolve()?;
    let (spec, g, dir) = prepare(config)?;
    let (sigma, reference) = resolve_sigma(config, &spec, &g)?;
    let limits = bc.limits();
    let ensemble = g.enumerate_paths(bc.source, bc.target, limits)?;
    if ensemble.truncated {
        let (limit, value) = if ensemble.len() >= limits.max_paths {
            ("max_paths", limits.max_paths)
        } else {
            ("max_hops", limits.max_hops)
        };
        return Err(CliError::EnumerationLimit {
            limit,
            value,
            source_node: bc.source,
            target: bc.target,
        });
    }
    let reports = bound_curve(&g, &ensemble, &betas, sigma, bc.gamma_confidence)?;
    let mut meta = Meta::new("bounds", config, &spec, &g);
    meta.sigma = Some(sigma);
    meta.noise_reference = Some(reference);
    write_with_meta(&dir, BOUNDS_FILE, bounds_csv(&reports).as_bytes(), &meta)?;
    Ok(reports)
}

/// One point of a sweep grid; `None` keeps the base config's value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SweepPoint {
    pub noise_pct: Option<f64>,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub sparsity: Option<f64>,
}

fn axis<T: Copy>(values: &[T]) -> Vec<Option<T>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

/// Cartesian product of the sweep lists, last axis varying fastest.
pub fn sweep_points(s: &SweepConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for noise_pct in axis(&s.noise_pct) {
        for n in axis(&s.n) {
            for r in axis(&s.r) {
                for gamma in axis(&s.gamma) {
                    for sparsity in axis(&s.sparsity) {
                        out.push(SweepPoint {
                            noise_pct,
                            n,
                            r,
                            gamma,
                            sparsity,
                        });
                    }
                }
            }
        }
    }
    out
}

fn point_config(base: &RunConfig, p: &SweepPoint, dir: PathBuf) -> RunConfig {
    let mut c = base.clone();
    c.sweep = None;
    c.output_dir = Some(dir);
    if let Some(pct) = p.noise_pct {
        c.privacy = crate::config::PrivacyDraft {
            noise_pct: Some(pct),
            ..Default::default()
        };
    }
    if let Some(n) = p.n {
        c.graph.n = n;
    }
    if p.r.is_some() {
        c.graph.r = p.r;
    }
    if p.gamma.is_some() {
        c.graph.gamma = p.gamma;
    }
    if p.sparsity.is_some() {
        c.graph.sparsity = p.sparsity;
    }
    c
}

/// Runs `simulate` once per sweep point, each into its own `run_NNN`
/// subdirectory, and writes an index of the runs.
pub fn sweep(config: &RunConfig) -> Result<Vec<SimulateOutput>, CliError> {
    let s = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep", "the sweep subcommand needs a `sweep` block"))?;
    let root = config.output_dir()?.to_path_buf();
    let points = sweep_points(s);
    // validate every point before running any of them
    let configs: Vec<RunConfig> = points
        .iter()
        .enumerate()
        .map(|(i, p)| point_config(config, p, root.join(format!("run_{i:03}"))))
        .collect();
    for c in &configs {
        c.check_trials()?;
        c.privacy.resolve()?;
        c.graph_spec()?;
    }
    ensure_dir(&root)?;
    let mut index = String::from("run,noise_pct,n,r,gamma,sparsity,sigma,dir\n");
    let mut outputs = Vec::with_capacity(configs.len());
    for (i, (p, c)) in points.iter().zip(&configs).enumerate() {
        let out = simulate(c)?;
        let opt = |x: Option<f64>| x.map(g17).unwrap_or_default();
        let _ = writeln!(
            index,
            "{i},{},{},{},{},{},{},run_{i:03}",
            opt(p.noise_pct),
            p.n.map(|n| n.to_string()).unwrap_or_default(),
            opt(p.r),
            opt(p.gamma),
            opt(p.sparsity),
            g17(out.sigma),
        );
        outputs.push(out);
    }
    write_with_meta(
        &root,
        SWEEP_INDEX_FILE,
        index.as_bytes(),
        &serde_json::json!({ "command": "sweep", "config": config, "points": points }),
    )?;
    Ok(outputs)
}
