//! Monte-Carlo harness: one ground-truth graph, many privatized releases,
//! perceived shortest paths scored on the true weights.
//!
//! Trials run in parallel but are merged in `(trial, source, target)` order,
//! so results never depend on the thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::GraphSpec;
use crate::graph::{NodeId, WeightedGraph};
use crate::release::{release, trial_seed, NoiseLevel};
use crate::seed::{self, tag};

/// Absolute bias at or below this counts as "path unchanged".
pub const ZERO_BIAS_TOL: f64 = 1e-12;

/// Relative-bias buckets in percent: exactly zero, then half-open `(lo, hi]`
/// intervals, then everything above 100%.
pub const BUCKETS: [(f64, Option<f64>); 7] = [
    (0.0, Some(0.0)),
    (0.0, Some(10.0)),
    (10.0, Some(20.0)),
    (20.0, Some(40.0)),
    (40.0, Some(60.0)),
    (60.0, Some(100.0)),
    (100.0, None),
];
pub const BUCKET_COUNT: usize = BUCKETS.len();
pub const UNCHANGED_BUCKET: usize = 0;
pub const OVER_100_BUCKET: usize = BUCKET_COUNT - 1;

/// Bucket index for one record with relative bias `rel_bias` (a fraction).
pub fn bucket_of(bias: f64, rel_bias: f64) -> usize {
    if bias <= ZERO_BIAS_TOL {
        return UNCHANGED_BUCKET;
    }
    let pct = rel_bias * 100.0;
    BUCKETS
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &(_, hi))| hi.is_none_or(|hi| pct <= hi))
        .map(|(i, _)| i)
        .expect("last bucket is unbounded")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasRecord {
    pub trial: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub category: u8,
    pub true_weight: f64,
    pub realized_weight: f64,
    pub bias: f64,
    /// `bias / true_weight`; `None` when the true shortest path weighs zero.
    pub rel_bias: Option<f64>,
}

/// Scores the path a router would pick on `noisy` against the true weights.
/// The returned record has `trial = 0` and `category = 0`; the harness fills both.
pub fn realized_bias(
    truth: &WeightedGraph,
    noisy: &WeightedGraph,
    source: NodeId,
    target: NodeId,
) -> Result<BiasRecord> {
    if !truth.same_topology(noisy) {
        return Err(Error::TopologyDiffers);
    }
    let best = truth.shortest_path(source, target)?;
    let perceived = noisy.shortest_path(source, target)?;
    let true_weight = truth.path_weight(&best)?;
    let realized_weight = truth.path_weight(&perceived)?;
    Ok(make_record(
        0,
        source,
        target,
        0,
        true_weight,
        realized_weight,
    ))
}

fn make_record(
    trial: usize,
    source: NodeId,
    target: NodeId,
    category: u8,
    true_weight: f64,
    realized_weight: f64,
) -> BiasRecord {
    let bias = realized_weight - true_weight;
    BiasRecord {
        trial,
        source,
        target,
        category,
        true_weight,
        realized_weight,
        bias,
        rel_bias: (true_weight > 0.0).then(|| bias / true_weight),
    }
}

/// Quartile categories of the true shortest-path weight over all unordered
/// distinct node pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCategories {
    /// `(source, target)` with `source < target`, sorted.
    pub pairs: Vec<(NodeId, NodeId)>,
    pub weights: Vec<f64>,
    /// 1..=4, aligned with `pairs`.
    pub categories: Vec<u8>,
    /// Nearest-rank 25th, 50th, 75th percentiles.
    pub cuts: [f64; 3],
}

impl PairCategories {
    pub fn category_of(&self, source: NodeId, target: NodeId) -> Option<u8> {
        let key = (source.min(target), source.max(target));
        self.pairs
            .binary_search(&key)
            .ok()
            .map(|i| self.categories[i])
    }

    pub fn lookup(&self) -> BTreeMap<(NodeId, NodeId), u8> {
        self.pairs
            .iter()
            .copied()
            .zip(self.categories.iter().copied())
            .collect()
    }
}

fn nearest_rank(sorted: &[f64], pct: usize) -> f64 {
    let rank = (pct * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

pub fn categorize_pairs(truth: &WeightedGraph) -> Result<PairCategories> {
    let n = truth.node_count();
    if n < 2 {
        return Err(Error::invalid(
            "graph",
            "need at least two nodes to form a pair",
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n - 1)
        .into_par_iter()
        .map(|s| {
            let tree = truth.shortest_path_tree(s)?;
            (s + 1..n)
                .map(|t| {
                    tree.distance(t)
                        .ok_or(Error::Disconnected { from: s, target: t })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut weights = Vec::with_capacity(n * (n - 1) / 2);
    for (s, row) in rows.into_iter().enumerate() {
        for (k, w) in row.into_iter().enumerate() {
            pairs.push((s, s + 1 + k));
            weights.push(w);
        }
    }
    let mut sorted = weights.clone();
    sorted.sort_by(f64::total_cmp);
    let cuts = [
        nearest_rank(&sorted, 25),
        nearest_rank(&sorted, 50),
        nearest_rank(&sorted, 75),
    ];
    let categories = weights
        .iter()
        .map(|&w| {
            if w <= cuts[0] {
                1
            } else if w <= cuts[1] {
                2
            } else if w <= cuts[2] {
                3
            } else {
                4
            }
        })
        .collect();
    Ok(PairCategories {
        pairs,
        weights,
        categories,
        cuts,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSampling {
    #[default]
    All,
    /// Up to `k` pairs per category, drawn uniformly without replacement.
    PerCategory(usize),
}

fn select_pairs(
    categories: &PairCategories,
    sampling: PairSampling,
    master_seed: u64,
) -> Vec<(NodeId, NodeId, u8, f64)> {
    let all = categories
        .pairs
        .iter()
        .zip(&categories.categories)
        .zip(&categories.weights)
        .map(|((&(s, t), &c), &w)| (s, t, c, w));
    match sampling {
        PairSampling::All => all.collect(),
        PairSampling::PerCategory(k) => {
            let mut chosen = Vec::new();
            for cat in 1..=4u8 {
                let members: Vec<_> = all.clone().filter(|p| p.2 == cat).collect();
                if members.len() <= k {
                    chosen.extend(members);
                } else {
                    let mut rng =
                        seed::rng(seed::derive_seed(master_seed, tag::PAIR_SAMPLE, cat as u64));
                    chosen.extend(
                        rand::seq::index::sample(&mut rng, members.len(), k)
                            .into_iter()
                            .map(|i| members[i]),
                    );
                }
            }
            chosen.sort_by_key(|p| (p.0, p.1));
            chosen
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub pair_sampling: PairSampling,
}

impl ExperimentConfig {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        Self {
            trials,
            master_seed,
            pair_sampling: PairSampling::All,
        }
    }
}

/// Per-pair averages over trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub source: NodeId,
    pub target: NodeId,
    pub category: u8,
    pub true_weight: f64,
    pub mean_bias: f64,
    /// Mean bias over the true shortest-path weight.
    pub mean_rel_bias: Option<f64>,
}

/// Bucket frequencies of per-(pair, trial) relative bias, by category.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryTable {
    /// `counts[c][b]`: records of category `c + 1` in bucket `b`.
    pub counts: [[u64; BUCKET_COUNT]; 4],
    /// Records whose relative bias is undefined (zero-weight true path).
    pub undefined: [u64; 4],
    /// Sum of relative bias over defined records, for means.
    pub rel_bias_sum: [f64; 4],
    pub bias_sum: [f64; 4],
    pub pair_counts: [u64; 4],
    pub pairs: Vec<PairSummary>,
}

impl CategoryTable {
    pub fn from_records(records: &[BiasRecord]) -> Self {
        let mut table = CategoryTable {
            counts: [[0; BUCKET_COUNT]; 4],
            undefined: [0; 4],
            rel_bias_sum: [0.0; 4],
            bias_sum: [0.0; 4],
            pair_counts: [0; 4],
            pairs: Vec::new(),
        };
        let mut per_pair: BTreeMap<(NodeId, NodeId), (u8, f64, f64, u64)> = BTreeMap::new();
        for r in records {
            let c = (r.category - 1) as usize;
            table.bias_sum[c] += r.bias;
            match r.rel_bias {
                Some(rel) => {
                    table.counts[c][bucket_of(r.bias, rel)] += 1;
                    table.rel_bias_sum[c] += rel;
                }
                None => table.undefined[c] += 1,
            }
            let entry =
                per_pair
                    .entry((r.source, r.target))
                    .or_insert((r.category, r.true_weight, 0.0, 0));
            entry.2 += r.bias;
            entry.3 += 1;
        }
        for ((source, target), (category, true_weight, bias_total, n)) in per_pair {
            table.pair_counts[(category - 1) as usize] += 1;
            let mean_bias = bias_total / n as f64;
            table.pairs.push(PairSummary {
                source,
                target,
                category,
                true_weight,
                mean_bias,
                mean_rel_bias: (true_weight > 0.0).then(|| mean_bias / true_weight),
            });
        }
        table
    }

    /// Records in category `cat` (1..=4) with a defined relative bias.
    pub fn defined_total(&self, cat: u8) -> u64 {
        self.counts[(cat - 1) as usize].iter().sum()
    }

    pub fn all_total(&self, cat: u8) -> u64 {
        self.defined_total(cat) + self.undefined[(cat - 1) as usize]
    }

    /// Empirical bucket probability; `None` for a category with no defined records.
    pub fn probability(&self, cat: u8, bucket: usize) -> Option<f64> {
        let total = self.defined_total(cat);
        (total > 0).then(|| self.counts[(cat - 1) as usize][bucket] as f64 / total as f64)
    }

    pub fn mean_rel_bias(&self, cat: u8) -> Option<f64> {
        let total = self.defined_total(cat);
        (total > 0).then(|| self.rel_bias_sum[(cat - 1) as usize] / total as f64)
    }

    /// Mean absolute bias, including records with undefined relative bias.
    pub fn mean_bias(&self, cat: u8) -> Option<f64> {
        let total = self.all_total(cat);
        (total > 0).then(|| self.bias_sum[(cat - 1) as usize] / total as f64)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub truth: WeightedGraph,
    pub sigma: f64,
    pub categories: PairCategories,
    pub records: Vec<BiasRecord>,
    pub table: CategoryTable,
}

/// Generates the ground truth from `spec`, resolves the noise level against
/// it, and runs the trials.
pub fn run_experiment(
    spec: &GraphSpec,
    noise: &NoiseLevel,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    let truth = spec.generate()?;
    let sigma = noise.resolve(spec.noise_reference(&truth))?;
    run_on_graph(truth, sigma, config)
}

pub fn run_on_graph(
    truth: WeightedGraph,
    sigma: f64,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if config.trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let categories = categorize_pairs(&truth)?;
    let selected = select_pairs(&categories, config.pair_sampling, config.master_seed);
    let mut by_source: BTreeMap<NodeId, Vec<(NodeId, u8, f64)>> = BTreeMap::new();
    for &(s, t, c, w) in &selected {
        by_source.entry(s).or_default().push((t, c, w));
    }

    let per_trial: Vec<Vec<BiasRecord>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let noisy = release(&truth, sigma, trial_seed(config.master_seed, trial as u64))?;
            let mut out = Vec::with_capacity(selected.len());
            for (&source, targets) in &by_source {
                let tree = noisy.graph.shortest_path_tree(source)?;
                for &(target, category, true_weight) in targets {
                    let perceived = tree.path_to(target)?;
                    let realized = truth.path_weight(&perceived)?;
                    out.push(make_record(
                        trial,
                        source,
                        target,
                        category,
                        true_weight,
                        realized,
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let records: Vec<BiasRecord> = per_trial.into_iter().flatten().collect();
    let table = CategoryTable::from_records(&records);
    Ok(ExperimentResult {
        truth,
        sigma,
        categories,
        records,
        table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CategoryTrend {
    pub category: u8,
    pub records: u64,
    pub undefined: u64,
    pub p_unchanged: Option<f64>,
    pub p_over_100: Option<f64>,
    pub mean_rel_bias: Option<f64>,
}

/// `to - from` for each summary statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CategoryDelta {
    pub from: u8,
    pub to: u8,
    pub d_unchanged: Option<f64>,
    pub d_over_100: Option<f64>,
    pub d_mean_rel_bias: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub categories: Vec<CategoryTrend>,
    pub deltas: Vec<CategoryDelta>,
}

pub fn trend_report(table: &CategoryTable) -> TrendReport {
    let categories: Vec<CategoryTrend> = (1..=4u8)
        .map(|cat| CategoryTrend {
            category: cat,
            records: table.all_total(cat),
            undefined: table.undefined[(cat - 1) as usize],
            p_unchanged: table.probability(cat, UNCHANGED_BUCKET),
            p_over_100: table.probability(cat, OVER_100_BUCKET),
            mean_rel_bias: table.mean_rel_bias(cat),
        })
        .collect();
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| b - a);
    let mut deltas = Vec::new();
    for from in 0..4 {
        for to in from + 1..4 {
            let (a, b) = (&categories[from], &categories[to]);
            deltas.push(CategoryDelta {
                from: a.category,
                to: b.category,
                d_unchanged: diff(a.p_unchanged, b.p_unchanged),
                d_over_100: diff(a.p_over_100, b.p_over_100),
                d_mean_rel_bias: diff(a.mean_rel_bias, b.mean_rel_bias),
            });
        }
    }
    TrendReport { categories, deltas }
}
