//! Synthetic ground-truth graphs: square lattices, wheels, and scale-free
//! graphs from a power-law configuration model.
//!
//! Topology and weights come from independent seeded streams, so the weights
//! of a scale-free graph can be resampled without changing its shape.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::seed::{self, tag};

const SCALE_FREE_ATTEMPTS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GraphClass {
    Grid { n: usize },
    Wheel { n: usize, r: f64 },
    ScaleFree { n: usize, gamma: f64 },
}

/// Everything needed to regenerate one ground-truth graph bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpecDraft")]
pub struct GraphSpec {
    #[serde(flatten)]
    pub class: GraphClass,
    pub sparsity: f64,
    pub weight_seed: u64,
    pub topology_seed: u64,
}

/// Loosely typed form of [`GraphSpec`] as it appears in configuration files.
/// Seeds may be omitted and filled in from a master seed by [`GraphSpecDraft::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpecDraft {
    pub class: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology_seed: Option<u64>,
}

impl GraphSpecDraft {
    /// Checks class-specific parameters and fills missing seeds from
    /// `master_seed`. Without a master seed, both seeds are required.
    pub fn resolve(&self, master_seed: Option<u64>) -> Result<GraphSpec> {
        let forbid = |field: &'static str, present: bool, class: &str| {
            if present {
                Err(Error::invalid(
                    field,
                    format!("not applicable to class `{class}`"),
                ))
            } else {
                Ok(())
            }
        };
        let class = match self.class.as_str() {
            "grid" => {
                forbid("r", self.r.is_some(), "grid")?;
                forbid("gamma", self.gamma.is_some(), "grid")?;
                GraphClass::Grid { n: self.n }
            }
            "wheel" => {
                forbid("gamma", self.gamma.is_some(), "wheel")?;
                let r = self
                    .r
                    .ok_or_else(|| Error::invalid("r", "required for class `wheel`"))?;
                GraphClass::Wheel { n: self.n, r }
            }
            "scale_free" => {
                forbid("r", self.r.is_some(), "scale_free")?;
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::invalid("gamma", "required for class `scale_free`"))?;
                GraphClass::ScaleFree { n: self.n, gamma }
            }
            other => {
                return Err(Error::invalid(
                    "class",
                    format!("unknown class `{other}` (expected grid, wheel, or scale_free)"),
                ))
            }
        };
        let seed_or = |field: &'static str, explicit: Option<u64>, stream: u64| {
            explicit
                .or_else(|| master_seed.map(|m| seed::derive_seed(m, stream, 0)))
                .ok_or_else(|| Error::invalid(field, "seed is required"))
        };
        let spec = GraphSpec {
            class,
            sparsity: self.sparsity.unwrap_or(0.0),
            weight_seed: seed_or("weight_seed", self.weight_seed, tag::WEIGHT)?,
            topology_seed: seed_or("topology_seed", self.topology_seed, tag::TOPOLOGY)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<GraphSpec> for GraphSpecDraft {
    fn from(spec: GraphSpec) -> Self {
        let (class, n, r, gamma) = match spec.class {
            GraphClass::Grid { n } => ("grid", n, None, None),
            GraphClass::Wheel { n, r } => ("wheel", n, Some(r), None),
            GraphClass::ScaleFree { n, gamma } => ("scale_free", n, None, Some(gamma)),
        };
        GraphSpecDraft {
            class: class.to_string(),
            n,
            r,
            gamma,
            sparsity: Some(spec.sparsity),
            weight_seed: Some(spec.weight_seed),
            topology_seed: Some(spec.topology_seed),
        }
    }
}

impl TryFrom<GraphSpecDraft> for GraphSpec {
    type Error = Error;

    fn try_from(draft: GraphSpecDraft) -> Result<Self> {
        draft.resolve(None)
    }
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        match self.class {
            GraphClass::Grid { n } if n < 2 => {
                return Err(Error::invalid("n", format!("grid needs n >= 2, got {n}")))
            }
            GraphClass::Wheel { n, .. } if n < 4 => {
                return Err(Error::invalid("n", format!("wheel needs n >= 4, got {n}")))
            }
            GraphClass::Wheel { r, .. } if !(r.is_finite() && r >= 1.0) => {
                return Err(Error::invalid(
                    "r",
                    format!("wheel needs finite r >= 1, got {r}"),
                ))
            }
            GraphClass::ScaleFree { n, .. } if n < 3 => {
                return Err(Error::invalid(
                    "n",
                    format!("scale_free needs n >= 3, got {n}"),
                ))
            }
            GraphClass::ScaleFree { gamma, .. } if !(gamma.is_finite() && gamma > 1.0) => {
                return Err(Error::invalid(
                    "gamma",
                    format!("scale_free needs finite gamma > 1, got {gamma}"),
                ))
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::invalid(
                "sparsity",
                format!("must lie in [0, 1], got {}", self.sparsity),
            ));
        }
        Ok(())
    }

    /// Builds the ground-truth graph, including the sparsity step.
    pub fn generate(&self) -> Result<WeightedGraph> {
        self.validate()?;
        let g = match self.class {
            GraphClass::Grid { n } => generate_grid(n, self.weight_seed)?,
            GraphClass::Wheel { n, r } => generate_wheel(n, r, self.weight_seed)?,
            GraphClass::ScaleFree { n, gamma } => {
                generate_scale_free(n, gamma, self.topology_seed, self.weight_seed)?
            }
        };
        if self.sparsity > 0.0 {
            let seed = seed::derive_seed(self.weight_seed, tag::SPARSITY, 0);
            apply_sparsity(&g, self.sparsity, seed)
        } else {
            Ok(g)
        }
    }

    /// The weight scale that percentage noise levels are expressed against.
    ///
    /// For wheels this is the mean circumference weight: spoke weights scale
    /// with `r`, and letting them set the noise level would swamp the rim.
    /// For the other classes it is the mean weight over all edges.
    pub fn noise_reference(&self, g: &WeightedGraph) -> f64 {
        match self.class {
            GraphClass::Wheel { .. } => {
                let rim: Vec<f64> = g
                    .edges()
                    .iter()
                    .filter(|e| e.u != 0)
                    .map(|e| e.weight)
                    .collect();
                rim.iter().sum::<f64>() / rim.len() as f64
            }
            _ => g.mean_weight(),
        }
    }
}

/// Draws one weight per edge, in canonical edge order, from `scale(edge) * U[0,1)`.
fn draw_weights(
    skeleton: &WeightedGraph,
    weight_seed: u64,
    scale: impl Fn(NodeId, NodeId) -> f64,
) -> Result<WeightedGraph> {
    let mut rng = seed::rng(weight_seed);
    let weights = skeleton
        .edges()
        .iter()
        .map(|e| scale(e.u, e.v) * rng.random::<f64>())
        .collect();
    skeleton.with_weights(weights)
}

/// `n x n` four-neighbour lattice; node `(row, col)` has id `row * n + col`.
pub fn generate_grid(n: usize, weight_seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid("n", format!("grid needs n >= 2, got {n}")));
    }
    let id = |row: usize, col: usize| row * n + col;
    let mut edges = Vec::with_capacity(2 * n * (n - 1));
    for row in 0..n {
        for col in 0..n {
            if col + 1 < n {
                edges.push((id(row, col), id(row, col + 1), 0.0));
            }
            if row + 1 < n {
                edges.push((id(row, col), id(row + 1, col), 0.0));
            }
        }
    }
    let skeleton = WeightedGraph::new(n * n, edges)?;
    draw_weights(&skeleton, weight_seed, |_, _| 1.0)
}

/// Hub 0 joined to a rim cycle `1..n-1`. Rim weights `U[0,1]`, spoke weights `U[0,r]`.
pub fn generate_wheel(n: usize, r: f64, weight_seed: u64) -> Result<WeightedGraph> {
    if n < 4 {
        return Err(Error::invalid("n", format!("wheel needs n >= 4, got {n}")));
    }
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::invalid(
            "r",
            format!("wheel needs finite r >= 1, got {r}"),
        ));
    }
    let mut edges = Vec::with_capacity(2 * (n - 1));
    for k in 1..n {
        edges.push((0, k, 0.0));
        let next = if k + 1 < n { k + 1 } else { 1 };
        edges.push((k, next, 0.0));
    }
    let skeleton = WeightedGraph::new(n, edges)?;
    draw_weights(&skeleton, weight_seed, |u, _| if u == 0 { r } else { 1.0 })
}

/// Power-law configuration model restricted to its largest connected
/// component and relabelled `0..m`, `m <= n`.
pub fn generate_scale_free(
    n: usize,
    gamma: f64,
    topology_seed: u64,
    weight_seed: u64,
) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::invalid(
            "n",
            format!("scale_free needs n >= 3, got {n}"),
        ));
    }
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(Error::invalid(
            "gamma",
            format!("scale_free needs finite gamma > 1, got {gamma}"),
        ));
    }
    for attempt in 0..SCALE_FREE_ATTEMPTS {
        let seed = if attempt == 0 {
            topology_seed
        } else {
            seed::derive_seed(topology_seed, tag::TOPOLOGY_RETRY, attempt as u64)
        };
        if let Some(skeleton) = configuration_model_lcc(n, gamma, seed)? {
            return draw_weights(&skeleton, weight_seed, |_, _| 1.0);
        }
    }
    Err(Error::GenerationFailed {
        attempts: SCALE_FREE_ATTEMPTS,
    })
}

/// One configuration-model draw. `None` when the largest component has no edges.
fn configuration_model_lcc(n: usize, gamma: f64, seed: u64) -> Result<Option<WeightedGraph>> {
    let mut rng = seed::rng(seed);
    let support: Vec<f64> = (1..n).map(|k| (k as f64).powf(-gamma)).collect();
    let degree_dist = WeightedIndex::new(&support)
        .map_err(|e| Error::invalid("gamma", format!("degenerate degree distribution: {e}")))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| degree_dist.sample(&mut rng) + 1).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let bump = rng.random_range(0..n);
        degrees[bump] += 1;
    }
    let mut stubs: Vec<NodeId> = degrees
        .iter()
        .enumerate()
        .flat_map(|(node, &d)| std::iter::repeat_n(node, d))
        .collect();
    stubs.shuffle(&mut rng);

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if a != b && seen.insert((a, b)) {
            edges.push((a, b));
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut component = vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None; // (size, label)
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = start;
        let mut stack = vec![start];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in &adjacency[u] {
                if component[v] == usize::MAX {
                    component[v] = start;
                    stack.push(v);
                }
            }
        }
        // strict `>` keeps the component with the smallest node on ties
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, start));
        }
    }
    let (size, label) = best.expect("n >= 3");
    if size < 2 {
        return Ok(None);
    }
    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for node in 0..n {
        if component[node] == label {
            relabel[node] = next;
            next += 1;
        }
    }
    let kept = edges
        .into_iter()
        .filter(|&(a, _)| component[a] == label)
        .map(|(a, b)| (relabel[a], relabel[b], 0.0));
    WeightedGraph::new(size, kept).map(Some)
}

/// Sets exactly `round(sparsity * |E|)` uniformly chosen edge weights to zero.
pub fn apply_sparsity(g: &WeightedGraph, sparsity: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::invalid(
            "sparsity",
            format!("must lie in [0, 1], got {sparsity}"),
        ));
    }
    let m = g.edge_count();
    let zeroed = (sparsity * m as f64).round() as usize;
    let mut weights: Vec<f64> = g.weights().collect();
    let mut rng = seed::rng(seed);
    for idx in rand::seq::index::sample(&mut rng, m, zeroed.min(m)) {
        weights[idx] = 0.0;
    }
    g.with_weights(weights)
}
