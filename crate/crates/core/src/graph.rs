//! Undirected weighted graphs, simple paths, and the path algebra used by the
//! bias analysis.
//!
//! Edges are stored once, keyed by the unordered pair `(min(u, v), max(u, v))`
//! and kept in canonical sorted order. That order is what the release mechanism
//! uses to assign noise draws, so it must never depend on insertion order.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt::g17;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

fn edge_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Undirected graph with non-negative edge weights. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    // (neighbor, edge index), sorted by neighbor
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl WeightedGraph {
    /// Builds a graph, rejecting self-loops, parallel edges, out-of-range node
    /// ids, and weights that are negative or not finite.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::invalid(
                "node_count",
                "graph needs at least one node",
            ));
        }
        let mut canonical: Vec<Edge> = Vec::new();
        for (a, b, weight) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::invalid(
                    "edges",
                    format!("edge ({a}, {b}) references a node outside 0..{node_count}"),
                ));
            }
            if a == b {
                return Err(Error::invalid("edges", format!("self-loop on node {a}")));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::invalid(
                    "edges",
                    format!("edge ({a}, {b}) has weight {weight}; weights must be finite and >= 0"),
                ));
            }
            let (u, v) = edge_key(a, b);
            canonical.push(Edge { u, v, weight });
        }
        canonical.sort_by_key(Edge::key);
        if let Some(w) = canonical.windows(2).find(|w| w[0].key() == w[1].key()) {
            return Err(Error::invalid(
                "edges",
                format!("parallel edge ({}, {})", w[0].u, w[0].v),
            ));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for (idx, e) in canonical.iter().enumerate() {
            adjacency[e.u].push((e.v, idx));
            adjacency[e.v].push((e.u, idx));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            node_count,
            edges: canonical,
            adjacency,
        })
    }

    /// Same topology, new weights. `weights` is indexed by canonical edge order.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::invalid(
                "weights",
                format!(
                    "expected {} weights, got {}",
                    self.edges.len(),
                    weights.len()
                ),
            ));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(
                "weights",
                format!("weight {bad} is negative or not finite"),
            ));
        }
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, weight)| Edge { weight, ..*e })
            .collect();
        Ok(Self {
            node_count: self.node_count,
            edges,
            adjacency: self.adjacency.clone(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical `(u, v)` order, `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.weight)
    }

    pub fn mean_weight(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.weights().sum::<f64>() / self.edges.len() as f64
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[node].iter().map(|&(n, _)| n)
    }

    pub fn edge_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| list[pos].1)
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.edge_index(a, b).map(|i| self.edges[i].weight)
    }

    pub fn same_topology(&self, other: &WeightedGraph) -> bool {
        self.node_count == other.node_count
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.key() == b.key())
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.node_count
    }

    fn check_node(&self, field: &'static str, node: NodeId) -> Result<()> {
        if node >= self.node_count {
            return Err(Error::invalid(
                field,
                format!("node {node} outside 0..{}", self.node_count),
            ));
        }
        Ok(())
    }

    fn check_pair(&self, source: NodeId, target: NodeId) -> Result<()> {
        self.check_node("source", source)?;
        self.check_node("target", target)?;
        if source == target {
            return Err(Error::invalid("target", "source and target must differ"));
        }
        Ok(())
    }

    /// Single-source Dijkstra. Among equal-distance predecessors the smallest
    /// node id wins, so the tree is a pure function of the weights.
    pub fn shortest_path_tree(&self, source: NodeId) -> Result<ShortestPathTree> {
        self.check_node("source", source)?;
        let n = self.node_count;
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<NodeId>> = vec![None; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            node: source,
        });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if settled[u] {
                continue;
            }
            settled[u] = true;
            for &(v, idx) in &self.adjacency[u] {
                if settled[v] {
                    continue;
                }
                let nd = d + self.edges[idx].weight;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(u);
                    heap.push(HeapEntry { dist: nd, node: v });
                } else if nd == dist[v] && pred[v].is_some_and(|p| u < p) {
                    pred[v] = Some(u);
                }
            }
        }
        Ok(ShortestPathTree { source, dist, pred })
    }

    pub fn shortest_path(&self, source: NodeId, target: NodeId) -> Result<Path> {
        self.check_pair(source, target)?;
        self.shortest_path_tree(source)?.path_to(target)
    }

    /// Sum of this graph's weights along `path`, accumulated from the first
    /// node onward (the same order Dijkstra accumulates distances).
    pub fn path_weight(&self, path: &Path) -> Result<f64> {
        path.nodes.windows(2).try_fold(0.0, |acc, w| {
            self.weight(w[0], w[1])
                .map(|x| acc + x)
                .ok_or(Error::TopologyMismatch(w[0], w[1]))
        })
    }

    /// `w(p) - w(p_star)`; non-negative whenever `p_star` is a true shortest path.
    pub fn gap(&self, p: &Path, p_star: &Path) -> Result<f64> {
        Ok(self.path_weight(p)? - self.path_weight(p_star)?)
    }

    /// Depth-first enumeration of simple `source -> target` paths in
    /// lexicographic node-sequence order.
    pub fn enumerate_paths(
        &self,
        source: NodeId,
        target: NodeId,
        limits: EnumerationLimits,
    ) -> Result<PathEnsemble> {
        self.check_pair(source, target)?;
        let mut ensemble = PathEnsemble {
            source,
            target,
            paths: Vec::new(),
            truncated: false,
        };
        if limits.max_paths == 0 || limits.max_hops == 0 {
            ensemble.truncated = true;
            return Ok(ensemble);
        }
        let mut walker = Walker {
            graph: self,
            target,
            limits,
            on_path: vec![false; self.node_count],
            stack: vec![source],
            out: &mut ensemble,
        };
        walker.on_path[source] = true;
        walker.descend(source);
        Ok(ensemble)
    }

    /// Serializes to the line format: `n <count>` then `e <u> <v> <weight>`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + 32 * self.edges.len());
        writeln!(s, "n {}", self.node_count).unwrap();
        for e in &self.edges {
            writeln!(s, "e {} {} {}", e.u, e.v, g17(e.weight)).unwrap();
        }
        s
    }

    /// Parses the line format written by [`WeightedGraph::to_text`]. Blank
    /// lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut node_count = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| Error::Parse {
                line: line_no,
                reason: reason.to_string(),
            };
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("n") => {
                    if node_count.is_some() {
                        return Err(err("duplicate `n` header"));
                    }
                    let n = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| err("expected `n <node_count>`"))?;
                    node_count = Some(n);
                }
                Some("e") => {
                    if node_count.is_none() {
                        return Err(err("edge line before `n` header"));
                    }
                    let u = parts.next().and_then(|t| t.parse::<usize>().ok());
                    let v = parts.next().and_then(|t| t.parse::<usize>().ok());
                    let w = parts.next().and_then(|t| t.parse::<f64>().ok());
                    match (u, v, w) {
                        (Some(u), Some(v), Some(w)) => edges.push((u, v, w)),
                        _ => return Err(err("expected `e <u> <v> <weight>`")),
                    }
                }
                _ => return Err(err("unknown record type")),
            }
            if parts.next().is_some() {
                return Err(err("trailing tokens"));
            }
        }
        let n = node_count.ok_or(Error::Parse {
            line: 0,
            reason: "missing `n` header".into(),
        })?;
        WeightedGraph::new(n, edges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // min-heap on (dist, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a single-source Dijkstra run.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    source: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<NodeId>>,
}

impl ShortestPathTree {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn distance(&self, target: NodeId) -> Option<f64> {
        self.dist.get(target).copied().filter(|d| d.is_finite())
    }

    pub fn path_to(&self, target: NodeId) -> Result<Path> {
        if target >= self.dist.len() {
            return Err(Error::invalid(
                "target",
                format!("node {target} out of range"),
            ));
        }
        if target == self.source {
            return Err(Error::invalid("target", "source and target must differ"));
        }
        if !self.dist[target].is_finite() {
            return Err(Error::Disconnected {
                from: self.source,
                target,
            });
        }
        let mut nodes = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur] {
            nodes.push(p);
            cur = p;
        }
        nodes.reverse();
        Ok(Path { nodes })
    }
}

/// A simple path, stored as its node sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    nodes: Vec<NodeId>,
}

impl Path {
    /// At least two nodes, no node repeated. Adjacency is checked when the
    /// path is evaluated against a graph.
    pub fn new(nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("nodes", "a path needs at least two nodes"));
        }
        let mut seen = HashSet::with_capacity(nodes.len());
        if let Some(dup) = nodes.iter().find(|n| !seen.insert(**n)) {
            return Err(Error::invalid("nodes", format!("node {dup} repeated")));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Edges as unordered pairs `(min, max)`, in traversal order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.windows(2).map(|w| edge_key(w[0], w[1]))
    }

    pub fn reversed(&self) -> Path {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Path { nodes }
    }

    /// Number of edges that lie on exactly one of the two paths.
    pub fn sym_diff_size(&self, other: &Path) -> usize {
        let mine: HashSet<_> = self.edges().collect();
        let shared = other.edges().filter(|e| mine.contains(e)).count();
        self.edge_count() + other.edge_count() - 2 * shared
    }

    pub fn is_edge_disjoint(&self, other: &Path) -> bool {
        self.sym_diff_size(other) == self.edge_count() + other.edge_count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_paths: usize,
    /// Maximum number of edges on an emitted path.
    pub max_hops: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_paths: 10_000,
            max_hops: usize::MAX,
        }
    }
}

/// A collection of simple paths between one node pair.
///
/// `truncated == false` guarantees the collection is every simple path
/// between `source` and `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub source: NodeId,
    pub target: NodeId,
    pub paths: Vec<Path>,
    pub truncated: bool,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        !self.truncated
    }

    /// Largest edge count among the paths (0 when empty).
    pub fn max_edges(&self) -> usize {
        self.paths.iter().map(Path::edge_count).max().unwrap_or(0)
    }

    /// First index pair of paths that share an edge, if any.
    pub fn first_overlap(&self) -> Option<(usize, usize)> {
        for (a, pa) in self.paths.iter().enumerate() {
            for (b, pb) in self.paths.iter().enumerate().skip(a + 1) {
                if !pa.is_edge_disjoint(pb) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

struct Walker<'a> {
    graph: &'a WeightedGraph,
    target: NodeId,
    limits: EnumerationLimits,
    on_path: Vec<bool>,
    stack: Vec<NodeId>,
    out: &'a mut PathEnsemble,
}

impl Walker<'_> {
    /// Returns false once enumeration must stop.
    fn descend(&mut self, u: NodeId) -> bool {
        let hops = self.stack.len() - 1;
        let graph = self.graph;
        for v in graph.neighbors(u) {
            if self.on_path[v] {
                continue;
            }
            if hops == self.limits.max_hops {
                // a longer path may exist; the ensemble can no longer be complete
                self.out.truncated = true;
                return true;
            }
            if v == self.target {
                if self.out.paths.len() == self.limits.max_paths {
                    self.out.truncated = true;
                    return false;
                }
                let mut nodes = self.stack.clone();
                nodes.push(v);
                self.out.paths.push(Path { nodes });
                continue;
            }
            self.on_path[v] = true;
            self.stack.push(v);
            let keep_going = self.descend(v);
            self.stack.pop();
            self.on_path[v] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}
