//! Shortest-path routing over graphs whose edge weights were released under
//! the Gaussian mechanism.
//!
//! The crate covers the whole pipeline: ground-truth graph generation
//! ([`generators`]), the noisy release ([`release`]), analytical deviation
//! bounds ([`analytics`]) and the Monte-Carlo harness that measures realized
//! bias ([`experiment`]). [`report`] renders results as CSV.

pub mod analytics;
pub mod error;
pub mod experiment;
pub mod fmt;
pub mod generators;
pub mod graph;
pub mod normal;
pub mod quadrature;
pub mod release;
pub mod report;
pub mod seed;

pub use analytics::{
    bound_curve, corollary_bias_bound, monte_carlo_q_beta, partition_by_beta, path_deviation_prob,
    q_beta_exact_nonoverlap, q_beta_upper, BetaPartition, BoundReport, UpperBounds,
};
pub use error::{Error, Result};
pub use experiment::{
    categorize_pairs, realized_bias, run_experiment, run_on_graph, trend_report, BiasRecord,
    CategoryTable, ExperimentConfig, ExperimentResult, PairCategories, PairSampling, TrendReport,
};
pub use generators::{GraphClass, GraphSpec, GraphSpecDraft};
pub use graph::{EnumerationLimits, NodeId, Path, PathEnsemble, ShortestPathTree, WeightedGraph};
pub use release::{release, sigma_from, NoiseLevel, NoisyRelease, PrivacyParams};
