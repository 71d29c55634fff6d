//! Closed-form and semi-analytic deviation probabilities.
//!
//! All quantities here describe the unclamped noise model, where a path's
//! released weight is its true weight plus a sum of independent
//! `N(0, sigma^2)` terms, one per edge. Clamping at zero only matters when
//! edge weights are within a few sigma of zero.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Path, PathEnsemble, WeightedGraph};
pub use crate::normal::{inverse_phi_c, phi, phi_c};
use crate::quadrature::adaptive_simpson;
use crate::seed;

/// Per-term quadrature tolerance for [`q_beta_exact_nonoverlap`].
pub const EXACT_QUAD_TOL: f64 = 1e-8;
/// Half-width of each exact-integral term, in standard deviations of that term.
pub const EXACT_QUAD_HALF_WIDTH: f64 = 10.0;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")))
    }
}

/// Probability that a path `alpha` heavier than the best one looks lighter
/// after release, when the two paths differ in `s` edges.
pub fn path_deviation_prob(alpha: f64, s: usize, sigma: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::DegenerateEnsemble);
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(
            "alpha",
            format!("gap must be > 0, got {alpha}"),
        ));
    }
    check_sigma(sigma)?;
    Ok(phi_c(alpha / (sigma * (s as f64).sqrt())))
}

/// One ensemble path, measured against the ensemble's lightest path.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedPath {
    pub path: Path,
    pub weight: f64,
    /// `weight - best weight`.
    pub alpha: f64,
    /// Edges on exactly one of this path and the best path.
    pub s: usize,
    pub worse: bool,
}

/// An ensemble split into paths at least `beta` heavier than the best path
/// and the rest. The best path is always on the lighter side.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaPartition {
    pub beta: f64,
    pub best: usize,
    pub paths: Vec<RankedPath>,
    /// Largest `s` over the worse side; 0 when it is empty.
    pub s_max: usize,
}

impl BetaPartition {
    pub fn best_path(&self) -> &RankedPath {
        &self.paths[self.best]
    }

    pub fn worse(&self) -> impl Iterator<Item = &RankedPath> {
        self.paths.iter().filter(|p| p.worse)
    }

    pub fn worse_count(&self) -> usize {
        self.worse().count()
    }

    pub fn better_count(&self) -> usize {
        self.paths.len() - self.worse_count()
    }

    pub fn ensemble_size(&self) -> usize {
        self.paths.len()
    }
}

pub fn partition_by_beta(
    g: &WeightedGraph,
    ensemble: &PathEnsemble,
    beta: f64,
) -> Result<BetaPartition> {
    if ensemble.truncated {
        return Err(Error::IncompleteEnsemble {
            from: ensemble.source,
            target: ensemble.target,
        });
    }
    if ensemble.is_empty() {
        return Err(Error::invalid("ensemble", "ensemble has no paths"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    let weights = ensemble
        .paths
        .iter()
        .map(|p| g.path_weight(p))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..weights.len())
        .min_by(|&a, &b| {
            weights[a]
                .total_cmp(&weights[b])
                .then_with(|| ensemble.paths[a].cmp(&ensemble.paths[b]))
        })
        .expect("non-empty");
    let best_path = &ensemble.paths[best];
    let paths: Vec<RankedPath> = ensemble
        .paths
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(i, (p, &w))| {
            let alpha = w - weights[best];
            RankedPath {
                path: p.clone(),
                weight: w,
                alpha,
                s: p.sym_diff_size(best_path),
                worse: i != best && alpha >= beta,
            }
        })
        .collect();
    let s_max = paths
        .iter()
        .filter(|p| p.worse)
        .map(|p| p.s)
        .max()
        .unwrap_or(0);
    Ok(BetaPartition {
        beta,
        best,
        paths,
        s_max,
    })
}

/// The two upper bounds on the probability of realizing bias at least `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpperBounds {
    /// Sum of pairwise deviation probabilities over the worse side.
    pub sum: f64,
    /// `|worse| * phi_c(beta / (sigma sqrt(s_max)))`.
    pub coarse: f64,
}

pub fn q_beta_upper(partition: &BetaPartition, sigma: f64) -> Result<UpperBounds> {
    check_sigma(sigma)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for p in partition.worse() {
        sum += path_deviation_prob(p.alpha, p.s, sigma)?;
        count += 1;
    }
    let coarse = if count == 0 {
        0.0
    } else {
        count as f64 * phi_c(partition.beta / (sigma * (partition.s_max as f64).sqrt()))
    };
    Ok(UpperBounds { sum, coarse })
}

/// Bias level not exceeded with probability at least `1 - gamma`:
/// `sqrt(2) * sigma * z * sqrt(s_cap)` with `z` the `1 - gamma / ensemble_size`
/// normal quantile and `s_cap` the most edges on any ensemble path.
pub fn corollary_bias_bound(
    ensemble_size: usize,
    s_cap: usize,
    sigma: f64,
    gamma_confidence: f64,
) -> Result<f64> {
    if ensemble_size == 0 {
        return Err(Error::invalid("ensemble_size", "must be >= 1"));
    }
    if !(gamma_confidence > 0.0 && gamma_confidence < 1.0) {
        return Err(Error::invalid(
            "gamma_confidence",
            format!("must lie in (0, 1), got {gamma_confidence}"),
        ));
    }
    if gamma_confidence >= ensemble_size as f64 {
        return Err(Error::invalid(
            "gamma_confidence",
            "must be smaller than the ensemble size",
        ));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(
            "sigma",
            format!("must be >= 0, got {sigma}"),
        ));
    }
    let z = inverse_phi_c(gamma_confidence / ensemble_size as f64);
    Ok(std::f64::consts::SQRT_2 * sigma * z * (s_cap as f64).sqrt())
}

/// Exact probability of ending on a `beta`-worse path when no two ensemble
/// paths share an edge. Each term conditions on the candidate's released
/// weight and integrates the chance that every other path comes out heavier.
pub fn q_beta_exact_nonoverlap(partition: &BetaPartition, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    for (a, pa) in partition.paths.iter().enumerate() {
        for (b, pb) in partition.paths.iter().enumerate().skip(a + 1) {
            if !pa.path.is_edge_disjoint(&pb.path) {
                return Err(Error::OverlappingPaths(a, b));
            }
        }
    }
    let spread = |p: &RankedPath| sigma * (p.path.edge_count() as f64).sqrt();
    let mut total = 0.0;
    for (i, candidate) in partition.paths.iter().enumerate() {
        if !candidate.worse {
            continue;
        }
        let sd = spread(candidate);
        let others: Vec<(f64, f64)> = partition
            .paths
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| (r.weight, spread(r)))
            .collect();
        // substitute t = w(P) + u * sd so the density is standard normal in u
        let integrand = |u: f64| {
            let t = candidate.weight + u * sd;
            others
                .iter()
                .map(|&(w, s)| phi_c((t - w) / s))
                .product::<f64>()
                * phi(u)
        };
        total += adaptive_simpson(
            integrand,
            -EXACT_QUAD_HALF_WIDTH,
            EXACT_QUAD_HALF_WIDTH,
            EXACT_QUAD_TOL,
            16,
        );
    }
    Ok(total.clamp(0.0, 1.0))
}

/// All bound quantities for one node pair at one `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub beta: f64,
    pub sum_bound: f64,
    pub coarse_bound: f64,
    /// Present only for edge-disjoint ensembles.
    pub exact: Option<f64>,
    pub corollary_bound: f64,
    pub sigma: f64,
    pub ensemble_size: usize,
    pub s_max: usize,
    /// Most edges on any ensemble path.
    pub s_cap: usize,
    pub gamma_confidence: f64,
}

impl BoundReport {
    /// A bound above 1 carries no information.
    pub fn is_vacuous(&self) -> bool {
        self.sum_bound > 1.0 || self.coarse_bound > 1.0
    }
}

/// Evaluates every bound over a grid of `beta` values.
pub fn bound_curve(
    g: &WeightedGraph,
    ensemble: &PathEnsemble,
    betas: &[f64],
    sigma: f64,
    gamma_confidence: f64,
) -> Result<Vec<BoundReport>> {
    let disjoint = ensemble.first_overlap().is_none();
    let s_cap = ensemble.max_edges();
    let corollary = corollary_bias_bound(ensemble.len(), s_cap, sigma, gamma_confidence)?;
    betas
        .iter()
        .map(|&beta| {
            let partition = partition_by_beta(g, ensemble, beta)?;
            let bounds = q_beta_upper(&partition, sigma)?;
            let exact = if disjoint {
                Some(q_beta_exact_nonoverlap(&partition, sigma)?)
            } else {
                None
            };
            Ok(BoundReport {
                beta,
                sum_bound: bounds.sum,
                coarse_bound: bounds.coarse,
                exact,
                corollary_bound: corollary,
                sigma,
                ensemble_size: ensemble.len(),
                s_max: partition.s_max,
                s_cap,
                gamma_confidence,
            })
        })
        .collect()
}

/// Monte-Carlo estimate of the probability that the lightest released path
/// is on the worse side, under the same unclamped model as the bounds.
/// Paths sharing an edge share its noise draw. Returns `(estimate, stderr)`.
pub fn monte_carlo_q_beta(
    partition: &BetaPartition,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let mut edges: Vec<(usize, usize)> = partition
        .paths
        .iter()
        .flat_map(|p| p.path.edges())
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let members: Vec<Vec<usize>> = partition
        .paths
        .iter()
        .map(|p| {
            p.path
                .edges()
                .map(|e| edges.binary_search(&e).expect("edge collected above"))
                .collect()
        })
        .collect();
    const CHUNK: usize = 8192;
    let chunks = trials.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng(seed::derive_seed(seed, seed::tag::TRIAL, c as u64));
            let n = CHUNK.min(trials - c * CHUNK);
            let mut z = vec![0.0; edges.len()];
            let mut hits = 0u64;
            for _ in 0..n {
                for zi in z.iter_mut() {
                    *zi = sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng);
                }
                let mut winner = 0;
                let mut lightest = f64::INFINITY;
                for (i, (p, idx)) in partition.paths.iter().zip(&members).enumerate() {
                    let w = p.weight + idx.iter().map(|&k| z[k]).sum::<f64>();
                    if w < lightest {
                        lightest = w;
                        winner = i;
                    }
                }
                hits += u64::from(partition.paths[winner].worse);
            }
            hits
        })
        .sum();
    let q = hits as f64 / trials as f64;
    Ok((q, (q * (1.0 - q) / trials as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EnumerationLimits;
    use rand::SeedableRng;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap()
    }

    fn ensemble(g: &WeightedGraph, s: usize, t: usize) -> PathEnsemble {
        g.enumerate_paths(s, t, EnumerationLimits::default())
            .unwrap()
    }

    /// Two disjoint paths between 0 and 1: `lower` edges via 2.., `upper` edges via others.
    fn two_path_graph(lower: &[f64], upper: &[f64]) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut next = 2;
        for chain in [lower, upper] {
            let mut prev = 0;
            for (k, &w) in chain.iter().enumerate() {
                let v = if k + 1 == chain.len() { 1 } else { next };
                if v != 1 {
                    next += 1;
                }
                edges.push((prev, v, w));
                prev = v;
            }
        }
        WeightedGraph::new(next, edges).unwrap()
    }

    #[test]
    fn deviation_prob_limits_and_errors() {
        assert!((path_deviation_prob(1e-12, 3, 1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(matches!(
            path_deviation_prob(1.0, 0, 1.0),
            Err(Error::DegenerateEnsemble)
        ));
        assert!(path_deviation_prob(0.0, 1, 1.0).is_err());
        assert!(path_deviation_prob(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn deviation_prob_monotonicity() {
        let q = |a, s, sg| path_deviation_prob(a, s, sg).unwrap();
        assert!(q(1.0, 4, 1.0) > q(2.0, 4, 1.0));
        assert!(q(1.0, 4, 1.0) < q(1.0, 4, 2.0));
        assert!(q(1.0, 4, 1.0) < q(1.0, 9, 1.0));
    }

    #[test]
    fn deviation_prob_matches_flip_frequency() {
        // 2 + 2 disjoint edges, gap 15, sigma from (1, 0.01, 1)
        let sigma = crate::release::sigma_from(1.0, 0.01, 1.0).unwrap();
        let q = path_deviation_prob(15.0, 4, sigma).unwrap();
        assert!((q - 0.007_899_916_808_565_77).abs() < 1e-12);
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2024);
        let trials = 1_000_000;
        let mut flips = 0u32;
        for _ in 0..trials {
            let z: [f64; 4] = std::array::from_fn(|_| {
                sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng)
            });
            if 15.0 + z[0] + z[1] < z[2] + z[3] {
                flips += 1;
            }
        }
        let freq = flips as f64 / trials as f64;
        assert!((freq - q).abs() < 5e-4, "flip frequency {freq} vs {q}");
    }

    #[test]
    fn triangle_partition() {
        let g = triangle();
        let e = ensemble(&g, 0, 2);
        let part = partition_by_beta(&g, &e, 0.5).unwrap();
        assert_eq!(part.best_path().path.nodes(), &[0, 1, 2]);
        let worse: Vec<_> = part.worse().collect();
        assert_eq!(worse.len(), 1);
        assert_eq!(worse[0].path.nodes(), &[0, 2]);
        assert_eq!(worse[0].alpha, 1.0);
        assert_eq!(worse[0].s, 3);
        assert_eq!(part.better_count(), 1);
        assert_eq!(part.s_max, 3);

        let none = partition_by_beta(&g, &e, 1.5).unwrap();
        assert_eq!(none.worse_count(), 0);
        assert_eq!(
            q_beta_upper(&none, 1.0).unwrap(),
            UpperBounds {
                sum: 0.0,
                coarse: 0.0
            }
        );
    }

    #[test]
    fn partition_tiny_beta_excludes_only_ties() {
        let g = WeightedGraph::new(
            4,
            [
                (0, 1, 1.0),
                (1, 3, 1.0),
                (0, 2, 1.0),
                (2, 3, 1.0),
                (0, 3, 5.0),
            ],
        )
        .unwrap();
        let e = ensemble(&g, 0, 3);
        let part = partition_by_beta(&g, &e, 1e-9).unwrap();
        assert_eq!(part.worse_count(), 1);
        assert_eq!(part.better_count(), 2);
    }

    #[test]
    fn partition_requires_complete_ensemble() {
        let g = triangle();
        let truncated = g
            .enumerate_paths(
                0,
                2,
                EnumerationLimits {
                    max_paths: 1,
                    max_hops: 9,
                },
            )
            .unwrap();
        assert!(matches!(
            partition_by_beta(&g, &truncated, 0.5),
            Err(Error::IncompleteEnsemble { .. })
        ));
    }

    #[test]
    fn single_worse_path_recovers_deviation_prob() {
        let g = triangle();
        let e = ensemble(&g, 0, 2);
        let part = partition_by_beta(&g, &e, 0.5).unwrap();
        let b = q_beta_upper(&part, 0.8).unwrap();
        let lemma = path_deviation_prob(1.0, 3, 0.8).unwrap();
        assert_eq!(b.sum, lemma);
        assert!(b.sum <= b.coarse);
        // two disjoint paths: the exact value is the lemma value
        let exact = q_beta_exact_nonoverlap(&part, 0.8).unwrap();
        assert!((exact - lemma).abs() < 1e-6, "{exact} vs {lemma}");
    }

    #[test]
    fn exact_two_path_matches_lemma_across_settings() {
        for &(lower, upper, sigma) in &[
            (&[2.0, 2.0][..], &[1.0, 1.0, 3.0][..], 1.0),
            (&[5.0][..], &[3.0, 2.5][..], 0.3),
            (&[1.0, 1.0, 1.0][..], &[4.0, 4.0][..], 2.5),
        ] {
            let g = two_path_graph(lower, upper);
            let e = ensemble(&g, 0, 1);
            assert_eq!(e.len(), 2);
            let part = partition_by_beta(&g, &e, 1e-6).unwrap();
            let w = part.worse().next().unwrap();
            let lemma = path_deviation_prob(w.alpha, lower.len() + upper.len(), sigma).unwrap();
            let exact = q_beta_exact_nonoverlap(&part, sigma).unwrap();
            assert!((exact - lemma).abs() < 1e-6, "{exact} vs {lemma}");
        }
    }

    #[test]
    fn exact_rejects_overlap() {
        let g =
            WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (3, 2, 1.0)]).unwrap();
        let e = ensemble(&g, 0, 2);
        let part = partition_by_beta(&g, &e, 0.5).unwrap();
        assert!(matches!(
            q_beta_exact_nonoverlap(&part, 1.0),
            Err(Error::OverlappingPaths(0, 1))
        ));
    }

    #[test]
    fn corollary_examples() {
        let b = corollary_bias_bound(2, 1, 1.0, 0.05).unwrap();
        assert!((b - 2.771_807_648_699_355).abs() < 1e-9, "{b}");
        let b3 = corollary_bias_bound(2, 1, 3.0, 0.05).unwrap();
        assert!((b3 - 3.0 * b).abs() < 1e-9);
        assert!(corollary_bias_bound(10, 1, 1.0, 0.05).unwrap() > b);
        assert!(corollary_bias_bound(0, 1, 1.0, 0.05).is_err());
        assert!(corollary_bias_bound(2, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn bound_curve_beyond_max_gap_is_zero() {
        let g = triangle();
        let e = ensemble(&g, 0, 2);
        let rows = bound_curve(&g, &e, &[0.1, 0.9, 2.0], 0.5, 0.05).unwrap();
        assert_eq!(rows.len(), 3);
        let last = rows[2];
        assert_eq!(
            (last.sum_bound, last.coarse_bound, last.exact),
            (0.0, 0.0, Some(0.0))
        );
        assert_eq!(last.s_max, 0);
        assert!(rows[0].sum_bound >= rows[1].sum_bound);
        assert!(last.corollary_bound > 0.0);
    }
}
