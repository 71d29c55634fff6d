//! Gaussian release of edge weights.
//!
//! Each edge gets `max(0, w + Z)` with `Z ~ N(0, sigma^2)`. Normal draws use
//! the ziggurat sampler behind `rand_distr::StandardNormal`, fed by a
//! ChaCha20 stream keyed by the trial seed; edges consume draws in canonical
//! `(u, v)` order.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::seed::{self, tag};

/// `(epsilon, delta)` privacy budget and per-edge sensitivity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub delta_f: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, delta_f: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            delta,
            delta_f,
        };
        p.sigma()?;
        Ok(p)
    }

    pub fn sigma(&self) -> Result<f64> {
        sigma_from(self.epsilon, self.delta, self.delta_f)
    }
}

/// Noise scale of the Gaussian mechanism: `sqrt(2 ln(1.25 / delta)) * delta_f / epsilon`.
pub fn sigma_from(epsilon: f64, delta: f64, delta_f: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(
            "epsilon",
            format!("must be > 0, got {epsilon}"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    if !(delta_f.is_finite() && delta_f > 0.0) {
        return Err(Error::invalid(
            "delta_f",
            format!("must be > 0, got {delta_f}"),
        ));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt() * delta_f / epsilon)
}

/// How the noise scale is specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseLevel {
    /// Absolute standard deviation.
    Sigma {
        sigma: f64,
    },
    /// Percentage of the graph's reference weight (see `GraphSpec::noise_reference`).
    Percent {
        noise_pct: f64,
    },
    Privacy(PrivacyParams),
}

impl NoiseLevel {
    /// Resolves to an absolute sigma given the graph's reference weight.
    pub fn resolve(&self, reference_weight: f64) -> Result<f64> {
        let sigma = match *self {
            NoiseLevel::Sigma { sigma } => sigma,
            NoiseLevel::Percent { noise_pct } => {
                if !(noise_pct.is_finite() && noise_pct >= 0.0) {
                    return Err(Error::invalid(
                        "noise_pct",
                        format!("must be >= 0, got {noise_pct}"),
                    ));
                }
                noise_pct / 100.0 * reference_weight
            }
            NoiseLevel::Privacy(p) => p.sigma()?,
        };
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be >= 0, got {sigma}"),
            ));
        }
        Ok(sigma)
    }
}

/// A privatized copy of a graph: same topology, clamped noisy weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyRelease {
    pub graph: WeightedGraph,
    pub sigma: f64,
    pub trial_seed: u64,
}

pub fn release(g: &WeightedGraph, sigma: f64, trial_seed: u64) -> Result<NoisyRelease> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(
            "sigma",
            format!("must be >= 0, got {sigma}"),
        ));
    }
    let graph = if sigma == 0.0 {
        g.clone()
    } else {
        let mut rng = seed::rng(trial_seed);
        let noisy = g
            .weights()
            .map(|w| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (w + sigma * z).max(0.0)
            })
            .collect();
        g.with_weights(noisy)?
    };
    Ok(NoisyRelease {
        graph,
        sigma,
        trial_seed,
    })
}

/// Seed for trial `index` of a run keyed by `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    seed::derive_seed(master_seed, tag::TRIAL, index)
}
