//! Run configuration: a JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use dproute_core::{
    EnumerationLimits, GraphSpec, GraphSpecDraft, NoiseLevel, PairSampling, PrivacyParams,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_GAMMA_CONFIDENCE: f64 = 0.05;

/// The privacy block exactly as written; exactly one parameterization may
/// be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyDraft {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl PrivacyDraft {
    pub fn resolve(&self) -> Result<NoiseLevel, CliError> {
        let dp = [self.epsilon, self.delta, self.delta_f];
        let dp_given = dp.iter().filter(|x| x.is_some()).count();
        let groups = usize::from(dp_given > 0)
            + usize::from(self.noise_pct.is_some())
            + usize::from(self.sigma.is_some());
        if groups != 1 {
            return Err(CliError::config(
                "privacy",
                "give exactly one of {epsilon, delta, delta_f}, {noise_pct}, or {sigma}",
            ));
        }
        if let Some(noise_pct) = self.noise_pct {
            return Ok(NoiseLevel::Percent { noise_pct });
        }
        if let Some(sigma) = self.sigma {
            return Ok(NoiseLevel::Sigma { sigma });
        }
        match dp {
            [Some(epsilon), Some(delta), Some(delta_f)] => Ok(NoiseLevel::Privacy(
                PrivacyParams::new(epsilon, delta, delta_f)?,
            )),
            _ => Err(CliError::config(
                "privacy",
                "epsilon, delta and delta_f must all be given together",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl BetaGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match *self {
            BetaGrid::List(ref v) => v.clone(),
            BetaGrid::Range { start, stop, count } => {
                if count < 2 || !(start > 0.0 && stop > start) {
                    return Err(CliError::config(
                        "bounds.betas",
                        "range needs 0 < start < stop and count >= 2",
                    ));
                }
                let step = (stop - start) / (count - 1) as f64;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::config("bounds.betas", "no beta values"));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub source: usize,
    pub target: usize,
    pub betas: BetaGrid,
    #[serde(default = "default_gamma")]
    pub gamma_confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_hops: Option<usize>,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA_CONFIDENCE
}

impl BoundsConfig {
    pub fn limits(&self) -> EnumerationLimits {
        let d = EnumerationLimits::default();
        EnumerationLimits {
            max_paths: self.max_paths.unwrap_or(d.max_paths),
            max_hops: self.max_hops.unwrap_or(d.max_hops),
        }
    }
}

/// Value lists whose Cartesian product defines the runs of a sweep. An
/// empty list keeps the base config's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub noise_pct: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub sparsity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpecDraft,
    #[serde(default)]
    pub privacy: PrivacyDraft,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub pair_sampling: PairSampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

/// Command-line values that replace their config-file counterparts.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub noise_pct: Option<f64>,
    pub sigma: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config {
            field: "config".into(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.master_seed = Some(seed);
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if o.noise_pct.is_some() || o.sigma.is_some() {
            self.privacy = PrivacyDraft {
                noise_pct: o.noise_pct,
                sigma: o.sigma,
                ..PrivacyDraft::default()
            };
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = Some(dir.clone());
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.master_seed.ok_or_else(|| {
            CliError::config(
                "master_seed",
                "required (set it in the config or pass --seed)",
            )
        })
    }

    pub fn graph_spec(&self) -> Result<GraphSpec, CliError> {
        Ok(self.graph.resolve(Some(self.seed()?))?)
    }

    pub fn output_dir(&self) -> Result<&Path, CliError> {
        self.output_dir.as_deref().ok_or_else(|| {
            CliError::config(
                "output_dir",
                "required (set it in the config or pass --output-dir)",
            )
        })
    }

    pub fn check_trials(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::config("trials", "must be >= 1"));
        }
        Ok(())
    }
}
