//! Library side of the `dproute` binary: configuration, run orchestration
//! and file output. Everything the binary does is reachable from here so
//! tests can drive it in-process.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use commands::{bounds, generate, simulate, sweep, SimulateOutput};
pub use config::{Overrides, RunConfig};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("path enumeration for ({source_node}, {target}) hit {limit} = {value}; raise bounds.{limit} or pick a smaller graph")]
    EnumerationLimit {
        limit: &'static str,
        value: usize,
        source_node: usize,
        target: usize,
    },

    #[error(transparent)]
    Core(#[from] dproute_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("serializing output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the user can fix in the config, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dproute_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::EnumerationLimit { .. } => EXIT_VALIDATION,
            CliError::Core(
                E::InvalidArgument { .. }
                | E::IncompleteEnsemble { .. }
                | E::Parse { .. }
                | E::TopologyMismatch(..),
            ) => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        }
    }
}
