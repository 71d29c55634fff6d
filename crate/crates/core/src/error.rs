use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside its domain. `field` names the offending parameter.
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("node {target} is unreachable from node {from}")]
    Disconnected { from: NodeId, target: NodeId },

    #[error("edge ({0}, {1}) is not present in the graph")]
    TopologyMismatch(NodeId, NodeId),

    #[error("graphs do not share a topology")]
    TopologyDiffers,

    #[error("path ensemble for ({from}, {target}) is truncated; complete enumeration required")]
    IncompleteEnsemble { from: NodeId, target: NodeId },

    #[error("paths are identical as edge sets; deviation probability is undefined")]
    DegenerateEnsemble,

    #[error("ensemble paths overlap (paths {0} and {1} share an edge); use q_beta_upper instead")]
    OverlappingPaths(usize, usize),

    #[error("scale-free generation produced no edges after {attempts} attempts")]
    GenerationFailed { attempts: u32 },

    #[error("graph format error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}
