use thiserror::Error;

use crate::pddl::PddlError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error("grounding exceeded the cap of {cap} instantiations")]
    GroundingCap { cap: usize },
    #[error("unknown fact {0}")]
    UnknownFact(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("search budget exhausted after {expanded} expansions")]
    ResourceLimit { expanded: usize },
    #[error("zero-cost action {0} cannot appear in an enumerated task")]
    ZeroCostAction(String),
    #[error("no consistent goal: every candidate is unreachable given the observations")]
    NoConsistentGoal,
    #[error("all goals are unreachable")]
    AllGoalsUnreachable,
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
