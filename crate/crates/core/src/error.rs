use thiserror::Error;

use crate::mdp::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid MDP: {}", join_violations(.0))]
    InvalidMdp(Vec<Violation>),

    #[error("step {step} of trajectory {trajectory} is out of range: {detail}")]
    StepOutOfRange {
        trajectory: usize,
        step: usize,
        detail: String,
    },

    #[error("singular linear system in policy evaluation")]
    Singular,

    #[error("policy iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
