use std::path::PathBuf;

use thiserror::Error;

use crate::agent::AgentError;
use crate::evalkit::EvalError;
use crate::intent::{ConflictReport, IntentError};
use crate::netsim::NetsimError;
use crate::orchestrator::ConfigError;
use crate::predictor::PredictorError;

/// Any failure surfaced by the orchestrator or the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Intent(#[from] IntentError),
    #[error("intent conflicts with {} active intent(s): {}", .0.len(), conflict_summary(.0))]
    Conflict(ConflictReport),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("missing artifact {path}; run `{stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

fn conflict_summary(report: &ConflictReport) -> String {
    report
        .iter()
        .map(|c| format!("{} ({:?})", c.stored.name(), c.reason))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable short name used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Intent(e) => e.kind(),
            Error::Conflict(_) => "intent-conflict",
            Error::Netsim(_) => "netsim",
            Error::Predictor(_) => "predictor",
            Error::Agent(_) => "agent",
            Error::Eval(_) => "evaluation",
            Error::Config(_) => "config",
            Error::MissingArtifact { .. } => "missing-artifact",
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
        }
    }

    /// 1 for bad invocations or configuration, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 1,
            _ => 2,
        }
    }
}
