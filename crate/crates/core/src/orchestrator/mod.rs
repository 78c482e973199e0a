//! Run configuration and the staged pipeline that turns an English intent
//! into trained models, evaluation episodes and a report on disk.

mod config;
mod manifest;
mod pipeline;

pub use config::{ConfigError, RunConfig};
pub use manifest::{Manifest, MANIFEST_HEADER};
pub use pipeline::{artifact, AgentTables, Goals, Orchestrator, Stage};
