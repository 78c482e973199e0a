//! Single bottleneck link with injected capacity variation and rate-capping
//! shaping actions.

mod episode;
mod shaping;
mod sim;
mod trace;

pub use episode::{
    run_episode, write_episode_csv, Decision, Episode, FixedPolicy, Policy, Scenario, Step,
    StepView, Transition, EPISODE_CSV_HEADER,
};
pub use shaping::{apply_shaping, ActionSet, LinkState, Reward, ShapingAction, ShapingModel};
pub use sim::SimConfig;
pub use trace::{generate_trace, read_trace_csv, unshaped_throughput, write_trace_csv, BandwidthTrace, TRACE_CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetsimError {
    #[error("invalid capacity bounds [{cap_min}, {cap_max}]")]
    InvalidBounds { cap_min: f64, cap_max: f64 },
    #[error("trace length must be at least 1")]
    EmptyTrace,
    #[error("hold must be at least 1 step")]
    ZeroHold,
    #[error("invalid action set: {0}")]
    InvalidActions(String),
    #[error("invalid shaping model: {0}")]
    InvalidModel(String),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
