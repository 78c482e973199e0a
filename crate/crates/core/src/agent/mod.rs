//! Tabular Q-learning over the discretized predicted bandwidth.

mod learn;
mod network;
mod state;
mod table;

pub use learn::{snapshot_suboptimal, train_q, Checkpoint, Environment, EpsilonSchedule, Learner, TrainingRun};
pub use network::{run_frozen, train_agent, AgentConfig, AgentPolicy, PolicyMode};
pub use state::{discretize, StateIndex, StateSpace};
pub use table::{load_qtable, save_qtable, select_action, update, QTable, QTABLE_HEADER};

pub use crate::netsim::Reward as RewardSignal;

use thiserror::Error;

use crate::intent::BandwidthGoal;
use crate::netsim::NetsimError;
use crate::predictor::PredictorError;

/// Two-valued reward on the realized bandwidth: +1 when it meets the goal, −1 otherwise.
pub fn reward(observed_kbps: f64, goal: &BandwidthGoal) -> RewardSignal {
    RewardSignal::of(observed_kbps, goal.beta_target())
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
    #[error("snapshot fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("q-table file line {line}: {message}")]
    TableFormat { line: usize, message: String },
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
}
