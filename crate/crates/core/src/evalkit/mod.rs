//! Scoring: δ-satisfaction, MOS, goal-run counts, the bandwidth-deviation
//! objective (closed loop vs Monte Carlo optimum) and the report file.

mod objective;
mod report;
mod satisfaction;

pub use objective::{
    evaluate_objective_closedloop, evaluate_objective_montecarlo, mean_deviation, montecarlo_traces, pearson,
    trend_compare, EvalTrace, ObjectiveSample, Source, TrendComparison,
};
pub use report::{CorrelationRow, EvaluationReport, MosRow, SatisfactionRow};
pub use satisfaction::{count_goal_runs, mos, satisfaction, MosScore, SatisfactionSeries, MOS_MAX, MOS_MIN};

use std::fmt;

use thiserror::Error;

use crate::agent::AgentError;
use crate::netsim::NetsimError;

/// Which table produced the actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Optimal,
    Suboptimal,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Optimal => "optimal",
            Mode::Suboptimal => "suboptimal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "optimal" => Some(Mode::Optimal),
            "suboptimal" => Some(Mode::Suboptimal),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("episode has no steps")]
    EmptyEpisode,
    #[error("no episodes to evaluate")]
    NoEpisodes,
    #[error("sample lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("report line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
}
