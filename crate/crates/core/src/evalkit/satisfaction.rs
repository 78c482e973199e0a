use super::EvalError;
use crate::intent::BandwidthGoal;
use crate::netsim::Episode;
use crate::Real;

pub const MOS_MIN: f64 = 1.0;
pub const MOS_MAX: f64 = 5.0;

/// Per-step δ_t, 1 when the realized bandwidth meets the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionSeries {
    deltas: Vec<u8>,
}

impl SatisfactionSeries {
    pub fn from_deltas(deltas: Vec<u8>) -> Result<Self, EvalError> {
        if deltas.is_empty() {
            return Err(EvalError::EmptyEpisode);
        }
        assert!(deltas.iter().all(|d| *d <= 1), "deltas must be 0 or 1");
        Ok(Self { deltas })
    }

    pub fn deltas(&self) -> &[u8] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn met(&self) -> usize {
        self.deltas.iter().filter(|d| **d == 1).count()
    }

    pub fn fraction(&self) -> f64 {
        self.met() as f64 / self.len() as f64
    }
}

pub fn satisfaction(episode: &Episode, goal: &BandwidthGoal) -> Result<SatisfactionSeries, EvalError> {
    let g = goal.beta_target();
    SatisfactionSeries::from_deltas(episode.observed().map(|b| u8::from(b >= g)).collect())
}

/// Predicted MOS on the `[MOS_MIN, MOS_MAX]` scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MosScore<T> {
    pub value: T,
}

/// `MOS_MIN + fraction · (MOS_MAX − MOS_MIN)`, with the fraction taken as
/// met/T in `T`.
pub fn mos<T: Real>(series: &SatisfactionSeries) -> MosScore<T> {
    let frac = T::from_usize(series.met()).expect("fits") / T::from_usize(series.len()).expect("fits");
    MosScore { value: T::lit(MOS_MIN) + frac * T::lit(MOS_MAX - MOS_MIN) }
}

/// `(steps meeting the goal, total steps)` across episodes; each step is one
/// evaluation run.
pub fn count_goal_runs(episodes: &[Episode], goal: &BandwidthGoal) -> Result<(usize, usize), EvalError> {
    if episodes.is_empty() {
        return Err(EvalError::NoEpisodes);
    }
    episodes.iter().try_fold((0, 0), |(met, total), ep| {
        let s = satisfaction(ep, goal)?;
        Ok((met + s.met(), total + s.len()))
    })
}
