use rand::Rng as _;

use super::{update, AgentError, QTable, StateIndex};
use crate::rng::{stream, stream_rng, Rng};
use crate::Real;

/// Multiplicative per-episode decay with a floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { start: 1.0, decay: 0.99, floor: 0.05 }
    }
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<(), AgentError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(self.start) && unit(self.decay) && unit(self.floor)) {
            return Err(AgentError::InvalidConfig("epsilon start, decay and floor must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Exploration rate used during episode `episode` (0-based).
    pub fn at(&self, episode: usize) -> f64 {
        let mut eps = self.start;
        for _ in 0..episode {
            eps = (eps * self.decay).max(self.floor);
        }
        eps
    }
}

/// Handle an environment uses to act and learn during one episode.
pub struct Learner<'a, T> {
    table: &'a mut QTable<T>,
    rng: &'a mut Rng,
    learn: bool,
    explore: bool,
}

impl<'a, T: Real> Learner<'a, T> {
    pub fn new(table: &'a mut QTable<T>, rng: &'a mut Rng, learn: bool, explore: bool) -> Self {
        Self { table, rng, learn, explore }
    }

    pub fn table(&self) -> &QTable<T> {
        self.table
    }

    /// ε-greedy action. When the ε draw does not explore and `fallback` is
    /// set, the fallback is taken instead of the greedy action; the flag
    /// reports whether that happened.
    pub fn act(&mut self, s: StateIndex, fallback: Option<usize>) -> (usize, bool) {
        if self.explore && self.rng.gen::<f64>() < self.table.epsilon().as_f64() {
            return (self.rng.gen_range(0..self.table.actions()), false);
        }
        match fallback {
            Some(a) => (a, true),
            None => (self.table.greedy(s), false),
        }
    }

    /// Bellman update, skipped when the learner is frozen.
    pub fn learn(&mut self, s: StateIndex, a: usize, r: T, s_next: StateIndex) {
        if self.learn {
            update(self.table, s, a, r, s_next);
        }
    }
}

/// Anything Q-learning can be trained against.
pub trait Environment<T> {
    type Error;

    fn run_episode(&mut self, episode: usize, learner: &mut Learner<'_, T>) -> Result<(), Self::Error>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub episodes: usize,
    pub table: QTable<T>,
}

/// Table after every training episode, starting with the untrained one.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun<T> {
    pub checkpoints: Vec<Checkpoint<T>>,
}

impl<T: Real> TrainingRun<T> {
    pub fn final_table(&self) -> &QTable<T> {
        &self.checkpoints.last().expect("initial checkpoint always present").table
    }

    pub fn episodes(&self) -> usize {
        self.checkpoints.len() - 1
    }
}

/// Runs `episodes` learning episodes with the table's ε set from `schedule`
/// before each one. Every checkpoint carries the ε the next episode would
/// have used.
pub fn train_q<T: Real, E: Environment<T>>(
    env: &mut E,
    mut table: QTable<T>,
    episodes: usize,
    schedule: &EpsilonSchedule,
    seed: u64,
) -> Result<TrainingRun<T>, E::Error>
where
    E::Error: From<AgentError>,
{
    schedule.validate()?;
    let mut rng = stream_rng(seed, stream::EXPLORE);
    table.set_epsilon(T::lit(schedule.at(0)))?;
    let mut checkpoints = Vec::with_capacity(episodes + 1);
    checkpoints.push(Checkpoint { episodes: 0, table: table.clone() });
    for e in 0..episodes {
        table.set_epsilon(T::lit(schedule.at(e)))?;
        env.run_episode(e, &mut Learner::new(&mut table, &mut rng, true, true))?;
        table.set_epsilon(T::lit(schedule.at(e + 1)))?;
        checkpoints.push(Checkpoint { episodes: e + 1, table: table.clone() });
    }
    Ok(TrainingRun { checkpoints })
}

/// Table after `⌈fraction · N⌉` episodes.
pub fn snapshot_suboptimal<T: Real>(run: &TrainingRun<T>, fraction: f64) -> Result<QTable<T>, AgentError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AgentError::BadFraction(fraction));
    }
    let k = ((fraction * run.episodes() as f64).ceil() as usize).min(run.episodes());
    Ok(run.checkpoints[k].table.clone())
}
