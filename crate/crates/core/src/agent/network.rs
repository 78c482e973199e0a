use super::{train_q, AgentError, EpsilonSchedule, Environment, Learner, QTable, StateIndex, StateSpace, TrainingRun};
use crate::intent::BandwidthGoal;
use crate::netsim::{self, ActionSet, Decision, Episode, Policy, Scenario, SimConfig, StepView, Transition};
use crate::predictor::HybridPredictor;
use crate::rng::{derive_seed, stream, stream_rng};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub episodes: usize,
    /// Steps per training episode; each episode gets a fresh trace.
    pub episode_len: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub bin_width: f64,
    pub tie_tolerance: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            episodes: 400,
            episode_len: 100,
            alpha: 0.1,
            gamma: 0.9,
            epsilon: EpsilonSchedule::default(),
            bin_width: 50.0,
            tie_tolerance: 0.5,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn empty_table<T: Real>(&self, cap_max: f64, actions: usize) -> Result<QTable<T>, AgentError> {
        let space = StateSpace::new(self.bin_width, cap_max)
            .ok_or_else(|| AgentError::InvalidConfig("bin width and cap_max must be positive".into()))?;
        QTable::new(space, actions, T::lit(self.alpha), T::lit(self.gamma))?.with_tie_tolerance(T::lit(self.tie_tolerance))
    }
}

/// How a frozen table is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyMode {
    /// Greedy with the infeasibility fallback.
    Greedy,
    /// ε-greedy with the table's own ε, as a partially trained agent acts.
    Explore,
}

/// Predict → discretize → choose, as a netsim policy.
///
/// When the predicted bandwidth is below the goal no action can satisfy the
/// constraint, so the highest-rate action is taken and the step is flagged.
pub struct AgentPolicy<'a, 'l, T> {
    predictor: &'a HybridPredictor<T>,
    actions: &'a ActionSet,
    learner: &'a mut Learner<'l, T>,
    learning: bool,
    pending: Option<(StateIndex, usize)>,
    /// Prediction made in `observe`, keyed by the probe count it saw.
    cached: Option<(usize, f64)>,
}

impl<'a, 'l, T: Real> AgentPolicy<'a, 'l, T> {
    pub fn new(
        predictor: &'a HybridPredictor<T>,
        actions: &'a ActionSet,
        learner: &'a mut Learner<'l, T>,
        learning: bool,
    ) -> Self {
        Self { predictor, actions, learner, learning, pending: None, cached: None }
    }

    fn predict(&self, probes: &[f64]) -> Result<f64, AgentError> {
        let history: Vec<T> = probes.iter().map(|&p| T::lit(p)).collect();
        Ok(self.predictor.predict_history(&history)?.as_f64())
    }
}

impl<T: Real> Policy for AgentPolicy<'_, '_, T> {
    type Error = AgentError;

    fn decide(&mut self, view: &StepView<'_>) -> Result<Decision, AgentError> {
        let predicted = match self.cached.take() {
            Some((len, p)) if len == view.probes.len() => p,
            _ => self.predict(view.probes)?,
        };
        let s = self.learner.table().space().discretize(predicted);
        let fallback = (predicted < view.goal_kbps).then(|| self.actions.max_rate().id);
        let (action_id, fell_back) = self.learner.act(s, fallback);
        self.pending = Some((s, action_id));
        Ok(Decision { action_id, predicted_kbps: predicted, fallback: fell_back })
    }

    fn observe(&mut self, tr: &Transition<'_>) -> Result<(), AgentError> {
        if let (true, Some((s, a))) = (self.learning, self.pending.take()) {
            let predicted = self.predict(tr.probes)?;
            self.cached = Some((tr.probes.len(), predicted));
            let next = self.learner.table().space().discretize(predicted);
            self.learner.learn(s, a, T::lit(f64::from(tr.reward.value())), next);
        }
        Ok(())
    }
}

struct NetworkEnv<'a, T> {
    predictor: &'a HybridPredictor<T>,
    goal: &'a BandwidthGoal,
    sim: &'a SimConfig,
    episode_len: usize,
    seed: u64,
}

impl<T: Real> Environment<T> for NetworkEnv<'_, T> {
    type Error = AgentError;

    fn run_episode(&mut self, episode: usize, learner: &mut Learner<'_, T>) -> Result<(), AgentError> {
        let seed = derive_seed(self.seed, episode as u64);
        let trace = self.sim.trace(seed, self.episode_len)?;
        let policy = AgentPolicy::new(self.predictor, &self.sim.actions, learner, true);
        netsim::run_episode(&trace, policy, self.goal, &self.sim.actions, &self.sim.model, seed, Scenario::Id)?;
        Ok(())
    }
}

/// Online Q-learning on simulated episodes. Deterministic per `config.seed`.
pub fn train_agent<T: Real>(
    predictor: &HybridPredictor<T>,
    goal: &BandwidthGoal,
    sim: &SimConfig,
    config: &AgentConfig,
) -> Result<TrainingRun<T>, AgentError> {
    if config.episode_len == 0 {
        return Err(AgentError::InvalidConfig("episode length must be at least 1".into()));
    }
    let table = config.empty_table(sim.cap_max, sim.actions.len())?;
    let mut env = NetworkEnv { predictor, goal, sim, episode_len: config.episode_len, seed: config.seed };
    train_q(&mut env, table, config.episodes, &config.epsilon, config.seed)
}

/// Runs a frozen table over `trace`. `explore_seed` drives ε draws in
/// [`PolicyMode::Explore`].
#[allow(clippy::too_many_arguments)]
pub fn run_frozen<T: Real>(
    table: &QTable<T>,
    predictor: &HybridPredictor<T>,
    trace: &netsim::BandwidthTrace,
    goal: &BandwidthGoal,
    sim: &SimConfig,
    mode: PolicyMode,
    noise_seed: u64,
    label: Scenario,
) -> Result<Episode, AgentError> {
    let mut table = table.clone();
    let mut rng = stream_rng(noise_seed, stream::EPISODE);
    let mut learner = Learner::new(&mut table, &mut rng, false, mode == PolicyMode::Explore);
    let policy = AgentPolicy::new(predictor, &sim.actions, &mut learner, false);
    netsim::run_episode(trace, policy, goal, &sim.actions, &sim.model, noise_seed, label)
}
