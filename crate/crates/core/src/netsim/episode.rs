use std::convert::Infallible;
use std::fmt;
use std::io::Write;

use super::{ActionSet, BandwidthTrace, LinkState, Reward, ShapingModel};
use crate::intent::BandwidthGoal;
use crate::rng::{stream, stream_rng};

pub const EPISODE_CSV_HEADER: &str =
    "t,capacity_kbps,action_id,shaped_rate_kbps,observed_kbps,predicted_kbps,reward,delta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Id,
    Ood,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Id => "ID",
            Scenario::Ood => "OOD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ID" => Some(Scenario::Id),
            "OOD" => Some(Scenario::Ood),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a policy sees before acting at step `t`.
///
/// `probes` holds the unshaped throughput measurements taken so far: one
/// taken before the loop starts, then one after every completed step, so its
/// length is `t + 1`.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub t: usize,
    pub probes: &'a [f64],
    pub goal_kbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action_id: usize,
    pub predicted_kbps: f64,
    /// The goal looked unreachable and the controller fell back.
    pub fallback: bool,
}

/// Outcome of step `t`, with the probe taken after it already appended.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub t: usize,
    pub action_id: usize,
    pub observed_kbps: f64,
    pub reward: Reward,
    pub probes: &'a [f64],
}

pub trait Policy {
    type Error;

    fn decide(&mut self, view: &StepView<'_>) -> Result<Decision, Self::Error>;

    fn observe(&mut self, _transition: &Transition<'_>) -> Result<(), Self::Error> {
        Ok(())
    }
}

impl<P: Policy + ?Sized> Policy for &mut P {
    type Error = P::Error;

    fn decide(&mut self, view: &StepView<'_>) -> Result<Decision, Self::Error> {
        (**self).decide(view)
    }

    fn observe(&mut self, transition: &Transition<'_>) -> Result<(), Self::Error> {
        (**self).observe(transition)
    }
}

/// Always plays the same action.
#[derive(Debug, Clone, Copy)]
pub struct FixedPolicy(pub usize);

impl Policy for FixedPolicy {
    type Error = Infallible;

    fn decide(&mut self, view: &StepView<'_>) -> Result<Decision, Infallible> {
        Ok(Decision { action_id: self.0, predicted_kbps: *view.probes.last().unwrap_or(&0.0), fallback: false })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub link: LinkState,
    pub action_id: usize,
    pub predicted_kbps: f64,
    pub reward: Reward,
    pub fallback: bool,
}

impl Step {
    pub fn delta(&self) -> u8 {
        self.reward.delta()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub trace: BandwidthTrace,
    pub steps: Vec<Step>,
    pub label: Scenario,
    pub goal_kbps: f64,
}

impl Episode {
    pub fn observed(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.link.observed_kbps)
    }
}

/// Runs one closed-loop pass over `trace`.
///
/// Each step: the policy picks an action from the probe history, the link
/// shapes capacity `C_t` into the observed throughput, the reward is scored
/// against the goal, and a fresh probe of `C_t` is appended to the history.
/// Shaping and probing draw from separate streams of `noise_seed`.
///
/// # Panics
/// If the policy returns an action id outside `actions`.
pub fn run_episode<P: Policy>(
    trace: &BandwidthTrace,
    mut policy: P,
    goal: &BandwidthGoal,
    actions: &ActionSet,
    model: &ShapingModel,
    noise_seed: u64,
    label: Scenario,
) -> Result<Episode, P::Error> {
    let goal_kbps = goal.beta_target();
    let mut link_rng = stream_rng(noise_seed, stream::LINK_NOISE);
    let mut probe_rng = stream_rng(noise_seed, stream::PROBE_NOISE);
    let mut probes = Vec::with_capacity(trace.len() + 1);
    probes.push(model.probe(trace.samples()[0], &mut probe_rng));

    let mut steps = Vec::with_capacity(trace.len());
    for (t, &capacity) in trace.samples().iter().enumerate() {
        let d = policy.decide(&StepView { t, probes: &probes, goal_kbps })?;
        let action = actions
            .get(d.action_id)
            .unwrap_or_else(|| panic!("policy chose action {} of {}", d.action_id, actions.len()));
        let observed = model.shape(capacity, action.rate_kbps, &mut link_rng);
        let reward = Reward::of(observed, goal_kbps);
        probes.push(model.probe(capacity, &mut probe_rng));
        policy.observe(&Transition { t, action_id: d.action_id, observed_kbps: observed, reward, probes: &probes })?;
        steps.push(Step {
            link: LinkState { t, capacity_kbps: capacity, shaped_rate_kbps: action.rate_kbps, observed_kbps: observed },
            action_id: d.action_id,
            predicted_kbps: d.predicted_kbps,
            reward,
            fallback: d.fallback,
        });
    }
    Ok(Episode { trace: trace.clone(), steps, label, goal_kbps })
}

pub fn write_episode_csv(w: &mut impl Write, episode: &Episode) -> std::io::Result<()> {
    writeln!(w, "{EPISODE_CSV_HEADER}")?;
    for s in &episode.steps {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.link.t,
            s.link.capacity_kbps,
            s.action_id,
            s.link.shaped_rate_kbps,
            s.link.observed_kbps,
            s.predicted_kbps,
            s.reward.value(),
            s.delta()
        )?;
    }
    Ok(())
}
