use super::{EvalError, Mode};
use crate::agent::{run_frozen, PolicyMode, QTable};
use crate::intent::BandwidthGoal;
use crate::netsim::{BandwidthTrace, Episode, Scenario, SimConfig};
use crate::predictor::HybridPredictor;
use crate::rng::{derive_seed, stream, stream_rng};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    MonteCarlo,
    ClosedLoop,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::MonteCarlo => "montecarlo",
            Source::ClosedLoop => "closedloop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "montecarlo" => Some(Source::MonteCarlo),
            "closedloop" => Some(Source::ClosedLoop),
            _ => None,
        }
    }
}

/// Mean `|β_target − B_t|` over one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSample {
    pub episode: usize,
    pub mean_deviation: f64,
    pub scenario: Scenario,
    pub mode: Mode,
    pub source: Source,
}

/// A capacity trace with the noise seed its episode is run under.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTrace {
    pub trace: BandwidthTrace,
    pub noise_seed: u64,
}

/// `count` traces of `length` steps; closed-loop and Monte Carlo runs over
/// the same list see the same capacities and the same link noise.
pub fn montecarlo_traces(
    sim: &SimConfig,
    count: usize,
    length: usize,
    seed: u64,
) -> Result<Vec<EvalTrace>, EvalError> {
    (0..count as u64)
        .map(|k| {
            let s = derive_seed(seed, k);
            Ok(EvalTrace { trace: sim.trace(s, length)?, noise_seed: s })
        })
        .collect()
}

pub fn mean_deviation(episode: &Episode) -> Result<f64, EvalError> {
    if episode.steps.is_empty() {
        return Err(EvalError::EmptyEpisode);
    }
    Ok(episode.observed().map(|b| (episode.goal_kbps - b).abs()).sum::<f64>() / episode.steps.len() as f64)
}

/// Frozen-table episodes over `traces`. Optimal tables act greedily,
/// suboptimal ones with their own ε.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_objective_closedloop<T: Real>(
    table: &QTable<T>,
    predictor: &HybridPredictor<T>,
    traces: &[EvalTrace],
    goal: &BandwidthGoal,
    sim: &SimConfig,
    mode: Mode,
    scenario: Scenario,
) -> Result<Vec<ObjectiveSample>, EvalError> {
    if traces.is_empty() {
        return Err(EvalError::NoEpisodes);
    }
    let policy = match mode {
        Mode::Optimal => PolicyMode::Greedy,
        Mode::Suboptimal => PolicyMode::Explore,
    };
    traces
        .iter()
        .enumerate()
        .map(|(episode, t)| {
            let ep = run_frozen(table, predictor, &t.trace, goal, sim, policy, t.noise_seed, scenario)?;
            Ok(ObjectiveSample {
                episode,
                mean_deviation: mean_deviation(&ep)?,
                scenario,
                mode,
                source: Source::ClosedLoop,
            })
        })
        .collect()
}

/// Theoretical optimum: at every step, knowing the true capacity and the
/// shaping model, pick the action with the least expected deviation (lowest
/// id on ties), then realize it under the episode's link noise.
pub fn evaluate_objective_montecarlo(
    goal: &BandwidthGoal,
    sim: &SimConfig,
    traces: &[EvalTrace],
    scenario: Scenario,
) -> Result<Vec<ObjectiveSample>, EvalError> {
    if traces.is_empty() {
        return Err(EvalError::NoEpisodes);
    }
    let g = goal.beta_target();
    traces
        .iter()
        .enumerate()
        .map(|(episode, t)| {
            let mut rng = stream_rng(t.noise_seed, stream::LINK_NOISE);
            let total: f64 = t
                .trace
                .samples()
                .iter()
                .map(|&c| {
                    let best = sim
                        .actions
                        .iter()
                        .map(|a| (sim.model.expected_abs_deviation(g, c, a.rate_kbps), a))
                        .reduce(|best, cand| if cand.0 < best.0 { cand } else { best })
                        .expect("action set is non-empty")
                        .1;
                    (g - sim.model.shape(c, best.rate_kbps, &mut rng)).abs()
                })
                .sum();
            Ok(ObjectiveSample {
                episode,
                mean_deviation: total / t.trace.len() as f64,
                scenario,
                mode: Mode::Optimal,
                source: Source::MonteCarlo,
            })
        })
        .collect()
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Trend similarity between Monte Carlo and closed-loop deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendComparison {
    /// `None` when a list is constant and correlation is undefined.
    pub correlation: Option<f64>,
    pub montecarlo_mean: f64,
    pub closedloop_mean: f64,
}

impl TrendComparison {
    /// Closed-loop mean minus Monte Carlo mean.
    pub fn mean_gap(&self) -> f64 {
        self.closedloop_mean - self.montecarlo_mean
    }
}

pub fn trend_compare(mc: &[ObjectiveSample], cl: &[ObjectiveSample]) -> Result<TrendComparison, EvalError> {
    if mc.len() != cl.len() {
        return Err(EvalError::LengthMismatch(mc.len(), cl.len()));
    }
    if mc.is_empty() {
        return Err(EvalError::NoEpisodes);
    }
    let x: Vec<f64> = mc.iter().map(|s| s.mean_deviation).collect();
    let y: Vec<f64> = cl.iter().map(|s| s.mean_deviation).collect();
    let n = x.len() as f64;
    Ok(TrendComparison {
        correlation: pearson(&x, &y),
        montecarlo_mean: x.iter().sum::<f64>() / n,
        closedloop_mean: y.iter().sum::<f64>() / n,
    })
}
