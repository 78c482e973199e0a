use rand::Rng;

use super::NetsimError;
use crate::rng::{stream, stream_rng};

/// Token-bucket style rate cap. Burst is carried for completeness; with 1 s
/// steps and no queue model only the rate limits throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingAction {
    pub id: usize,
    pub rate_kbps: f64,
    pub burst_kbps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<ShapingAction>,
}

impl ActionSet {
    pub const DEFAULT_RATES: [f64; 8] = [100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 450.0, 550.0];

    /// Actions in the given order, burst = rate / 10.
    pub fn from_rates(rates: &[f64]) -> Result<Self, NetsimError> {
        if rates.is_empty() {
            return Err(NetsimError::InvalidActions("no actions".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(NetsimError::InvalidActions(format!("rate {r} is not positive")));
        }
        Ok(Self {
            actions: rates
                .iter()
                .enumerate()
                .map(|(id, &rate_kbps)| ShapingAction { id, rate_kbps, burst_kbps: rate_kbps / 10.0 })
                .collect(),
        })
    }

    pub fn get(&self, id: usize) -> Option<&ShapingAction> {
        self.actions.get(id)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ShapingAction> {
        self.actions.iter()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.actions.iter().map(|a| a.rate_kbps).collect()
    }

    /// Highest-rate action; lowest id among equal rates.
    pub fn max_rate(&self) -> &ShapingAction {
        self.actions
            .iter()
            .reduce(|best, a| if a.rate_kbps > best.rate_kbps { a } else { best })
            .expect("action set is non-empty")
    }
}

impl Default for ActionSet {
    fn default() -> Self {
        Self::from_rates(&Self::DEFAULT_RATES).expect("default rates are valid")
    }
}

/// `observed = max(0, min(C, rate)·η − ε)`, `ε ~ U[0, noise_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingModel {
    pub efficiency: f64,
    pub noise_max: f64,
}

impl Default for ShapingModel {
    fn default() -> Self {
        Self { efficiency: 0.97, noise_max: 5.0 }
    }
}

impl ShapingModel {
    pub fn new(efficiency: f64, noise_max: f64) -> Result<Self, NetsimError> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(NetsimError::InvalidModel(format!("efficiency {efficiency} outside (0, 1]")));
        }
        if !(noise_max.is_finite() && noise_max >= 0.0) {
            return Err(NetsimError::InvalidModel(format!("noise bound {noise_max} is negative")));
        }
        Ok(Self { efficiency, noise_max })
    }

    fn noise(&self, rng: &mut impl Rng) -> f64 {
        // Always draw so that streams stay aligned even with noise disabled.
        rng.gen::<f64>() * self.noise_max
    }

    pub fn shape(&self, capacity: f64, rate: f64, rng: &mut impl Rng) -> f64 {
        let eps = self.noise(rng);
        (capacity.min(rate) * self.efficiency - eps).max(0.0)
    }

    /// Throughput measured with no rate cap in place.
    pub fn probe(&self, capacity: f64, rng: &mut impl Rng) -> f64 {
        let eps = self.noise(rng);
        (capacity * self.efficiency - eps).max(0.0)
    }

    /// Noise-free mean of the shaped throughput before the zero clamp.
    pub fn nominal(&self, capacity: f64, rate: f64) -> f64 {
        capacity.min(rate) * self.efficiency - self.noise_max / 2.0
    }

    /// `E|goal − B|` over the noise, in closed form.
    pub fn expected_abs_deviation(&self, goal: f64, capacity: f64, rate: f64) -> f64 {
        let x = capacity.min(rate) * self.efficiency;
        if self.noise_max == 0.0 {
            return (goal - x.max(0.0)).abs();
        }
        // B = max(0, Y) with Y ~ U[x − w, x]. Below zero the deviation is
        // the constant |goal|; above, integrate |goal − y|.
        let (lo, hi, w) = (x - self.noise_max, x, self.noise_max);
        let antiderivative = |y: f64| {
            if y <= goal {
                goal * y - y * y / 2.0
            } else {
                goal * goal / 2.0 + (y - goal).powi(2) / 2.0
            }
        };
        let neg = (hi.min(0.0) - lo).max(0.0) * goal.abs();
        let pos = if hi > 0.0 { antiderivative(hi) - antiderivative(lo.max(0.0)) } else { 0.0 };
        (neg + pos) / w
    }
}

/// One-shot shaping with its own noise seed.
pub fn apply_shaping(capacity_kbps: f64, action: &ShapingAction, noise_seed: u64) -> f64 {
    let mut rng = stream_rng(noise_seed, stream::LINK_NOISE);
    ShapingModel::default().shape(capacity_kbps, action.rate_kbps, &mut rng)
}

/// Link after a step has been applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub t: usize,
    pub capacity_kbps: f64,
    pub shaped_rate_kbps: f64,
    pub observed_kbps: f64,
}

/// Two-valued reward: +1 when the realized bandwidth meets or exceeds the
/// goal, −1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reward {
    Met,
    Missed,
}

impl Reward {
    pub fn of(observed_kbps: f64, goal_kbps: f64) -> Self {
        if observed_kbps >= goal_kbps {
            Reward::Met
        } else {
            Reward::Missed
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Reward::Met => 1,
            Reward::Missed => -1,
        }
    }

    pub fn delta(self) -> u8 {
        u8::from(self == Reward::Met)
    }
}
