use super::{generate_trace, ActionSet, BandwidthTrace, NetsimError, ShapingModel};

/// Everything needed to generate capacity traces and shape traffic on them.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub cap_min: f64,
    pub cap_max: f64,
    pub hold: usize,
    pub model: ShapingModel,
    pub actions: ActionSet,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { cap_min: 310.0, cap_max: 560.0, hold: 5, model: ShapingModel::default(), actions: ActionSet::default() }
    }
}

impl SimConfig {
    pub fn trace(&self, seed: u64, length: usize) -> Result<BandwidthTrace, NetsimError> {
        generate_trace(seed, length, self.cap_min, self.cap_max, self.hold)
    }
}
