/// Bin of the predicted bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateIndex(pub usize);

/// Equal-width bins over `[0, cap_max]`; the last bin also holds `cap_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpace {
    bin_width: f64,
    cap_max: f64,
    bins: usize,
}

impl StateSpace {
    pub fn new(bin_width: f64, cap_max: f64) -> Option<Self> {
        if !(bin_width > 0.0 && cap_max > 0.0 && bin_width.is_finite() && cap_max.is_finite()) {
            return None;
        }
        let bins = ((cap_max / bin_width).ceil() as usize).max(1);
        Some(Self { bin_width, cap_max, bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn cap_max(&self) -> f64 {
        self.cap_max
    }

    /// Out-of-range (or NaN) predictions are clamped with a warning.
    pub fn discretize(&self, predicted_kbps: f64) -> StateIndex {
        let p = if predicted_kbps.is_nan() {
            log::warn!("prediction is NaN; using state 0");
            0.0
        } else if !(0.0..=self.cap_max).contains(&predicted_kbps) {
            log::warn!("prediction {predicted_kbps} kbps outside [0, {}]; clamped", self.cap_max);
            predicted_kbps.clamp(0.0, self.cap_max)
        } else {
            predicted_kbps
        };
        StateIndex(((p / self.bin_width).floor() as usize).min(self.bins - 1))
    }
}

pub fn discretize(predicted_kbps: f64, bin_width: f64, cap_max: f64) -> StateIndex {
    StateSpace::new(bin_width, cap_max).expect("positive bin width and cap").discretize(predicted_kbps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_arithmetic_and_boundaries() {
        assert_eq!(discretize(275.0, 50.0, 600.0), StateIndex(5));
        assert_eq!(discretize(0.0, 50.0, 600.0), StateIndex(0));
        assert_eq!(discretize(600.0, 50.0, 600.0), StateIndex(11));
        assert_eq!(discretize(560.0, 50.0, 560.0), StateIndex(11));
        assert_eq!(StateSpace::new(50.0, 560.0).unwrap().bins(), 12);
    }

    #[test]
    fn out_of_range_is_clamped() {
        assert_eq!(discretize(-3.0, 50.0, 600.0), StateIndex(0));
        assert_eq!(discretize(1e9, 50.0, 600.0), StateIndex(11));
        assert_eq!(discretize(f64::NAN, 50.0, 600.0), StateIndex(0));
    }

    #[test]
    fn bins_partition_the_range() {
        let s = StateSpace::new(50.0, 600.0).unwrap();
        let mut last = 0;
        let mut counts = vec![0usize; s.bins()];
        for k in 0..=600 {
            let StateIndex(b) = s.discretize(k as f64);
            assert!(b == last || b == last + 1, "gap at {k}");
            last = b;
            counts[b] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 50));
        assert_eq!(counts.iter().sum::<usize>(), 601);
    }
}
