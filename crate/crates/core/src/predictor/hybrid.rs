use super::boost::features;
use super::{
    bilstm_train, fit_residual_ensemble, make_windows, padded_window, BiLstmConfig, BiLstmParams, BoostConfig,
    Normalizer, PredictorError, ResidualEnsemble,
};
use crate::Real;

/// BiLSTM plus boosted residual correction.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPredictor<T> {
    bilstm: BiLstmParams<T>,
    booster: ResidualEnsemble<T>,
    norm: Normalizer<T>,
}

impl<T: Real> HybridPredictor<T> {
    pub fn new(bilstm: BiLstmParams<T>, booster: ResidualEnsemble<T>, norm: Normalizer<T>) -> Self {
        Self { bilstm, booster, norm }
    }

    pub fn bilstm(&self) -> &BiLstmParams<T> {
        &self.bilstm
    }

    pub fn booster(&self) -> &ResidualEnsemble<T> {
        &self.booster
    }

    pub fn normalizer(&self) -> &Normalizer<T> {
        &self.norm
    }

    pub fn window(&self) -> usize {
        self.bilstm.window()
    }

    /// `(bilstm_kbps, correction_kbps)` before clamping.
    pub fn components(&self, window_kbps: &[T]) -> Result<(T, T), PredictorError> {
        let w: Vec<T> = window_kbps.iter().map(|&v| self.norm.normalize(v)).collect();
        let raw = self.bilstm.forward(&w)?;
        let correction = self.booster.correction(&features(&w, raw));
        Ok((self.norm.denormalize(raw), self.norm.denormalize(correction)))
    }

    /// Next-step bandwidth in kbps, clamped to `[0, cap_max]`.
    pub fn predict(&self, window_kbps: &[T]) -> Result<T, PredictorError> {
        let (raw, correction) = self.components(window_kbps)?;
        Ok((raw + correction).max(T::zero()).min(self.norm.cap_max()))
    }

    /// Prediction from a history of any non-zero length (see
    /// [`padded_window`](super::padded_window)).
    pub fn predict_history(&self, history_kbps: &[T]) -> Result<T, PredictorError> {
        if history_kbps.is_empty() {
            return Err(PredictorError::ShapeMismatch { expected: self.window(), got: 0 });
        }
        self.predict(&padded_window(history_kbps, self.window()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridConfig {
    pub bilstm: BiLstmConfig,
    pub boost: BoostConfig,
}

/// Trains the BiLSTM on every window of `series_kbps`, then the residual
/// ensemble on the same windows. Returns the predictor with the per-epoch
/// BiLSTM losses and per-tree training MSE.
pub fn train_hybrid<T: Real>(
    series_kbps: &[T],
    cap_max: T,
    config: &HybridConfig,
) -> Result<(HybridPredictor<T>, Vec<T>, Vec<T>), PredictorError> {
    let norm = Normalizer::new(cap_max)?;
    let samples = make_windows(series_kbps, config.bilstm.window, &norm)?;
    let fit = bilstm_train(&samples, &config.bilstm)?;
    let boost = fit_residual_ensemble(&samples, &fit.params, &config.boost)?;
    Ok((HybridPredictor::new(fit.params, boost.ensemble, norm), fit.epoch_losses, boost.stage_mse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::RegressionTree;
    use proptest::prelude::*;

    fn small() -> HybridPredictor<f64> {
        HybridPredictor::new(BiLstmParams::init(3, 2, 1), ResidualEnsemble::empty(), Normalizer::new(600.0).unwrap())
    }

    #[test]
    fn empty_ensemble_is_plain_bilstm() {
        let h = small();
        let w = [310.0, 420.0, 500.0];
        let raw = h.bilstm().predict_kbps(h.normalizer(), &w).unwrap();
        assert_eq!(h.components(&w).unwrap(), (raw, 0.0));
    }

    #[test]
    fn negative_correction_clamps_to_zero() {
        let booster = ResidualEnsemble::new(vec![RegressionTree::Leaf(-10.0)], 0.1, 3).unwrap();
        let h = HybridPredictor::new(BiLstmParams::zeros(3, 2), booster, Normalizer::new(600.0).unwrap());
        assert_eq!(h.predict(&[300.0; 3]).unwrap(), 0.0);
        let up = ResidualEnsemble::new(vec![RegressionTree::Leaf(10.0)], 0.1, 3).unwrap();
        let h = HybridPredictor::new(BiLstmParams::zeros(3, 2), up, Normalizer::new(600.0).unwrap());
        assert_eq!(h.predict(&[300.0; 3]).unwrap(), 600.0);
    }

    #[test]
    fn short_history_is_padded() {
        let h = small();
        assert_eq!(h.predict_history(&[400.0]).unwrap(), h.predict(&[400.0; 3]).unwrap());
        assert!(h.predict_history(&[]).is_err());
        assert!(h.predict(&[1.0; 4]).is_err());
    }

    proptest! {
        #[test]
        fn output_in_range(w in prop::collection::vec(0.0..600.0f64, 3), leaf in -2.0..2.0f64) {
            let booster = ResidualEnsemble::new(vec![RegressionTree::Leaf(leaf)], 0.1, 3).unwrap();
            let h = HybridPredictor::new(BiLstmParams::init(3, 2, 7), booster, Normalizer::new(600.0).unwrap());
            let p = h.predict(&w).unwrap();
            prop_assert!((0.0..=600.0).contains(&p));
        }
    }
}
