//! Next-step bandwidth prediction: a bidirectional LSTM over a sliding
//! window, corrected by gradient-boosted regression trees fitted to its
//! residuals.

mod bilstm;
mod boost;
mod hybrid;
mod model_io;

pub use bilstm::{bilstm_forward, bilstm_train, BiLstmConfig, BiLstmFit, BiLstmGrads, BiLstmParams, LstmCell};
pub use boost::{fit_residual_ensemble, BoostConfig, RegressionTree, ResidualEnsemble, ResidualFit};
pub use hybrid::{train_hybrid, HybridConfig, HybridPredictor};
pub use model_io::{load_model, save_model, MODEL_HEADER};

use thiserror::Error;

use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("window has {got} values, model expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("series of {len} values is too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("invalid predictor configuration: {0}")]
    InvalidConfig(String),
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}

/// Min-max scaling by `[0, cap_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer<T> {
    cap_max: T,
}

impl<T: Real> Normalizer<T> {
    pub fn new(cap_max: T) -> Result<Self, PredictorError> {
        if !(cap_max.is_finite() && cap_max > T::zero()) {
            return Err(PredictorError::InvalidConfig(format!("cap_max {cap_max} must be positive")));
        }
        Ok(Self { cap_max })
    }

    pub fn cap_max(&self) -> T {
        self.cap_max
    }

    pub fn normalize(&self, kbps: T) -> T {
        kbps / self.cap_max
    }

    pub fn denormalize(&self, v: T) -> T {
        v * self.cap_max
    }
}

/// `n` consecutive normalized values and the normalized value that follows.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample<T> {
    pub history: Vec<T>,
    pub target: T,
}

/// Every length-`n` window of `series_kbps` paired with its next value.
pub fn make_windows<T: Real>(
    series_kbps: &[T],
    n: usize,
    norm: &Normalizer<T>,
) -> Result<Vec<WindowSample<T>>, PredictorError> {
    if n == 0 {
        return Err(PredictorError::InvalidConfig("window length must be at least 1".into()));
    }
    if series_kbps.len() <= n {
        return Err(PredictorError::SeriesTooShort { len: series_kbps.len(), window: n });
    }
    Ok(series_kbps
        .windows(n + 1)
        .map(|w| WindowSample {
            history: w[..n].iter().map(|&v| norm.normalize(v)).collect(),
            target: norm.normalize(w[n]),
        })
        .collect())
}

/// Last `n` values of `history`, front-padded with its first value when
/// shorter.
pub fn padded_window<T: Copy>(history: &[T], n: usize) -> Vec<T> {
    assert!(!history.is_empty(), "history must hold at least one value");
    let start = history.len().saturating_sub(n);
    let tail = &history[start..];
    let mut w = Vec::with_capacity(n);
    w.extend(std::iter::repeat_n(tail[0], n - tail.len()));
    w.extend_from_slice(tail);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_inverts() {
        let n = Normalizer::new(600.0f64).unwrap();
        for v in [0.0, 123.0, 600.0] {
            assert!((n.denormalize(n.normalize(v)) - v).abs() < 1e-12);
        }
        assert!(Normalizer::new(0.0f64).is_err());
    }

    #[test]
    fn windows_pair_history_with_next_value() {
        let norm = Normalizer::new(10.0f64).unwrap();
        let w = make_windows(&[1.0, 2.0, 3.0, 4.0], 2, &norm).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].history, vec![0.2, 0.3]);
        assert_eq!(w[1].target, 0.4);
        assert!(matches!(make_windows(&[1.0, 2.0], 2, &norm), Err(PredictorError::SeriesTooShort { .. })));
    }

    #[test]
    fn padding_repeats_first_value() {
        assert_eq!(padded_window(&[5, 6], 4), [5, 5, 5, 6]);
        assert_eq!(padded_window(&[1, 2, 3, 4, 5], 3), [3, 4, 5]);
    }
}
