//! Intent-driven bandwidth assurance on a simulated bottleneck link.
//!
//! The crate wires together five stages:
//!
//! * [`intent`] turns an English request into a Nile intent and pulls out the
//!   bandwidth goal.
//! * [`netsim`] injects capacity variation on a single link and applies
//!   traffic-shaping actions to it.
//! * [`predictor`] forecasts next-step bandwidth with a bidirectional LSTM
//!   whose residuals are corrected by boosted regression trees.
//! * [`agent`] runs tabular Q-learning over the predicted state to choose
//!   shaping rates.
//! * [`evalkit`] scores runs (satisfaction, MOS, objective deviation) and
//!   compares the closed loop with a Monte Carlo optimum.
//!
//! [`orchestrator`] ties the stages into a reproducible pipeline driven by a
//! flat `key = value` configuration.
//!
//! Numeric kernels are generic over [`Real`]; the aliases below fix them to
//! `f64` (the default everywhere in the pipeline) or `f32`.

pub mod agent;
pub mod error;
pub mod evalkit;
pub mod intent;
pub mod netsim;
pub mod orchestrator;
pub mod predictor;
pub mod rng;
pub mod scalar;

pub use error::Error;
pub use scalar::Real;

/// Bidirectional LSTM parameters in double precision.
pub type BiLstm = predictor::BiLstmParams<f64>;
/// Bidirectional LSTM parameters in single precision.
pub type BiLstmF32 = predictor::BiLstmParams<f32>;
/// Residual tree ensemble in double precision.
pub type ResidualEnsemble = predictor::ResidualEnsemble<f64>;
/// BiLSTM + boosted residual predictor in double precision.
pub type HybridPredictor = predictor::HybridPredictor<f64>;
/// BiLSTM + boosted residual predictor in single precision.
pub type HybridPredictorF32 = predictor::HybridPredictor<f32>;
/// Q-table in double precision.
pub type QTable = agent::QTable<f64>;
/// Q-table in single precision.
pub type QTableF32 = agent::QTable<f32>;
/// Predicted MOS in double precision.
pub type MosScore = evalkit::MosScore<f64>;
