//! English → Nile translation, Nile parsing, conflict detection and goal
//! extraction.

mod backend;
mod conflict;
mod corpus;
mod nile;
mod normalize;
mod retrieval;
mod translate;

pub use backend::{
    translate_via, BackendError, RetrievalBackend, TranslationBackend, TranslationRequest,
    TranslationResponse,
};
pub use conflict::{detect_conflict, Conflict, ConflictReason, ConflictReport, IntentStore};
pub use corpus::{Exemplar, ExemplarCorpus};
pub use nile::{parse_nile, BandwidthBound, BoundMode, NileIntent, Unit};
pub use normalize::{normalize, Token};
pub use retrieval::{retrieve_exemplars, Retrieved, TermIndex};
pub use translate::{translate, NaturalIntent, DEFAULT_RETRIEVAL_K};

use thiserror::Error;

/// Bandwidth goal handed to the control loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandwidthGoal {
    beta_target_kbps: u64,
    source: NileIntent,
}

impl BandwidthGoal {
    /// Goal in kbps as an exact integer.
    pub fn kbps(&self) -> u64 {
        self.beta_target_kbps
    }

    pub fn beta_target(&self) -> f64 {
        self.beta_target_kbps as f64
    }

    pub fn source(&self) -> &NileIntent {
        &self.source
    }

    /// Goal without a source intent, for experiments that set the target
    /// directly.
    pub fn from_kbps(kbps: u64) -> Result<Self, IntentError> {
        let source = NileIntent::new(
            "goal",
            "cn",
            "ue",
            BandwidthBound::new(BoundMode::Max, kbps, Unit::Kbps)?,
        )?;
        Ok(extract_bandwidth(&source))
    }
}

/// Pulls the bandwidth bound out of a Nile intent, converted to kbps.
pub fn extract_bandwidth(intent: &NileIntent) -> BandwidthGoal {
    BandwidthGoal {
        beta_target_kbps: intent.bound().kbps(),
        source: intent.clone(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntentError {
    #[error("intent is empty after normalization")]
    EmptyIntent,
    #[error("untranslatable intent: {0}")]
    Untranslatable(String),
    #[error("ambiguous intent: conflicting bandwidth mentions {0:?} kbps")]
    Ambiguous(Vec<u64>),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown bandwidth unit '{unit}' at {line}:{column}")]
    UnknownUnit {
        unit: String,
        line: usize,
        column: usize,
    },
    #[error("bandwidth value must be positive at {line}:{column}")]
    NonPositiveValue { line: usize, column: usize },
    #[error("unsupported Nile clause '{clause}' at {line}:{column}; only 'set bandwidth' is accepted")]
    UnsupportedClause {
        clause: String,
        line: usize,
        column: usize,
    },
    #[error("invalid intent field: {0}")]
    InvalidField(String),
    #[error("exemplar corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("translation backend: {0}")]
    Backend(String),
}

impl IntentError {
    /// Short machine-readable kind, used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            IntentError::EmptyIntent => "empty-intent",
            IntentError::Untranslatable(_) => "untranslatable-intent",
            IntentError::Ambiguous(_) => "ambiguous-intent",
            IntentError::Syntax { .. } => "nile-syntax",
            IntentError::UnknownUnit { .. } => "unknown-unit",
            IntentError::NonPositiveValue { .. } => "non-positive-value",
            IntentError::UnsupportedClause { .. } => "unsupported-clause",
            IntentError::InvalidField(_) => "invalid-field",
            IntentError::Corpus { .. } => "corpus",
            IntentError::Backend(_) => "translation-backend",
        }
    }
}
