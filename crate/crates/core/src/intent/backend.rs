//! Pluggable translation service. The built-in backend is the retrieval
//! translator; an external client only has to map text to Nile text.

use super::{parse_nile, translate, ExemplarCorpus, IntentError, NaturalIntent, NileIntent};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationResponse {
    pub nile_text: String,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BackendError(pub String);

pub trait TranslationBackend {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResponse, BackendError>;
}

pub struct RetrievalBackend {
    corpus: ExemplarCorpus,
}

impl RetrievalBackend {
    pub fn new(corpus: ExemplarCorpus) -> Self {
        Self { corpus }
    }
}

impl TranslationBackend for RetrievalBackend {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResponse, BackendError> {
        let intent = NaturalIntent::new("backend", request.text.clone()).map_err(|e| BackendError(e.to_string()))?;
        translate(&intent, &self.corpus)
            .map(|n| TranslationResponse { nile_text: n.render() })
            .map_err(|e| BackendError(e.to_string()))
    }
}

/// Translates through any backend. Transport failures and unparseable
/// responses both come back as `IntentError::Backend`.
pub fn translate_via(backend: &dyn TranslationBackend, intent: &NaturalIntent) -> Result<NileIntent, IntentError> {
    let response = backend
        .translate(&TranslationRequest { text: intent.text().to_string() })
        .map_err(|e| IntentError::Backend(e.0))?;
    parse_nile(&response.nile_text).map_err(|e| IntentError::Backend(format!("response is not valid Nile: {e}")))
}
