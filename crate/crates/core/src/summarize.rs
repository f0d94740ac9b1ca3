//! Extreme (one-sentence) extractive summaries and abstractive summaries
//! delegated to an external backend.
//!
//! Backend wire protocol, HTTP POST with a JSON body:
//!
//! ```text
//! request:  {"text": str, "source_lang": "en"|"de", "target_lang": "en"|"de", "max_tokens": int}
//! response: 200 {"summary": str}; any other status is an error
//! ```
//!
//! The backend receives the publication abstract (the full text only when
//! the abstract is empty).

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Publication;
use crate::svident::Embedder;
use crate::textproc::{cosine, Language, TermVector};

/// Appended to fallback summaries cut at `max_summary_tokens`.
pub const TRUNCATION_MARKER: &str = "…";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    Extractive,
    Abstractive,
    ExtractiveFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub publication_id: String,
    pub kind: SummaryKind,
    pub language: Language,
    pub text: String,
    /// Set for every kind except `abstractive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_sentence_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint_url: Option<String>,
    pub timeout_ms: u64,
    pub max_summary_tokens: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self { endpoint_url: None, timeout_ms: 5000, max_summary_tokens: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub text: String,
    pub source_lang: Language,
    pub target_lang: Language,
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend returned status {0}")]
    Status(u16),
    #[error("backend timed out")]
    Timeout,
    #[error("backend transport error: {0}")]
    Transport(String),
    #[error("backend returned an invalid response: {0}")]
    InvalidResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummaryError {
    #[error("publication {0:?} has no sentences")]
    NoSentences(String),
    #[error("publication {0:?} has neither abstract nor full text")]
    EmptyDocument(String),
    #[error("no backend available to summarize {from} into {to}")]
    CrossLingualUnavailable { from: Language, to: Language },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Anything that turns a request into summary text.
pub trait SummaryBackend: Send + Sync {
    fn summarize(&self, request: &BackendRequest) -> Result<String, BackendError>;
}

/// Blocking HTTP client for the backend protocol.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, timeout_ms: u64) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(timeout_ms.max(1)))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self { endpoint: endpoint.into(), client })
    }

    /// `None` when no endpoint is configured.
    pub fn from_config(config: &BackendConfig) -> Result<Option<Self>, BackendError> {
        match config.endpoint_url.as_deref().map(str::trim) {
            None | Some("") => Ok(None),
            Some(url) => Self::new(url, config.timeout_ms).map(Some),
        }
    }
}

impl SummaryBackend for HttpBackend {
    fn summarize(&self, request: &BackendRequest) -> Result<String, BackendError> {
        let resp = self.client.post(&self.endpoint).json(request).send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if status != reqwest::StatusCode::OK {
            return Err(BackendError::Status(status.as_u16()));
        }
        let body: BackendResponse = resp.json().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::InvalidResponse(e.to_string())
            }
        })?;
        Ok(body.summary)
    }
}

/// Index of the full-text sentence closest to the centroid of all sentence
/// vectors (abstract sentences plus full-text sentences). Ties go to the
/// smallest index.
pub fn salient_sentence(publication: &Publication, embedder: &dyn Embedder) -> Option<usize> {
    if publication.sentences.is_empty() {
        return None;
    }
    let lang = publication.language;
    let body: Vec<TermVector> = publication.sentences.iter().map(|s| embedder.embed(&s.text, lang)).collect();
    let abstract_vecs: Vec<TermVector> = embedder
        .lexicon()
        .segment_sentences(&publication.abstract_text)
        .iter()
        .map(|s| embedder.embed(&s.text, lang))
        .collect();
    let centroid = TermVector::centroid(abstract_vecs.iter().chain(&body));
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (i, v) in body.iter().enumerate() {
        let sim = cosine(v, &centroid);
        if sim > best_sim {
            best = i;
            best_sim = sim;
        }
    }
    Some(best)
}

pub fn extractive_summary(publication: &Publication, embedder: &dyn Embedder) -> Result<Summary, SummaryError> {
    let index = salient_sentence(publication, embedder).ok_or_else(|| SummaryError::NoSentences(publication.id.clone()))?;
    Ok(Summary {
        publication_id: publication.id.clone(),
        kind: SummaryKind::Extractive,
        language: publication.language,
        text: publication.sentences[index].text.clone(),
        source_sentence_index: Some(index),
    })
}

/// First `max_tokens` whitespace-separated words, with [`TRUNCATION_MARKER`]
/// when anything was cut.
pub fn truncate_words(text: &str, max_tokens: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= max_tokens {
        return text.to_owned();
    }
    let mut out = words[..max_tokens].join(" ");
    out.push_str(TRUNCATION_MARKER);
    out
}

/// Asks the backend for a summary in `target_lang`.
///
/// Without a backend, or when it fails, a same-language request falls back
/// to the truncated extractive summary. A cross-language request cannot fall
/// back: it fails with `CrossLingualUnavailable` when no backend exists and
/// with the backend's error otherwise.
pub fn abstractive_summary(
    publication: &Publication,
    target_lang: Language,
    backend: Option<&dyn SummaryBackend>,
    config: &BackendConfig,
    embedder: &dyn Embedder,
) -> Result<Summary, SummaryError> {
    let source = if publication.abstract_text.trim().is_empty() {
        &publication.full_text
    } else {
        &publication.abstract_text
    };
    if source.trim().is_empty() {
        return Err(SummaryError::EmptyDocument(publication.id.clone()));
    }

    let backend_error = match backend {
        None => None,
        Some(b) => {
            let request = BackendRequest {
                text: source.clone(),
                source_lang: publication.language,
                target_lang,
                max_tokens: config.max_summary_tokens,
            };
            match b.summarize(&request) {
                Ok(text) if !text.trim().is_empty() => {
                    return Ok(Summary {
                        publication_id: publication.id.clone(),
                        kind: SummaryKind::Abstractive,
                        language: target_lang,
                        text,
                        source_sentence_index: None,
                    });
                }
                Ok(_) => Some(BackendError::InvalidResponse("empty summary".into())),
                Err(e) => {
                    log::warn!("summary backend failed for {}: {e}", publication.id);
                    Some(e)
                }
            }
        }
    };

    if target_lang != publication.language {
        return Err(match backend_error {
            Some(e) => SummaryError::Backend(e),
            None => SummaryError::CrossLingualUnavailable { from: publication.language, to: target_lang },
        });
    }
    match extractive_summary(publication, embedder) {
        Ok(s) => Ok(Summary {
            kind: SummaryKind::ExtractiveFallback,
            text: truncate_words(&s.text, config.max_summary_tokens),
            ..s
        }),
        Err(e) => Err(backend_error.map(SummaryError::Backend).unwrap_or(e)),
    }
}
