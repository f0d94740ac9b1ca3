//! Language detection, sentence segmentation, tokenization and lexical
//! vectorization shared by every downstream stage.

mod lexicon;
mod segment;
mod tokenize;
mod vectorize;

use serde::{Deserialize, Serialize};

pub use lexicon::{Lexicon, LexiconError};
pub use segment::SentenceSpan;
pub use tokenize::{word_runs, Token};
pub use vectorize::{cosine, feature_id, TermVector, VectorizerError, VectorizerModel, DIMENSION};

/// Supported document languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    En,
    De,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            other => Err(format!("unsupported language {other:?} (expected en or de)")),
        }
    }
}

/// Result of language detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTag {
    pub value: Language,
    pub confident: bool,
}

/// Minimum stopword hit ratio for a confident detection.
pub const DETECT_MIN_RATIO: f64 = 0.05;
/// Minimum lead of the winning language's ratio over the other.
pub const DETECT_MIN_MARGIN: f64 = 0.01;

/// Detects English vs German with the built-in lexicon.
pub fn detect_language(text: &str) -> LanguageTag {
    Lexicon::builtin().detect_language(text)
}

/// Splits `text` into sentence spans with the built-in abbreviation lists.
pub fn segment_sentences(text: &str) -> Vec<SentenceSpan> {
    Lexicon::builtin().segment_sentences(text)
}

/// Content tokens of `text` with the built-in stopword lists.
pub fn tokenize(text: &str, lang: Language) -> Vec<String> {
    Lexicon::builtin().tokenize(text, lang)
}
