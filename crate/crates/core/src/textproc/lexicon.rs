use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::{Arc, LazyLock};

use super::{Language, LanguageTag, DETECT_MIN_MARGIN, DETECT_MIN_RATIO};

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const STOPWORDS_DE: &str = include_str!("../../data/stopwords_de.txt");
const ABBREVIATIONS_EN: &str = include_str!("../../data/abbreviations_en.txt");
const ABBREVIATIONS_DE: &str = include_str!("../../data/abbreviations_de.txt");

/// File names looked up by [`Lexicon::from_dir`].
pub const LEXICON_FILES: [&str; 4] = [
    "stopwords_en.txt",
    "stopwords_de.txt",
    "abbreviations_en.txt",
    "abbreviations_de.txt",
];

static BUILTIN: LazyLock<Arc<Lexicon>> = LazyLock::new(|| {
    Arc::new(Lexicon::from_sources(STOPWORDS_EN, STOPWORDS_DE, ABBREVIATIONS_EN, ABBREVIATIONS_DE))
});

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Stopword and abbreviation lists.
///
/// List files are UTF-8, one entry per line; blank lines and lines starting
/// with `#` are ignored. Stopwords are stored lowercased, abbreviations are
/// matched case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    stopwords_en: HashSet<String>,
    stopwords_de: HashSet<String>,
    /// Both languages' abbreviations as char sequences, longest first.
    abbreviations: Vec<Vec<char>>,
}

fn entries(src: &str) -> impl Iterator<Item = &str> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicon {
    /// The lexicon compiled into the binary from `data/`.
    pub fn builtin() -> &'static Lexicon {
        &BUILTIN
    }

    /// Shared handle to the built-in lexicon.
    pub fn builtin_shared() -> Arc<Lexicon> {
        Arc::clone(&BUILTIN)
    }

    pub fn from_sources(stop_en: &str, stop_de: &str, abbr_en: &str, abbr_de: &str) -> Self {
        let stopwords = |s: &str| entries(s).map(str::to_lowercase).collect::<HashSet<_>>();
        let mut abbreviations: Vec<Vec<char>> = entries(abbr_en)
            .chain(entries(abbr_de))
            .map(|a| a.chars().collect())
            .collect();
        abbreviations.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        abbreviations.dedup();
        Self {
            stopwords_en: stopwords(stop_en),
            stopwords_de: stopwords(stop_de),
            abbreviations,
        }
    }

    /// Loads the four list files from `dir` (see [`LEXICON_FILES`]).
    pub fn from_dir(dir: &Path) -> Result<Self, LexiconError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| LexiconError::Io { path, source })
        };
        let [a, b, c, d] = LEXICON_FILES;
        Ok(Self::from_sources(&read(a)?, &read(b)?, &read(c)?, &read(d)?))
    }

    pub fn stopwords(&self, lang: Language) -> &HashSet<String> {
        match lang {
            Language::En => &self.stopwords_en,
            Language::De => &self.stopwords_de,
        }
    }

    pub fn is_stopword(&self, term: &str, lang: Language) -> bool {
        self.stopwords(lang).contains(term)
    }

    pub(crate) fn abbreviations(&self) -> &[Vec<char>] {
        &self.abbreviations
    }

    /// Stopword hit-ratio detection over whitespace tokens.
    ///
    /// Tokens are lowercased and stripped of surrounding punctuation. The
    /// language with the higher ratio wins when that ratio is at least
    /// [`DETECT_MIN_RATIO`] and leads by at least [`DETECT_MIN_MARGIN`];
    /// otherwise the result is English, not confident.
    pub fn detect_language(&self, text: &str) -> LanguageTag {
        let mut total = 0usize;
        let mut en = 0usize;
        let mut de = 0usize;
        for raw in text.split_whitespace() {
            let tok = raw
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase();
            if tok.is_empty() {
                continue;
            }
            total += 1;
            en += usize::from(self.stopwords_en.contains(&tok));
            de += usize::from(self.stopwords_de.contains(&tok));
        }
        let fallback = LanguageTag { value: Language::En, confident: false };
        if total == 0 {
            return fallback;
        }
        let en_ratio = en as f64 / total as f64;
        let de_ratio = de as f64 / total as f64;
        let (value, win, lose) = if de_ratio > en_ratio {
            (Language::De, de_ratio, en_ratio)
        } else {
            (Language::En, en_ratio, de_ratio)
        };
        if win >= DETECT_MIN_RATIO && win - lose >= DETECT_MIN_MARGIN {
            LanguageTag { value, confident: true }
        } else {
            fallback
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_english() {
        let tag = Lexicon::builtin().detect_language("the of and is to in");
        assert_eq!(tag, LanguageTag { value: Language::En, confident: true });
    }

    #[test]
    fn detects_german() {
        let tag = Lexicon::builtin().detect_language("der die und ist nicht das");
        assert_eq!(tag, LanguageTag { value: Language::De, confident: true });
    }

    #[test]
    fn unknown_text_is_unconfident_english() {
        for text in ["xyzzy qwerty 12345", "", "   ", "!!! ???"] {
            let tag = Lexicon::builtin().detect_language(text);
            assert_eq!(tag, LanguageTag { value: Language::En, confident: false }, "{text:?}");
        }
    }

    #[test]
    fn builtin_lists_are_reasonably_sized() {
        let lex = Lexicon::builtin();
        assert!(lex.stopwords(Language::En).len() >= 140);
        assert!(lex.stopwords(Language::De).len() >= 140);
        assert!(lex.is_stopword("die", Language::De));
        assert!(!lex.is_stopword("die", Language::En));
    }

    #[test]
    fn loads_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("stopwords_en.txt"), "# c\nfoo\n\nBar\n").unwrap();
        std::fs::write(dir.path().join("stopwords_de.txt"), "baz\n").unwrap();
        std::fs::write(dir.path().join("abbreviations_en.txt"), "Xy.\n").unwrap();
        std::fs::write(dir.path().join("abbreviations_de.txt"), "").unwrap();
        let lex = Lexicon::from_dir(dir.path()).unwrap();
        assert!(lex.is_stopword("bar", Language::En));
        assert!(!lex.is_stopword("the", Language::En));
        assert_eq!(lex.segment_sentences("See Xy. Then more. Done.").len(), 2);

        std::fs::remove_file(dir.path().join("stopwords_de.txt")).unwrap();
        assert!(matches!(Lexicon::from_dir(dir.path()), Err(LexiconError::Io { .. })));
    }
}
