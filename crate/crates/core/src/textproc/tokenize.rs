use super::{Language, Lexicon};

/// A lowercased word token and its character offsets in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    pub start: usize,
    pub end: usize,
}

/// Maximal runs of alphanumeric characters, lowercased, with offsets.
/// No stopword filtering.
pub fn word_runs(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut run_start = 0;
    let mut pos = 0;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                run_start = pos;
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            out.push(Token { term: std::mem::take(&mut current), start: run_start, end: pos });
        }
        pos += 1;
    }
    if !current.is_empty() {
        out.push(Token { term: current, start: run_start, end: pos });
    }
    out
}

impl Lexicon {
    /// Content tokens: alphanumeric runs, lowercased, minus stopwords of `lang`.
    pub fn tokenize(&self, text: &str, lang: Language) -> Vec<String> {
        self.tokens_with_offsets(text, lang)
            .into_iter()
            .map(|t| t.term)
            .collect()
    }

    pub fn tokens_with_offsets(&self, text: &str, lang: Language) -> Vec<Token> {
        let stop = self.stopwords(lang);
        word_runs(text)
            .into_iter()
            .filter(|t| !stop.contains(&t.term))
            .collect()
    }
}

/// Lowercased text with every non-alphanumeric run collapsed to one space
/// and a single space of padding at both ends; empty when `text` holds no
/// alphanumeric character. This is the string character n-grams are taken
/// from.
pub(crate) fn ngram_text(text: &str) -> Vec<char> {
    let mut out = vec![' '];
    for c in text.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if out.last() != Some(&' ') {
            out.push(' ');
        }
    }
    if out.len() == 1 {
        return Vec::new();
    }
    if out.last() != Some(&' ') {
        out.push(' ');
    }
    out
}
