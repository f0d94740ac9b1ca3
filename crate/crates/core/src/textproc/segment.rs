use serde::{Deserialize, Serialize};

use super::Lexicon;

/// A sentence within a document. Offsets count Unicode scalar values and
/// `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Lexicon {
    /// Rule-based sentence splitting.
    ///
    /// A boundary falls after `.`, `!` or `?` when the next characters are
    /// one or more whitespace characters followed by an uppercase letter or
    /// a digit, unless the text up to the `.` ends with a known abbreviation.
    /// Spans are trimmed of surrounding whitespace; blank spans are dropped.
    pub fn segment_sentences(&self, text: &str) -> Vec<SentenceSpan> {
        let chars: Vec<char> = text.chars().collect();
        let mut spans = Vec::new();
        let mut start = 0;
        for i in 0..chars.len() {
            if !matches!(chars[i], '.' | '!' | '?') {
                continue;
            }
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j == i + 1 || j == chars.len() {
                continue;
            }
            if !(chars[j].is_uppercase() || chars[j].is_ascii_digit()) {
                continue;
            }
            if chars[i] == '.' && self.ends_with_abbreviation(&chars[..=i]) {
                continue;
            }
            push_trimmed(&chars, start, i + 1, &mut spans);
            start = i + 1;
        }
        push_trimmed(&chars, start, chars.len(), &mut spans);
        spans
    }

    fn ends_with_abbreviation(&self, prefix: &[char]) -> bool {
        self.abbreviations().iter().any(|abbr| {
            prefix.ends_with(abbr) && {
                let before = prefix.len() - abbr.len();
                before == 0 || !prefix[before - 1].is_alphanumeric()
            }
        })
    }
}

fn push_trimmed(chars: &[char], mut start: usize, mut end: usize, out: &mut Vec<SentenceSpan>) {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if start < end {
        out.push(SentenceSpan {
            index: out.len(),
            start,
            end,
            text: chars[start..end].iter().collect(),
        });
    }
}
