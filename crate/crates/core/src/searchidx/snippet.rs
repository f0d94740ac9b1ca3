use std::collections::BTreeSet;

use crate::textproc::{Language, Lexicon, Token};

pub const SNIPPET_WINDOW: usize = 160;
pub const MARK_OPEN: char = '«';
pub const MARK_CLOSE: char = '»';

/// Window of `window` characters of `text` that contains the most distinct
/// query terms (earliest window on ties), with every whole term occurrence
/// inside it wrapped in `«` and `»`. Without any match, the unmarked prefix.
pub fn snippet(
    text: &str,
    query_terms: &BTreeSet<String>,
    lang: Language,
    lexicon: &Lexicon,
    window: usize,
) -> String {
    let chars: Vec<char> = text.chars().collect();
    let hits: Vec<Token> = lexicon
        .tokens_with_offsets(text, lang)
        .into_iter()
        .filter(|t| query_terms.contains(&t.term))
        .collect();
    let start = best_window_start(&hits, window);
    render(&chars, &hits, start, window)
}

/// Smallest start whose window holds the maximum number of distinct terms.
///
/// Moving an optimal start one step left only loses occurrences ending at
/// the right edge, so the earliest optimum is either 0 or `end - window`
/// for some occurrence.
pub(crate) fn best_window_start(hits: &[Token], window: usize) -> usize {
    let mut candidates: Vec<usize> = hits
        .iter()
        .filter(|t| t.end >= window)
        .map(|t| t.end - window)
        .collect();
    candidates.push(0);
    candidates.sort_unstable();
    candidates.dedup();
    let mut best = (0usize, 0usize);
    for s in candidates {
        let n = distinct_in_window(hits, s, window);
        if n > best.1 {
            best = (s, n);
        }
    }
    best.0
}

pub(crate) fn distinct_in_window(hits: &[Token], start: usize, window: usize) -> usize {
    hits.iter()
        .filter(|t| t.start >= start && t.end <= start + window)
        .map(|t| t.term.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

fn render(chars: &[char], hits: &[Token], start: usize, window: usize) -> String {
    let end = (start + window).min(chars.len());
    let start = start.min(end);
    let mut out = String::with_capacity((end - start) * 2);
    let mut inside = hits.iter().filter(|t| t.start >= start && t.end <= start + window).peekable();
    let mut pos = start;
    while pos < end {
        match inside.peek() {
            Some(t) if t.start == pos => {
                out.push(MARK_OPEN);
                out.extend(&chars[t.start..t.end]);
                out.push(MARK_CLOSE);
                pos = t.end;
                inside.next();
            }
            _ => {
                out.push(chars[pos]);
                pos += 1;
            }
        }
    }
    out
}
