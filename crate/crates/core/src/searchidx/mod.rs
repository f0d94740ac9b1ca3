//! In-memory inverted index with field-weighted BM25.
//!
//! Each of the title, abstract and full-text fields has its own postings,
//! document frequencies and average length. A document's score is
//!
//! ```text
//! score(d) = sum over fields f of boost_f * sum over query terms t of
//!            idf_f(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len_f(d) / avglen_f))
//! idf_f(t) = ln(1 + (N - df_f(t) + 0.5) / (df_f(t) + 0.5))
//! ```
//!
//! with `k1 = 1.2`, `b = 0.75` and boosts title 2.0, abstract 1.5, full text
//! 1.0. Query terms are deduplicated.

mod snapshot;
mod snippet;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Publication;
use crate::hash::Fnv1a64;
use crate::summarize::{Summary, SummaryKind};
use crate::svident::SentenceVariableLink;
use crate::textproc::{Language, Lexicon, SentenceSpan};

pub use snapshot::SnapshotError;
pub use snippet::{snippet, MARK_CLOSE, MARK_OPEN, SNIPPET_WINDOW};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
pub const DEFAULT_PAGE_SIZE: usize = 10;
pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Abstract,
    FullText,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Title, Field::Abstract, Field::FullText];

    pub fn boost(self) -> f64 {
        match self {
            Field::Title => 2.0,
            Field::Abstract => 1.5,
            Field::FullText => 1.0,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Analyzed token streams of the searchable fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldTokens {
    pub title: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Vec<String>,
    pub full_text: Vec<String>,
}

impl FieldTokens {
    pub fn get(&self, field: Field) -> &[String] {
        match field {
            Field::Title => &self.title,
            Field::Abstract => &self.abstract_text,
            Field::FullText => &self.full_text,
        }
    }
}

/// Everything stored for one publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDocument {
    pub publication_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub year: i32,
    pub language: Language,
    pub dataset_ids: Vec<String>,
    pub full_text: String,
    pub sentences: Vec<SentenceSpan>,
    pub summaries: Vec<Summary>,
    pub links: Vec<SentenceVariableLink>,
    pub variable_count: usize,
    pub content_hash: String,
    pub fields: FieldTokens,
}

impl IndexedDocument {
    /// Fields are analyzed with the publication's own language.
    pub fn new(
        publication: &Publication,
        summaries: Vec<Summary>,
        links: Vec<SentenceVariableLink>,
        lexicon: &Lexicon,
    ) -> Self {
        let lang = publication.language;
        let variable_count = links.iter().map(|l| l.variable_id.as_str()).collect::<BTreeSet<_>>().len();
        Self {
            publication_id: publication.id.clone(),
            title: publication.title.clone(),
            abstract_text: publication.abstract_text.clone(),
            authors: publication.authors.clone(),
            year: publication.year,
            language: lang,
            dataset_ids: publication.dataset_ids.clone(),
            full_text: publication.full_text.clone(),
            sentences: publication.sentences.clone(),
            summaries,
            links,
            variable_count,
            content_hash: publication.content_hash(),
            fields: FieldTokens {
                title: lexicon.tokenize(&publication.title, lang),
                abstract_text: lexicon.tokenize(&publication.abstract_text, lang),
                full_text: lexicon.tokenize(&publication.full_text, lang),
            },
        }
    }

    /// Summary shown with search hits: abstractive, then extractive, then
    /// the extractive fallback.
    pub fn display_summary(&self) -> Option<&Summary> {
        [SummaryKind::Abstractive, SummaryKind::Extractive, SummaryKind::ExtractiveFallback]
            .into_iter()
            .find_map(|k| self.summaries.iter().find(|s| s.kind == k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMode {
    #[default]
    Relevance,
    Recency,
    VariableCount,
}

impl std::str::FromStr for SortMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relevance" => Ok(SortMode::Relevance),
            "recency" => Ok(SortMode::Recency),
            "variable_count" => Ok(SortMode::VariableCount),
            other => Err(format!("unknown sort mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    pub language: Option<Language>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
}

impl Filters {
    pub fn accepts(&self, doc: &IndexedDocument) -> bool {
        self.language.is_none_or(|l| l == doc.language)
            && self.year_min.is_none_or(|y| doc.year >= y)
            && self.year_max.is_none_or(|y| doc.year <= y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    pub filters: Filters,
    pub sort: SortMode,
    pub page: usize,
    pub page_size: usize,
}

impl Default for Query {
    fn default() -> Self {
        Self { text: String::new(), filters: Filters::default(), sort: SortMode::Relevance, page: 0, page_size: DEFAULT_PAGE_SIZE }
    }
}

impl Query {
    pub fn new(text: impl Into<String>) -> Self {
        Self { text: text.into(), ..Self::default() }
    }

    pub fn sorted(mut self, sort: SortMode) -> Self {
        self.sort = sort;
        self
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if let (Some(lo), Some(hi)) = (self.filters.year_min, self.filters.year_max) {
            if lo > hi {
                return Err(QueryError::InvalidQuery(format!("year_min {lo} > year_max {hi}")));
            }
        }
        if self.page_size == 0 || self.page_size > MAX_PAGE_SIZE {
            return Err(QueryError::InvalidQuery(format!("page_size must be in 1..={MAX_PAGE_SIZE}")));
        }
        Ok(())
    }

    /// Query terms: English-analyzed, deduplicated.
    pub fn terms(&self, lexicon: &Lexicon) -> BTreeSet<String> {
        lexicon.tokenize(&self.text, Language::En).into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitSummary {
    pub kind: SummaryKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub publication_id: String,
    pub score: f64,
    pub snippet: String,
    pub variable_count: usize,
    pub year: i32,
    pub title: String,
    pub summary: Option<HitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResults {
    pub total: usize,
    pub hits: Vec<SearchHit>,
}

/// term -> publication id -> term frequency
type Postings = BTreeMap<String, BTreeMap<String, u32>>;

#[derive(Debug, Clone)]
pub struct SearchIndex {
    docs: BTreeMap<String, IndexedDocument>,
    postings: [Postings; 3],
    total_len: [u64; 3],
    lexicon: Arc<Lexicon>,
}

impl PartialEq for SearchIndex {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs && self.postings == other.postings && self.total_len == other.total_len
    }
}

impl SearchIndex {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        Self { docs: BTreeMap::new(), postings: Default::default(), total_len: [0; 3], lexicon }
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, publication_id: &str) -> Option<&IndexedDocument> {
        self.docs.get(publication_id)
    }

    pub fn documents(&self) -> impl Iterator<Item = &IndexedDocument> {
        self.docs.values()
    }

    pub fn document_frequency(&self, field: Field, term: &str) -> usize {
        self.postings[field.slot()].get(term).map_or(0, BTreeMap::len)
    }

    pub fn average_length(&self, field: Field) -> f64 {
        if self.docs.is_empty() {
            0.0
        } else {
            self.total_len[field.slot()] as f64 / self.docs.len() as f64
        }
    }

    /// Inserts or replaces the document with the same publication id.
    pub fn upsert(&mut self, doc: IndexedDocument) {
        self.remove(&doc.publication_id);
        for field in Field::ALL {
            let tokens = doc.fields.get(field);
            self.total_len[field.slot()] += tokens.len() as u64;
            for t in tokens {
                *self.postings[field.slot()]
                    .entry(t.clone())
                    .or_default()
                    .entry(doc.publication_id.clone())
                    .or_insert(0) += 1;
            }
        }
        self.docs.insert(doc.publication_id.clone(), doc);
    }

    pub fn remove(&mut self, publication_id: &str) -> Option<IndexedDocument> {
        let old = self.docs.remove(publication_id)?;
        for field in Field::ALL {
            let tokens = old.fields.get(field);
            self.total_len[field.slot()] -= tokens.len() as u64;
            let postings = &mut self.postings[field.slot()];
            for t in tokens.iter().collect::<BTreeSet<_>>() {
                if let Some(list) = postings.get_mut(t) {
                    list.remove(publication_id);
                    if list.is_empty() {
                        postings.remove(t);
                    }
                }
            }
        }
        Some(old)
    }

    /// BM25 score of one document for the given terms.
    pub fn score(&self, doc: &IndexedDocument, terms: &BTreeSet<String>) -> f64 {
        let n = self.docs.len() as f64;
        let mut score = 0.0;
        for field in Field::ALL {
            let avg = self.average_length(field);
            if avg == 0.0 {
                continue;
            }
            let len = doc.fields.get(field).len() as f64;
            let postings = &self.postings[field.slot()];
            let mut field_score = 0.0;
            for t in terms {
                let Some(list) = postings.get(t) else { continue };
                let Some(&tf) = list.get(&doc.publication_id) else { continue };
                let df = list.len() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                let tf = f64::from(tf);
                field_score += idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * len / avg));
            }
            score += field.boost() * field_score;
        }
        score
    }

    /// Filtered, scored and sorted hits, before paging: (id, score).
    fn ranked(&self, query: &Query) -> Vec<(&IndexedDocument, f64)> {
        let terms = query.terms(&self.lexicon);
        let mut ranked: Vec<(&IndexedDocument, f64)> = if terms.is_empty() {
            self.docs.values().filter(|d| query.filters.accepts(d)).map(|d| (d, 0.0)).collect()
        } else {
            let mut matching = BTreeSet::new();
            for postings in &self.postings {
                for t in &terms {
                    if let Some(list) = postings.get(t) {
                        matching.extend(list.keys().map(String::as_str));
                    }
                }
            }
            matching
                .into_iter()
                .filter_map(|id| self.docs.get(id))
                .filter(|d| query.filters.accepts(d))
                .map(|d| (d, self.score(d, &terms)))
                .collect()
        };
        ranked.sort_by(|a, b| compare_hits(query.sort, a, b));
        ranked
    }

    pub fn search(&self, query: &Query) -> Result<SearchResults, QueryError> {
        query.validate()?;
        let terms = query.terms(&self.lexicon);
        let ranked = self.ranked(query);
        let total = ranked.len();
        let hits = ranked
            .into_iter()
            .skip(query.page.saturating_mul(query.page_size))
            .take(query.page_size)
            .map(|(d, score)| SearchHit {
                publication_id: d.publication_id.clone(),
                score,
                snippet: snippet(&d.full_text, &terms, d.language, &self.lexicon, SNIPPET_WINDOW),
                variable_count: d.variable_count,
                year: d.year,
                title: d.title.clone(),
                summary: d.display_summary().map(|s| HitSummary { kind: s.kind, text: s.text.clone() }),
            })
            .collect();
        Ok(SearchResults { total, hits })
    }

    /// FNV-1a over the canonical JSON of stored documents and postings.
    pub fn state_hash(&self) -> String {
        let mut h = Fnv1a64::new();
        snapshot::write_canonical(self, &mut h).expect("hashing never fails");
        h.finish_hex()
    }
}

fn compare_hits(sort: SortMode, a: &(&IndexedDocument, f64), b: &(&IndexedDocument, f64)) -> Ordering {
    let by_score = b.1.total_cmp(&a.1);
    let primary = match sort {
        SortMode::Relevance => by_score,
        SortMode::Recency => b.0.year.cmp(&a.0.year).then(by_score),
        SortMode::VariableCount => b.0.variable_count.cmp(&a.0.variable_count).then(by_score),
    };
    primary.then_with(|| a.0.publication_id.cmp(&b.0.publication_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svident::LinkMethod;
    use crate::textproc::segment_sentences;

    fn publication(id: &str, title: &str, text: &str, year: i32) -> Publication {
        Publication {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            authors: vec![],
            year,
            language: Language::En,
            dataset_ids: vec![],
            full_text: text.into(),
            sentences: segment_sentences(text),
        }
    }

    fn links(id: &str, n: usize) -> Vec<SentenceVariableLink> {
        (0..n)
            .map(|i| SentenceVariableLink {
                publication_id: id.into(),
                sentence_index: 0,
                variable_id: format!("v{i}"),
                similarity: 0.9,
                classifier_score: 0.5,
                method: LinkMethod::Ensemble,
            })
            .collect()
    }

    fn doc(id: &str, title: &str, text: &str, year: i32, nvars: usize) -> IndexedDocument {
        IndexedDocument::new(&publication(id, title, text, year), vec![], links(id, nvars), Lexicon::builtin())
    }

    fn index(docs: Vec<IndexedDocument>) -> SearchIndex {
        let mut idx = SearchIndex::new(Lexicon::builtin_shared());
        for d in docs {
            idx.upsert(d);
        }
        idx
    }

    #[test]
    fn reference_bm25_value() {
        // Same full-text length, "trust" only in doc1.
        let idx = index(vec![doc("d1", "", "trust alpha", 2000, 0), doc("d2", "", "beta gamma", 2000, 0)]);
        let r = idx.search(&Query::new("trust")).unwrap();
        assert_eq!(r.total, 1);
        assert_eq!(r.hits[0].publication_id, "d1");
        assert!((r.hits[0].score - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn upsert_and_replace() {
        let mut idx = index(vec![doc("d1", "Unique heading", "body", 2000, 0)]);
        assert_eq!(idx.search(&Query::new("unique")).unwrap().total, 1);
        let h = idx.state_hash();
        idx.upsert(doc("d1", "Unique heading", "body", 2000, 0));
        assert_eq!(idx.state_hash(), h);
        idx.upsert(doc("d1", "Other heading", "body", 2000, 0));
        assert_eq!(idx.search(&Query::new("unique")).unwrap().total, 0);
        assert_ne!(idx.state_hash(), h);
        idx.upsert(doc("d1", "Unique heading", "body", 2000, 0));
        assert_eq!(idx.state_hash(), h);
        assert_eq!(idx.len(), 1);
    }

    #[test]
    fn empty_query_browses_filtered_set() {
        let idx = index(vec![doc("a", "", "x", 2001, 0), doc("b", "", "y", 2005, 0), doc("c", "", "z", 1999, 0)]);
        let mut q = Query::new("").sorted(SortMode::Recency);
        q.filters.year_min = Some(2000);
        let r = idx.search(&q).unwrap();
        assert_eq!(r.total, 2);
        assert_eq!(r.hits.iter().map(|h| h.publication_id.as_str()).collect::<Vec<_>>(), ["b", "a"]);
        assert!(r.hits.iter().all(|h| h.score == 0.0));
        // Stopword-only queries behave like empty ones.
        assert_eq!(idx.search(&Query::new("the of")).unwrap().total, 3);
    }

    #[test]
    fn variable_count_sort_ignores_score() {
        let idx = index(vec![
            doc("a", "trust trust trust", "trust", 2000, 0),
            doc("b", "", "trust", 2000, 5),
            doc("c", "trust", "trust", 2000, 2),
        ]);
        let r = idx.search(&Query::new("trust").sorted(SortMode::VariableCount)).unwrap();
        let counts: Vec<usize> = r.hits.iter().map(|h| h.variable_count).collect();
        assert_eq!(counts, [5, 2, 0]);
    }

    #[test]
    fn invalid_year_range() {
        let idx = index(vec![]);
        let mut q = Query::new("x");
        q.filters.year_min = Some(2010);
        q.filters.year_max = Some(2000);
        assert!(matches!(idx.search(&q), Err(QueryError::InvalidQuery(_))));
        let q = Query { page_size: 0, ..Query::new("x") };
        assert!(idx.search(&q).is_err());
    }

    #[test]
    fn variable_count_is_distinct() {
        let p = publication("p", "", "x", 2000);
        let mut l = links("p", 2);
        l.push(l[0].clone());
        let d = IndexedDocument::new(&p, vec![], l, Lexicon::builtin());
        assert_eq!(d.variable_count, 2);
    }

    #[test]
    fn empty_index_hash_is_stable() {
        let a = index(vec![]);
        assert_eq!(a.state_hash(), a.state_hash());
        assert_eq!(a.state_hash(), index(vec![]).state_hash());
        let b = index(vec![doc("a", "", "x", 2000, 0)]);
        assert_ne!(a.state_hash(), b.state_hash());
    }

    #[test]
    fn removal_restores_statistics() {
        let mut idx = index(vec![doc("a", "t", "one two", 2000, 0)]);
        let before = idx.clone();
        idx.upsert(doc("b", "t", "three four five", 2000, 0));
        idx.remove("b");
        assert_eq!(idx, before);
        assert_eq!(idx.state_hash(), before.state_hash());
    }
}
