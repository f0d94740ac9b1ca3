//! Hashed tf-idf vectors over word unigrams and character n-grams.
//!
//! Feature strings are `"w:" + token` for content-word unigrams and
//! `"c:" + gram` for character 3-, 4- and 5-grams of the normalized
//! lowercased text. A feature's id is the FNV-1a 64-bit hash of its UTF-8
//! bytes, masked to the low 18 bits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::tokenize::ngram_text;
use super::{Language, Lexicon};
use crate::hash::fnv1a64;

pub const HASH_BITS: u32 = 18;
pub const DIMENSION: u32 = 1 << HASH_BITS;
pub const NGRAM_SIZES: [usize; 3] = [3, 4, 5];

pub fn feature_id(feature: &str) -> u32 {
    (fnv1a64(feature.as_bytes()) & u64::from(DIMENSION - 1)) as u32
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VectorizerError {
    #[error("cannot fit a vectorizer on an empty corpus")]
    EmptyCorpus,
}

/// Sparse non-negative vector, entries sorted by feature id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermVector {
    entries: Vec<(u32, f64)>,
    norm: f64,
}

impl TermVector {
    /// Builds an L2-normalized vector; zero and negative weights are dropped.
    pub fn normalized(weights: BTreeMap<u32, f64>) -> Self {
        let mut v = Self::raw(weights);
        if v.norm > 0.0 {
            let n = v.norm;
            v.entries.iter_mut().for_each(|(_, w)| *w /= n);
            v.norm = l2(&v.entries);
        }
        v
    }

    /// Builds a vector without normalizing.
    pub fn raw(weights: BTreeMap<u32, f64>) -> Self {
        let entries: Vec<(u32, f64)> = weights.into_iter().filter(|&(_, w)| w > 0.0).collect();
        let norm = l2(&entries);
        Self { entries, norm }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Mean of `vectors`, re-normalized to unit length.
    pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a TermVector>) -> TermVector {
        let mut sum: BTreeMap<u32, f64> = BTreeMap::new();
        let mut count = 0usize;
        for v in vectors {
            count += 1;
            for &(id, w) in &v.entries {
                *sum.entry(id).or_insert(0.0) += w;
            }
        }
        if count == 0 {
            return TermVector::default();
        }
        sum.values_mut().for_each(|w| *w /= count as f64);
        TermVector::normalized(sum)
    }
}

fn l2(entries: &[(u32, f64)]) -> f64 {
    entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
}

/// Cosine similarity clamped to `[0, 1]`; `0.0` when either side is empty.
pub fn cosine(a: &TermVector, b: &TermVector) -> f64 {
    if a.is_empty() || b.is_empty() || a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (a.norm * b.norm)).clamp(0.0, 1.0)
}

/// Fitted idf table plus the lexicon it tokenizes with. Immutable after fit.
#[derive(Debug, Clone)]
pub struct VectorizerModel {
    lexicon: Arc<Lexicon>,
    idf: HashMap<u32, f64>,
    doc_count: usize,
}

impl VectorizerModel {
    /// Fits idf weights: `idf(t) = ln((N + 1) / (df(t) + 1)) + 1`, where
    /// `df` counts documents containing the feature at least once.
    pub fn fit<S: AsRef<str>>(
        documents: &[(S, Language)],
        lexicon: Arc<Lexicon>,
    ) -> Result<Self, VectorizerError> {
        if documents.is_empty() {
            return Err(VectorizerError::EmptyCorpus);
        }
        let mut df: HashMap<u32, usize> = HashMap::new();
        for (text, lang) in documents {
            let present: HashSet<u32> = features(&lexicon, text.as_ref(), *lang).into_keys().collect();
            for id in present {
                *df.entry(id).or_insert(0) += 1;
            }
        }
        let n = documents.len();
        let idf = df
            .into_iter()
            .map(|(id, d)| (id, idf_weight(n, d)))
            .collect();
        Ok(Self { lexicon, idf, doc_count: n })
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Idf of a feature id; `1.0` for features never seen during fitting.
    pub fn idf(&self, id: u32) -> f64 {
        self.idf.get(&id).copied().unwrap_or(1.0)
    }

    pub fn idf_len(&self) -> usize {
        self.idf.len()
    }

    /// `tf = 1 + ln(count)`, weight `tf * idf`, L2-normalized.
    pub fn embed(&self, text: &str, lang: Language) -> TermVector {
        let weights = features(&self.lexicon, text, lang)
            .into_iter()
            .map(|(id, count)| (id, (1.0 + (count as f64).ln()) * self.idf(id)))
            .collect();
        TermVector::normalized(weights)
    }
}

pub(crate) fn idf_weight(doc_count: usize, df: usize) -> f64 {
    ((doc_count as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
}

/// Feature id -> occurrence count.
fn features(lexicon: &Lexicon, text: &str, lang: Language) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    let mut buf = String::new();
    for tok in lexicon.tokenize(text, lang) {
        buf.clear();
        buf.push_str("w:");
        buf.push_str(&tok);
        *counts.entry(feature_id(&buf)).or_insert(0) += 1;
    }
    let chars = ngram_text(text);
    for n in NGRAM_SIZES {
        for gram in chars.windows(n) {
            buf.clear();
            buf.push_str("c:");
            buf.extend(gram);
            *counts.entry(feature_id(&buf)).or_insert(0) += 1;
        }
    }
    counts
}
