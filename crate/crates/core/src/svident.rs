//! Variable-sentence detection and variable matching.
//!
//! A sentence is scored twice: by a feature classifier that looks for
//! measurement vocabulary, and by a retriever that compares the sentence
//! vector against the vectors of candidate variables. Candidates are the
//! variables of the datasets the publication is linked to. The sentence is
//! positive when either score reaches its threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Publication, ResearchDataset, SurveyVariable};
use crate::textproc::{cosine, word_runs, Language, Lexicon, TermVector, VectorizerModel};

/// Measurement cue words counted by the classifier.
pub const CUE_TERMS_EN: &[&str] = &[
    "measure", "measured", "measurement", "variable", "item", "items", "scale", "question",
    "questionnaire", "respondents", "asked", "survey", "indicator",
];
pub const CUE_TERMS_DE: &[&str] = &[
    "gemessen", "variable", "skala", "frage", "befragten", "erhoben", "indikator", "fragebogen",
];

/// Token-count range (inclusive) that activates the length feature.
pub const LENGTH_FEATURE_RANGE: std::ops::RangeInclusive<usize> = 8..=60;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvError {
    #[error("variable {0:?} belongs to an unknown dataset")]
    UnknownDataset(String),
    #[error("invalid sv configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierWeights {
    /// Per cue-term occurrence.
    pub cue: f64,
    pub digit: f64,
    pub length: f64,
    pub question_mark: f64,
}

impl Default for ClassifierWeights {
    fn default() -> Self {
        Self { cue: 0.9, digit: 0.3, length: 0.4, question_mark: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvConfig {
    pub tau_classifier: f64,
    pub tau_retrieval: f64,
    pub top_k: usize,
    pub min_match_sim: f64,
    pub weights: ClassifierWeights,
    pub bias: f64,
}

impl Default for SvConfig {
    fn default() -> Self {
        Self {
            tau_classifier: 0.5,
            tau_retrieval: 0.6,
            top_k: 5,
            min_match_sim: 0.35,
            weights: ClassifierWeights::default(),
            bias: -2.0,
        }
    }
}

impl SvConfig {
    pub fn validate(&self) -> Result<(), SvError> {
        for (name, v) in [
            ("tau_classifier", self.tau_classifier),
            ("tau_retrieval", self.tau_retrieval),
            ("min_match_sim", self.min_match_sim),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SvError::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.top_k == 0 {
            return Err(SvError::InvalidConfig("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Scores how likely a sentence is to define a variable, in `[0, 1]`.
pub trait SentenceClassifier: Send + Sync {
    fn score(&self, sentence: &str, lang: Language) -> f64;
}

/// Produces the vectors the retriever compares.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str, lang: Language) -> TermVector;
    fn lexicon(&self) -> &Lexicon;
}

impl Embedder for VectorizerModel {
    fn embed(&self, text: &str, lang: Language) -> TermVector {
        VectorizerModel::embed(self, text, lang)
    }

    fn lexicon(&self) -> &Lexicon {
        VectorizerModel::lexicon(self)
    }
}

/// Logistic regression over four hand-picked features:
///
/// 1. number of cue-term occurrences ([`CUE_TERMS_EN`] / [`CUE_TERMS_DE`]),
/// 2. the sentence contains an ASCII digit,
/// 3. the word count lies in [`LENGTH_FEATURE_RANGE`],
/// 4. the sentence contains a question mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureClassifier {
    pub weights: ClassifierWeights,
    pub bias: f64,
}

impl From<&SvConfig> for FeatureClassifier {
    fn from(c: &SvConfig) -> Self {
        Self { weights: c.weights, bias: c.bias }
    }
}

impl SentenceClassifier for FeatureClassifier {
    fn score(&self, sentence: &str, lang: Language) -> f64 {
        let cues = match lang {
            Language::En => CUE_TERMS_EN,
            Language::De => CUE_TERMS_DE,
        };
        let words = word_runs(sentence);
        let cue_count = words.iter().filter(|t| cues.contains(&t.term.as_str())).count();
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let w = &self.weights;
        let z = w.cue * cue_count as f64
            + w.digit * flag(sentence.chars().any(|c| c.is_ascii_digit()))
            + w.length * flag(LENGTH_FEATURE_RANGE.contains(&words.len()))
            + w.question_mark * flag(sentence.contains('?'))
            + self.bias;
        sigmoid(z)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Classifier score with the configured weights.
pub fn classifier_score(sentence_text: &str, lang: Language, config: &SvConfig) -> f64 {
    FeatureClassifier::from(config).score(sentence_text, lang)
}

/// Every survey variable with its vector, grouped by dataset. Immutable
/// once built.
pub struct VariableBank {
    variables: BTreeMap<String, SurveyVariable>,
    vectors: BTreeMap<String, TermVector>,
    by_dataset: BTreeMap<String, Vec<String>>,
    embedder: Arc<dyn Embedder>,
}

impl std::fmt::Debug for VariableBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VariableBank")
            .field("variables", &self.variables.len())
            .field("datasets", &self.by_dataset.len())
            .finish()
    }
}

impl VariableBank {
    /// Embeds every variable's joined text (see [`SurveyVariable::text`])
    /// in the language detected from that text.
    pub fn build(
        variables: &BTreeMap<String, SurveyVariable>,
        datasets: &BTreeMap<String, ResearchDataset>,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self, SvError> {
        let mut vectors = BTreeMap::new();
        let mut by_dataset: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, v) in variables {
            if !datasets.contains_key(&v.dataset_id) {
                return Err(SvError::UnknownDataset(id.clone()));
            }
            let text = v.text();
            let lang = embedder.lexicon().detect_language(&text).value;
            vectors.insert(id.clone(), embedder.embed(&text, lang));
            by_dataset.entry(v.dataset_id.clone()).or_default().push(id.clone());
        }
        Ok(Self { variables: variables.clone(), vectors, by_dataset, embedder })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, id: &str) -> Option<&SurveyVariable> {
        self.variables.get(id)
    }

    pub fn vector(&self, id: &str) -> Option<&TermVector> {
        self.vectors.get(id)
    }

    pub fn by_dataset(&self) -> &BTreeMap<String, Vec<String>> {
        &self.by_dataset
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    /// Sorted, deduplicated variable ids of the given datasets.
    pub fn candidates<S: AsRef<str>>(&self, dataset_ids: &[S]) -> Vec<String> {
        dataset_ids
            .iter()
            .filter_map(|d| self.by_dataset.get(d.as_ref()))
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceClassification {
    pub sentence_index: usize,
    pub classifier_score: f64,
    pub retrieval_score: f64,
    pub is_variable_sentence: bool,
    pub final_score: f64,
}

impl SentenceClassification {
    /// Disjunctive ensemble: positive when either score meets its threshold.
    pub fn combine(sentence_index: usize, classifier_score: f64, retrieval_score: f64, config: &SvConfig) -> Self {
        Self {
            sentence_index,
            classifier_score,
            retrieval_score,
            is_variable_sentence: classifier_score >= config.tau_classifier
                || retrieval_score >= config.tau_retrieval,
            final_score: classifier_score.max(retrieval_score),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMatch {
    pub variable_id: String,
    pub similarity: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LinkMethod {
    #[default]
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceVariableLink {
    pub publication_id: String,
    pub sentence_index: usize,
    pub variable_id: String,
    pub similarity: f64,
    pub classifier_score: f64,
    pub method: LinkMethod,
}

/// Best candidate by cosine, ties to the smallest id. `(None, 0.0)` for no
/// candidates.
pub fn retrieval_score<S: AsRef<str>>(
    sentence_vec: &TermVector,
    bank: &VariableBank,
    candidate_ids: &[S],
) -> (Option<String>, f64) {
    let mut best: Option<(&str, f64)> = None;
    for id in candidate_ids {
        let id = id.as_ref();
        let Some(v) = bank.vector(id) else { continue };
        let sim = cosine(sentence_vec, v);
        let better = match best {
            None => true,
            Some((bid, bsim)) => sim > bsim || (sim == bsim && id < bid),
        };
        if better {
            best = Some((id, sim));
        }
    }
    match best {
        Some((id, sim)) => (Some(id.to_owned()), sim),
        None => (None, 0.0),
    }
}

fn classify_vec(
    index: usize,
    classifier_score: f64,
    vec: &TermVector,
    bank: &VariableBank,
    candidate_ids: &[String],
    config: &SvConfig,
) -> SentenceClassification {
    let (_, r) = retrieval_score(vec, bank, candidate_ids);
    SentenceClassification::combine(index, classifier_score, r, config)
}

/// Scores one sentence with the configured feature classifier and the bank's
/// retriever.
pub fn classify_sentence(
    sentence_index: usize,
    sentence_text: &str,
    lang: Language,
    bank: &VariableBank,
    candidate_ids: &[String],
    config: &SvConfig,
) -> SentenceClassification {
    let vec = bank.embedder().embed(sentence_text, lang);
    let c = FeatureClassifier::from(config).score(sentence_text, lang);
    classify_vec(sentence_index, c, &vec, bank, candidate_ids, config)
}

fn match_vec(vec: &TermVector, bank: &VariableBank, candidates: &[String], config: &SvConfig) -> Vec<VariableMatch> {
    let mut scored: Vec<(&str, f64)> = candidates
        .iter()
        .filter_map(|id| bank.vector(id).map(|v| (id.as_str(), cosine(vec, v))))
        .filter(|&(_, sim)| sim >= config.min_match_sim)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    scored
        .into_iter()
        .take(config.top_k)
        .enumerate()
        .map(|(i, (id, similarity))| VariableMatch { variable_id: id.to_owned(), similarity, rank: i + 1 })
        .collect()
}

/// Ranked variables of `allowed_dataset_ids` whose similarity to the
/// sentence is at least `min_match_sim`, at most `top_k` of them.
pub fn match_variables<S: AsRef<str>>(
    sentence_text: &str,
    lang: Language,
    bank: &VariableBank,
    allowed_dataset_ids: &[S],
    config: &SvConfig,
) -> Vec<VariableMatch> {
    let candidates = bank.candidates(allowed_dataset_ids);
    if candidates.is_empty() {
        return Vec::new();
    }
    let vec = bank.embedder().embed(sentence_text, lang);
    match_vec(&vec, bank, &candidates, config)
}

/// Sentence-by-sentence classification plus links for one publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub classifications: Vec<SentenceClassification>,
    pub links: Vec<SentenceVariableLink>,
}

/// Classifies every sentence and links the positive ones, using an
/// arbitrary classifier.
pub fn identify_with(
    publication: &Publication,
    bank: &VariableBank,
    classifier: &dyn SentenceClassifier,
    config: &SvConfig,
) -> Identification {
    let lang = publication.language;
    let candidates = bank.candidates(&publication.dataset_ids);
    let mut classifications = Vec::with_capacity(publication.sentences.len());
    let mut links = Vec::new();
    for s in &publication.sentences {
        let vec = bank.embedder().embed(&s.text, lang);
        let c = classify_vec(s.index, classifier.score(&s.text, lang), &vec, bank, &candidates, config);
        if c.is_variable_sentence && !candidates.is_empty() {
            links.extend(match_vec(&vec, bank, &candidates, config).into_iter().map(|m| SentenceVariableLink {
                publication_id: publication.id.clone(),
                sentence_index: s.index,
                variable_id: m.variable_id,
                similarity: m.similarity,
                classifier_score: c.classifier_score,
                method: LinkMethod::Ensemble,
            }));
        }
        classifications.push(c);
    }
    Identification { classifications, links }
}

/// Links for every positive sentence, ordered by (sentence index, rank).
/// Empty when the publication has no linked datasets.
pub fn identify_publication(publication: &Publication, bank: &VariableBank, config: &SvConfig) -> Vec<SentenceVariableLink> {
    if publication.dataset_ids.is_empty() {
        return Vec::new();
    }
    identify_with(publication, bank, &FeatureClassifier::from(config), config).links
}

/// Sorted, deduplicated content terms shared by the sentence and the
/// variable's label plus question text.
pub fn overlap_terms(sentence_text: &str, variable: &SurveyVariable, lang: Language, lexicon: &Lexicon) -> Vec<String> {
    let sentence: BTreeSet<String> = lexicon.tokenize(sentence_text, lang).into_iter().collect();
    let var_text = format!("{} {}", variable.label, variable.question_text);
    let variable: BTreeSet<String> = lexicon.tokenize(&var_text, lang).into_iter().collect();
    sentence.intersection(&variable).cloned().collect()
}
