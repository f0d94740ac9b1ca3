//! Fixture access, brute-force oracles and random generators shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use svlink_core::config::ServiceConfig;
use svlink_core::corpus::{load_corpus, CorpusBundle, Publication, ResearchDataset, SurveyVariable};
use svlink_core::pipeline::{fit_models, identify_all, Pipeline, PipelineOutput};
use svlink_core::searchidx::{SearchHit, SortMode, K1, B};
use svlink_core::summarize::SummaryBackend;
use svlink_core::svident::{Embedder, SvConfig};
use svlink_core::{Language, Lexicon};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic")
}

pub fn load_fixture() -> CorpusBundle {
    load_corpus(&fixture_dir(), Lexicon::builtin()).expect("fixture loads")
}

pub fn fixture_config(workers: usize) -> ServiceConfig {
    ServiceConfig { corpus_root: fixture_dir(), worker_count: workers, ..ServiceConfig::default() }
}

pub fn run_pipeline(bundle: &CorpusBundle, config: ServiceConfig, backend: Option<Arc<dyn SummaryBackend>>) -> PipelineOutput {
    Pipeline::new(config, Lexicon::builtin_shared(), backend).run(bundle).expect("pipeline runs")
}

/// Positive-sentence and link counts over the whole bundle.
pub fn identification_counts(bundle: &CorpusBundle, sv: SvConfig) -> (usize, usize) {
    let models = fit_models(bundle, Lexicon::builtin_shared()).expect("models");
    let config = ServiceConfig { sv, ..ServiceConfig::default() };
    identify_all(bundle, &models, &config).iter().fold((0, 0), |(s, l), (_, ident)| {
        (s + ident.classifications.iter().filter(|c| c.is_variable_sentence).count(), l + ident.links.len())
    })
}

// ---------------------------------------------------------------- BM25 oracle

struct OracleField {
    boost: f64,
    docs: Vec<Vec<String>>,
}

/// Field-weighted BM25 computed from scratch over raw publication text.
/// Returns every document with a positive score, best first, ties by id.
/// A query without content terms lists every document with score 0.
pub fn bm25_oracle(publications: &[&Publication], lexicon: &Lexicon, query: &str) -> Vec<(String, f64)> {
    let fields = [
        OracleField { boost: 2.0, docs: publications.iter().map(|p| lexicon.tokenize(&p.title, p.language)).collect() },
        OracleField { boost: 1.5, docs: publications.iter().map(|p| lexicon.tokenize(&p.abstract_text, p.language)).collect() },
        OracleField { boost: 1.0, docs: publications.iter().map(|p| lexicon.tokenize(&p.full_text, p.language)).collect() },
    ];
    let mut terms = lexicon.tokenize(query, Language::En);
    terms.sort();
    terms.dedup();
    let n = publications.len() as f64;
    let mut out = Vec::new();
    if terms.is_empty() {
        out = publications.iter().map(|p| (p.id.clone(), 0.0)).collect();
    }
    for (d, p) in publications.iter().enumerate() {
        let mut total = 0.0;
        for f in &fields {
            let avg = f.docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
            if avg == 0.0 {
                continue;
            }
            let len = f.docs[d].len() as f64;
            for t in &terms {
                let tf = f.docs[d].iter().filter(|x| *x == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = f.docs.iter().filter(|doc| doc.contains(t)).count() as f64;
                let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                total += f.boost * idf * (tf * (K1 + 1.0)) / (tf + K1 * (1.0 - B + B * len / avg));
            }
        }
        if total > 0.0 {
            out.push((p.id.clone(), total));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

/// 1 to 4 words drawn from the corpus vocabulary, occasionally mixed with
/// a word that appears nowhere.
pub fn random_query(rng: &mut impl Rng, vocabulary: &[String]) -> String {
    let k = rng.gen_range(1..=4);
    let mut words: Vec<String> = (0..k).map(|_| vocabulary.choose(rng).unwrap().clone()).collect();
    if rng.gen_bool(0.15) {
        words.push("zyxwv".into());
    }
    words.join(" ")
}

/// Surface words of all titles, abstracts and full texts.
pub fn vocabulary(bundle: &CorpusBundle) -> Vec<String> {
    let mut v: BTreeSet<String> = BTreeSet::new();
    for p in bundle.publications.values() {
        for text in [&p.title, &p.abstract_text, &p.full_text] {
            v.extend(text.split(|c: char| !c.is_alphanumeric()).filter(|w| w.len() > 2).map(str::to_lowercase));
        }
    }
    v.into_iter().collect()
}

// ------------------------------------------------------- extractive oracle

/// Index of the full-text sentence closest to the mean of all abstract and
/// full-text sentence vectors; the first one on ties.
pub fn centroid_argmax(publication: &Publication, embedder: &dyn Embedder) -> Option<usize> {
    let lang = publication.language;
    let embed = |t: &str| -> HashMap<u32, f64> { embedder.embed(t, lang).entries().iter().copied().collect() };
    let body: Vec<HashMap<u32, f64>> = publication.sentences.iter().map(|s| embed(&s.text)).collect();
    if body.is_empty() {
        return None;
    }
    let abstract_sentences = embedder.lexicon().segment_sentences(&publication.abstract_text);
    let mut sum: HashMap<u32, f64> = HashMap::new();
    for v in abstract_sentences.iter().map(|s| embed(&s.text)).chain(body.iter().cloned()) {
        for (k, w) in v {
            *sum.entry(k).or_default() += w;
        }
    }
    let sum_norm = sum.values().map(|w| w * w).sum::<f64>().sqrt();
    let scores: Vec<f64> = body
        .iter()
        .map(|v| {
            let norm = v.values().map(|w| w * w).sum::<f64>().sqrt();
            if norm == 0.0 || sum_norm == 0.0 {
                return 0.0;
            }
            v.iter().map(|(k, w)| w * sum.get(k).copied().unwrap_or(0.0)).sum::<f64>() / (norm * sum_norm)
        })
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().position(|&s| s >= max - 1e-12)
}

// ----------------------------------------------------------- sort contracts

/// Adjacent pairs violating the documented order for `sort`.
pub fn sort_violations(hits: &[SearchHit], sort: SortMode) -> Vec<String> {
    let mut out = Vec::new();
    for w in hits.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let key = |h: &SearchHit| -> i64 {
            match sort {
                SortMode::Relevance => 0,
                SortMode::Recency => i64::from(h.year),
                SortMode::VariableCount => h.variable_count as i64,
            }
        };
        let ok = key(a) > key(b)
            || (key(a) == key(b) && (a.score > b.score || (a.score == b.score && a.publication_id < b.publication_id)));
        if !ok {
            out.push(format!("{:?}: {} before {}", sort, a.publication_id, b.publication_id));
        }
    }
    out
}

// --------------------------------------------------------- random bundles

const WORDS: &[&str] = &[
    "trust", "income", "health", "party", "vote", "family", "school", "church", "police", "court",
    "union", "tax", "rent", "job", "work", "sleep", "sport", "friend", "media", "news", "city",
    "village", "pension", "doctor", "child", "parent", "money", "europe", "climate", "energy",
    "safety", "crime", "migrant", "border", "wage", "leisure", "holiday", "garden", "car", "train",
    "measured", "survey", "respondents", "asked", "scale", "item", "question", "variable",
];

fn sentence(rng: &mut impl Rng, end: char) -> String {
    let n = rng.gen_range(3..12);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push(end);
    s
}

/// A valid bundle whose publications quote variables from linked and
/// unlinked datasets alike.
pub fn random_bundle(rng: &mut impl Rng) -> CorpusBundle {
    let mut b = CorpusBundle::default();
    let n_datasets = rng.gen_range(1..=4);
    for d in 0..n_datasets {
        let did = format!("d{d}");
        let mut ids = Vec::new();
        for v in 0..rng.gen_range(1..=6) {
            let vid = format!("{did}-v{v}");
            let var = SurveyVariable {
                id: vid.clone(),
                dataset_id: did.clone(),
                label: if rng.gen_bool(0.5) { sentence(rng, ' ').trim().to_string() } else { String::new() },
                question_text: sentence(rng, '?'),
                answer_categories: (0..rng.gen_range(0..3)).map(|_| WORDS.choose(rng).unwrap().to_string()).collect(),
            };
            b.variables.insert(vid.clone(), var);
            ids.push(vid);
        }
        b.datasets.insert(did.clone(), ResearchDataset { id: did, title: format!("Dataset {d}"), variable_ids: ids });
    }
    let dataset_ids: Vec<String> = b.datasets.keys().cloned().collect();
    let variable_texts: Vec<String> = b.variables.values().map(|v| v.question_text.clone()).collect();
    for p in 0..rng.gen_range(1..=5) {
        let mut sentences = Vec::new();
        for _ in 0..rng.gen_range(1..=8) {
            if rng.gen_bool(0.4) {
                sentences.push(variable_texts.choose(rng).unwrap().clone());
            } else {
                sentences.push(sentence(rng, '.'));
            }
        }
        let k = rng.gen_range(0..=dataset_ids.len());
        let mut linked: Vec<String> = dataset_ids.choose_multiple(rng, k).cloned().collect();
        linked.sort();
        let full_text = sentences.join(" ");
        let language = if rng.gen_bool(0.8) { Language::En } else { Language::De };
        b.publications.insert(
            format!("p{p}"),
            Publication {
                id: format!("p{p}"),
                title: sentence(rng, ' ').trim().to_string(),
                abstract_text: if rng.gen_bool(0.7) { sentence(rng, '.') } else { String::new() },
                authors: vec![],
                year: rng.gen_range(1990..=2024),
                language,
                dataset_ids: linked,
                full_text: full_text.clone(),
                sentences: Lexicon::builtin().segment_sentences(&full_text),
            },
        );
    }
    b
}

/// Links whose variable belongs to a dataset the publication does not use.
pub fn foreign_links(bundle: &CorpusBundle, sv: &SvConfig) -> Vec<String> {
    let models = fit_models(bundle, Lexicon::builtin_shared()).expect("models");
    let config = ServiceConfig { sv: sv.clone(), ..ServiceConfig::default() };
    let mut bad = Vec::new();
    for (pid, ident) in identify_all(bundle, &models, &config) {
        let allowed: BTreeSet<&String> = bundle.publications[&pid].dataset_ids.iter().collect();
        for l in &ident.links {
            let ds = &bundle.variables[&l.variable_id].dataset_id;
            if !allowed.contains(ds) {
                bad.push(format!("{pid}#{} -> {} ({ds})", l.sentence_index, l.variable_id));
            }
        }
    }
    bad
}

/// Threshold settings used for the permissive fuzz pass.
pub fn permissive_sv() -> SvConfig {
    SvConfig { tau_classifier: 0.0, tau_retrieval: 0.0, min_match_sim: 0.0, top_k: 100, ..SvConfig::default() }
}

/// Year and link count per publication, for order checks.
pub fn doc_keys(out: &PipelineOutput) -> BTreeMap<String, (i32, usize)> {
    out.index.documents().map(|d| (d.publication_id.clone(), (d.year, d.variable_count))).collect()
}
