mod support;

use std::sync::Arc;

use svlink_core::mock_backend::{echo_summary, MockBackend, MockMode};
use svlink_core::pipeline::fit_models;
use svlink_core::summarize::{
    abstractive_summary, extractive_summary, BackendConfig, BackendRequest, HttpBackend, SummaryBackend, SummaryError,
    SummaryKind,
};
use svlink_core::{Language, Lexicon};
use support::*;

fn other(lang: Language) -> Language {
    match lang {
        Language::En => Language::De,
        Language::De => Language::En,
    }
}

#[test]
fn extractive_matches_centroid_argmax() {
    let bundle = load_fixture();
    let models = fit_models(&bundle, Lexicon::builtin_shared()).unwrap();
    for p in bundle.publications.values() {
        let s = extractive_summary(p, models.vectorizer.as_ref()).unwrap();
        let expected = centroid_argmax(p, models.vectorizer.as_ref()).unwrap();
        assert_eq!(s.source_sentence_index, Some(expected), "{}", p.id);
        assert_eq!(s.text, p.sentences[expected].text);
    }
}

#[test]
fn no_backend_falls_back_or_refuses() {
    let bundle = load_fixture();
    let models = fit_models(&bundle, Lexicon::builtin_shared()).unwrap();
    let cfg = BackendConfig::default();
    for p in bundle.publications.values() {
        let same = abstractive_summary(p, p.language, None, &cfg, models.vectorizer.as_ref()).unwrap();
        assert_eq!(same.kind, SummaryKind::ExtractiveFallback);
        assert!(same.text.split_whitespace().count() <= cfg.max_summary_tokens + 1);
        let cross = abstractive_summary(p, other(p.language), None, &cfg, models.vectorizer.as_ref());
        assert!(matches!(cross, Err(SummaryError::CrossLingualUnavailable { .. })), "{}", p.id);
    }
}

#[test]
fn pipeline_uses_mock_backend_verbatim() {
    let bundle = load_fixture();
    let mock = MockBackend::spawn(MockMode::Echo).unwrap();
    let backend: Arc<dyn SummaryBackend> = Arc::new(HttpBackend::new(mock.url(), 5000).unwrap());
    let out = run_pipeline(&bundle, fixture_config(4), Some(backend));
    assert_eq!(out.report.summaries_abstractive, bundle.publications.len());
    assert_eq!(out.report.summaries_fallback, 0);
    let requests = mock.requests();
    assert_eq!(requests.len(), bundle.publications.len());
    for doc in out.index.documents() {
        let p = &bundle.publications[&doc.publication_id];
        let req = BackendRequest { text: p.abstract_text.clone(), source_lang: p.language, target_lang: p.language, max_tokens: 30 };
        let s = doc.summaries.iter().find(|s| s.kind == SummaryKind::Abstractive).unwrap();
        assert_eq!(s.text, echo_summary(&req));
        assert!(requests.contains(&req));
    }
}

#[test]
fn failing_backend_degrades_to_fallback() {
    let bundle = load_fixture();
    let mock = MockBackend::spawn(MockMode::Status(500)).unwrap();
    let backend: Arc<dyn SummaryBackend> = Arc::new(HttpBackend::new(mock.url(), 5000).unwrap());
    let out = run_pipeline(&bundle, fixture_config(2), Some(backend));
    assert_eq!(out.report.summaries_abstractive, 0);
    assert_eq!(out.report.summaries_fallback, bundle.publications.len());
    assert_eq!(out.report.summaries_extractive, bundle.publications.len());
    assert!(out.report.errors.is_empty());
}

#[test]
fn cross_lingual_target_goes_to_backend() {
    let bundle = load_fixture();
    let mock = MockBackend::spawn(MockMode::Fixed("Trust declined.".into())).unwrap();
    let backend: Arc<dyn SummaryBackend> = Arc::new(HttpBackend::new(mock.url(), 5000).unwrap());
    let mut config = fixture_config(2);
    config.summary_target_lang = Some(Language::En);
    let out = run_pipeline(&bundle, config, Some(backend));
    for doc in out.index.documents() {
        let s = doc.summaries.iter().find(|s| s.kind == SummaryKind::Abstractive).unwrap();
        assert_eq!(s.text, "Trust declined.");
        assert_eq!(s.language, Language::En);
    }
    assert!(mock.requests().iter().any(|r| r.source_lang == Language::De && r.target_lang == Language::En));
}
