//! End-to-end processing: fit the vectorizer, build the variable bank, then
//! summarize, identify variables in and index every publication.
//!
//! Publications are processed in parallel on a worker pool. Each one is
//! independent, and inside a publication the summary and identification
//! stages do not depend on each other, so a failing backend call never costs
//! a publication its extractive summary or its links. Results are merged in
//! publication-id order, which keeps the final index independent of
//! scheduling.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::corpus::{load_corpus, validate_links, CorpusBundle, CorpusError, Publication, ValidationReport};
use crate::searchidx::{IndexedDocument, SearchIndex};
use crate::summarize::{abstractive_summary, extractive_summary, BackendError, HttpBackend, SummaryBackend, SummaryKind};
use crate::svident::{identify_with, FeatureClassifier, Identification, SvError, VariableBank};
use crate::textproc::{Lexicon, LexiconError, VectorizerError, VectorizerModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub publication_id: String,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub publications_processed: usize,
    pub summaries_extractive: usize,
    pub summaries_abstractive: usize,
    pub summaries_fallback: usize,
    pub links_emitted: usize,
    pub errors: Vec<StageError>,
    pub elapsed_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("corpus failed validation with {} finding(s)", .0.findings.len())]
    ValidationFailed(ValidationReport),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Vectorizer(#[from] VectorizerError),
    #[error(transparent)]
    Sv(#[from] SvError),
    #[error("cannot set up summary backend: {0}")]
    Backend(#[from] BackendError),
    #[error("cannot start worker pool: {0}")]
    WorkerPool(String),
}

pub struct PipelineOutput {
    pub index: SearchIndex,
    pub report: PipelineReport,
}

/// Vectorizer and variable bank fitted on a bundle.
pub struct Models {
    pub vectorizer: Arc<VectorizerModel>,
    pub bank: VariableBank,
}

/// Fits the vectorizer on every publication (title, abstract and full text
/// as one document) and every variable text, then builds the bank.
pub fn fit_models(bundle: &CorpusBundle, lexicon: Arc<Lexicon>) -> Result<Models, PipelineError> {
    let mut docs: Vec<(String, crate::Language)> = bundle
        .publications
        .values()
        .map(|p| (format!("{}\n{}\n{}", p.title, p.abstract_text, p.full_text), p.language))
        .collect();
    docs.extend(bundle.variables.values().map(|v| {
        let text = v.text();
        let lang = lexicon.detect_language(&text).value;
        (text, lang)
    }));
    if docs.is_empty() {
        // Nothing to fit on; a placeholder keeps the bank well-defined.
        docs.push((String::new(), crate::Language::En));
    }
    let vectorizer = Arc::new(VectorizerModel::fit(&docs, lexicon)?);
    let bank = VariableBank::build(&bundle.variables, &bundle.datasets, vectorizer.clone())?;
    Ok(Models { vectorizer, bank })
}

/// Runs identification for every publication (sentence classifications and
/// links), in publication-id order.
pub fn identify_all(bundle: &CorpusBundle, models: &Models, config: &ServiceConfig) -> Vec<(String, Identification)> {
    let classifier = FeatureClassifier::from(&config.sv);
    bundle
        .publications
        .values()
        .map(|p| (p.id.clone(), identify_with(p, &models.bank, &classifier, &config.sv)))
        .collect()
}

struct Outcome {
    doc: IndexedDocument,
    kinds: Vec<SummaryKind>,
    errors: Vec<StageError>,
}

pub struct Pipeline {
    config: ServiceConfig,
    lexicon: Arc<Lexicon>,
    backend: Option<Arc<dyn SummaryBackend>>,
}

impl Pipeline {
    /// Loads the lexicon and connects the HTTP backend named in `config`.
    pub fn from_config(config: ServiceConfig) -> Result<Self, PipelineError> {
        let lexicon = match &config.lexicon_dir {
            Some(dir) => Arc::new(Lexicon::from_dir(dir)?),
            None => Lexicon::builtin_shared(),
        };
        let backend = HttpBackend::from_config(&config.backend)?.map(|b| Arc::new(b) as Arc<dyn SummaryBackend>);
        Ok(Self { config, lexicon, backend })
    }

    pub fn new(config: ServiceConfig, lexicon: Arc<Lexicon>, backend: Option<Arc<dyn SummaryBackend>>) -> Self {
        Self { config, lexicon, backend }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn load_corpus(&self) -> Result<CorpusBundle, CorpusError> {
        load_corpus(&self.config.corpus_root, &self.lexicon)
    }

    /// Reloads the corpus from `corpus_root` and runs the pipeline on it.
    pub fn reindex(&self) -> Result<(CorpusBundle, PipelineOutput), PipelineError> {
        let bundle = self.load_corpus()?;
        let out = self.run(&bundle)?;
        Ok((bundle, out))
    }

    pub fn run(&self, bundle: &CorpusBundle) -> Result<PipelineOutput, PipelineError> {
        let started = Instant::now();
        let validation = validate_links(bundle);
        if !validation.ok {
            return Err(PipelineError::ValidationFailed(validation));
        }
        self.config.sv.validate()?;
        let models = fit_models(bundle, self.lexicon.clone())?;

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.worker_count.max(1))
            .build()
            .map_err(|e| PipelineError::WorkerPool(e.to_string()))?;
        let publications: Vec<&Publication> = bundle.publications.values().collect();
        let outcomes: Vec<Outcome> = pool.install(|| {
            use rayon::prelude::*;
            publications.par_iter().map(|p| self.process(p, &models)).collect()
        });

        let mut index = SearchIndex::new(self.lexicon.clone());
        let mut report = PipelineReport { publications_processed: outcomes.len(), ..Default::default() };
        for o in outcomes {
            for k in &o.kinds {
                match k {
                    SummaryKind::Extractive => report.summaries_extractive += 1,
                    SummaryKind::Abstractive => report.summaries_abstractive += 1,
                    SummaryKind::ExtractiveFallback => report.summaries_fallback += 1,
                }
            }
            report.links_emitted += o.doc.links.len();
            report.errors.extend(o.errors);
            index.upsert(o.doc);
        }
        report.elapsed_ms = started.elapsed().as_millis() as u64;
        log::info!(
            "pipeline: {} publications, {} links, {} errors in {} ms",
            report.publications_processed,
            report.links_emitted,
            report.errors.len(),
            report.elapsed_ms
        );
        Ok(PipelineOutput { index, report })
    }

    fn process(&self, p: &Publication, models: &Models) -> Outcome {
        let embedder = models.vectorizer.as_ref();
        let mut summaries = Vec::new();
        let mut errors = Vec::new();
        let mut fail = |stage: &str, reason: String| {
            errors.push(StageError { publication_id: p.id.clone(), stage: stage.into(), reason })
        };

        match extractive_summary(p, embedder) {
            Ok(s) => summaries.push(s),
            Err(e) => fail("extractive_summary", e.to_string()),
        }
        let target = self.config.summary_target_lang.unwrap_or(p.language);
        match abstractive_summary(p, target, self.backend.as_deref(), &self.config.backend, embedder) {
            Ok(s) => summaries.push(s),
            Err(e) => fail("abstractive_summary", e.to_string()),
        }
        let links = if p.dataset_ids.is_empty() {
            Vec::new()
        } else {
            identify_with(p, &models.bank, &FeatureClassifier::from(&self.config.sv), &self.config.sv).links
        };

        let kinds = summaries.iter().map(|s| s.kind).collect();
        Outcome { doc: IndexedDocument::new(p, summaries, links, &self.lexicon), kinds, errors }
    }
}
