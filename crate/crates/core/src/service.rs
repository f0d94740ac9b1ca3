//! REST service over the search index and the corpus catalog.
//!
//! | method | path | response |
//! |--------|------|----------|
//! | GET | `/health` | `{"status","documents"}` |
//! | GET | `/search?q=&lang=&year_min=&year_max=&sort=&page=&page_size=` | `{"total","hits":[...]}` |
//! | GET | `/publications/{id}` | metadata, sentences, summaries, links |
//! | GET | `/publications/{id}/variables` | linked variables, one entry per variable |
//! | GET | `/variables/{id}` | variable record and its dataset |
//! | GET | `/datasets/{id}` | dataset record and its variables |
//! | POST | `/admin/reindex` | pipeline report; 409 while another reindex runs |
//!
//! Errors are JSON objects `{"error": message}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use axum::extract::{Path, Query as QueryParams, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::config::ServiceConfig;
use crate::corpus::{CorpusBundle, CorpusError, ResearchDataset, SurveyVariable};
use crate::pipeline::{Pipeline, PipelineError, PipelineReport};
use crate::searchidx::{Filters, IndexedDocument, Query, QueryError, SearchIndex, SearchResults, SnapshotError, DEFAULT_PAGE_SIZE};
use crate::summarize::Summary;
use crate::svident::{overlap_terms, SentenceVariableLink};
use crate::textproc::{Language, Lexicon, SentenceSpan};

/// Raw `/search` parameters, shared by the service and the CLI.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub q: Option<String>,
    pub lang: Option<String>,
    pub year_min: Option<String>,
    pub year_max: Option<String>,
    pub sort: Option<String>,
    pub page: Option<String>,
    pub page_size: Option<String>,
}

fn nonempty(v: &Option<String>) -> Option<&str> {
    v.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

fn parse_param<T: std::str::FromStr>(name: &str, v: &Option<String>) -> Result<Option<T>, QueryError> {
    nonempty(v)
        .map(|s| s.parse::<T>().map_err(|_| QueryError::InvalidQuery(format!("bad {name}: {s:?}"))))
        .transpose()
}

impl SearchParams {
    pub fn from_map(map: &HashMap<String, String>) -> Self {
        let get = |k: &str| map.get(k).cloned();
        Self {
            q: get("q"),
            lang: get("lang"),
            year_min: get("year_min"),
            year_max: get("year_max"),
            sort: get("sort"),
            page: get("page"),
            page_size: get("page_size"),
        }
    }

    pub fn to_query(&self) -> Result<Query, QueryError> {
        let query = Query {
            text: self.q.clone().unwrap_or_default(),
            filters: Filters {
                language: parse_param::<Language>("lang", &self.lang)?,
                year_min: parse_param("year_min", &self.year_min)?,
                year_max: parse_param("year_max", &self.year_max)?,
            },
            sort: nonempty(&self.sort)
                .map(|s| s.parse().map_err(QueryError::InvalidQuery))
                .transpose()?
                .unwrap_or_default(),
            page: parse_param("page", &self.page)?.unwrap_or(0),
            page_size: parse_param("page_size", &self.page_size)?.unwrap_or(DEFAULT_PAGE_SIZE),
        };
        query.validate()?;
        Ok(query)
    }
}

/// The `/search` payload for `params`.
pub fn search_payload(index: &SearchIndex, params: &SearchParams) -> Result<SearchResults, QueryError> {
    index.search(&params.to_query()?)
}

#[derive(Debug, Serialize)]
pub struct PublicationView<'a> {
    pub id: &'a str,
    pub title: &'a str,
    #[serde(rename = "abstract")]
    pub abstract_text: &'a str,
    pub authors: &'a [String],
    pub year: i32,
    pub lang: Language,
    pub dataset_ids: &'a [String],
    pub full_text: &'a str,
    pub content_hash: &'a str,
    pub variable_count: usize,
    pub sentences: &'a [SentenceSpan],
    pub summaries: &'a [Summary],
    pub links: &'a [SentenceVariableLink],
}

impl<'a> From<&'a IndexedDocument> for PublicationView<'a> {
    fn from(d: &'a IndexedDocument) -> Self {
        Self {
            id: &d.publication_id,
            title: &d.title,
            abstract_text: &d.abstract_text,
            authors: &d.authors,
            year: d.year,
            lang: d.language,
            dataset_ids: &d.dataset_ids,
            full_text: &d.full_text,
            content_hash: &d.content_hash,
            variable_count: d.variable_count,
            sentences: &d.sentences,
            summaries: &d.summaries,
            links: &d.links,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedVariable {
    pub variable_id: String,
    pub label: String,
    pub question_text: String,
    pub answer_categories: Vec<String>,
    pub sentence_indexes: Vec<usize>,
    pub best_similarity: f64,
    pub overlap_terms: Vec<String>,
}

/// One entry per linked variable with every supporting sentence, ordered by
/// best similarity (descending) then variable id. Overlap terms are the
/// union over the supporting sentences.
pub fn linked_variables(doc: &IndexedDocument, bundle: &CorpusBundle, lexicon: &Lexicon) -> Vec<LinkedVariable> {
    let mut grouped: BTreeMap<&str, (BTreeSet<usize>, f64)> = BTreeMap::new();
    for l in &doc.links {
        let e = grouped.entry(&l.variable_id).or_insert((BTreeSet::new(), f64::NEG_INFINITY));
        e.0.insert(l.sentence_index);
        e.1 = e.1.max(l.similarity);
    }
    let mut out: Vec<LinkedVariable> = grouped
        .into_iter()
        .map(|(vid, (sentences, best))| {
            let var = bundle.variables.get(vid);
            let overlap: BTreeSet<String> = match var {
                Some(v) => sentences
                    .iter()
                    .filter_map(|&i| doc.sentences.get(i))
                    .flat_map(|s| overlap_terms(&s.text, v, doc.language, lexicon))
                    .collect(),
                None => BTreeSet::new(),
            };
            LinkedVariable {
                variable_id: vid.to_owned(),
                label: var.map(|v| v.label.clone()).unwrap_or_default(),
                question_text: var.map(|v| v.question_text.clone()).unwrap_or_default(),
                answer_categories: var.map(|v| v.answer_categories.clone()).unwrap_or_default(),
                sentence_indexes: sentences.into_iter().collect(),
                best_similarity: best,
                overlap_terms: overlap.into_iter().collect(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.best_similarity.total_cmp(&a.best_similarity).then_with(|| a.variable_id.cmp(&b.variable_id)));
    out
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    SnapshotCorrupt(SnapshotError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("server error: {0}")]
    Server(String),
}

/// What the service reads from; replaced wholesale by a reindex.
pub struct Catalog {
    pub index: SearchIndex,
    pub bundle: CorpusBundle,
}

pub struct AppState {
    current: RwLock<Arc<Catalog>>,
    pipeline: Arc<Pipeline>,
    snapshot_path: PathBuf,
    reindexing: AtomicBool,
}

/// Held while a reindex runs; releases the single-flight flag on drop.
pub struct ReindexGuard(Arc<AppState>);

impl Drop for ReindexGuard {
    fn drop(&mut self) {
        self.0.reindexing.store(false, Ordering::SeqCst);
    }
}

impl AppState {
    pub fn new(pipeline: Arc<Pipeline>, catalog: Catalog) -> Arc<Self> {
        let snapshot_path = pipeline.config().snapshot_path.clone();
        Arc::new(Self {
            current: RwLock::new(Arc::new(catalog)),
            pipeline,
            snapshot_path,
            reindexing: AtomicBool::new(false),
        })
    }

    /// Loads the corpus catalog and the snapshot, or builds and saves the
    /// index when no snapshot exists yet. Blocking.
    pub fn bootstrap(pipeline: Arc<Pipeline>) -> Result<Arc<Self>, ServiceError> {
        let snapshot = &pipeline.config().snapshot_path;
        let bundle = match pipeline.load_corpus() {
            Ok(b) => b,
            Err(e) if snapshot.exists() => {
                log::warn!("corpus unavailable ({e}); serving snapshot without variable catalog");
                CorpusBundle::default()
            }
            Err(e) => return Err(e.into()),
        };
        let index = if snapshot.exists() {
            SearchIndex::load(snapshot, pipeline.lexicon().clone()).map_err(ServiceError::SnapshotCorrupt)?
        } else {
            let out = pipeline.run(&bundle)?;
            if let Err(e) = out.index.save(snapshot) {
                log::warn!("cannot write snapshot: {e}");
            }
            out.index
        };
        log::info!("serving {} documents", index.len());
        Ok(Self::new(pipeline, Catalog { index, bundle }))
    }

    pub fn catalog(&self) -> Arc<Catalog> {
        self.current.read().clone()
    }

    /// `None` when a reindex is already running.
    pub fn try_begin_reindex(self: &Arc<Self>) -> Option<ReindexGuard> {
        self.reindexing
            .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
            .ok()
            .map(|_| ReindexGuard(self.clone()))
    }

    fn swap(&self, catalog: Catalog) {
        *self.current.write() = Arc::new(catalog);
    }

    pub fn save_snapshot(&self) -> Result<(), SnapshotError> {
        self.catalog().index.save(&self.snapshot_path)
    }
}

pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl std::fmt::Display) -> Self {
        Self { status, body: serde_json::json!({ "error": message.to_string() }) }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("{what} {id:?} not found"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e)
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "documents": state.catalog().index.len() }))
}

async fn search(
    State(state): State<Arc<AppState>>,
    QueryParams(raw): QueryParams<HashMap<String, String>>,
) -> ApiResult<SearchResults> {
    let catalog = state.catalog();
    Ok(Json(search_payload(&catalog.index, &SearchParams::from_map(&raw))?))
}

async fn publication(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let catalog = state.catalog();
    let doc = catalog.index.get(&id).ok_or_else(|| ApiError::not_found("publication", &id))?;
    Ok(Json(PublicationView::from(doc)).into_response())
}

async fn publication_variables(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<LinkedVariable>> {
    let catalog = state.catalog();
    let doc = catalog.index.get(&id).ok_or_else(|| ApiError::not_found("publication", &id))?;
    Ok(Json(linked_variables(doc, &catalog.bundle, catalog.index.lexicon())))
}

#[derive(Serialize)]
struct VariableView<'a> {
    variable: &'a SurveyVariable,
    dataset: Option<&'a ResearchDataset>,
}

async fn variable(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let catalog = state.catalog();
    let v = catalog.bundle.variables.get(&id).ok_or_else(|| ApiError::not_found("variable", &id))?;
    let view = VariableView { variable: v, dataset: catalog.bundle.datasets.get(&v.dataset_id) };
    Ok(Json(view).into_response())
}

#[derive(Serialize)]
struct DatasetView<'a> {
    dataset: &'a ResearchDataset,
    variables: Vec<&'a SurveyVariable>,
}

async fn dataset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let catalog = state.catalog();
    let d = catalog.bundle.datasets.get(&id).ok_or_else(|| ApiError::not_found("dataset", &id))?;
    let variables = d.variable_ids.iter().filter_map(|v| catalog.bundle.variables.get(v)).collect();
    Ok(Json(DatasetView { dataset: d, variables }).into_response())
}

async fn reindex(State(state): State<Arc<AppState>>) -> ApiResult<PipelineReport> {
    let _guard = state
        .try_begin_reindex()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "a reindex is already running"))?;
    let pipeline = state.pipeline.clone();
    let result = tokio::task::spawn_blocking(move || pipeline.reindex())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?;
    match result {
        Ok((bundle, out)) => {
            state.swap(Catalog { index: out.index, bundle });
            if let Err(e) = state.save_snapshot() {
                log::warn!("cannot write snapshot after reindex: {e}");
            }
            Ok(Json(out.report))
        }
        Err(PipelineError::ValidationFailed(report)) => Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: serde_json::json!({ "error": "corpus failed validation", "findings": report.findings }),
        }),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)),
    }
}

fn cors(origin: &str) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    match origin.trim() {
        "" | "*" => layer.allow_origin(Any),
        o => match HeaderValue::from_str(o) {
            Ok(v) => layer.allow_origin(v),
            Err(_) => {
                log::warn!("invalid cors_origin {o:?}; allowing any origin");
                layer.allow_origin(Any)
            }
        },
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let origin = state.pipeline.config().cors_origin.clone();
    Router::new()
        .route("/health", get(health))
        .route("/search", get(search))
        .route("/publications/{id}", get(publication))
        .route("/publications/{id}/variables", get(publication_variables))
        .route("/variables/{id}", get(variable))
        .route("/datasets/{id}", get(dataset))
        .route("/admin/reindex", post(reindex))
        .layer(cors(&origin))
        .with_state(state)
}

/// Bootstraps state, serves until `shutdown` resolves, then writes the
/// snapshot.
pub async fn serve_with_shutdown(
    config: ServiceConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let addr = config.listen_address.clone();
    let pipeline = Arc::new(Pipeline::from_config(config)?);
    let state = tokio::task::spawn_blocking(move || AppState::bootstrap(pipeline))
        .await
        .map_err(|e| ServiceError::Server(e.to_string()))??;
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: addr.clone(), source })?;
    log::info!("listening on {}", listener.local_addr().map(|a| a.to_string()).unwrap_or(addr));
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| ServiceError::Server(e.to_string()))?;
    if let Err(e) = state.save_snapshot() {
        log::warn!("cannot write snapshot on shutdown: {e}");
    }
    Ok(())
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    serve_with_shutdown(config, async {
        let _ = tokio::signal::ctrl_c().await;
        log::info!("shutting down");
    })
    .await
}
