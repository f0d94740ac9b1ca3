//! `svlink` command-line entry point.
//!
//! Exit codes: 0 success, 1 domain failure (validation findings, corrupt
//! snapshot, missing gold links), 2 I/O or usage error.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use svlink_core::config::ServiceConfig;
use svlink_core::corpus::{validate_links, CorpusError, ValidationReport};
use svlink_core::eval::{evaluate_bundle, EvalError};
use svlink_core::mock_backend::{MockBackend, MockMode};
use svlink_core::pipeline::{Pipeline, PipelineError};
use svlink_core::searchidx::{SearchIndex, SearchResults, SnapshotError};
use svlink_core::service::{self, search_payload, SearchParams, ServiceError};
use svlink_core::Lexicon;

#[derive(Parser)]
#[command(name = "svlink", version, about = "Link survey variables to publications and search the result")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus and check its cross-references.
    Validate {
        /// Corpus directory; defaults to `corpus_root`.
        corpus: Option<PathBuf>,
    },
    /// Run the full pipeline and write an index snapshot.
    Process(ProcessArgs),
    /// Serve the REST API.
    Serve {
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Query an index snapshot.
    Search(SearchArgs),
    /// Score identification against the corpus gold links.
    Eval {
        corpus: Option<PathBuf>,
    },
    /// Run a local summary backend for testing.
    #[command(hide = true)]
    MockBackend(MockArgs),
}

#[derive(Args)]
struct ProcessArgs {
    corpus: Option<PathBuf>,
    /// Snapshot output path; defaults to `snapshot_path`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the abstractive backend even if one is configured.
    #[arg(long)]
    no_backend: bool,
}

#[derive(Args)]
struct SearchArgs {
    query: String,
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// relevance, recency or variable_count.
    #[arg(long)]
    sort: Option<String>,
    /// en or de.
    #[arg(long)]
    lang: Option<String>,
    #[arg(long)]
    year_min: Option<String>,
    #[arg(long)]
    year_max: Option<String>,
    #[arg(long)]
    page: Option<String>,
    #[arg(long)]
    page_size: Option<String>,
    /// Print the same JSON payload as `GET /search`.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MockArgs {
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// Answer every request with this text instead of echoing.
    #[arg(long, conflicts_with = "status")]
    fixed: Option<String>,
    /// Fail every request with this HTTP status.
    #[arg(long)]
    status: Option<u16>,
    #[arg(long)]
    delay_ms: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Display) -> Self {
        Self { code: 1, message: message.to_string() }
    }

    fn io(message: impl Display) -> Self {
        Self { code: 2, message: message.to_string() }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        if e.is_io() {
            Self::io(e)
        } else {
            Self::domain(e)
        }
    }
}

impl From<SnapshotError> for Failure {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Corrupt { .. } => Self::domain(e),
            SnapshotError::Io { .. } => Self::io(e),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::ValidationFailed(report) => Self::domain(findings_text(&report)),
            PipelineError::Corpus(e) => e.into(),
            PipelineError::Lexicon(e) => Self::io(e),
            PipelineError::Sv(e) => Self::io(e),
            other => Self::domain(other),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn findings_text(report: &ValidationReport) -> String {
    let mut s = format!("corpus failed validation with {} finding(s)", report.findings.len());
    for f in &report.findings {
        s.push_str(&format!("\n  {f}"));
    }
    s
}

fn emit(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(Failure::io)
}

fn pipeline(config: ServiceConfig) -> Result<Pipeline, Failure> {
    Pipeline::from_config(config).map_err(Failure::from)
}

fn cmd_validate(mut config: ServiceConfig, corpus: Option<PathBuf>) -> CmdResult {
    if let Some(c) = corpus {
        config.corpus_root = c;
    }
    let p = pipeline(config)?;
    let bundle = p.load_corpus()?;
    let report = validate_links(&bundle);
    if !report.ok {
        emit(&findings_text(&report))?;
        return Err(Failure { code: 1, message: String::new() });
    }
    emit(&format!(
        "ok: {} publications, {} datasets, {} variables, {} gold links",
        bundle.publications.len(),
        bundle.datasets.len(),
        bundle.variables.len(),
        bundle.gold_links.as_ref().map_or(0, Vec::len)
    ))
}

fn cmd_process(mut config: ServiceConfig, args: ProcessArgs) -> CmdResult {
    if let Some(c) = args.corpus {
        config.corpus_root = c;
    }
    if let Some(o) = args.out {
        config.snapshot_path = o;
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Failure::io("--workers must be at least 1"));
        }
        config.worker_count = w;
    }
    if args.no_backend {
        config.backend.endpoint_url = None;
    }
    let snapshot = config.snapshot_path.clone();
    let p = pipeline(config)?;
    let (_, out) = p.reindex()?;
    out.index.save(&snapshot)?;
    log::info!("snapshot {} written, state {}", snapshot.display(), out.index.state_hash());
    emit(&serde_json::to_string_pretty(&out.report).map_err(Failure::io)?)
}

fn load_index(path: &Path, lexicon: Arc<Lexicon>) -> Result<SearchIndex, Failure> {
    Ok(SearchIndex::load(path, lexicon)?)
}

fn render_table(results: &SearchResults) -> String {
    let mut s = format!("{} hit(s)", results.total);
    for h in &results.hits {
        s.push_str(&format!(
            "\n{:>9.4}  {}  {:<12} {:>3} var  {}\n           {}",
            h.score, h.year, h.publication_id, h.variable_count, h.title, h.snippet
        ));
        if let Some(summary) = &h.summary {
            s.push_str(&format!("\n           summary: {}", summary.text));
        }
    }
    s
}

fn cmd_search(mut config: ServiceConfig, args: SearchArgs) -> CmdResult {
    if let Some(s) = args.snapshot {
        config.snapshot_path = s;
    }
    let params = SearchParams {
        q: Some(args.query),
        lang: args.lang,
        year_min: args.year_min,
        year_max: args.year_max,
        sort: args.sort,
        page: args.page,
        page_size: args.page_size,
    };
    params.to_query().map_err(Failure::io)?;
    let snapshot = config.snapshot_path.clone();
    let p = pipeline(config)?;
    let index = load_index(&snapshot, p.lexicon().clone())?;
    let results = search_payload(&index, &params).map_err(Failure::io)?;
    if args.json {
        emit(&serde_json::to_string(&results).map_err(Failure::io)?)
    } else {
        emit(&render_table(&results))
    }
}

fn cmd_eval(mut config: ServiceConfig, corpus: Option<PathBuf>) -> CmdResult {
    if let Some(c) = corpus {
        config.corpus_root = c;
    }
    let p = pipeline(config)?;
    let bundle = p.load_corpus()?;
    let result = evaluate_bundle(&bundle, p.config(), p.lexicon().clone()).map_err(|e| match e {
        EvalError::MissingGold => Failure::domain(format!("{e} (gold_links.jsonl) in {}", p.config().corpus_root.display())),
        EvalError::Pipeline(e) => e.into(),
    })?;
    emit(&serde_json::to_string_pretty(&result).map_err(Failure::io)?)
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(Failure::io)
}

fn cmd_serve(mut config: ServiceConfig, listen: Option<String>, corpus: Option<PathBuf>, snapshot: Option<PathBuf>) -> CmdResult {
    if let Some(l) = listen {
        config.listen_address = l;
    }
    if let Some(c) = corpus {
        config.corpus_root = c;
    }
    if let Some(s) = snapshot {
        config.snapshot_path = s;
    }
    runtime()?.block_on(service::serve(config)).map_err(|e| match e {
        ServiceError::Bind { .. } => Failure::io(e),
        ServiceError::SnapshotCorrupt(e) => e.into(),
        ServiceError::Pipeline(e) => e.into(),
        ServiceError::Corpus(e) => e.into(),
        ServiceError::Server(_) => Failure::io(e),
    })
}

fn cmd_mock_backend(args: MockArgs) -> CmdResult {
    let mut mode = match (args.fixed, args.status) {
        (Some(text), _) => MockMode::Fixed(text),
        (None, Some(code)) => MockMode::Status(code),
        (None, None) => MockMode::Echo,
    };
    if let Some(ms) = args.delay_ms {
        mode = MockMode::Delay(ms, Box::new(mode));
    }
    let mock = MockBackend::spawn_on(&args.listen, mode).map_err(Failure::io)?;
    emit(&mock.url())?;
    runtime()?.block_on(async {
        let _ = tokio::signal::ctrl_c().await;
    });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).format_timestamp_millis().init();

    let result = match cli.command {
        Command::MockBackend(args) => cmd_mock_backend(args),
        command => match ServiceConfig::load(cli.config.as_deref()) {
            Err(e) => Err(Failure::io(e)),
            Ok(config) => match command {
                Command::Validate { corpus } => cmd_validate(config, corpus),
                Command::Process(args) => cmd_process(config, args),
                Command::Serve { listen, corpus, snapshot } => cmd_serve(config, listen, corpus, snapshot),
                Command::Search(args) => cmd_search(config, args),
                Command::Eval { corpus } => cmd_eval(config, corpus),
                Command::MockBackend(_) => unreachable!(),
            },
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("svlink: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
