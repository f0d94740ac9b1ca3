//! Domain records and the on-disk corpus bundle.
//!
//! A bundle directory holds `publications.jsonl`, `datasets.jsonl`,
//! `variables.jsonl` and optionally `gold_links.jsonl`, one JSON object per
//! line. Unknown fields are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::hash::Fnv1a64;
use crate::textproc::{Language, Lexicon, SentenceSpan};

pub const PUBLICATIONS_FILE: &str = "publications.jsonl";
pub const DATASETS_FILE: &str = "datasets.jsonl";
pub const VARIABLES_FILE: &str = "variables.jsonl";
pub const GOLD_LINKS_FILE: &str = "gold_links.jsonl";

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    pub year: i32,
    #[serde(rename = "lang")]
    pub language: Language,
    #[serde(default)]
    pub dataset_ids: Vec<String>,
    #[serde(default)]
    pub full_text: String,
    /// Sentence spans of `full_text`, computed at ingest.
    #[serde(skip)]
    pub sentences: Vec<SentenceSpan>,
}

impl Publication {
    /// Recomputes `sentences` from `full_text`.
    pub fn segment(&mut self, lexicon: &Lexicon) {
        self.sentences = lexicon.segment_sentences(&self.full_text);
    }

    /// Stable FNV-1a hash (16 hex digits) over id, title, abstract,
    /// full text and the sorted dataset ids.
    pub fn content_hash(&self) -> String {
        let mut h = Fnv1a64::new();
        h.write_field(&self.id);
        h.write_field(&self.title);
        h.write_field(&self.abstract_text);
        h.write_field(&self.full_text);
        let mut ids: Vec<&str> = self.dataset_ids.iter().map(String::as_str).collect();
        ids.sort_unstable();
        h.write(&(ids.len() as u64).to_le_bytes());
        for id in ids {
            h.write_field(id);
        }
        h.finish_hex()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchDataset {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub variable_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyVariable {
    pub id: String,
    pub dataset_id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub question_text: String,
    #[serde(default)]
    pub answer_categories: Vec<String>,
}

impl SurveyVariable {
    /// Label, question text and answer categories joined with spaces,
    /// skipping empty parts.
    pub fn text(&self) -> String {
        std::iter::once(self.label.as_str())
            .chain(std::iter::once(self.question_text.as_str()))
            .chain(self.answer_categories.iter().map(String::as_str))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldLink {
    pub publication_id: String,
    pub sentence_index: usize,
    pub variable_id: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusBundle {
    pub publications: BTreeMap<String, Publication>,
    pub datasets: BTreeMap<String, ResearchDataset>,
    pub variables: BTreeMap<String, SurveyVariable>,
    pub gold_links: Option<Vec<GoldLink>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing corpus file {0}")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed record: {reason}")]
    MalformedRecord { file: String, line: usize, reason: String },
    #[error("{file}: duplicate id {id:?}")]
    DuplicateId { file: String, id: String },
}

impl CorpusError {
    /// True for filesystem-level failures as opposed to content problems.
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::MissingFile(_) | CorpusError::Io { .. })
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, CorpusError> {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let content = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingFile(path.to_path_buf())
        } else {
            CorpusError::Io { path: path.to_path_buf(), source }
        }
    })?;
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
            file: file.clone(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

fn keyed<T>(
    file: &str,
    records: Vec<(usize, T)>,
    id: impl Fn(&T) -> &str,
    check: impl Fn(&T) -> Result<(), String>,
) -> Result<BTreeMap<String, T>, CorpusError> {
    let mut map = BTreeMap::new();
    for (line, rec) in records {
        let key = id(&rec).to_owned();
        if key.is_empty() {
            return Err(CorpusError::MalformedRecord { file: file.into(), line, reason: "empty id".into() });
        }
        check(&rec).map_err(|reason| CorpusError::MalformedRecord { file: file.into(), line, reason })?;
        if map.contains_key(&key) {
            return Err(CorpusError::DuplicateId { file: file.into(), id: key });
        }
        map.insert(key, rec);
    }
    Ok(map)
}

/// Loads a bundle directory and segments every publication's full text.
pub fn load_corpus(root: &Path, lexicon: &Lexicon) -> Result<CorpusBundle, CorpusError> {
    let publications = keyed(
        PUBLICATIONS_FILE,
        read_jsonl::<Publication>(&root.join(PUBLICATIONS_FILE))?,
        |p| &p.id,
        |p| {
            if (MIN_YEAR..=MAX_YEAR).contains(&p.year) {
                Ok(())
            } else {
                Err(format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", p.year))
            }
        },
    )?;
    let datasets = keyed(
        DATASETS_FILE,
        read_jsonl::<ResearchDataset>(&root.join(DATASETS_FILE))?,
        |d| &d.id,
        |_| Ok(()),
    )?;
    let variables = keyed(
        VARIABLES_FILE,
        read_jsonl::<SurveyVariable>(&root.join(VARIABLES_FILE))?,
        |v| &v.id,
        |v| {
            if v.label.trim().is_empty() && v.question_text.trim().is_empty() {
                Err("variable needs a label or a question text".into())
            } else {
                Ok(())
            }
        },
    )?;
    let gold_path = root.join(GOLD_LINKS_FILE);
    let gold_links = if gold_path.exists() {
        Some(read_jsonl::<GoldLink>(&gold_path)?.into_iter().map(|(_, g)| g).collect())
    } else {
        None
    };

    let mut bundle = CorpusBundle { publications, datasets, variables, gold_links };
    for p in bundle.publications.values_mut() {
        p.segment(lexicon);
    }
    log::info!(
        "loaded corpus from {}: {} publications, {} datasets, {} variables",
        root.display(),
        bundle.publications.len(),
        bundle.datasets.len(),
        bundle.variables.len()
    );
    Ok(bundle)
}

/// Writes the bundle as JSONL files into `root`, records in id order.
pub fn write_corpus(bundle: &CorpusBundle, root: &Path) -> std::io::Result<()> {
    fs::create_dir_all(root)?;
    fn write<'a, T: Serialize + 'a>(path: PathBuf, records: impl Iterator<Item = &'a T>) -> std::io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
    write(root.join(PUBLICATIONS_FILE), bundle.publications.values())?;
    write(root.join(DATASETS_FILE), bundle.datasets.values())?;
    write(root.join(VARIABLES_FILE), bundle.variables.values())?;
    if let Some(gold) = &bundle.gold_links {
        write(root.join(GOLD_LINKS_FILE), gold.iter())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// Publication lists a dataset id that does not exist.
    UnknownDataset,
    /// Dataset lists a variable id that does not exist.
    UnknownVariable,
    /// Variable names an owning dataset that does not exist.
    VariableDatasetMissing,
    GoldUnknownPublication,
    GoldUnknownVariable,
    BadSentenceIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    /// Id of the record holding the dangling reference.
    pub subject: String,
    /// The reference that could not be resolved.
    pub reference: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = serde_json::to_value(self.kind).ok();
        let kind = kind.as_ref().and_then(|k| k.as_str()).unwrap_or("?");
        write!(f, "{kind}: {} -> {}", self.subject, self.reference)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<Finding>,
}

/// Reports every dangling reference in the bundle.
pub fn validate_links(bundle: &CorpusBundle) -> ValidationReport {
    let mut findings = BTreeSet::new();
    let mut add = |kind, subject: &str, reference: String| {
        findings.insert(Finding { kind, subject: subject.to_owned(), reference });
    };
    for p in bundle.publications.values() {
        for d in &p.dataset_ids {
            if !bundle.datasets.contains_key(d) {
                add(FindingKind::UnknownDataset, &p.id, d.clone());
            }
        }
    }
    for d in bundle.datasets.values() {
        for v in &d.variable_ids {
            if !bundle.variables.contains_key(v) {
                add(FindingKind::UnknownVariable, &d.id, v.clone());
            }
        }
    }
    for v in bundle.variables.values() {
        if !bundle.datasets.contains_key(&v.dataset_id) {
            add(FindingKind::VariableDatasetMissing, &v.id, v.dataset_id.clone());
        }
    }
    for g in bundle.gold_links.iter().flatten() {
        let subject = format!("{}#{}", g.publication_id, g.sentence_index);
        match bundle.publications.get(&g.publication_id) {
            None => add(FindingKind::GoldUnknownPublication, &subject, g.publication_id.clone()),
            Some(p) if g.sentence_index >= p.sentences.len() => {
                add(FindingKind::BadSentenceIndex, &subject, g.sentence_index.to_string())
            }
            Some(_) => {}
        }
        if !bundle.variables.contains_key(&g.variable_id) {
            add(FindingKind::GoldUnknownVariable, &subject, g.variable_id.clone());
        }
    }
    let findings: Vec<Finding> = findings.into_iter().collect();
    ValidationReport { ok: findings.is_empty(), findings }
}
