//! JSON snapshot persistence.
//!
//! The snapshot is one JSON document holding the stored documents and the
//! postings of every field. Postings are rebuilt from the documents on load
//! and must match the stored ones exactly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Field, IndexedDocument, Postings, SearchIndex};
use crate::textproc::Lexicon;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("cannot access snapshot {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt snapshot {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
}

#[derive(Serialize)]
struct SnapshotRef<'a> {
    version: u32,
    documents: &'a BTreeMap<String, IndexedDocument>,
    postings: BTreeMap<Field, &'a Postings>,
}

#[derive(Deserialize)]
struct SnapshotOwned {
    version: u32,
    documents: BTreeMap<String, IndexedDocument>,
    postings: BTreeMap<Field, Postings>,
}

fn as_ref(index: &SearchIndex) -> SnapshotRef<'_> {
    SnapshotRef {
        version: SNAPSHOT_VERSION,
        documents: &index.docs,
        postings: Field::ALL.into_iter().map(|f| (f, &index.postings[f.slot()])).collect(),
    }
}

pub(super) fn write_canonical<W: Write>(index: &SearchIndex, w: W) -> serde_json::Result<()> {
    serde_json::to_writer(w, &as_ref(index))
}

impl SearchIndex {
    /// Writes the snapshot to a temporary file next to `path` and renames it
    /// into place.
    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        let io = |source| SnapshotError::Io { path: path.to_path_buf(), source };
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir).map_err(io)?;
        let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "snapshot".into());
        let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
        let result = (|| {
            let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            write_canonical(self, &mut w)?;
            w.flush()?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
            std::fs::rename(&tmp, path)
        })();
        if result.is_err() {
            let _ = std::fs::remove_file(&tmp);
        }
        result.map_err(io)
    }

    pub fn load(path: &Path, lexicon: Arc<Lexicon>) -> Result<Self, SnapshotError> {
        let bytes = std::fs::read(path).map_err(|source| SnapshotError::Io { path: path.to_path_buf(), source })?;
        let corrupt = |reason: String| SnapshotError::Corrupt { path: path.to_path_buf(), reason };
        let snap: SnapshotOwned = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(corrupt(format!("unsupported version {}", snap.version)));
        }
        let mut index = SearchIndex::new(lexicon);
        for (id, doc) in snap.documents {
            if id != doc.publication_id {
                return Err(corrupt(format!("document key {id:?} does not match its id")));
            }
            index.upsert(doc);
        }
        for field in Field::ALL {
            let empty = Postings::new();
            let stored = snap.postings.get(&field).unwrap_or(&empty);
            if stored != &index.postings[field.slot()] {
                return Err(corrupt(format!("{field:?} postings disagree with stored documents")));
            }
        }
        Ok(index)
    }
}
