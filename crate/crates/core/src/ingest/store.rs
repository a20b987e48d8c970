//! On-disk knowledge base.
//!
//! Layout under the store directory:
//!
//! ```text
//! index.json                      metadata of every source
//! sources/<id>-<hash12>.txt       stripped text, one file per snapshot
//! ```
//!
//! A new snapshot is written to its own file before the index is atomically
//! replaced, so an interrupted update leaves the previous snapshot readable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;

const INDEX_FILE: &str = "index.json";
const SOURCES_DIR: &str = "sources";

static SOURCE_ID: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,127}$").expect("valid regex"));

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("invalid source id {0:?}: use letters, digits, '.', '_' or '-'")]
    InvalidId(String),
    #[error("store i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store index {path}: {reason}")]
    CorruptIndex { path: PathBuf, reason: String },
}

pub fn validate_source_id(id: &str) -> Result<(), StoreError> {
    if SOURCE_ID.is_match(id) {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeSource {
    pub id: String,
    pub url: String,
    pub title: String,
    /// When the current text snapshot was fetched.
    pub fetched_at: DateTime<Utc>,
    /// Last successful fetch, changed or not.
    pub checked_at: DateTime<Utc>,
    /// Hex SHA-256 of the raw fetched bytes.
    pub content_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageTag>,
    #[serde(skip)]
    pub text: String,
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    #[serde(flatten)]
    source: KnowledgeSource,
    text_file: String,
}

#[derive(Serialize, Deserialize)]
struct Index {
    sources: Vec<IndexEntry>,
}

#[derive(Debug, Default)]
pub struct SourceStore {
    dir: Option<PathBuf>,
    sources: BTreeMap<String, KnowledgeSource>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn text_file_name(source: &KnowledgeSource) -> String {
    format!("{}-{}.txt", source.id, &source.content_hash[..source.content_hash.len().min(12)])
}

impl SourceStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a store directory and loads its index.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let sources_dir = dir.join(SOURCES_DIR);
        fs::create_dir_all(&sources_dir).map_err(io_err(&sources_dir))?;
        let index_path = dir.join(INDEX_FILE);
        let mut sources = BTreeMap::new();
        if index_path.exists() {
            let bytes = fs::read(&index_path).map_err(io_err(&index_path))?;
            let index: Index = serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::CorruptIndex { path: index_path.clone(), reason: e.to_string() })?;
            for entry in index.sources {
                validate_source_id(&entry.source.id)?;
                let text_path = sources_dir.join(&entry.text_file);
                let mut source = entry.source;
                source.text = fs::read_to_string(&text_path).map_err(io_err(&text_path))?;
                sources.insert(source.id.clone(), source);
            }
        }
        Ok(Self { dir: Some(dir), sources })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<&KnowledgeSource> {
        self.sources.get(id)
    }

    /// Sources in id order.
    pub fn iter(&self) -> impl Iterator<Item = &KnowledgeSource> {
        self.sources.values()
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Inserts or replaces a source and persists it when disk-backed.
    pub fn upsert(&mut self, source: KnowledgeSource) -> Result<(), StoreError> {
        validate_source_id(&source.id)?;
        let Some(dir) = self.dir.clone() else {
            self.sources.insert(source.id.clone(), source);
            return Ok(());
        };
        let sources_dir = dir.join(SOURCES_DIR);
        let new_file = text_file_name(&source);
        write_atomic(&sources_dir.join(&new_file), source.text.as_bytes())?;
        let old_file = self.sources.get(&source.id).map(text_file_name);

        let mut next = self.sources.clone();
        next.insert(source.id.clone(), source);
        self.write_index(&dir, &next)?;
        self.sources = next;
        if let Some(old) = old_file.filter(|o| *o != new_file) {
            let _ = fs::remove_file(sources_dir.join(old));
        }
        Ok(())
    }

    fn write_index(&self, dir: &Path, sources: &BTreeMap<String, KnowledgeSource>) -> Result<(), StoreError> {
        let index = Index {
            sources: sources
                .values()
                .map(|s| IndexEntry { text_file: text_file_name(s), source: s.clone() })
                .collect(),
        };
        let bytes = serde_json::to_vec_pretty(&index).expect("index serialization is infallible");
        write_atomic(&dir.join(INDEX_FILE), &bytes)
    }
}
