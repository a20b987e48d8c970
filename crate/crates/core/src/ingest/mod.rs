//! Knowledge-base ingestion: fetch configured URLs, strip them to text and
//! keep one snapshot per source.

pub mod entities;
pub mod fetch;
pub mod html;
pub mod store;

use chrono::{Duration as ChronoDuration, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lang::LanguageTag;

pub use fetch::{decode_body, fetch_source, FetchConfig, FetchError, Fetched};
pub use html::{extract_title, html_to_text};
pub use store::{validate_source_id, KnowledgeSource, SourceStore, StoreError};

/// One configured source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub id: String,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RefreshStatus {
    Updated,
    Unchanged,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefreshEntry {
    pub id: String,
    pub url: String,
    #[serde(flatten)]
    pub status: RefreshStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefreshReport {
    pub entries: Vec<RefreshEntry>,
}

impl RefreshReport {
    pub fn count(&self, pred: impl Fn(&RefreshStatus) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(&e.status)).count()
    }
}

/// A fetched and stripped page, not yet applied to a store.
#[derive(Debug, Clone)]
pub struct FetchOutcome {
    pub entry: SourceEntry,
    pub result: Result<Page, String>,
}

#[derive(Debug, Clone)]
pub struct Page {
    pub content_hash: String,
    pub title: String,
    pub text: String,
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fetch_page(entry: &SourceEntry, config: &FetchConfig) -> Result<Page, String> {
    let fetched = fetch_source(&entry.url, config).map_err(|e| e.to_string())?;
    let content_type = fetched.content_type.as_deref();
    let decoded = decode_body(&fetched.bytes, content_type);
    let (title, text) = if fetch::is_plain_text(content_type) {
        (None, decoded.trim().to_string())
    } else {
        (extract_title(&decoded), html_to_text(&decoded))
    };
    if text.is_empty() {
        return Err("page has no text content".into());
    }
    Ok(Page { content_hash: content_hash(&fetched.bytes), title: title.unwrap_or_else(|| entry.url.clone()), text })
}

/// Fetches every entry concurrently. Touches no store.
pub fn fetch_all(entries: &[SourceEntry], config: &FetchConfig) -> Vec<FetchOutcome> {
    entries
        .par_iter()
        .map(|entry| FetchOutcome { entry: entry.clone(), result: fetch_page(entry, config) })
        .collect()
}

/// Applies fetch outcomes in order. A failed fetch or write leaves the
/// previous snapshot of that source untouched.
pub fn apply_outcomes(store: &mut SourceStore, outcomes: Vec<FetchOutcome>) -> RefreshReport {
    let mut report = RefreshReport::default();
    for FetchOutcome { entry, result } in outcomes {
        let status = match result {
            Err(reason) => RefreshStatus::Failed { reason },
            Ok(page) => {
                let now = Utc::now();
                let previous = store.get(&entry.id).cloned();
                let (source, status) = match previous {
                    Some(prev) if prev.content_hash == page.content_hash => {
                        let source = KnowledgeSource {
                            url: entry.url.clone(),
                            language: entry.language.clone(),
                            checked_at: now.max(prev.checked_at),
                            ..prev
                        };
                        (source, RefreshStatus::Unchanged)
                    }
                    prev => {
                        // Keep fetched_at strictly increasing even on a coarse clock.
                        let fetched_at = match prev {
                            Some(p) if now <= p.fetched_at => p.fetched_at + ChronoDuration::microseconds(1),
                            _ => now,
                        };
                        let source = KnowledgeSource {
                            id: entry.id.clone(),
                            url: entry.url.clone(),
                            title: page.title,
                            fetched_at,
                            checked_at: fetched_at,
                            content_hash: page.content_hash,
                            language: entry.language.clone(),
                            text: page.text,
                        };
                        (source, RefreshStatus::Updated)
                    }
                };
                match store.upsert(source) {
                    Ok(()) => status,
                    Err(e) => RefreshStatus::Failed { reason: e.to_string() },
                }
            }
        };
        report.entries.push(RefreshEntry { id: entry.id, url: entry.url, status });
    }
    report
}

/// Fetches, strips and stores every url; failures are reported per url.
pub fn refresh_store(store: &mut SourceStore, entries: &[SourceEntry], config: &FetchConfig) -> RefreshReport {
    apply_outcomes(store, fetch_all(entries, config))
}
