//! Answer-span extraction.
//!
//! Any backend implements [`Extractor`]: the built-in [`BaselineExtractor`]
//! or a [`RemoteExtractor`] speaking the HTTP extraction protocol. Long
//! contexts go through [`extract_over_chunks`], which windows the context,
//! remaps offsets and merges duplicates found in overlapping windows.

pub mod baseline;
pub mod chunk;
pub mod conformance;
pub mod protocol;
pub mod remote;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;
use crate::text::CharIndex;

pub use baseline::BaselineExtractor;
pub use chunk::{chunk_context, Chunk, ChunkMap, Token, Tokenizer};
pub use remote::RemoteExtractor;

pub const DEFAULT_WINDOW: usize = 384;
pub const DEFAULT_STRIDE: usize = 128;
pub const DEFAULT_MAX_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("invalid extraction request: {0}")]
    InvalidRequest(String),
    #[error("window {window} must exceed stride {stride} > 0")]
    DegenerateWindow { window: usize, stride: usize },
    #[error("extractor endpoint {endpoint} unreachable: {reason}")]
    EndpointUnreachable { endpoint: String, reason: String },
    #[error("extractor endpoint {endpoint} timed out")]
    Timeout { endpoint: String },
    #[error("extractor endpoint answered with status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("extraction protocol violation: {0}")]
    ProtocolViolation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRequest {
    pub question: String,
    pub context: String,
    pub max_candidates: usize,
    /// Language of the context, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<LanguageTag>,
}

impl ExtractionRequest {
    pub fn new(question: impl Into<String>, context: impl Into<String>) -> Self {
        Self {
            question: question.into(),
            context: context.into(),
            max_candidates: DEFAULT_MAX_CANDIDATES,
            language_hint: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExtractError> {
        if self.question.trim().is_empty() {
            return Err(ExtractError::InvalidRequest("question is empty".into()));
        }
        if self.context.is_empty() {
            return Err(ExtractError::InvalidRequest("context is empty".into()));
        }
        if self.max_candidates == 0 {
            return Err(ExtractError::InvalidRequest("max_candidates must be at least 1".into()));
        }
        Ok(())
    }
}

/// An answer span with scalar-value offsets into the request context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanCandidate {
    pub start_char: usize,
    pub end_char: usize,
    pub text: String,
    /// Higher is better.
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_answer_score: Option<f64>,
}

impl SpanCandidate {
    pub fn len(&self) -> usize {
        self.end_char - self.start_char
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Characters shared with `other`.
    pub fn overlap(&self, other: &SpanCandidate) -> usize {
        self.end_char.min(other.end_char).saturating_sub(self.start_char.max(other.start_char))
    }

    /// True when the overlap exceeds half of the shorter span.
    pub fn mostly_overlaps(&self, other: &SpanCandidate) -> bool {
        2 * self.overlap(other) > self.len().min(other.len())
    }

    /// Checks `0 <= start < end <= len(context)` and that `text` is the slice.
    pub fn check_against(&self, context: &CharIndex<'_>) -> Result<(), ExtractError> {
        if self.start_char >= self.end_char {
            return Err(ExtractError::ProtocolViolation(format!(
                "span start {} is not before end {}",
                self.start_char, self.end_char
            )));
        }
        match context.slice(self.start_char, self.end_char) {
            None => Err(ExtractError::ProtocolViolation(format!(
                "span {}..{} exceeds context length {}",
                self.start_char,
                self.end_char,
                context.len()
            ))),
            Some(s) if s != self.text => Err(ExtractError::ProtocolViolation(format!(
                "span text {:?} differs from context slice {:?}",
                self.text, s
            ))),
            Some(_) => Ok(()),
        }
    }
}

/// Ranking used everywhere candidates are ordered: score descending, then
/// earlier start, then shorter span.
pub fn rank_candidates(a: &SpanCandidate, b: &SpanCandidate) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.start_char.cmp(&b.start_char))
        .then(a.len().cmp(&b.len()))
}

pub trait Extractor: Send + Sync {
    /// Ranked candidates for one question/context pair.
    fn extract(&self, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError>;

    fn name(&self) -> &str {
        "extractor"
    }
}

impl<T: Extractor + ?Sized> Extractor for std::sync::Arc<T> {
    fn extract(&self, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
        (**self).extract(req)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Runs `extractor` over every window of the context and returns the global
/// top `req.max_candidates`. Candidates from different windows that overlap
/// by more than half of the shorter span are merged, keeping the better one.
pub fn extract_over_chunks(
    extractor: &dyn Extractor,
    req: &ExtractionRequest,
    window: usize,
    stride: usize,
) -> Result<Vec<SpanCandidate>, ExtractError> {
    req.validate()?;
    let tokenizer = Tokenizer::for_text(&req.context, req.language_hint.as_ref());
    let map = chunk_context(&req.context, window, stride, tokenizer)?;
    let index = CharIndex::new(&req.context);

    let per_chunk: Vec<Vec<(usize, SpanCandidate)>> = map
        .chunks
        .par_iter()
        .enumerate()
        .map(|(i, chunk)| {
            let sub = ExtractionRequest { context: chunk.text.clone(), ..req.clone() };
            let found = extractor.extract(&sub)?;
            found
                .into_iter()
                .map(|mut c| {
                    c.start_char += chunk.base_offset;
                    c.end_char += chunk.base_offset;
                    c.check_against(&index)?;
                    Ok((i, c))
                })
                .collect()
        })
        .collect::<Result<_, ExtractError>>()?;

    let mut all: Vec<(usize, SpanCandidate)> = per_chunk.into_iter().flatten().collect();
    all.sort_by(|a, b| rank_candidates(&a.1, &b.1));
    let mut kept: Vec<(usize, SpanCandidate)> = Vec::new();
    for (chunk, cand) in all {
        let duplicate = kept
            .iter()
            .any(|(other_chunk, other)| *other_chunk != chunk && other.mostly_overlaps(&cand));
        if !duplicate {
            kept.push((chunk, cand));
        }
        if kept.len() == req.max_candidates {
            break;
        }
    }
    Ok(kept.into_iter().map(|(_, c)| c).collect())
}
