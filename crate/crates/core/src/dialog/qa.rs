use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DialogError;
use crate::extractor::{extract_over_chunks, rank_candidates, ExtractionRequest, Extractor, SpanCandidate};
use crate::extractor::{DEFAULT_MAX_CANDIDATES, DEFAULT_STRIDE, DEFAULT_WINDOW};
use crate::ingest::SourceStore;

pub const DEFAULT_THETA_ANSWER: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaParams {
    pub window: usize,
    pub stride: usize,
    pub max_candidates: usize,
    pub theta_answer: f64,
}

impl Default for QaParams {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            stride: DEFAULT_STRIDE,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            theta_answer: DEFAULT_THETA_ANSWER,
        }
    }
}

/// A candidate span together with the source it was found in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcedCandidate {
    pub source_id: String,
    pub source_url: String,
    pub candidate: SpanCandidate,
}

impl SourcedCandidate {
    fn rank(&self, other: &Self) -> Ordering {
        other
            .candidate
            .score
            .partial_cmp(&self.candidate.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.source_id.cmp(&other.source_id))
            .then_with(|| rank_candidates(&self.candidate, &other.candidate))
    }

    /// Same source and at least one shared character.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.source_id == other.source_id && self.candidate.overlap(&other.candidate) > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QaOutcome {
    Answer {
        best: SourcedCandidate,
        /// Remaining candidates from every source, best first.
        alternatives: Vec<SourcedCandidate>,
    },
    NoAnswer,
}

/// Runs the extractor over every source and keeps the best span overall.
/// Sources whose extraction fails are logged and skipped.
pub fn qa_fallback(
    question: &str,
    store: &SourceStore,
    extractor: &dyn Extractor,
    params: &QaParams,
) -> Result<QaOutcome, DialogError> {
    if store.is_empty() {
        return Err(DialogError::EmptyStore);
    }
    let sources: Vec<_> = store.iter().collect();
    let results: Vec<_> = sources
        .par_iter()
        .map(|source| {
            let req = ExtractionRequest {
                question: question.to_string(),
                context: source.text.clone(),
                max_candidates: params.max_candidates,
                language_hint: source.language.clone(),
            };
            (source, extract_over_chunks(extractor, &req, params.window, params.stride))
        })
        .collect();

    let mut failures = Vec::new();
    let mut all = Vec::new();
    for (source, result) in results {
        match result {
            Ok(cands) => all.extend(cands.into_iter().map(|candidate| SourcedCandidate {
                source_id: source.id.clone(),
                source_url: source.url.clone(),
                candidate,
            })),
            Err(e) => {
                log::warn!("extraction failed for source {}: {e}", source.id);
                failures.push(format!("{}: {e}", source.id));
            }
        }
    }
    if failures.len() == sources.len() {
        return Err(DialogError::AllSourcesFailed(failures));
    }
    all.sort_by(SourcedCandidate::rank);
    all.retain(|c| c.candidate.score >= params.theta_answer);
    if all.is_empty() {
        return Ok(QaOutcome::NoAnswer);
    }
    let best = all.remove(0);
    Ok(QaOutcome::Answer { best, alternatives: all })
}

/// Next answer after negative feedback: the best alternative that shares
/// no characters with any span already shown.
pub fn next_best(alternatives: &[SourcedCandidate], shown: &[SourcedCandidate]) -> QaOutcome {
    let fresh: Vec<SourcedCandidate> =
        alternatives.iter().filter(|a| !shown.iter().any(|s| s.overlaps(a))).cloned().collect();
    let mut fresh = fresh.into_iter();
    match fresh.next() {
        Some(best) => QaOutcome::Answer { best, alternatives: fresh.collect() },
        None => QaOutcome::NoAnswer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::{BaselineExtractor, ExtractError};
    use crate::ingest::KnowledgeSource;
    use crate::text::CharIndex;
    use chrono::Utc;

    fn store(texts: &[(&str, &str)]) -> SourceStore {
        let mut s = SourceStore::in_memory();
        for (id, text) in texts {
            s.upsert(KnowledgeSource {
                id: id.to_string(),
                url: format!("https://intranet.example/{id}"),
                title: id.to_string(),
                fetched_at: Utc::now(),
                checked_at: Utc::now(),
                content_hash: "00".into(),
                language: Some(crate::LanguageTag::en()),
                text: text.to_string(),
            })
            .unwrap();
        }
        s
    }

    #[test]
    fn empty_store_is_error() {
        let r = qa_fallback("q", &SourceStore::in_memory(), &BaselineExtractor::default(), &QaParams::default());
        assert_eq!(r, Err(DialogError::EmptyStore));
    }

    #[test]
    fn dominant_source_wins() {
        let s = store(&[
            ("a", "The cafeteria serves lunch daily. Parking is free."),
            ("b", "Interns receive a monthly stipend of 900 euros. Contracts last six months."),
            ("c", "The library closes at night. Books can be renewed."),
        ]);
        let out = qa_fallback("What monthly stipend do interns receive?", &s, &BaselineExtractor::default(), &QaParams::default()).unwrap();
        let QaOutcome::Answer { best, alternatives } = out else { panic!("expected an answer") };
        assert_eq!(best.source_id, "b");
        let text = &s.get("b").unwrap().text;
        assert_eq!(CharIndex::new(text).slice(best.candidate.start_char, best.candidate.end_char), Some(best.candidate.text.as_str()));
        assert!(alternatives.iter().all(|a| a.candidate.score <= best.candidate.score));
    }

    #[test]
    fn threshold_gives_no_answer() {
        let s = store(&[("a", "Interns receive a stipend.")]);
        let params = QaParams { theta_answer: 1e9, ..QaParams::default() };
        assert_eq!(qa_fallback("stipend interns", &s, &BaselineExtractor::default(), &params), Ok(QaOutcome::NoAnswer));
        assert_eq!(qa_fallback("zebra", &s, &BaselineExtractor::default(), &QaParams::default()), Ok(QaOutcome::NoAnswer));
    }

    struct FailOn(&'static str);
    impl Extractor for FailOn {
        fn extract(&self, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
            if req.context.contains(self.0) {
                return Err(ExtractError::Timeout { endpoint: "test".into() });
            }
            BaselineExtractor::default().extract(req)
        }
    }

    #[test]
    fn failing_source_skipped() {
        let s = store(&[("a", "Interns receive a stipend."), ("b", "BROKEN stipend interns receive")]);
        let out = qa_fallback("stipend interns", &s, &FailOn("BROKEN"), &QaParams::default()).unwrap();
        assert!(matches!(out, QaOutcome::Answer { best, .. } if best.source_id == "a"));
        let all_fail = qa_fallback("stipend", &s, &FailOn("stipend"), &QaParams::default());
        assert!(matches!(all_fail, Err(DialogError::AllSourcesFailed(f)) if f.len() == 2));
    }

    #[test]
    fn ties_prefer_lower_source_id() {
        let text = "Interns receive a stipend.";
        let s = store(&[("z", text), ("m", text)]);
        let out = qa_fallback("stipend", &s, &BaselineExtractor::default(), &QaParams::default()).unwrap();
        assert!(matches!(out, QaOutcome::Answer { best, .. } if best.source_id == "m"));
    }

    #[test]
    fn next_best_skips_overlaps() {
        let sc = |src: &str, s, e, score| SourcedCandidate {
            source_id: src.into(),
            source_url: String::new(),
            candidate: SpanCandidate { start_char: s, end_char: e, text: String::new(), score, no_answer_score: None },
        };
        let shown = [sc("a", 0, 10, 3.0)];
        let alts = [sc("a", 5, 12, 2.0), sc("b", 0, 10, 1.5), sc("a", 20, 30, 1.0)];
        let QaOutcome::Answer { best, alternatives } = next_best(&alts, &shown) else { panic!() };
        assert_eq!(best, alts[1]);
        assert_eq!(alternatives, [alts[2].clone()]);
        assert_eq!(next_best(&[], &shown), QaOutcome::NoAnswer);
    }
}
