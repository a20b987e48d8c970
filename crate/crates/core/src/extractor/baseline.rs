//! Deterministic lexical span scorer used when no neural extractor is
//! attached.
//!
//! Question tokens are weighted by a smoothed inverse sentence frequency,
//! `ln(1 + N / df)`, over the sentences of the context. Every span of up to
//! `max_span_tokens` tokens is scored by the summed weight of the distinct
//! question tokens it contains, divided by the square root of its length.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::lang::{detect_script_class, LanguageTag};
use crate::metrics::{normalize_answer, NormalizationProfile, ProfileResolver, ProfileSet, Tokenization};
use crate::text::CharIndex;

use super::chunk::{Token, Tokenizer};
use super::{ExtractError, ExtractionRequest, Extractor, SpanCandidate};

pub const DEFAULT_MAX_SPAN_TOKENS: usize = 30;

/// Characters that end a sentence for weighting purposes.
pub const SENTENCE_DELIMITERS: &[char] = &['.', '!', '?', '。', '！', '？', '\n'];

#[derive(Debug, Clone)]
pub struct BaselineExtractor {
    profiles: ProfileSet,
    max_span_tokens: usize,
}

impl Default for BaselineExtractor {
    fn default() -> Self {
        Self { profiles: ProfileSet::default(), max_span_tokens: DEFAULT_MAX_SPAN_TOKENS }
    }
}

/// A context prepared for scoring: raw tokens, their normalized forms and
/// the sentence each token belongs to.
#[derive(Debug, Clone)]
pub struct ScoringContext {
    pub tokens: Vec<Token>,
    pub normalized: Vec<Vec<String>>,
    pub sentence_of: Vec<usize>,
}

impl ScoringContext {
    pub fn new(context: &str, profile: &NormalizationProfile) -> Self {
        let tokenizer = match profile.tokenization {
            Tokenization::Whitespace => Tokenizer::Whitespace,
            Tokenization::PerCharacter => Tokenizer::Character,
        };
        let chars: Vec<char> = context.chars().collect();
        let tokens = tokenizer.tokenize(context);
        let normalized = tokens
            .iter()
            .map(|t| normalize_answer(&chars[t.start..t.end].iter().collect::<String>(), profile))
            .collect();
        // A sentence ends after a token whose last character, or the gap
        // following it, holds a delimiter.
        let mut sentence_of = Vec::with_capacity(tokens.len());
        let mut sentence = 0;
        for (i, t) in tokens.iter().enumerate() {
            sentence_of.push(sentence);
            let gap_end = tokens.get(i + 1).map_or(chars.len(), |n| n.start);
            if chars[t.end - 1..gap_end].iter().any(|c| SENTENCE_DELIMITERS.contains(c)) {
                sentence += 1;
            }
        }
        Self { tokens, normalized, sentence_of }
    }

    /// `ln(1 + N / df)` for every question token that occurs in the context.
    pub fn idf(&self, question_tokens: &BTreeSet<String>) -> HashMap<String, f64> {
        let mut per_sentence: Vec<BTreeSet<&str>> = Vec::new();
        for (i, forms) in self.normalized.iter().enumerate() {
            let s = self.sentence_of[i];
            if per_sentence.len() <= s {
                per_sentence.resize_with(s + 1, BTreeSet::new);
            }
            per_sentence[s].extend(forms.iter().map(String::as_str));
        }
        per_sentence.retain(|s| !s.is_empty());
        let n = per_sentence.len() as f64;
        question_tokens
            .iter()
            .filter_map(|q| {
                let df = per_sentence.iter().filter(|s| s.contains(q.as_str())).count();
                (df > 0).then(|| (q.clone(), (1.0 + n / df as f64).ln()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    score: f64,
    start: usize,
    end: usize,
}

/// Higher score first, then earlier start, then shorter span.
fn rank(a: &Scored, b: &Scored) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.start.cmp(&b.start))
        .then((a.end - a.start).cmp(&(b.end - b.start)))
}

impl BaselineExtractor {
    pub fn new(profiles: ProfileSet, max_span_tokens: usize) -> Self {
        Self { profiles, max_span_tokens: max_span_tokens.max(1) }
    }

    pub fn profile_for(&self, req: &ExtractionRequest) -> NormalizationProfile {
        let language = req.language_hint.clone().unwrap_or_else(|| {
            LanguageTag::with_script_class("und", detect_script_class(&req.context)).expect("static tag")
        });
        self.profiles.resolve(&language)
    }

    fn rank_spans(&self, req: &ExtractionRequest) -> (ScoringContext, Vec<Scored>) {
        let profile = self.profile_for(req);
        let ctx = ScoringContext::new(&req.context, &profile);
        let question: BTreeSet<String> = normalize_answer(&req.question, &profile).into_iter().collect();
        let idf = ctx.idf(&question);
        // Question tokens in canonical order; weights summed in that order so
        // equal token sets give bit-identical scores.
        let weighted: Vec<(&str, f64)> = question
            .iter()
            .filter_map(|q| idf.get(q).map(|w| (q.as_str(), *w)))
            .collect();
        if weighted.is_empty() {
            return (ctx, Vec::new());
        }
        let hits: Vec<Vec<usize>> = ctx
            .normalized
            .iter()
            .map(|forms| {
                weighted
                    .iter()
                    .enumerate()
                    .filter(|(_, (q, _))| forms.iter().any(|f| f == q))
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect();

        let n = ctx.tokens.len();
        let mut spans = Vec::new();
        let mut present = vec![false; weighted.len()];
        for start in 0..n {
            present.iter_mut().for_each(|p| *p = false);
            for end in start + 1..=(start + self.max_span_tokens).min(n) {
                for &k in &hits[end - 1] {
                    present[k] = true;
                }
                let sum: f64 = weighted
                    .iter()
                    .zip(&present)
                    .filter(|(_, p)| **p)
                    .map(|((_, w), _)| *w)
                    .sum();
                if sum > 0.0 {
                    spans.push(Scored { score: sum / ((end - start) as f64).sqrt(), start, end });
                }
            }
        }
        (ctx, spans)
    }
}

impl Extractor for BaselineExtractor {
    fn extract(&self, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
        req.validate()?;
        let (ctx, mut spans) = self.rank_spans(req);
        let k = req.max_candidates.min(spans.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        if k < spans.len() {
            spans.select_nth_unstable_by(k - 1, rank);
            spans.truncate(k);
        }
        spans.sort_by(rank);
        let no_answer_score = 0.0 - spans[0].score;
        let index = CharIndex::new(&req.context);
        Ok(spans
            .into_iter()
            .map(|s| {
                let start_char = ctx.tokens[s.start].start;
                let end_char = ctx.tokens[s.end - 1].end;
                SpanCandidate {
                    start_char,
                    end_char,
                    text: index.slice(start_char, end_char).expect("token offsets in range").to_string(),
                    score: s.score,
                    no_answer_score: Some(no_answer_score),
                }
            })
            .collect())
    }

    fn name(&self) -> &str {
        "baseline"
    }
}
