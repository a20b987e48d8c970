//! The HTTP extraction protocol.
//!
//! `POST /extract` with a UTF-8 JSON body
//! `{question, context, max_candidates, language_hint?}` answers `200` with
//! `{candidates: [{start_char, end_char, text, score}], no_answer_score?}`
//! or `422` for an invalid request. Offsets count Unicode scalar values.

use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;
use crate::text::CharIndex;

use super::{ExtractError, ExtractionRequest, SpanCandidate};

pub const EXTRACT_PATH: &str = "/extract";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRequest {
    pub question: String,
    pub context: String,
    pub max_candidates: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireCandidate {
    pub start_char: i64,
    pub end_char: i64,
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    pub candidates: Vec<WireCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_answer_score: Option<f64>,
}

/// Body sent with a `422`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireError {
    pub error: String,
}

pub fn encode_request(req: &ExtractionRequest) -> Vec<u8> {
    let wire = WireRequest {
        question: req.question.clone(),
        context: req.context.clone(),
        max_candidates: req.max_candidates as i64,
        language_hint: req.language_hint.as_ref().map(|l| l.code().to_string()),
    };
    serde_json::to_vec(&wire).expect("request serialization is infallible")
}

/// Server side: parse and validate a request body. Any error maps to `422`.
pub fn decode_request(body: &[u8]) -> Result<ExtractionRequest, ExtractError> {
    let wire: WireRequest =
        serde_json::from_slice(body).map_err(|e| ExtractError::InvalidRequest(e.to_string()))?;
    let max_candidates = usize::try_from(wire.max_candidates)
        .map_err(|_| ExtractError::InvalidRequest("max_candidates must be positive".into()))?;
    let language_hint = wire
        .language_hint
        .map(|code| LanguageTag::new(&code))
        .transpose()
        .map_err(|e| ExtractError::InvalidRequest(e.to_string()))?;
    let req = ExtractionRequest { question: wire.question, context: wire.context, max_candidates, language_hint };
    req.validate()?;
    Ok(req)
}

pub fn encode_response(candidates: &[SpanCandidate]) -> Vec<u8> {
    let wire = WireResponse {
        no_answer_score: candidates.first().and_then(|c| c.no_answer_score),
        candidates: candidates
            .iter()
            .map(|c| WireCandidate {
                start_char: c.start_char as i64,
                end_char: c.end_char as i64,
                text: c.text.clone(),
                score: c.score,
            })
            .collect(),
    };
    serde_json::to_vec(&wire).expect("response serialization is infallible")
}

/// Client side: parse a `200` body and check every span against the
/// context that was sent. Extra candidates beyond `max_candidates` are cut.
pub fn decode_response(body: &[u8], req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
    let wire: WireResponse = serde_json::from_slice(body)
        .map_err(|e| ExtractError::ProtocolViolation(format!("malformed response: {e}")))?;
    if let Some(s) = wire.no_answer_score {
        if !s.is_finite() {
            return Err(ExtractError::ProtocolViolation("no_answer_score is not finite".into()));
        }
    }
    let index = CharIndex::new(&req.context);
    let mut out = Vec::with_capacity(wire.candidates.len());
    for (i, c) in wire.candidates.into_iter().take(req.max_candidates).enumerate() {
        let (Ok(start_char), Ok(end_char)) = (usize::try_from(c.start_char), usize::try_from(c.end_char)) else {
            return Err(ExtractError::ProtocolViolation(format!("candidate {i} has a negative offset")));
        };
        if !c.score.is_finite() {
            return Err(ExtractError::ProtocolViolation(format!("candidate {i} score is not finite")));
        }
        let cand = SpanCandidate { start_char, end_char, text: c.text, score: c.score, no_answer_score: wire.no_answer_score };
        cand.check_against(&index)?;
        out.push(cand);
    }
    Ok(out)
}
