//! Client for an extractor served over the HTTP extraction protocol.

use std::time::Duration;

use ureq::Agent;

use super::protocol::{decode_response, encode_request, EXTRACT_PATH};
use super::{ExtractError, ExtractionRequest, Extractor, SpanCandidate};

const MAX_RESPONSE_BYTES: u64 = 8 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct RemoteExtractor {
    url: String,
    agent: Agent,
}

impl RemoteExtractor {
    /// `endpoint` is either the server base URL or the full `/extract` URL.
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let trimmed = endpoint.trim_end_matches('/');
        let url = if trimmed.ends_with(EXTRACT_PATH) {
            trimmed.to_string()
        } else {
            format!("{trimmed}{EXTRACT_PATH}")
        };
        let config = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self { url, agent: Agent::new_with_config(config) }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn transport_error(&self, err: ureq::Error) -> ExtractError {
        match err {
            ureq::Error::Timeout(_) => ExtractError::Timeout { endpoint: self.url.clone() },
            ureq::Error::BodyExceedsLimit(n) => {
                ExtractError::ProtocolViolation(format!("response larger than {n} bytes"))
            }
            other => ExtractError::EndpointUnreachable { endpoint: self.url.clone(), reason: other.to_string() },
        }
    }
}

/// Issues one extraction call. Spans are re-validated against the context.
pub fn remote_extract(endpoint: &RemoteExtractor, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
    req.validate()?;
    let mut response = endpoint
        .agent
        .post(&endpoint.url)
        .header("content-type", "application/json")
        .send(&encode_request(req)[..])
        .map_err(|e| endpoint.transport_error(e))?;
    let status = response.status().as_u16();
    let body = response
        .body_mut()
        .with_config()
        .limit(MAX_RESPONSE_BYTES)
        .read_to_vec()
        .map_err(|e| endpoint.transport_error(e))?;
    if status != 200 {
        return Err(ExtractError::Status { status, body: String::from_utf8_lossy(&body).chars().take(200).collect() });
    }
    decode_response(&body, req)
}

impl Extractor for RemoteExtractor {
    fn extract(&self, req: &ExtractionRequest) -> Result<Vec<SpanCandidate>, ExtractError> {
        remote_extract(self, req)
    }

    fn name(&self) -> &str {
        &self.url
    }
}
