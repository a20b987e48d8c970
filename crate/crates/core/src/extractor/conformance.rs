//! Protocol conformance checks against a live `/extract` endpoint.

use std::time::Duration;

use serde::Serialize;
use ureq::Agent;

use crate::lang::LanguageTag;

use super::protocol::EXTRACT_PATH;
use super::remote::{remote_extract, RemoteExtractor};
use super::ExtractionRequest;

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub endpoint: String,
    pub checks: Vec<ConformanceCheck>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn post_raw(agent: &Agent, url: &str, body: &[u8]) -> Result<u16, String> {
    agent
        .post(url)
        .header("content-type", "application/json")
        .send(body)
        .map(|r| r.status().as_u16())
        .map_err(|e| e.to_string())
}

pub fn run_conformance(endpoint: &str, timeout: Duration) -> ConformanceReport {
    let client = RemoteExtractor::new(endpoint, timeout);
    let url = client.url().to_string();
    let agent = Agent::new_with_config(
        Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build(),
    );
    let mut checks = Vec::new();

    let mut span_check = |name, req: ExtractionRequest| {
        let (passed, detail) = match remote_extract(&client, &req) {
            Ok(c) if c.len() <= req.max_candidates => (true, format!("{} valid candidate(s)", c.len())),
            Ok(c) => (false, format!("{} candidates for max {}", c.len(), req.max_candidates)),
            Err(e) => (false, e.to_string()),
        };
        checks.push(ConformanceCheck { name, passed, detail });
    };

    span_check(
        "ascii-context",
        ExtractionRequest::new(
            "When does the office open?",
            "The office opens at eight in the morning. It closes at six.",
        ),
    );
    let mut fr = ExtractionRequest::new(
        "Comment commence un contrat ?",
        "Chez nous, un contrat de travail commence par une période d'essai. Café offert.",
    );
    fr.language_hint = Some(LanguageTag::fr());
    fr.max_candidates = 3;
    span_check("multibyte-offsets-fr", fr);
    let mut ja = ExtractionRequest::new("社員は何人ですか", "会社は東京にあります。社員は三千人です。");
    ja.language_hint = Some(LanguageTag::ja());
    ja.max_candidates = 2;
    span_check("multibyte-offsets-ja", ja);

    for (name, body) in [
        ("reject-empty-question", &br#"{"question":"","context":"text","max_candidates":1}"#[..]),
        ("reject-zero-candidates", br#"{"question":"q","context":"text","max_candidates":0}"#),
        ("reject-malformed-json", b"{\"question\": "),
    ] {
        let (passed, detail) = match post_raw(&agent, &url, body) {
            Ok(422) => (true, "422".to_string()),
            Ok(s) => (false, format!("expected 422, got {s}")),
            Err(e) => (false, e),
        };
        checks.push(ConformanceCheck { name, passed, detail });
    }

    ConformanceReport { endpoint: url.trim_end_matches(EXTRACT_PATH).to_string(), checks }
}
