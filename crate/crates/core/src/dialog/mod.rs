//! Intent-first dialog with extractive-QA fallback.
//!
//! Each utterance goes to the intent classifier first. A match is answered
//! with one of the intent's scripted responses; otherwise every knowledge
//! source is searched and the best span overall is returned. Negative
//! feedback on a scripted answer re-asks the question through QA, and
//! negative feedback on a QA answer moves to the next-best span.

pub mod classify;
pub mod intents;
pub mod qa;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::extractor::Extractor;
use crate::ingest::SourceStore;

pub use classify::{scripted_response, IntentClassifier, IntentMatch, LexicalClassifier, DEFAULT_TAU_INTENT};
pub use intents::{load_intents, parse_intents, IntentSet, ScriptedIntent};
pub use qa::{next_best, qa_fallback, QaOutcome, QaParams, SourcedCandidate, DEFAULT_THETA_ANSWER};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DialogError {
    #[error("missing entities: {}", .0.join(", "))]
    MissingEntities(Vec<String>),
    #[error("knowledge base is empty")]
    EmptyStore,
    #[error("extraction failed for every source: {}", .0.join("; "))]
    AllSourcesFailed(Vec<String>),
    #[error("unknown turn {turn_id} in session {session_id:?}")]
    UnknownTurn { session_id: String, turn_id: u64 },
    #[error("invalid intents: {0}")]
    InvalidIntents(String),
    #[error("audit log: {0}")]
    Audit(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    Scripted { intent_id: String },
    Qa(SourcedCandidate),
    NoAnswer,
}

impl Resolution {
    pub fn kind(&self) -> &'static str {
        match self {
            Resolution::Scripted { .. } => "scripted",
            Resolution::Qa(_) => "qa",
            Resolution::NoAnswer => "no_answer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogTurn {
    pub session_id: String,
    pub turn_id: u64,
    pub utterance: String,
    pub resolution: Resolution,
    pub response_text: String,
    pub timestamp: DateTime<Utc>,
    /// Turn whose negative feedback produced this one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follows_feedback_on: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub session_id: String,
    pub turn_id: u64,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogConfig {
    pub tau_intent: f64,
    pub qa: QaParams,
    pub rng_seed: u64,
    pub apology: String,
    /// Sent when a matched intent lacks entities; `{missing}` lists them.
    pub clarification: String,
}

impl Default for DialogConfig {
    fn default() -> Self {
        Self {
            tau_intent: DEFAULT_TAU_INTENT,
            qa: QaParams::default(),
            rng_seed: 0,
            apology: "Sorry, I could not find an answer to that.".into(),
            clarification: "Could you tell me the {missing}?".into(),
        }
    }
}

struct TurnState {
    turn: DialogTurn,
    alternatives: Vec<SourcedCandidate>,
    /// Every span shown in this answer chain, including this turn's.
    shown: Vec<SourcedCandidate>,
}

#[derive(Default)]
struct Session {
    turns: Vec<TurnState>,
    feedback: Vec<FeedbackEvent>,
}

#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum AuditRecord<'a> {
    Turn(&'a DialogTurn),
    Feedback { at: DateTime<Utc>, #[serde(flatten)] feedback: &'a FeedbackEvent },
}

pub struct DialogEngine {
    intents: IntentSet,
    classifier: Box<dyn IntentClassifier>,
    extractor: Arc<dyn Extractor>,
    store: Arc<RwLock<SourceStore>>,
    config: DialogConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    audit: Option<Mutex<File>>,
}

impl DialogEngine {
    pub fn new(
        intents: IntentSet,
        classifier: Box<dyn IntentClassifier>,
        extractor: Arc<dyn Extractor>,
        store: Arc<RwLock<SourceStore>>,
        config: DialogConfig,
    ) -> Self {
        Self { intents, classifier, extractor, store, config, sessions: Mutex::default(), audit: None }
    }

    /// Appends every turn and feedback event to a JSON-lines file.
    pub fn with_audit_log(mut self, path: &Path) -> Result<Self, DialogError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| DialogError::Audit(format!("{}: {e}", path.display())))?;
        self.audit = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn config(&self) -> &DialogConfig {
        &self.config
    }

    pub fn store(&self) -> &Arc<RwLock<SourceStore>> {
        &self.store
    }

    fn session(&self, id: &str) -> Arc<Mutex<Session>> {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        sessions.entry(id.to_string()).or_default().clone()
    }

    fn existing_session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().expect("session map poisoned").get(id).cloned()
    }

    fn turn_seed(&self, session_id: &str, turn_id: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(self.config.rng_seed.to_le_bytes());
        h.update(session_id.as_bytes());
        h.update([0]);
        h.update(turn_id.to_le_bytes());
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    fn audit(&self, record: &AuditRecord<'_>) -> Result<(), DialogError> {
        let Some(file) = &self.audit else { return Ok(()) };
        let mut line = serde_json::to_string(record).expect("audit record serializes");
        line.push('\n');
        let mut f = file.lock().expect("audit log poisoned");
        f.write_all(line.as_bytes()).map_err(|e| DialogError::Audit(e.to_string()))
    }

    /// Stateless QA over the current store.
    pub fn answer(&self, question: &str) -> Result<QaOutcome, DialogError> {
        let store = self.store.read().expect("store lock poisoned");
        qa_fallback(question, &store, self.extractor.as_ref(), &self.config.qa)
    }

    fn qa_state(&self, question: &str) -> (Resolution, String, Vec<SourcedCandidate>, Vec<SourcedCandidate>) {
        match self.answer(question) {
            Ok(outcome) => self.resolve_outcome(outcome, Vec::new()),
            Err(e) => {
                log::warn!("qa fallback failed: {e}");
                (Resolution::NoAnswer, self.config.apology.clone(), Vec::new(), Vec::new())
            }
        }
    }

    fn resolve_outcome(
        &self,
        outcome: QaOutcome,
        mut shown: Vec<SourcedCandidate>,
    ) -> (Resolution, String, Vec<SourcedCandidate>, Vec<SourcedCandidate>) {
        match outcome {
            QaOutcome::Answer { best, alternatives } => {
                shown.push(best.clone());
                let text = best.candidate.text.clone();
                (Resolution::Qa(best), text, alternatives, shown)
            }
            QaOutcome::NoAnswer => (Resolution::NoAnswer, self.config.apology.clone(), Vec::new(), shown),
        }
    }

    fn scripted(&self, m: &IntentMatch, seed: u64) -> Option<(Resolution, String)> {
        let intent = self.intents.get(&m.intent_id)?;
        let text = match scripted_response(m, intent, seed) {
            Ok(text) => text,
            Err(DialogError::MissingEntities(missing)) => {
                self.config.clarification.replace("{missing}", &missing.join(", "))
            }
            Err(e) => {
                log::warn!("scripted response failed: {e}");
                return None;
            }
        };
        Some((Resolution::Scripted { intent_id: m.intent_id.clone() }, text))
    }

    fn push(&self, session: &mut Session, state: TurnState) -> Result<DialogTurn, DialogError> {
        self.audit(&AuditRecord::Turn(&state.turn))?;
        let turn = state.turn.clone();
        session.turns.push(state);
        Ok(turn)
    }

    pub fn handle_message(&self, session_id: &str, utterance: &str) -> Result<DialogTurn, DialogError> {
        let session = self.session(session_id);
        let mut session = session.lock().expect("session poisoned");
        let turn_id = session.turns.len() as u64;

        let (resolution, response_text, alternatives, shown) = if utterance.trim().is_empty() {
            (Resolution::NoAnswer, self.config.apology.clone(), Vec::new(), Vec::new())
        } else {
            let scripted = self
                .classifier
                .classify(utterance, &self.intents)
                .filter(|m| m.confidence >= self.config.tau_intent)
                .and_then(|m| self.scripted(&m, self.turn_seed(session_id, turn_id)));
            match scripted {
                Some((resolution, text)) => (resolution, text, Vec::new(), Vec::new()),
                None => self.qa_state(utterance),
            }
        };
        let turn = DialogTurn {
            session_id: session_id.to_string(),
            turn_id,
            utterance: utterance.to_string(),
            resolution,
            response_text,
            timestamp: Utc::now(),
            follows_feedback_on: None,
        };
        self.push(&mut session, TurnState { turn, alternatives, shown })
    }

    /// Records the feedback. Negative feedback may produce a follow-up turn.
    pub fn handle_feedback(&self, event: &FeedbackEvent) -> Result<Option<DialogTurn>, DialogError> {
        let unknown = || DialogError::UnknownTurn { session_id: event.session_id.clone(), turn_id: event.turn_id };
        let session = self.existing_session(&event.session_id).ok_or_else(unknown)?;
        let mut session = session.lock().expect("session poisoned");
        let target = session.turns.get(event.turn_id as usize).ok_or_else(unknown)?;
        let (utterance, resolution) = (target.turn.utterance.clone(), target.turn.resolution.clone());
        let (alternatives, shown) = (target.alternatives.clone(), target.shown.clone());

        self.audit(&AuditRecord::Feedback { at: Utc::now(), feedback: event })?;
        session.feedback.push(event.clone());
        if event.polarity == Polarity::Positive {
            return Ok(None);
        }

        let (resolution, response_text, alternatives, shown) = match resolution {
            Resolution::Scripted { .. } => self.qa_state(&utterance),
            Resolution::Qa(_) => self.resolve_outcome(next_best(&alternatives, &shown), shown),
            Resolution::NoAnswer => return Ok(None),
        };
        let turn = DialogTurn {
            session_id: event.session_id.clone(),
            turn_id: session.turns.len() as u64,
            utterance,
            resolution,
            response_text,
            timestamp: Utc::now(),
            follows_feedback_on: Some(event.turn_id),
        };
        self.push(&mut session, TurnState { turn, alternatives, shown }).map(Some)
    }

    pub fn history(&self, session_id: &str) -> Vec<DialogTurn> {
        self.existing_session(session_id)
            .map(|s| s.lock().expect("session poisoned").turns.iter().map(|t| t.turn.clone()).collect())
            .unwrap_or_default()
    }

    pub fn feedback(&self, session_id: &str) -> Vec<FeedbackEvent> {
        self.existing_session(session_id)
            .map(|s| s.lock().expect("session poisoned").feedback.clone())
            .unwrap_or_default()
    }
}
