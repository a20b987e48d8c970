//! Scripted intents and the entity gazetteer, loaded from a TOML file:
//!
//! ```toml
//! language = "fr"            # optional, picks the normalization profile
//!
//! [entities]
//! city = ["Paris", "Lyon"]
//!
//! [[intent]]
//! id = "office_city"
//! phrases = ["where is the office in Lyon"]
//! responses = ["Our office is in {city}."]
//! entities = ["city"]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::DialogError;
use crate::lang::LanguageTag;

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid regex"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedIntent {
    #[serde(rename = "id")]
    pub intent_id: String,
    #[serde(rename = "phrases")]
    pub training_phrases: Vec<String>,
    pub responses: Vec<String>,
    #[serde(default, rename = "entities")]
    pub required_entities: Vec<String>,
}

/// Slot names referenced by a response template, in order of appearance.
pub fn template_slots(template: &str) -> Vec<&str> {
    SLOT.captures_iter(template).map(|c| c.get(1).expect("group").as_str()).collect()
}

/// Replaces every `{slot}` with its bound value. Returns the slots that had
/// no value.
pub fn fill_template(template: &str, values: &BTreeMap<String, String>) -> Result<String, Vec<String>> {
    let missing: BTreeSet<String> = template_slots(template)
        .into_iter()
        .filter(|s| !values.contains_key(*s))
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(missing.into_iter().collect());
    }
    Ok(SLOT.replace_all(template, |c: &regex::Captures| values[&c[1]].clone()).into_owned())
}

impl ScriptedIntent {
    pub fn validate(&self) -> Result<(), DialogError> {
        let fail = |reason: String| Err(DialogError::InvalidIntents(format!("intent {:?}: {reason}", self.intent_id)));
        if self.intent_id.trim().is_empty() {
            return Err(DialogError::InvalidIntents("intent with empty id".into()));
        }
        if self.responses.is_empty() {
            return fail("responses must not be empty".into());
        }
        if self.training_phrases.iter().all(|p| p.trim().is_empty()) {
            return fail("needs at least one training phrase".into());
        }
        for r in &self.responses {
            for slot in template_slots(r) {
                if !self.required_entities.iter().any(|e| e == slot) {
                    return fail(format!("response slot {{{slot}}} is not a declared entity"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageTag>,
    /// Slot name to the surface values recognized in utterances.
    #[serde(default)]
    pub entities: BTreeMap<String, Vec<String>>,
    #[serde(default, rename = "intent")]
    pub intents: Vec<ScriptedIntent>,
}

impl IntentSet {
    pub fn validate(&self) -> Result<(), DialogError> {
        let mut seen = BTreeSet::new();
        for intent in &self.intents {
            intent.validate()?;
            if !seen.insert(intent.intent_id.as_str()) {
                return Err(DialogError::InvalidIntents(format!("duplicate intent id {:?}", intent.intent_id)));
            }
            for e in &intent.required_entities {
                if !self.entities.contains_key(e) {
                    return Err(DialogError::InvalidIntents(format!(
                        "intent {:?}: entity {e:?} has no gazetteer entry",
                        intent.intent_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, intent_id: &str) -> Option<&ScriptedIntent> {
        self.intents.iter().find(|i| i.intent_id == intent_id)
    }
}

pub fn parse_intents(text: &str) -> Result<IntentSet, DialogError> {
    let set: IntentSet = toml::from_str(text).map_err(|e| DialogError::InvalidIntents(e.to_string()))?;
    set.validate()?;
    Ok(set)
}

pub fn load_intents(path: &Path) -> Result<IntentSet, DialogError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DialogError::InvalidIntents(format!("{}: {e}", path.display())))?;
    parse_intents(&text)
}
