use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::intents::{fill_template, IntentSet, ScriptedIntent};
use super::DialogError;
use crate::lang::{detect_script_class, LanguageTag, ScriptClass};
use crate::metrics::{normalize_answer, token_f1, NormalizationProfile, ProfileResolver, ProfileSet};

pub const DEFAULT_TAU_INTENT: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentMatch {
    pub intent_id: String,
    /// In `[0, 1]`.
    pub confidence: f64,
    #[serde(default)]
    pub entities: BTreeMap<String, String>,
}

/// Maps an utterance to at most one intent. External NLU engines plug in
/// by implementing this trait.
pub trait IntentClassifier: Send + Sync {
    fn classify(&self, utterance: &str, intents: &IntentSet) -> Option<IntentMatch>;
}

/// Scores every intent by the best token-overlap F1 between the utterance
/// and one of its training phrases.
#[derive(Debug, Clone)]
pub struct LexicalClassifier {
    pub tau_intent: f64,
    pub profiles: ProfileSet,
}

impl Default for LexicalClassifier {
    fn default() -> Self {
        Self { tau_intent: DEFAULT_TAU_INTENT, profiles: ProfileSet::default() }
    }
}

impl LexicalClassifier {
    pub fn new(tau_intent: f64) -> Self {
        Self { tau_intent, ..Self::default() }
    }

    fn profile(&self, utterance: &str, intents: &IntentSet) -> NormalizationProfile {
        if let Some(lang) = &intents.language {
            return self.profiles.resolve(lang);
        }
        match detect_script_class(utterance) {
            ScriptClass::CharacterDelimited => self.profiles.resolve(&LanguageTag::ja()),
            ScriptClass::WhitespaceDelimited => {
                NormalizationProfile::generic(LanguageTag::new("und").expect("valid tag"))
            }
        }
    }
}

impl IntentClassifier for LexicalClassifier {
    fn classify(&self, utterance: &str, intents: &IntentSet) -> Option<IntentMatch> {
        let profile = self.profile(utterance, intents);
        let tokens = normalize_answer(utterance, &profile);
        if tokens.is_empty() {
            return None;
        }
        let mut ranked: Vec<&ScriptedIntent> = intents.intents.iter().collect();
        ranked.sort_by(|a, b| a.intent_id.cmp(&b.intent_id));
        let mut best: Option<(&ScriptedIntent, f64)> = None;
        for intent in ranked {
            let score = intent
                .training_phrases
                .iter()
                .map(|p| token_f1(&tokens, &normalize_answer(p, &profile)))
                .fold(0.0, f64::max);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((intent, score));
            }
        }
        let (intent, confidence) = best?;
        (confidence >= self.tau_intent).then(|| IntentMatch {
            intent_id: intent.intent_id.clone(),
            confidence,
            entities: extract_entities(&tokens, intents, &profile),
        })
    }
}

/// Gazetteer lookup: a slot is bound to the first listed value whose
/// normalized tokens occur contiguously in the utterance.
pub fn extract_entities(
    utterance_tokens: &[String],
    intents: &IntentSet,
    profile: &NormalizationProfile,
) -> BTreeMap<String, String> {
    let mut found = BTreeMap::new();
    for (slot, values) in &intents.entities {
        let hit = values.iter().find(|v| {
            let needle = normalize_answer(v, profile);
            !needle.is_empty() && utterance_tokens.windows(needle.len()).any(|w| w == needle.as_slice())
        });
        if let Some(v) = hit {
            found.insert(slot.clone(), v.clone());
        }
    }
    found
}

/// Picks one of the intent's templates uniformly with a seeded generator
/// and fills its slots from the match.
pub fn scripted_response(m: &IntentMatch, intent: &ScriptedIntent, rng_seed: u64) -> Result<String, DialogError> {
    if m.intent_id != intent.intent_id {
        return Err(DialogError::InvalidIntents(format!(
            "match for {:?} applied to intent {:?}",
            m.intent_id, intent.intent_id
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let template = &intent.responses[rng.gen_range(0..intent.responses.len())];
    fill_template(template, &m.entities).map_err(DialogError::MissingEntities)
}
