//! Exact Match and token-overlap F1 with language-aware normalization.
//!
//! English follows the official SQuAD v1.1 evaluator (lowercase, strip
//! punctuation, drop `a`/`an`/`the`, split on whitespace). French also splits
//! elisions on apostrophes and drops determiners. Character-delimited
//! languages are tokenized per character so partial matches are scored at
//! character granularity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dataset::QaDataset;
use crate::lang::{LanguageTag, ScriptClass};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no ground-truth answers to score against")]
    EmptyGroundTruths,
    #[error("missing predictions for {} item(s): {}", .0.len(), preview(.0))]
    MissingPredictions(Vec<String>),
    #[error("dataset has no answerable items")]
    NoItems,
    #[error("invalid normalization profile for {language}: {reason}")]
    InvalidProfile { language: String, reason: String },
}

fn preview(ids: &[String]) -> String {
    let mut s = ids.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > 5 {
        s.push_str(", ...");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tokenization {
    Whitespace,
    PerCharacter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationProfile {
    pub language: LanguageTag,
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default = "default_true")]
    pub strip_punctuation: bool,
    /// Treat apostrophes as token boundaries before punctuation removal
    /// (`l'homme` becomes `l homme`).
    #[serde(default)]
    pub split_elisions: bool,
    #[serde(default)]
    pub article_stopwords: BTreeSet<String>,
    pub tokenization: Tokenization,
}

fn default_true() -> bool {
    true
}

impl NormalizationProfile {
    pub fn english() -> Self {
        Self {
            language: LanguageTag::en(),
            lowercase: true,
            strip_punctuation: true,
            split_elisions: false,
            article_stopwords: words(&["a", "an", "the"]),
            tokenization: Tokenization::Whitespace,
        }
    }

    pub fn french() -> Self {
        Self {
            language: LanguageTag::fr(),
            lowercase: true,
            strip_punctuation: true,
            split_elisions: true,
            article_stopwords: words(&["le", "la", "les", "l", "un", "une", "des", "du", "de"]),
            tokenization: Tokenization::Whitespace,
        }
    }

    pub fn japanese() -> Self {
        Self::generic(LanguageTag::ja())
    }

    /// Lowercase and punctuation stripping only; tokenization follows the
    /// tag's script class.
    pub fn generic(language: LanguageTag) -> Self {
        let tokenization = match language.script_class() {
            ScriptClass::CharacterDelimited => Tokenization::PerCharacter,
            ScriptClass::WhitespaceDelimited => Tokenization::Whitespace,
        };
        Self {
            language,
            lowercase: true,
            strip_punctuation: true,
            split_elisions: false,
            article_stopwords: BTreeSet::new(),
            tokenization,
        }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.tokenization == Tokenization::PerCharacter && !self.article_stopwords.is_empty() {
            return Err(MetricsError::InvalidProfile {
                language: self.language.to_string(),
                reason: "per-character tokenization cannot remove stopwords".into(),
            });
        }
        Ok(())
    }
}

fn words(list: &[&str]) -> BTreeSet<String> {
    list.iter().map(|w| w.to_string()).collect()
}

/// Maps a language to the profile used to score answers in that language.
pub trait ProfileResolver {
    fn resolve(&self, language: &LanguageTag) -> NormalizationProfile;
}

impl<F> ProfileResolver for F
where
    F: Fn(&LanguageTag) -> NormalizationProfile,
{
    fn resolve(&self, language: &LanguageTag) -> NormalizationProfile {
        self(language)
    }
}

/// Profiles keyed by language code. Lookups fall back from the full tag to
/// its primary subtag and finally to [`NormalizationProfile::generic`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSet {
    profiles: BTreeMap<String, NormalizationProfile>,
}

impl Default for ProfileSet {
    fn default() -> Self {
        let mut set = Self { profiles: BTreeMap::new() };
        for p in [
            NormalizationProfile::english(),
            NormalizationProfile::french(),
            NormalizationProfile::japanese(),
        ] {
            set.profiles.insert(p.language.code().to_string(), p);
        }
        set
    }
}

impl ProfileSet {
    pub fn empty() -> Self {
        Self { profiles: BTreeMap::new() }
    }

    pub fn insert(&mut self, profile: NormalizationProfile) -> Result<(), MetricsError> {
        profile.validate()?;
        self.profiles.insert(profile.language.code().to_string(), profile);
        Ok(())
    }

    /// Applies overrides from a JSON or TOML document holding a
    /// `profiles` array.
    pub fn with_overrides(mut self, overrides: Vec<NormalizationProfile>) -> Result<Self, MetricsError> {
        for p in overrides {
            self.insert(p)?;
        }
        Ok(self)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &NormalizationProfile> {
        self.profiles.values()
    }
}

impl ProfileResolver for ProfileSet {
    fn resolve(&self, language: &LanguageTag) -> NormalizationProfile {
        self.profiles
            .get(language.code())
            .or_else(|| self.profiles.get(language.primary()))
            .cloned()
            .unwrap_or_else(|| NormalizationProfile::generic(language.clone()))
    }
}

static PUNCTUATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r##"[\p{P}!"#$%&'()*+,\-./:;<=>?@\[\\\]^_`{|}~]"##).expect("valid regex")
});

const APOSTROPHES: &[char] = &['\'', '\u{2019}', '\u{02BC}'];

/// Lowercase, split elisions, strip punctuation, tokenize, drop stopwords.
pub fn normalize_answer(text: &str, profile: &NormalizationProfile) -> Vec<String> {
    let mut s = if profile.lowercase { text.to_lowercase() } else { text.to_string() };
    if profile.split_elisions {
        s = s.replace(APOSTROPHES, " ");
    }
    if profile.strip_punctuation {
        s = PUNCTUATION.replace_all(&s, "").into_owned();
    }
    match profile.tokenization {
        Tokenization::Whitespace => s
            .split_whitespace()
            .filter(|t| !profile.article_stopwords.contains(*t))
            .map(str::to_string)
            .collect(),
        Tokenization::PerCharacter => s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

pub fn exact_match(prediction: &str, ground_truths: &[&str], profile: &NormalizationProfile) -> Result<u8, MetricsError> {
    if ground_truths.is_empty() {
        return Err(MetricsError::EmptyGroundTruths);
    }
    let pred = normalize_answer(prediction, profile);
    Ok(ground_truths.iter().any(|gt| normalize_answer(gt, profile) == pred) as u8)
}

/// Harmonic mean of token precision and recall, computed as
/// `2c / (|P| + |G|)` so identical bags give exactly 1.0.
pub fn token_f1(prediction: &[String], ground_truth: &[String]) -> f64 {
    if prediction.is_empty() || ground_truth.is_empty() {
        return if prediction.is_empty() && ground_truth.is_empty() { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in ground_truth {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut common = 0usize;
    for t in prediction {
        if let Some(n) = counts.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    (2 * common) as f64 / (prediction.len() + ground_truth.len()) as f64
}

pub fn f1_score(prediction: &str, ground_truths: &[&str], profile: &NormalizationProfile) -> Result<f64, MetricsError> {
    if ground_truths.is_empty() {
        return Err(MetricsError::EmptyGroundTruths);
    }
    let pred = normalize_answer(prediction, profile);
    Ok(ground_truths
        .iter()
        .map(|gt| token_f1(&pred, &normalize_answer(gt, profile)))
        .fold(0.0, f64::max))
}

/// Predicted answer text per question id, the layout of the official SQuAD
/// evaluator's prediction file.
pub type PredictionSet = BTreeMap<String, String>;

pub fn parse_predictions(bytes: &[u8]) -> Result<PredictionSet, serde_json::Error> {
    serde_json::from_slice(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub id: String,
    pub em: u8,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    /// Percentage in `[0, 100]`.
    pub em: f64,
    /// Percentage in `[0, 100]`.
    pub f1: f64,
    pub n_items: usize,
}

impl EvalScores {
    pub fn from_items(items: &[ItemScore]) -> Result<Self, MetricsError> {
        if items.is_empty() {
            return Err(MetricsError::NoItems);
        }
        let n = items.len() as f64;
        let em: f64 = items.iter().map(|i| f64::from(i.em)).sum();
        let f1: f64 = items.iter().map(|i| i.f1).sum();
        Ok(Self { em: 100.0 * em / n, f1: 100.0 * f1 / n, n_items: items.len() })
    }
}

/// Scores every answerable item. The profile comes from the context
/// language, since answers are spans of the context. Unanswerable items are
/// skipped. Extra prediction ids are ignored.
pub fn score_items(
    d: &QaDataset,
    preds: &PredictionSet,
    resolver: &dyn ProfileResolver,
) -> Result<Vec<ItemScore>, MetricsError> {
    let missing: Vec<String> = d
        .items()
        .filter(|(_, _, q)| !q.is_impossible && !preds.contains_key(&q.id))
        .map(|(_, _, q)| q.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingPredictions(missing));
    }
    let profile = resolver.resolve(&d.language);
    d.items()
        .filter(|(_, _, q)| !q.is_impossible)
        .map(|(_, _, q)| {
            let prediction = &preds[&q.id];
            let truths: Vec<&str> = q.answers.iter().map(|a| a.text.as_str()).collect();
            Ok(ItemScore {
                id: q.id.clone(),
                em: exact_match(prediction, &truths, &profile)?,
                f1: f1_score(prediction, &truths, &profile)?,
            })
        })
        .collect()
}

pub fn evaluate_dataset(
    d: &QaDataset,
    preds: &PredictionSet,
    resolver: &dyn ProfileResolver,
) -> Result<EvalScores, MetricsError> {
    EvalScores::from_items(&score_items(d, preds, resolver)?)
}
