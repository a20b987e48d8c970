use std::path::{Path, PathBuf};
use std::time::Duration;

use polyqa_core::extractor::baseline::DEFAULT_MAX_SPAN_TOKENS;
use polyqa_core::extractor::{
    extract_over_chunks, BaselineExtractor, ExtractionRequest, Extractor, RemoteExtractor, DEFAULT_MAX_CANDIDATES,
    DEFAULT_STRIDE, DEFAULT_WINDOW,
};
use polyqa_core::metrics::{parse_predictions, score_items};
use polyqa_core::{load_dataset, LanguageTag, NormalizationProfile, PredictionSet, ProfileSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{read, to_json_line, write, CliError};

#[derive(Debug, Clone, PartialEq)]
pub enum ExtractorChoice {
    Baseline,
    Endpoint { url: String, timeout: Duration },
    /// Every prediction is the item's first ground truth.
    SelfPrediction,
    /// An `{id: answer}` JSON file, as consumed by the SQuAD evaluator.
    Predictions(PathBuf),
}

impl ExtractorChoice {
    fn label(&self) -> String {
        match self {
            ExtractorChoice::Baseline => "baseline".into(),
            ExtractorChoice::Endpoint { url, .. } => url.clone(),
            ExtractorChoice::SelfPrediction => "self-prediction".into(),
            ExtractorChoice::Predictions(p) => format!("predictions:{}", file_name(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRunSpec {
    pub dataset: PathBuf,
    /// Context language for files without an `x_language` marker.
    pub language: Option<LanguageTag>,
    pub extractor: ExtractorChoice,
    pub window: usize,
    pub stride: usize,
    pub max_candidates: usize,
    /// Aggregate score file.
    pub output: PathBuf,
    /// Per-item JSON-lines file; defaults to `<output stem>.items.jsonl`.
    pub items_output: Option<PathBuf>,
    /// JSON or TOML document with a `profiles` array of normalization
    /// profiles replacing the built-in ones per language.
    pub profiles: Option<PathBuf>,
}

impl EvalRunSpec {
    pub fn new(dataset: impl Into<PathBuf>, extractor: ExtractorChoice, output: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            language: None,
            extractor,
            window: DEFAULT_WINDOW,
            stride: DEFAULT_STRIDE,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            output: output.into(),
            items_output: None,
            profiles: None,
        }
    }

    pub fn items_path(&self) -> PathBuf {
        self.items_output.clone().unwrap_or_else(|| self.output.with_extension("items.jsonl"))
    }
}

/// One line of the per-item file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: String,
    pub prediction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_char: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_char: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub em: u8,
    pub f1: f64,
}

/// Aggregate scores of one dataset, the unit of a report grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFile {
    pub dataset: String,
    pub context_language: LanguageTag,
    pub question_language: LanguageTag,
    pub extractor: String,
    pub em: f64,
    pub f1: f64,
    pub n_items: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub scores: ScoreFile,
    pub items: Vec<ItemRecord>,
}

#[derive(Deserialize)]
struct ProfileFile {
    profiles: Vec<NormalizationProfile>,
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn load_profiles(path: Option<&Path>) -> Result<ProfileSet, CliError> {
    let Some(path) = path else { return Ok(ProfileSet::default()) };
    let bytes = read(path)?;
    let bad = |message: String| CliError::BadInput { path: path.into(), message };
    let text = String::from_utf8(bytes).map_err(|e| bad(e.to_string()))?;
    let file: ProfileFile = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    Ok(ProfileSet::default().with_overrides(file.profiles)?)
}

type Located = (String, Option<(usize, usize, f64)>);

/// Runs the extractor (or reads predictions) for every answerable item,
/// scores against the ground truths and writes the score and per-item files.
pub fn cmd_evaluate(spec: &EvalRunSpec) -> Result<EvalOutcome, CliError> {
    let default_language = spec.language.clone().unwrap_or_else(|| LanguageTag::new("und").expect("valid tag"));
    let dataset = load_dataset(&spec.dataset, &default_language)?;
    let profiles = load_profiles(spec.profiles.as_deref())?;
    let items: Vec<_> = dataset.items().filter(|(_, _, q)| !q.is_impossible).collect();
    if spec.stride == 0 || spec.window <= spec.stride {
        return Err(CliError::Failed(format!("need 0 < stride < window, got window {} stride {}", spec.window, spec.stride)));
    }
    let file_predictions = match &spec.extractor {
        ExtractorChoice::Predictions(path) => Some(
            parse_predictions(&read(path)?)
                .map_err(|e| CliError::BadInput { path: path.clone(), message: e.to_string() })?,
        ),
        _ => None,
    };

    let located: Vec<Located> = match &spec.extractor {
        ExtractorChoice::SelfPrediction => items
            .iter()
            .map(|(_, _, q)| (q.answers.first().map(|a| a.text.clone()).unwrap_or_default(), None))
            .collect(),
        ExtractorChoice::Predictions(_) => {
            let preds = file_predictions.as_ref().expect("loaded above");
            items.iter().map(|(_, _, q)| (preds.get(&q.id).cloned().unwrap_or_default(), None)).collect()
        }
        ExtractorChoice::Baseline | ExtractorChoice::Endpoint { .. } => {
            let extractor: Box<dyn Extractor> = match &spec.extractor {
                ExtractorChoice::Endpoint { url, timeout } => Box::new(RemoteExtractor::new(url, *timeout)),
                _ => Box::new(BaselineExtractor::new(profiles.clone(), DEFAULT_MAX_SPAN_TOKENS)),
            };
            let results: Vec<_> = items
                .par_iter()
                .map(|(_, paragraph, q)| {
                    let req = ExtractionRequest {
                        question: q.question.clone(),
                        context: paragraph.context.clone(),
                        max_candidates: spec.max_candidates,
                        language_hint: Some(dataset.language.clone()),
                    };
                    extract_over_chunks(extractor.as_ref(), &req, spec.window, spec.stride)
                })
                .collect();
            let mut located = Vec::with_capacity(results.len());
            for ((_, _, q), result) in items.iter().zip(results) {
                let candidates = result.map_err(|source| CliError::ItemFailed { id: q.id.clone(), source })?;
                located.push(match candidates.into_iter().next() {
                    Some(c) => (c.text, Some((c.start_char, c.end_char, c.score))),
                    None => (String::new(), None),
                });
            }
            located
        }
    };

    let predictions: PredictionSet = match file_predictions {
        Some(preds) => preds,
        None => items.iter().zip(&located).map(|((_, _, q), (text, _))| (q.id.clone(), text.clone())).collect(),
    };
    let scored = score_items(&dataset, &predictions, &profiles)?;
    let aggregate = polyqa_core::EvalScores::from_items(&scored)?;

    let records: Vec<ItemRecord> = scored
        .into_iter()
        .zip(located)
        .map(|(s, (prediction, span))| ItemRecord {
            id: s.id,
            prediction,
            start_char: span.map(|x| x.0),
            end_char: span.map(|x| x.1),
            score: span.map(|x| x.2),
            em: s.em,
            f1: s.f1,
        })
        .collect();

    let question_language =
        items.first().map(|(_, _, q)| q.language.clone()).unwrap_or_else(|| dataset.language.clone());
    let scores = ScoreFile {
        dataset: file_name(&spec.dataset),
        context_language: dataset.language.clone(),
        question_language,
        extractor: spec.extractor.label(),
        em: aggregate.em,
        f1: aggregate.f1,
        n_items: aggregate.n_items,
    };

    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r).expect("serializable"));
        lines.push('\n');
    }
    write(&spec.items_path(), lines.as_bytes())?;
    write(&spec.output, to_json_line(&scores).as_bytes())?;
    Ok(EvalOutcome { scores, items: records })
}

pub fn load_score_file(path: &Path) -> Result<ScoreFile, CliError> {
    serde_json::from_slice(&read(path)?).map_err(|e| CliError::BadInput { path: path.into(), message: e.to_string() })
}
