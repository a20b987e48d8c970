//! Multilingual extractive question answering.
//!
//! The crate covers the SQuAD-layout data model, EM/F1 scoring with
//! language-aware normalization, cross-lingual dataset mixing, span
//! extraction (chunking, a deterministic lexical baseline and a remote
//! extractor protocol), knowledge-base ingestion from web pages, and the
//! intent-first dialog engine with QA fallback.

pub mod dataset;
pub mod dialog;
pub mod extractor;
pub mod ingest;
pub mod lang;
pub mod metrics;
pub mod mixer;
pub mod text;

pub use dataset::{
    load_dataset, parse_dataset, serialize_dataset, validate_dataset, Article, DatasetError,
    GroundTruthAnswer, ItemRef, Paragraph, QaDataset, QaItem, ValidationReport, Violation,
    ViolationKind,
};
pub use lang::{LanguageTag, ScriptClass};
pub use metrics::{
    evaluate_dataset, exact_match, f1_score, normalize_answer, EvalScores, MetricsError,
    NormalizationProfile, PredictionSet, ProfileResolver, ProfileSet, Tokenization,
};
pub use mixer::{align_by_position, align_datasets, mix_grid, mix_pair, AlignedCorpus, MixError, MixSpec, MixedDataset};
