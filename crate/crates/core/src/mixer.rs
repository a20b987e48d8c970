//! Cross-lingual dataset construction: pair the paragraph of one language
//! with the question of another.
//!
//! Items are aligned across languages by question id, so translated
//! datasets must keep the source ids. [`align_by_position`] covers corpora
//! whose translations renumbered their ids but kept the tree shape.

use std::collections::BTreeMap;

use crate::dataset::{validate_dataset, Article, ItemRef, Paragraph, QaDataset, QaItem};
use crate::lang::LanguageTag;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MixError {
    #[error("need at least two datasets to align, got {0}")]
    TooFewDatasets(usize),
    #[error("no question id is shared by two or more datasets")]
    NoOverlap,
    #[error("language(s) not in corpus: {0:?}")]
    LanguagesUnavailable(Vec<String>),
    #[error("mixed dataset {context}-{question} failed validation: {detail}")]
    InvalidOutput { context: String, question: String, detail: String },
}

/// Which language supplies the context and which the question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixSpec {
    pub context_language: LanguageTag,
    pub question_language: LanguageTag,
}

impl MixSpec {
    pub fn new(context_language: LanguageTag, question_language: LanguageTag) -> Self {
        Self { context_language, question_language }
    }

    pub fn is_cross_lingual(&self) -> bool {
        self.context_language != self.question_language
    }

    /// `<context>-<question>`, the stem used for grid file names.
    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.context_language, self.question_language)
    }
}

#[derive(Debug, Clone)]
pub struct AlignedCorpus {
    datasets: BTreeMap<LanguageTag, QaDataset>,
    /// Canonical id to the item's position in each language that has it.
    alignment: BTreeMap<String, BTreeMap<LanguageTag, ItemRef>>,
}

impl AlignedCorpus {
    pub fn languages(&self) -> impl Iterator<Item = &LanguageTag> {
        self.datasets.keys()
    }

    pub fn dataset(&self, language: &LanguageTag) -> Option<&QaDataset> {
        self.datasets.get(language)
    }

    pub fn alignment(&self) -> &BTreeMap<String, BTreeMap<LanguageTag, ItemRef>> {
        &self.alignment
    }

    pub fn aligned_ids(&self) -> impl Iterator<Item = &str> {
        self.alignment.keys().map(String::as_str)
    }
}

fn build_corpus(
    datasets: BTreeMap<LanguageTag, QaDataset>,
    key: impl Fn(ItemRef, &QaItem) -> String,
) -> Result<AlignedCorpus, MixError> {
    if datasets.len() < 2 {
        return Err(MixError::TooFewDatasets(datasets.len()));
    }
    let mut all: BTreeMap<String, BTreeMap<LanguageTag, ItemRef>> = BTreeMap::new();
    for (language, d) in &datasets {
        for (at, _, item) in d.items() {
            all.entry(key(at, item)).or_default().entry(language.clone()).or_insert(at);
        }
    }
    all.retain(|_, langs| langs.len() >= 2);
    if all.is_empty() {
        return Err(MixError::NoOverlap);
    }
    Ok(AlignedCorpus { datasets, alignment: all })
}

/// Aligns translated datasets on shared question ids. Ids present in fewer
/// than two languages are left out of the alignment.
pub fn align_datasets(datasets: BTreeMap<LanguageTag, QaDataset>) -> Result<AlignedCorpus, MixError> {
    build_corpus(datasets, |_, item| item.id.clone())
}

/// Aligns on (article, paragraph, question) indices instead of ids.
pub fn align_by_position(datasets: BTreeMap<LanguageTag, QaDataset>) -> Result<AlignedCorpus, MixError> {
    build_corpus(datasets, |at, _| format!("a{}-p{}-q{}", at.article, at.paragraph, at.qa))
}

#[derive(Debug, Clone)]
pub struct MixedDataset {
    pub spec: MixSpec,
    pub dataset: QaDataset,
    /// Items emitted (aligned in both languages).
    pub aligned: usize,
    /// Context-language items left out because the question language lacks them.
    pub dropped: usize,
}

/// Builds one mixed dataset. Context, answers and offsets come verbatim from
/// the context language; only question text and question language change.
/// The tree follows the context dataset, minus paragraphs and articles that
/// end up without questions.
pub fn mix_pair(corpus: &AlignedCorpus, spec: &MixSpec) -> Result<MixedDataset, MixError> {
    let missing: Vec<String> = [&spec.context_language, &spec.question_language]
        .into_iter()
        .filter(|l| !corpus.datasets.contains_key(*l))
        .map(|l| l.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(MixError::LanguagesUnavailable(missing));
    }
    let context_ds = &corpus.datasets[&spec.context_language];
    let question_ds = &corpus.datasets[&spec.question_language];

    // context-side position -> (canonical id, question-side position)
    let mut wanted: BTreeMap<ItemRef, (&str, ItemRef)> = BTreeMap::new();
    for (id, langs) in &corpus.alignment {
        if let (Some(c), Some(q)) = (langs.get(&spec.context_language), langs.get(&spec.question_language)) {
            wanted.insert(*c, (id.as_str(), *q));
        }
    }

    let mut out = QaDataset::new(context_ds.version.clone(), spec.context_language.clone());
    let mut aligned = 0;
    let mut dropped = 0;
    for (a, article) in context_ds.articles.iter().enumerate() {
        let mut paragraphs = Vec::new();
        for (p, paragraph) in article.paragraphs.iter().enumerate() {
            let mut qas = Vec::new();
            for (q, item) in paragraph.qas.iter().enumerate() {
                let at = ItemRef { article: a, paragraph: p, qa: q };
                let Some((id, qref)) = wanted.get(&at) else {
                    dropped += 1;
                    continue;
                };
                let (_, question_item) = question_ds.item(*qref).expect("alignment refs are in range");
                qas.push(QaItem {
                    id: id.to_string(),
                    question: question_item.question.clone(),
                    answers: item.answers.clone(),
                    language: spec.question_language.clone(),
                    is_impossible: item.is_impossible,
                });
                aligned += 1;
            }
            if !qas.is_empty() {
                paragraphs.push(Paragraph { context: paragraph.context.clone(), qas });
            }
        }
        if !paragraphs.is_empty() {
            out.articles.push(Article { title: article.title.clone(), paragraphs });
        }
    }

    let report = validate_dataset(&out);
    if !report.is_valid() {
        return Err(MixError::InvalidOutput {
            context: spec.context_language.to_string(),
            question: spec.question_language.to_string(),
            detail: report.to_string(),
        });
    }
    Ok(MixedDataset { spec: spec.clone(), dataset: out, aligned, dropped })
}

/// Every (context, question) language pair, diagonal included: |L|² datasets.
pub fn mix_grid(corpus: &AlignedCorpus) -> Result<BTreeMap<MixSpec, MixedDataset>, MixError> {
    use rayon::prelude::*;

    let specs: Vec<MixSpec> = corpus
        .languages()
        .flat_map(|c| corpus.languages().map(move |q| MixSpec::new(c.clone(), q.clone())))
        .collect();
    specs
        .par_iter()
        .map(|spec| mix_pair(corpus, spec).map(|m| (spec.clone(), m)))
        .collect()
}
