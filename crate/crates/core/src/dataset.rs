//! Question-answering datasets in the SQuAD v1.1 interchange layout.
//!
//! Two namespaced extensions are understood on top of the standard layout:
//! a top-level `x_language` naming the language of every context, and a
//! per-question `x_language` naming the language of that question when it
//! differs (cross-lingual datasets). SQuAD 2.0 `is_impossible` items are
//! accepted and kept flagged.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lang::LanguageTag;
use crate::text::CharIndex;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("malformed input at {path}: {message}")]
    MalformedInput { path: String, message: String },
    #[error("input is not valid UTF-8: {0}")]
    Encoding(#[from] std::str::Utf8Error),
    #[error("dataset is invalid: {0}")]
    InvalidDataset(ValidationReport),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaDataset {
    pub version: String,
    /// Language of every paragraph context.
    pub language: LanguageTag,
    pub articles: Vec<Article>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub title: String,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paragraph {
    pub context: String,
    pub qas: Vec<QaItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaItem {
    pub id: String,
    pub question: String,
    pub answers: Vec<GroundTruthAnswer>,
    /// Language of the question text.
    pub language: LanguageTag,
    /// SQuAD 2.0 unanswerable item; `answers` may then be empty.
    pub is_impossible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthAnswer {
    pub text: String,
    /// Offset in Unicode scalar values into the owning context.
    pub answer_start: usize,
}

/// Position of a question inside a dataset tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemRef {
    pub article: usize,
    pub paragraph: usize,
    pub qa: usize,
}

impl QaDataset {
    pub fn new(version: impl Into<String>, language: LanguageTag) -> Self {
        Self { version: version.into(), language, articles: Vec::new() }
    }

    /// Every question in document order with its position and paragraph.
    pub fn items(&self) -> impl Iterator<Item = (ItemRef, &Paragraph, &QaItem)> + '_ {
        self.articles.iter().enumerate().flat_map(|(a, article)| {
            article.paragraphs.iter().enumerate().flat_map(move |(p, paragraph)| {
                paragraph.qas.iter().enumerate().map(move |(q, item)| {
                    (ItemRef { article: a, paragraph: p, qa: q }, paragraph, item)
                })
            })
        })
    }

    pub fn item(&self, at: ItemRef) -> Option<(&Paragraph, &QaItem)> {
        let paragraph = self.articles.get(at.article)?.paragraphs.get(at.paragraph)?;
        Some((paragraph, paragraph.qas.get(at.qa)?))
    }

    pub fn len(&self) -> usize {
        self.items().count()
    }

    pub fn is_empty(&self) -> bool {
        self.items().next().is_none()
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateId,
    EmptyTitle,
    EmptyContext,
    EmptyQuestion,
    NoAnswers,
    EmptyAnswerText,
    OffsetOutOfRange { answer_start: usize, context_len: usize },
    SpanMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub item_id: Option<String>,
    pub path: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&ViolationKind) -> bool) -> usize {
        self.violations.iter().filter(|v| pred(&v.kind)).count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s)", self.violations.len())?;
        if let Some(first) = self.violations.first() {
            write!(f, ", first at {}: {:?}", first.path, first.kind)?;
        }
        Ok(())
    }
}

/// Checks every dataset invariant. Never aborts early.
pub fn validate_dataset(d: &QaDataset) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for (a, article) in d.articles.iter().enumerate() {
        if article.title.trim().is_empty() {
            violations.push(Violation {
                item_id: None,
                path: format!("data[{a}].title"),
                kind: ViolationKind::EmptyTitle,
            });
        }
        for (p, paragraph) in article.paragraphs.iter().enumerate() {
            let ppath = format!("data[{a}].paragraphs[{p}]");
            if paragraph.context.is_empty() {
                violations.push(Violation {
                    item_id: None,
                    path: format!("{ppath}.context"),
                    kind: ViolationKind::EmptyContext,
                });
            }
            let index = CharIndex::new(&paragraph.context);
            for (q, item) in paragraph.qas.iter().enumerate() {
                let qpath = format!("{ppath}.qas[{q}]");
                let mut push = |path: String, kind| {
                    violations.push(Violation { item_id: Some(item.id.clone()), path, kind })
                };
                if !seen.insert(item.id.as_str()) {
                    push(format!("{qpath}.id"), ViolationKind::DuplicateId);
                }
                if item.question.trim().is_empty() {
                    push(format!("{qpath}.question"), ViolationKind::EmptyQuestion);
                }
                if item.answers.is_empty() && !item.is_impossible {
                    push(format!("{qpath}.answers"), ViolationKind::NoAnswers);
                }
                for (i, answer) in item.answers.iter().enumerate() {
                    let apath = format!("{qpath}.answers[{i}]");
                    if answer.text.is_empty() {
                        push(apath, ViolationKind::EmptyAnswerText);
                        continue;
                    }
                    let end = answer.answer_start + answer.text.chars().count();
                    match index.slice(answer.answer_start, end) {
                        None => push(
                            apath,
                            ViolationKind::OffsetOutOfRange {
                                answer_start: answer.answer_start,
                                context_len: index.len(),
                            },
                        ),
                        Some(found) if found != answer.text => push(
                            apath,
                            ViolationKind::SpanMismatch {
                                expected: answer.text.clone(),
                                found: found.to_string(),
                            },
                        ),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// Interchange format

#[derive(Serialize, Deserialize)]
struct RawDataset {
    #[serde(default)]
    version: String,
    #[serde(default, rename = "x_language", skip_serializing_if = "Option::is_none")]
    language: Option<String>,
    data: Vec<RawArticle>,
}

#[derive(Serialize, Deserialize)]
struct RawArticle {
    title: String,
    paragraphs: Vec<RawParagraph>,
}

#[derive(Serialize, Deserialize)]
struct RawParagraph {
    context: String,
    qas: Vec<RawQa>,
}

#[derive(Serialize, Deserialize)]
struct RawQa {
    id: RawId,
    question: String,
    #[serde(default)]
    answers: Vec<RawAnswer>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    is_impossible: bool,
    #[serde(default, rename = "x_language", skip_serializing_if = "Option::is_none")]
    language: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Number(i64),
}

#[derive(Serialize, Deserialize)]
struct RawAnswer {
    text: String,
    answer_start: i64,
}

fn malformed(path: impl Into<String>, message: impl Into<String>) -> DatasetError {
    DatasetError::MalformedInput { path: path.into(), message: message.into() }
}

fn parse_tag(path: String, code: &str) -> Result<LanguageTag, DatasetError> {
    LanguageTag::new(code).map_err(|e| malformed(path, e.to_string()))
}

/// Parses SQuAD v1.1 JSON. Contexts default to `default_language` unless
/// the file declares its own; questions inherit the context language unless
/// overridden per item.
pub fn parse_dataset(bytes: &[u8], default_language: &LanguageTag) -> Result<QaDataset, DatasetError> {
    let text = std::str::from_utf8(bytes)?;
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawDataset = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        malformed(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| malformed(".", e.to_string()))?;

    let language = match raw.language {
        Some(code) => parse_tag("x_language".into(), &code)?,
        None => default_language.clone(),
    };
    let mut articles = Vec::with_capacity(raw.data.len());
    for (a, article) in raw.data.into_iter().enumerate() {
        let mut paragraphs = Vec::with_capacity(article.paragraphs.len());
        for (p, paragraph) in article.paragraphs.into_iter().enumerate() {
            let mut qas = Vec::with_capacity(paragraph.qas.len());
            for (q, qa) in paragraph.qas.into_iter().enumerate() {
                let qpath = format!("data[{a}].paragraphs[{p}].qas[{q}]");
                let mut answers = Vec::with_capacity(qa.answers.len());
                for (i, answer) in qa.answers.into_iter().enumerate() {
                    let answer_start = usize::try_from(answer.answer_start).map_err(|_| {
                        malformed(
                            format!("{qpath}.answers[{i}].answer_start"),
                            format!("negative offset {}", answer.answer_start),
                        )
                    })?;
                    answers.push(GroundTruthAnswer { text: answer.text, answer_start });
                }
                let item_language = match qa.language {
                    Some(code) => parse_tag(format!("{qpath}.x_language"), &code)?,
                    None => language.clone(),
                };
                qas.push(QaItem {
                    id: match qa.id {
                        RawId::Text(s) => s,
                        RawId::Number(n) => n.to_string(),
                    },
                    question: qa.question,
                    answers,
                    language: item_language,
                    is_impossible: qa.is_impossible,
                });
            }
            paragraphs.push(Paragraph { context: paragraph.context, qas });
        }
        articles.push(Article { title: article.title, paragraphs });
    }
    Ok(QaDataset { version: raw.version, language, articles })
}

/// Serializes a valid dataset to pretty-printed UTF-8 JSON. The output is
/// deterministic for a given tree.
pub fn serialize_dataset(d: &QaDataset) -> Result<Vec<u8>, DatasetError> {
    let report = validate_dataset(d);
    if !report.is_valid() {
        return Err(DatasetError::InvalidDataset(report));
    }
    let raw = RawDataset {
        version: d.version.clone(),
        language: Some(d.language.code().to_string()),
        data: d
            .articles
            .iter()
            .map(|article| RawArticle {
                title: article.title.clone(),
                paragraphs: article
                    .paragraphs
                    .iter()
                    .map(|paragraph| RawParagraph {
                        context: paragraph.context.clone(),
                        qas: paragraph
                            .qas
                            .iter()
                            .map(|qa| RawQa {
                                id: RawId::Text(qa.id.clone()),
                                question: qa.question.clone(),
                                answers: qa
                                    .answers
                                    .iter()
                                    .map(|a| RawAnswer {
                                        text: a.text.clone(),
                                        answer_start: a.answer_start as i64,
                                    })
                                    .collect(),
                                is_impossible: qa.is_impossible,
                                language: (qa.language != d.language)
                                    .then(|| qa.language.code().to_string()),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("dataset serialization is infallible");
    out.push(b'\n');
    Ok(out)
}

pub fn load_dataset(path: &Path, default_language: &LanguageTag) -> Result<QaDataset, DatasetError> {
    let bytes = std::fs::read(path)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&bytes, default_language)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"version":"1.1","data":[{"title":"T","paragraphs":[
        {"context":"The cat sat on the mat.","qas":[
            {"id":"q1","question":"Where did the cat sit?","answers":[{"text":"on the mat","answer_start":12}]}
        ]}]}]}"#;

    fn minimal() -> QaDataset {
        parse_dataset(MINIMAL.as_bytes(), &LanguageTag::en()).unwrap()
    }

    #[test]
    fn parses_minimal_document() {
        let d = minimal();
        assert_eq!(d.len(), 1);
        assert_eq!(d.version, "1.1");
        let (_, p, q) = d.items().next().unwrap();
        assert_eq!(p.context, "The cat sat on the mat.");
        assert_eq!(q.answers[0].answer_start, 12);
        assert_eq!(q.language, LanguageTag::en());
        assert!(validate_dataset(&d).is_valid());
    }

    #[test]
    fn negative_offset_names_answer_path() {
        let doc = MINIMAL.replace("\"answer_start\":12", "\"answer_start\":-1");
        match parse_dataset(doc.as_bytes(), &LanguageTag::en()) {
            Err(DatasetError::MalformedInput { path, .. }) => {
                assert_eq!(path, "data[0].paragraphs[0].qas[0].answers[0].answer_start")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structure_errors_carry_path() {
        let doc = MINIMAL.replace("\"question\":", "\"questionx\":");
        match parse_dataset(doc.as_bytes(), &LanguageTag::en()) {
            Err(DatasetError::MalformedInput { path, .. }) => {
                assert!(path.starts_with("data[0].paragraphs[0].qas[0]"), "{path}")
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_dataset(b"{\"data\": 3}", &LanguageTag::en()),
            Err(DatasetError::MalformedInput { .. })
        ));
        assert!(matches!(
            parse_dataset(b"{\"data\": []} trailing", &LanguageTag::en()),
            Err(DatasetError::MalformedInput { .. })
        ));
    }

    #[test]
    fn rejects_invalid_utf8() {
        assert!(matches!(
            parse_dataset(&[0x7b, 0xff, 0x7d], &LanguageTag::en()),
            Err(DatasetError::Encoding(_))
        ));
    }

    #[test]
    fn language_overrides() {
        let doc = r#"{"version":"x","x_language":"fr","data":[{"title":"T","paragraphs":[
            {"context":"Le chat.","qas":[
              {"id":"a","question":"Who?","x_language":"en","answers":[{"text":"chat","answer_start":3}]},
              {"id":"b","question":"Qui ?","answers":[{"text":"chat","answer_start":3}]}
            ]}]}]}"#;
        let d = parse_dataset(doc.as_bytes(), &LanguageTag::ja()).unwrap();
        assert_eq!(d.language, LanguageTag::fr());
        let langs: Vec<_> = d.items().map(|(_, _, q)| q.language.code().to_string()).collect();
        assert_eq!(langs, ["en", "fr"]);
        let bad = doc.replace("\"x_language\":\"en\"", "\"x_language\":\"EN\"");
        assert!(matches!(
            parse_dataset(bad.as_bytes(), &LanguageTag::ja()),
            Err(DatasetError::MalformedInput { path, .. }) if path.ends_with("qas[0].x_language")
        ));
    }

    #[test]
    fn squad2_unanswerable_items_are_flagged() {
        let doc = r#"{"version":"v2.0","data":[{"title":"T","paragraphs":[
            {"context":"Some text.","qas":[
              {"id":"u","question":"Why?","answers":[],"is_impossible":true,"plausible_answers":[{"text":"Some","answer_start":0}]}
            ]}]}]}"#;
        let d = parse_dataset(doc.as_bytes(), &LanguageTag::en()).unwrap();
        let (_, _, q) = d.items().next().unwrap();
        assert!(q.is_impossible && q.answers.is_empty());
        assert!(validate_dataset(&d).is_valid());
        let back = parse_dataset(&serialize_dataset(&d).unwrap(), &LanguageTag::en()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn span_mismatch_is_reported() {
        let mut d = minimal();
        d.articles[0].paragraphs[0].qas[0].answers[0].answer_start = 11;
        let report = validate_dataset(&d);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0].kind, ViolationKind::SpanMismatch { .. }));
        assert_eq!(report.violations[0].item_id.as_deref(), Some("q1"));
    }

    #[test]
    fn duplicate_id_is_reported_once() {
        let mut d = minimal();
        let dup = d.articles[0].paragraphs[0].qas[0].clone();
        d.articles[0].paragraphs[0].qas.push(dup);
        let report = validate_dataset(&d);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::DuplicateId);
    }

    #[test]
    fn out_of_range_and_empty_fields() {
        let mut d = minimal();
        d.articles[0].paragraphs[0].qas[0].answers[0].answer_start = 100;
        d.articles[0].title.clear();
        let report = validate_dataset(&d);
        assert_eq!(report.count(|k| matches!(k, ViolationKind::OffsetOutOfRange { .. })), 1);
        assert_eq!(report.count(|k| *k == ViolationKind::EmptyTitle), 1);

        let mut d = minimal();
        d.articles[0].paragraphs[0].context.clear();
        let report = validate_dataset(&d);
        assert_eq!(report.count(|k| *k == ViolationKind::EmptyContext), 1);
    }

    #[test]
    fn serialize_rejects_invalid() {
        let mut d = minimal();
        d.articles[0].paragraphs[0].qas[0].answers[0].text = "cat".into();
        assert!(matches!(serialize_dataset(&d), Err(DatasetError::InvalidDataset(_))));
    }

    #[test]
    fn round_trip_minimal() {
        let d = minimal();
        let bytes = serialize_dataset(&d).unwrap();
        assert_eq!(parse_dataset(&bytes, &LanguageTag::ja()).unwrap(), d);
    }

    #[test]
    fn round_trip_preserves_scalar_offsets() {
        let context = "東京は日本の首都です。Café au lait à Paris.";
        let answers = [("首都", "首都"), ("Paris", "Paris"), ("à", "à")];
        let mut d = QaDataset::new("1.1", LanguageTag::ja());
        let mut qas = Vec::new();
        for (i, (needle, text)) in answers.iter().enumerate() {
            // Oracle: scalar-value offset via char-by-char scan, independent of CharIndex.
            let chars: Vec<char> = context.chars().collect();
            let needle_chars: Vec<char> = needle.chars().collect();
            let start = (0..chars.len())
                .find(|&s| chars[s..].starts_with(&needle_chars))
                .unwrap();
            qas.push(QaItem {
                id: format!("q{i}"),
                question: "?".into(),
                answers: vec![GroundTruthAnswer { text: text.to_string(), answer_start: start }],
                language: LanguageTag::ja(),
                is_impossible: false,
            });
        }
        d.articles.push(Article {
            title: "東京".into(),
            paragraphs: vec![Paragraph { context: context.into(), qas }],
        });
        assert!(validate_dataset(&d).is_valid());
        let back = parse_dataset(&serialize_dataset(&d).unwrap(), &LanguageTag::en()).unwrap();
        let before: Vec<usize> = d.items().map(|(_, _, q)| q.answers[0].answer_start).collect();
        let after: Vec<usize> = back.items().map(|(_, _, q)| q.answers[0].answer_start).collect();
        assert_eq!(before, vec![6, 26, 24]);
        assert_eq!(before, after);
        assert_eq!(back, d);
    }

    #[test]
    fn numeric_ids_become_text() {
        let doc = MINIMAL.replace("\"id\":\"q1\"", "\"id\":42");
        let d = parse_dataset(doc.as_bytes(), &LanguageTag::en()).unwrap();
        assert_eq!(d.items().next().unwrap().2.id, "42");
    }
}
