use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use polyqa_core::LanguageTag;
use serde::{Deserialize, Serialize};

use crate::evaluate::{load_score_file, ScoreFile};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub context_language: LanguageTag,
    pub question_language: LanguageTag,
    pub f1: f64,
    pub em: f64,
    pub n_items: usize,
    /// Languages for which this cell has the best EM among the cells where
    /// the language occurs, as context or as question.
    #[serde(default)]
    pub best_em_for: Vec<LanguageTag>,
}

/// Rows are context languages, columns question languages; `cells` is
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub context_languages: Vec<LanguageTag>,
    pub question_languages: Vec<LanguageTag>,
    pub cells: Vec<GridCell>,
}

/// Arranges scores into a grid with one row per context language and one
/// column per question language; every combination must be present.
/// Without an explicit order, languages are sorted by code.
pub fn build_grid(scores: &[ScoreFile], order: Option<&[LanguageTag]>) -> Result<GridReport, CliError> {
    let mut by_cell: BTreeMap<(LanguageTag, LanguageTag), &ScoreFile> = BTreeMap::new();
    for s in scores {
        let key = (s.context_language.clone(), s.question_language.clone());
        if by_cell.insert(key, s).is_some() {
            return Err(CliError::DuplicateCell {
                context: s.context_language.to_string(),
                question: s.question_language.to_string(),
            });
        }
    }
    let arrange = |present: BTreeSet<LanguageTag>| -> Result<Vec<LanguageTag>, CliError> {
        match order {
            Some(order) => {
                if let Some(extra) = present.iter().find(|l| !order.contains(l)) {
                    return Err(CliError::Failed(format!("language {extra} is not in the requested order")));
                }
                Ok(order.iter().filter(|l| present.contains(*l)).cloned().collect())
            }
            None => Ok(present.into_iter().collect()),
        }
    };
    let context_languages = arrange(by_cell.keys().map(|(c, _)| c.clone()).collect())?;
    let question_languages = arrange(by_cell.keys().map(|(_, q)| q.clone()).collect())?;

    let mut cells = Vec::with_capacity(context_languages.len() * question_languages.len());
    for c in &context_languages {
        for q in &question_languages {
            let s = by_cell.get(&(c.clone(), q.clone())).ok_or_else(|| CliError::MissingCell {
                context: c.to_string(),
                question: q.to_string(),
            })?;
            cells.push(GridCell {
                context_language: c.clone(),
                question_language: q.clone(),
                f1: s.f1,
                em: s.em,
                n_items: s.n_items,
                best_em_for: Vec::new(),
            });
        }
    }
    let all: BTreeSet<&LanguageTag> = context_languages.iter().chain(&question_languages).collect();
    let flag_order: Vec<LanguageTag> = match order {
        Some(order) => order.iter().filter(|l| all.contains(l)).cloned().collect(),
        None => all.into_iter().cloned().collect(),
    };
    for lang in &flag_order {
        let involved = |cell: &GridCell| cell.context_language == *lang || cell.question_language == *lang;
        let best = cells.iter().filter(|c| involved(c)).map(|c| c.em).fold(f64::NEG_INFINITY, f64::max);
        for cell in cells.iter_mut().filter(|c| involved(c) && c.em == best) {
            cell.best_em_for.push(lang.clone());
        }
    }
    Ok(GridReport { context_languages, question_languages, cells })
}

pub fn cmd_report(paths: &[PathBuf], order: Option<&[LanguageTag]>) -> Result<GridReport, CliError> {
    let scores = paths.iter().map(|p| load_score_file(p)).collect::<Result<Vec<_>, _>>()?;
    build_grid(&scores, order)
}

impl GridReport {
    pub fn cell(&self, context: &LanguageTag, question: &LanguageTag) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.context_language == *context && c.question_language == *question)
    }

    /// Fixed-width table of `F1 / EM`; `*` marks a best EM.
    pub fn render_text(&self) -> String {
        let n = self.question_languages.len();
        let head_width =
            self.context_languages.iter().map(|l| l.code().len()).max().unwrap_or(0).max("context\\question".len());
        let cell_text: Vec<String> = self
            .cells
            .iter()
            .map(|c| format!("{:.2} / {:.2}{}", c.f1, c.em, if c.best_em_for.is_empty() { " " } else { "*" }))
            .collect();
        let width = cell_text.iter().map(|s| s.len()).chain(self.question_languages.iter().map(|l| l.code().len())).max().unwrap_or(0);

        let mut out = String::new();
        let _ = write!(out, "{:<head_width$}", "context\\question");
        for l in &self.question_languages {
            let _ = write!(out, "  {:>width$}", l.code());
        }
        out.push('\n');
        for (r, l) in self.context_languages.iter().enumerate() {
            let _ = write!(out, "{:<head_width$}", l.code());
            for text in &cell_text[r * n..(r + 1) * n] {
                let _ = write!(out, "  {text:>width$}");
            }
            out.push('\n');
        }
        out.push_str("\ncells are F1 / EM; * best EM for:");
        let mut flagged: Vec<&LanguageTag> = Vec::new();
        for c in &self.cells {
            for l in &c.best_em_for {
                if !flagged.contains(&l) {
                    flagged.push(l);
                }
            }
        }
        for l in flagged {
            let winners: Vec<String> = self
                .cells
                .iter()
                .filter(|c| c.best_em_for.contains(l))
                .map(|c| format!("{}-{}", c.context_language, c.question_language))
                .collect();
            let _ = write!(out, " {l} ({})", winners.join(", "));
        }
        out.push('\n');
        out
    }

    pub fn to_json(&self) -> String {
        crate::to_json_line(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
