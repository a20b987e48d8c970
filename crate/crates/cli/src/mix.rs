use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use polyqa_core::{align_by_position, align_datasets, load_dataset, mix_grid, serialize_dataset, LanguageTag};
use serde::{Deserialize, Serialize};

use crate::{to_json_line, write, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    /// Items share ids across languages.
    #[default]
    ById,
    /// Items are matched by their article/paragraph/question position.
    ByPosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixInput {
    pub language: LanguageTag,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellReport {
    pub context_language: LanguageTag,
    pub question_language: LanguageTag,
    pub file: String,
    pub items: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixReport {
    /// Items present in every input language.
    pub aligned_ids: usize,
    pub cells: Vec<CellReport>,
}

/// Writes `<context>-<question>.json` for every language pair into
/// `out_dir`, plus `mix-report.json`.
pub fn cmd_mix(inputs: &[MixInput], out_dir: &Path, alignment: Alignment) -> Result<MixReport, CliError> {
    let mut datasets = BTreeMap::new();
    for input in inputs {
        let ds = load_dataset(&input.path, &input.language)?;
        if ds.language != input.language {
            return Err(CliError::BadInput {
                path: input.path.clone(),
                message: format!("file declares language {} but was given as {}", ds.language, input.language),
            });
        }
        if datasets.insert(input.language.clone(), ds).is_some() {
            return Err(CliError::BadInput {
                path: input.path.clone(),
                message: format!("language {} given twice", input.language),
            });
        }
    }
    let corpus = match alignment {
        Alignment::ById => align_datasets(datasets)?,
        Alignment::ByPosition => align_by_position(datasets)?,
    };
    let n_langs = corpus.languages().count();
    let aligned_ids = corpus.alignment().values().filter(|m| m.len() == n_langs).count();
    let grid = mix_grid(&corpus)?;

    let mut cells = Vec::with_capacity(grid.len());
    for (spec, mixed) in grid {
        let file = format!("{}.json", spec.file_stem());
        write(&out_dir.join(&file), &serialize_dataset(&mixed.dataset)?)?;
        cells.push(CellReport {
            context_language: spec.context_language,
            question_language: spec.question_language,
            file,
            items: mixed.aligned,
            dropped: mixed.dropped,
        });
    }
    let report = MixReport { aligned_ids, cells };
    write(&out_dir.join("mix-report.json"), to_json_line(&report).as_bytes())?;
    Ok(report)
}
