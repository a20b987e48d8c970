//! Experiment harness: build cross-lingual grids, run an extractor over a
//! dataset, score it and render language grids.

pub mod evaluate;
pub mod mix;
pub mod report;

use std::path::{Path, PathBuf};

use polyqa_core::extractor::ExtractError;
use polyqa_core::{DatasetError, MetricsError, MixError};
use serde_json::json;

pub use evaluate::{cmd_evaluate, EvalOutcome, EvalRunSpec, ExtractorChoice, ItemRecord, ScoreFile};
pub use mix::{cmd_mix, Alignment, CellReport, MixInput, MixReport};
pub use report::{build_grid, cmd_report, GridCell, GridReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    BadInput { path: PathBuf, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Mix(#[from] MixError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("item {id}: {source}")]
    ItemFailed {
        id: String,
        #[source]
        source: ExtractError,
    },
    #[error("grid cell context={context} question={question} is missing")]
    MissingCell { context: String, question: String },
    #[error("grid cell context={context} question={question} appears twice")]
    DuplicateCell { context: String, question: String },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::BadInput { .. } => "bad_input",
            CliError::Dataset(_) => "dataset",
            CliError::Mix(_) => "mix",
            CliError::Metrics(_) => "metrics",
            CliError::ItemFailed { .. } => "item_failed",
            CliError::MissingCell { .. } => "missing_cell",
            CliError::DuplicateCell { .. } => "duplicate_cell",
            CliError::Failed(_) => "failed",
        }
    }

    /// One-line JSON for stderr.
    pub fn error_line(&self, command: &str) -> String {
        let mut v = json!({"error": {"command": command, "kind": self.kind(), "message": self.to_string()}});
        if let CliError::ItemFailed { id, .. } = self {
            v["error"]["item_id"] = json!(id);
        }
        v.to_string()
    }
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
}

pub(crate) fn to_json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
