use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use polyqa_cli::{cmd_evaluate, cmd_mix, cmd_report, Alignment, CliError, EvalRunSpec, ExtractorChoice, MixInput};
use polyqa_core::extractor::conformance::run_conformance;
use polyqa_core::extractor::{DEFAULT_MAX_CANDIDATES, DEFAULT_STRIDE, DEFAULT_WINDOW};
use polyqa_core::ingest::{refresh_store, RefreshStatus, SourceStore};
use polyqa_core::LanguageTag;
use polyqa_server::ServiceConfig;

/// Multilingual extractive question answering toolkit.
///
/// Errors are reported on stderr as one JSON line
/// `{"error": {"command", "kind", "message"}}` with a nonzero exit code.
#[derive(Parser)]
#[command(name = "polyqa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build every context-language x question-language dataset.
    Mix {
        /// `<language>=<path>`, once per language.
        #[arg(long = "input", short, required = true, value_parser = parse_input)]
        inputs: Vec<MixInput>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Alignment::ById)]
        align: Alignment,
    },
    /// Predict answers for a dataset and score them (EM/F1).
    Evaluate {
        #[arg(long, short)]
        dataset: PathBuf,
        /// Context language when the file has no `x_language` marker.
        #[arg(long)]
        language: Option<LanguageTag>,
        /// `baseline`, `self` (first ground truth) or an extractor base url.
        #[arg(long, default_value = "baseline", conflicts_with = "predictions")]
        extractor: String,
        /// Score an `{id: answer}` predictions file instead of extracting.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_STRIDE)]
        stride: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
        max_candidates: usize,
        /// Normalization profile overrides (JSON or TOML with `profiles`).
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Aggregate score file.
        #[arg(long, short)]
        output: PathBuf,
        /// Per-item file (default: `<output>.items.jsonl`).
        #[arg(long)]
        items: Option<PathBuf>,
    },
    /// Render score files as a context x question grid.
    Report {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        /// Comma-separated language order for rows and columns.
        #[arg(long, value_delimiter = ',')]
        languages: Option<Vec<LanguageTag>>,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Fetch the configured sources into the store.
    Ingest {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Check an extractor endpoint against the `/extract` protocol.
    Conformance {
        endpoint: String,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
    },
}

fn parse_input(s: &str) -> Result<MixInput, String> {
    let (lang, path) = s.split_once('=').ok_or("expected <language>=<path>")?;
    Ok(MixInput { language: lang.parse().map_err(|e| format!("{e}"))?, path: path.into() })
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Mix { inputs, out, align } => print_json(&cmd_mix(&inputs, &out, align)?),
        Command::Evaluate {
            dataset,
            language,
            extractor,
            predictions,
            timeout_ms,
            window,
            stride,
            max_candidates,
            profiles,
            output,
            items,
        } => {
            let choice = match (predictions, extractor.as_str()) {
                (Some(p), _) => ExtractorChoice::Predictions(p),
                (None, "baseline") => ExtractorChoice::Baseline,
                (None, "self") => ExtractorChoice::SelfPrediction,
                (None, url) => ExtractorChoice::Endpoint { url: url.into(), timeout: Duration::from_millis(timeout_ms) },
            };
            let mut spec = EvalRunSpec::new(dataset, choice, output);
            spec.language = language;
            spec.window = window;
            spec.stride = stride;
            spec.max_candidates = max_candidates;
            spec.profiles = profiles;
            spec.items_output = items;
            print_json(&cmd_evaluate(&spec)?.scores);
        }
        Command::Report { scores, languages, json } => {
            let grid = cmd_report(&scores, languages.as_deref())?;
            if json {
                print!("{}", grid.to_json());
            } else {
                print!("{}", grid.render_text());
            }
        }
        Command::Ingest { config } => {
            let config = ServiceConfig::load(&config).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut store = match &config.store_dir {
                Some(dir) => SourceStore::open(dir).map_err(|e| CliError::Failed(e.to_string()))?,
                None => return Err(CliError::Failed("config has no store_dir to ingest into".into())),
            };
            let report = refresh_store(&mut store, &config.sources, &config.fetch_config());
            print_json(&report);
            let failed = report.count(|s| matches!(s, RefreshStatus::Failed { .. }));
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} of {} sources failed", report.entries.len())));
            }
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config).map_err(|e| CliError::Failed(e.to_string()))?;
            polyqa_server::serve_blocking(config).map_err(|e| CliError::Failed(e.to_string()))?;
        }
        Command::Conformance { endpoint, timeout_ms } => {
            let report = run_conformance(&endpoint, Duration::from_millis(timeout_ms));
            print_json(&report);
            if !report.passed() {
                return Err(CliError::Failed("endpoint failed conformance checks".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Mix { .. } => "mix",
        Command::Evaluate { .. } => "evaluate",
        Command::Report { .. } => "report",
        Command::Ingest { .. } => "ingest",
        Command::Serve { .. } => "serve",
        Command::Conformance { .. } => "conformance",
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.error_line(name));
            ExitCode::FAILURE
        }
    }
}
