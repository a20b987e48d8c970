//! HTTP front end: chat with feedback, stateless QA, knowledge-base
//! ingestion, and a `/extract` endpoint serving the lexical baseline over
//! the extraction protocol.

pub mod config;
mod routes;

use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use polyqa_core::dialog::{load_intents, DialogEngine, DialogError, LexicalClassifier};
use polyqa_core::extractor::{BaselineExtractor, Extractor, RemoteExtractor};
use polyqa_core::ingest::{apply_outcomes, fetch_all, RefreshReport, SourceStore, StoreError};
use tokio::net::TcpListener;

pub use config::{Builtin, ConfigError, ExtractorSelection, ServiceConfig};
pub use routes::{router, Attribution, ChatResponse, FeedbackResponse, QaResponse, SourceSummary};

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dialog(#[from] DialogError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("binding {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server: {0}")]
    Serve(#[source] std::io::Error),
}

/// Everything the handlers share.
pub struct AppState {
    pub config: ServiceConfig,
    pub engine: DialogEngine,
    pub store: Arc<RwLock<SourceStore>>,
    /// Serializes refreshes; the store itself is only write-locked while
    /// results are applied.
    ingest_lock: Mutex<()>,
    baseline: BaselineExtractor,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServerError> {
        config.validate()?;
        let intents = load_intents(&config.intents)?;
        let store = match &config.store_dir {
            Some(dir) => SourceStore::open(dir)?,
            None => SourceStore::in_memory(),
        };
        let store = Arc::new(RwLock::new(store));
        let extractor: Arc<dyn Extractor> = match &config.extractor {
            ExtractorSelection::Builtin(Builtin::Baseline) => Arc::new(BaselineExtractor::default()),
            ExtractorSelection::Remote { endpoint, timeout_ms } => {
                Arc::new(RemoteExtractor::new(endpoint, Duration::from_millis(*timeout_ms)))
            }
        };
        let mut engine = DialogEngine::new(
            intents,
            Box::new(LexicalClassifier::new(config.tau_intent)),
            extractor,
            store.clone(),
            config.dialog_config(),
        );
        if let Some(path) = &config.audit_log {
            engine = engine.with_audit_log(path)?;
        }
        Ok(Self { config, engine, store, ingest_lock: Mutex::new(()), baseline: BaselineExtractor::default() })
    }

    /// Fetches every configured source and stores the results. Concurrent
    /// calls run one after the other.
    pub fn ingest(&self) -> RefreshReport {
        let _guard = self.ingest_lock.lock().expect("ingest lock poisoned");
        let outcomes = fetch_all(&self.config.sources, &self.config.fetch_config());
        let mut store = self.store.write().expect("store lock poisoned");
        let report = apply_outcomes(&mut store, outcomes);
        for e in &report.entries {
            log::info!("ingest {} ({}): {:?}", e.id, e.url, e.status);
        }
        report
    }

    pub fn baseline(&self) -> &BaselineExtractor {
        &self.baseline
    }
}

/// A server bound to its port, ready to run.
pub struct Server {
    listener: TcpListener,
    state: Arc<AppState>,
}

impl Server {
    pub async fn bind(config: ServiceConfig) -> Result<Self, ServerError> {
        let addr = config.listen;
        let state = Arc::new(tokio::task::spawn_blocking(move || AppState::new(config)).await.expect("startup task")?);
        let listener = TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr: addr.to_string(), source })?;
        Ok(Self { listener, state })
    }

    pub fn local_addr(&self) -> std::net::SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    pub fn state(&self) -> Arc<AppState> {
        self.state.clone()
    }

    /// Starts the initial ingestion in the background, then serves until
    /// `shutdown` resolves.
    pub async fn run(self, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> Result<(), ServerError> {
        let state = self.state.clone();
        if !state.config.sources.is_empty() {
            tokio::task::spawn_blocking(move || state.ingest());
        }
        axum::serve(self.listener, router(self.state))
            .with_graceful_shutdown(shutdown)
            .await
            .map_err(ServerError::Serve)
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServerError> {
    let server = Server::bind(config).await?;
    log::info!("listening on {}", server.local_addr());
    server
        .run(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// [`serve`] on a fresh multi-threaded runtime, for synchronous callers.
pub fn serve_blocking(config: ServiceConfig) -> Result<(), ServerError> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(ServerError::Serve)?;
    rt.block_on(serve(config))
}
