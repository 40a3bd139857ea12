//! HTTP front end for the knowledge base and the routed answer engines.
//!
//! Requests read an immutable [`state::Snapshot`] (knowledge base, router,
//! backend). `POST /admin/reload` loads a fresh snapshot from disk and
//! swaps it in atomically, so a request sees either the old or the new
//! snapshot, never a mix.

pub mod config;
pub mod routes;
pub mod state;

use std::fmt;
use std::sync::Arc;

pub use config::ServiceConfig;
pub use routes::{app, LATENCY_HEADER};
pub use state::{AppState, Snapshot};

/// Wire format version carried by every JSON response.
pub const API_VERSION: &str = "1";

/// Why the service could not start; `code` is stable and machine-readable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartupError {
    pub code: &'static str,
    pub message: String,
}

impl StartupError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for StartupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for StartupError {}

/// Binds `config.bind` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), StartupError> {
    let bind = config.bind.clone();
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(&bind)
        .await
        .map_err(|e| StartupError::new("bind_failed", format!("{bind}: {e}")))?;
    tracing::info!(
        bind = %bind,
        kb_hash = %state.snapshot().kb_hash,
        "serving"
    );
    axum::serve(listener, app(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| StartupError::new("serve_failed", e.to_string()))
}
