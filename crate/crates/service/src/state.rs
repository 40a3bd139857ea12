//! Shared state: the swappable snapshot, corpus jobs and the request log.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use adgene_core::engines::{backend_by_name, GenerativeBackend, Lexicon};
use adgene_core::router::RouterModel;
use adgene_core::{KnowledgeBase, TaskLabel};
use serde::Serialize;

use crate::config::ServiceConfig;
use crate::StartupError;

/// Everything a request reads, loaded together and replaced together.
pub struct Snapshot {
    pub kb: KnowledgeBase,
    pub lexicon: Lexicon,
    pub router: RouterModel,
    pub backend: Box<dyn GenerativeBackend>,
    pub kb_hash: String,
    pub router_hash: String,
}

impl Snapshot {
    pub fn load(config: &ServiceConfig) -> Result<Self, StartupError> {
        if !config.kb.exists() {
            return Err(StartupError::new("kb_missing", config.kb.display().to_string()));
        }
        if !config.router.exists() {
            return Err(StartupError::new("router_missing", config.router.display().to_string()));
        }
        let mut kb = KnowledgeBase::load(&config.kb).map_err(|e| StartupError::new("kb_invalid", e.to_string()))?;
        if let Some(alpha) = config.significance_alpha {
            kb = kb
                .with_alpha(alpha)
                .map_err(|e| StartupError::new("bad_alpha", e.to_string()))?;
        }
        let router =
            RouterModel::load(&config.router).map_err(|e| StartupError::new("router_invalid", e.to_string()))?;
        let backend = backend_by_name(&config.backend)
            .ok_or_else(|| StartupError::new("unknown_backend", config.backend.clone()))?;
        Ok(Self {
            lexicon: Lexicon::new(&kb),
            kb_hash: kb.snapshot_hash(),
            router_hash: router.snapshot_hash(),
            kb,
            router,
            backend,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusJob {
    pub job_id: String,
    pub task: TaskLabel,
    pub template_set_id: String,
    pub seed: u64,
    pub status: JobStatus,
    pub kb_hash: String,
    pub path: Option<PathBuf>,
    pub count: Option<usize>,
    pub error: Option<String>,
}

#[derive(Default)]
pub struct Jobs {
    pub by_id: BTreeMap<String, CorpusJob>,
    /// Job currently running for each task.
    pub running: BTreeMap<TaskLabel, String>,
}

pub struct AppState {
    pub config: ServiceConfig,
    snapshot: RwLock<Arc<Snapshot>>,
    /// Held for the whole of a reload; a second reload fails fast.
    pub reload_lock: tokio::sync::Mutex<()>,
    pub jobs: Mutex<Jobs>,
    next_job: AtomicU64,
    pub request_log: Option<Mutex<File>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, StartupError> {
        let snapshot = Snapshot::load(&config)?;
        let request_log = match &config.request_log {
            Some(p) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| StartupError::new("request_log_unwritable", format!("{}: {e}", p.display())))?,
            )),
            None => None,
        };
        Ok(Self {
            config,
            snapshot: RwLock::new(Arc::new(snapshot)),
            reload_lock: tokio::sync::Mutex::new(()),
            jobs: Mutex::new(Jobs::default()),
            next_job: AtomicU64::new(1),
            request_log,
        })
    }

    /// The current snapshot. Callers keep using it even if a reload swaps
    /// in a new one meanwhile.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    pub fn swap(&self, next: Snapshot) {
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(next);
    }

    pub fn next_job_id(&self) -> String {
        format!("job-{}", self.next_job.fetch_add(1, Ordering::Relaxed))
    }
}
