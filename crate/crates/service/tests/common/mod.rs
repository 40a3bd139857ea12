#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use adgene_core::corpora::{generate, TemplateSet};
use adgene_core::ingest::Manifest;
use adgene_core::router::{train_router, DEFAULT_SMOOTHING};
use adgene_core::{KnowledgeBase, TaskLabel};
use adgene_service::{AppState, ServiceConfig};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn kb() -> KnowledgeBase {
    Manifest::load(fixtures().join("ad144/manifest.toml"))
        .unwrap()
        .read_dataset()
        .unwrap()
        .build(None)
        .unwrap()
}

/// KB and router snapshots written once per test binary.
pub struct Artifacts {
    pub dir: tempfile::TempDir,
    pub kb: PathBuf,
    pub router: PathBuf,
}

pub fn artifacts() -> &'static Artifacts {
    static CELL: OnceLock<Artifacts> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let kb = kb();
        let set = TemplateSet::standard();
        let corpora: Vec<_> = TaskLabel::ALL
            .into_iter()
            .map(|t| generate(&kb, &set, t, 7).unwrap())
            .collect();
        let router = train_router(
            corpora
                .iter()
                .flat_map(|c| c.examples.iter().map(|e| (e.instruction.as_str(), e.task))),
            DEFAULT_SMOOTHING,
        )
        .unwrap();
        let kb_path = dir.path().join("kb.snap");
        let router_path = dir.path().join("router.json");
        kb.save(&kb_path).unwrap();
        router.save(&router_path).unwrap();
        Artifacts {
            kb: kb_path,
            router: router_path,
            dir,
        }
    })
}

/// Config over the shared snapshots with per-test output paths under `scratch`.
pub fn config(scratch: &Path) -> ServiceConfig {
    let a = artifacts();
    let mut c = ServiceConfig::new(&a.kb, &a.router);
    c.corpus_dir = scratch.join("corpora");
    c
}

pub fn state(config: ServiceConfig) -> Arc<AppState> {
    Arc::new(AppState::new(config).unwrap())
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.bytes).unwrap()
    }
}

pub async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or("").to_string())).unwrap();
    let resp = adgene_service::app(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, bytes }
}

pub async fn query(state: &Arc<AppState>, text: &str) -> Reply {
    let body = serde_json::json!({ "text": text }).to_string();
    call(state, "POST", "/query", Some(&body)).await
}
