use std::sync::Arc;
use std::time::Instant;

use adgene_core::corpora::{export_jsonl, generate, TemplateSet};
use adgene_core::engines::{dispatch_with, Answer};
use adgene_core::knowledge::Attribute;
use adgene_core::{BrainRegion, QtlKind, TaskLabel};
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::state::{AppState, CorpusJob, JobStatus, Snapshot};
use crate::API_VERSION;

pub const LATENCY_HEADER: &str = "x-latency-ms";

type Shared = Arc<AppState>;

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    kb_hash: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, kb_hash: &str) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            kb_hash: kb_hash.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "api_version": API_VERSION,
            "kb_hash": self.kb_hash,
            "error": { "code": self.code, "message": self.message },
        });
        (self.status, Json(body)).into_response()
    }
}

/// JSON body extractor whose rejections use the service error shape.
pub struct ApiJson<T>(pub T);

impl<T: DeserializeOwned> FromRequest<Shared> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &Shared) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Self(v)),
            Err(rejection) => Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_request",
                rejection.body_text(),
                &state.snapshot().kb_hash,
            )),
        }
    }
}

pub fn app(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/query", post(query))
        .route("/genes", get(genes))
        .route("/genes/{symbol}", get(gene_detail))
        .route("/regions", get(regions))
        .route("/corpus/build", post(corpus_build))
        .route("/corpus/jobs/{id}", get(corpus_job))
        .route("/report/latest", get(report_latest))
        .route("/admin/reload", post(reload))
        .layer(middleware::from_fn_with_state(state.clone(), observe))
        .with_state(state)
}

/// Adds the latency header and appends to the request log.
async fn observe(State(state): State<Shared>, req: Request, next: Next) -> Response {
    let started = Instant::now();
    let method = req.method().to_string();
    let path = req.uri().path().to_string();
    let mut resp = next.run(req).await;
    let ms = started.elapsed().as_secs_f64() * 1e3;
    if let Ok(v) = HeaderValue::from_str(&format!("{ms:.3}")) {
        resp.headers_mut().insert(LATENCY_HEADER, v);
    }
    if let Some(log) = &state.request_log {
        let line = json!({
            "ts_ms": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            "method": method,
            "path": path,
            "status": resp.status().as_u16(),
            "latency_ms": ms,
            "kb_hash": state.snapshot().kb_hash,
        });
        use std::io::Write;
        if let Ok(mut f) = log.lock() {
            if let Err(e) = writeln!(f, "{line}") {
                tracing::warn!("request log write failed: {e}");
            }
        }
    }
    resp
}

async fn health(State(state): State<Shared>) -> Json<Value> {
    let snap = state.snapshot();
    Json(json!({
        "api_version": API_VERSION,
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "kb_hash": snap.kb_hash,
        "router_hash": snap.router_hash,
        "backend": snap.backend.name(),
    }))
}

#[derive(Deserialize)]
struct QueryRequest {
    text: String,
}

#[derive(Serialize)]
struct QueryResponse<'a> {
    api_version: &'static str,
    kb_hash: &'a str,
    router_hash: &'a str,
    #[serde(flatten)]
    answer: &'a Answer,
}

async fn query(State(state): State<Shared>, ApiJson(req): ApiJson<QueryRequest>) -> Result<Response, ApiError> {
    let snap = state.snapshot();
    if req.text.trim().is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "empty_query",
            "query text is empty",
            &snap.kb_hash,
        ));
    }
    let answer = dispatch_with(&snap.kb, &snap.lexicon, &snap.router, snap.backend.as_ref(), &req.text);
    let status = match answer.error.as_ref().map(|e| e.code.as_str()) {
        None => StatusCode::OK,
        Some("unknown_gene") => StatusCode::NOT_FOUND,
        Some("ungrounded_output") => StatusCode::INTERNAL_SERVER_ERROR,
        Some(_) => StatusCode::UNPROCESSABLE_ENTITY,
    };
    let body = QueryResponse {
        api_version: API_VERSION,
        kb_hash: &snap.kb_hash,
        router_hash: &snap.router_hash,
        answer: &answer,
    };
    Ok((status, Json(body)).into_response())
}

async fn genes(State(state): State<Shared>) -> Json<Value> {
    let snap = state.snapshot();
    let genes: Vec<&str> = snap.kb.seed_genes().iter().map(|g| g.as_str()).collect();
    Json(json!({ "api_version": API_VERSION, "kb_hash": snap.kb_hash, "genes": genes }))
}

fn gene_payload(snap: &Snapshot, symbol: &str) -> Option<Value> {
    let kb = &snap.kb;
    let a = kb.annotation(symbol).ok()?;
    let associations: Vec<Value> = BrainRegion::ALL
        .into_iter()
        .map(|r| {
            let mut row = json!({ "region": r.id(), "label": r.display_label() });
            for k in QtlKind::ALL {
                let n = kb.significant_records(symbol, r, k).map(|v| v.len()).unwrap_or(0);
                row[k.label()] = json!(n > 0);
                row[format!("{}_significant_variants", k.label())] = json!(n);
            }
            row
        })
        .collect();
    let mg = kb.molecular_genetics(symbol);
    Some(json!({
        "api_version": API_VERSION,
        "kb_hash": snap.kb_hash,
        "symbol": a.symbol,
        "annotation": {
            "chromosome": a.chromosome,
            "start": a.start,
            "end": a.end,
            "strand": a.strand,
            "location_summary": kb.gene_attribute(symbol, Attribute::LocationSummary).ok()?.to_string(),
        },
        "significance_alpha": kb.significance_alpha(),
        "associations": associations,
        "molecular_genetics": {
            "present": mg.is_some(),
            "ad_related": mg.map(|r| r.ad_related),
            "citations": mg.map(|r| r.citations.clone()).unwrap_or_default(),
        },
    }))
}

async fn gene_detail(State(state): State<Shared>, Path(symbol): Path<String>) -> Result<Json<Value>, ApiError> {
    let snap = state.snapshot();
    gene_payload(&snap, &symbol.to_ascii_uppercase())
        .map(Json)
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "unknown_gene",
                format!("gene `{symbol}` is not in the knowledge base"),
                &snap.kb_hash,
            )
        })
}

async fn regions(State(state): State<Shared>) -> Json<Value> {
    let snap = state.snapshot();
    let regions: Vec<Value> = BrainRegion::ALL
        .into_iter()
        .map(|r| json!({ "id": r.id(), "label": r.display_label() }))
        .collect();
    Json(json!({ "api_version": API_VERSION, "kb_hash": snap.kb_hash, "regions": regions }))
}

#[derive(Deserialize)]
struct BuildRequest {
    task: Value,
    #[serde(default = "standard_id")]
    template_set_id: String,
    #[serde(default)]
    seed: u64,
}

fn standard_id() -> String {
    "standard".into()
}

fn parse_task(v: &Value) -> Option<TaskLabel> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .and_then(|n| TaskLabel::from_index((n as usize).checked_sub(1)?)),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn template_set(state: &AppState, id: &str) -> Result<TemplateSet, String> {
    match id {
        "standard" => Ok(TemplateSet::standard()),
        "paraphrases" => Ok(TemplateSet::paraphrases()),
        other => match state.config.template_sets.get(other) {
            Some(path) => TemplateSet::load(path).map_err(|e| e.to_string()),
            None => Err(format!("unknown template set `{other}`")),
        },
    }
}

fn job_response(status: StatusCode, job: &CorpusJob, kb_hash: &str) -> Response {
    let mut body = serde_json::to_value(job).expect("job serialises");
    body["api_version"] = json!(API_VERSION);
    body["current_kb_hash"] = json!(kb_hash);
    (status, Json(body)).into_response()
}

async fn corpus_build(State(state): State<Shared>, ApiJson(req): ApiJson<BuildRequest>) -> Result<Response, ApiError> {
    let snap = state.snapshot();
    let invalid = |msg: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", msg, &snap.kb_hash);
    let task = parse_task(&req.task).ok_or_else(|| invalid(format!("unknown task {}", req.task)))?;
    let templates = template_set(&state, &req.template_set_id).map_err(invalid)?;

    let job = {
        let mut jobs = state.jobs.lock().expect("job table poisoned");
        if let Some(id) = jobs.running.get(&task) {
            // Single flight: a second request for a busy task joins the running job.
            let existing = jobs.by_id[id].clone();
            return Ok(job_response(StatusCode::ACCEPTED, &existing, &snap.kb_hash));
        }
        let job = CorpusJob {
            job_id: state.next_job_id(),
            task,
            template_set_id: req.template_set_id,
            seed: req.seed,
            status: JobStatus::Running,
            kb_hash: snap.kb_hash.clone(),
            path: None,
            count: None,
            error: None,
        };
        jobs.running.insert(task, job.job_id.clone());
        jobs.by_id.insert(job.job_id.clone(), job.clone());
        job
    };

    let worker_state = state.clone();
    let worker_snap = snap.clone();
    let id = job.job_id.clone();
    tokio::task::spawn_blocking(move || {
        let dir = worker_state.config.corpus_dir.clone();
        let path = dir.join(format!("{id}-task{}.jsonl", task.number()));
        let result = std::fs::create_dir_all(&dir)
            .map_err(|e| e.to_string())
            .and_then(|_| generate(&worker_snap.kb, &templates, task, req.seed).map_err(|e| e.to_string()))
            .and_then(|c| export_jsonl(&c, &path).map(|_| c.len()).map_err(|e| e.to_string()));
        let mut jobs = worker_state.jobs.lock().expect("job table poisoned");
        jobs.running.remove(&task);
        if let Some(j) = jobs.by_id.get_mut(&id) {
            match result {
                Ok(n) => {
                    j.status = JobStatus::Done;
                    j.count = Some(n);
                    j.path = Some(path);
                }
                Err(e) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(e);
                }
            }
        }
    });
    Ok(job_response(StatusCode::ACCEPTED, &job, &snap.kb_hash))
}

async fn corpus_job(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let kb_hash = state.snapshot().kb_hash.clone();
    let job = state.jobs.lock().expect("job table poisoned").by_id.get(&id).cloned();
    match job {
        Some(j) => Ok(job_response(StatusCode::OK, &j, &kb_hash)),
        None => Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_job",
            format!("no job `{id}`"),
            &kb_hash,
        )),
    }
}

async fn report_latest(State(state): State<Shared>) -> Result<Json<Value>, ApiError> {
    let kb_hash = state.snapshot().kb_hash.clone();
    let not_found = |msg: String| ApiError::new(StatusCode::NOT_FOUND, "no_report", msg, &kb_hash);
    let path = state
        .config
        .report
        .as_ref()
        .ok_or_else(|| not_found("no report path configured".into()))?;
    let bytes = std::fs::read(path).map_err(|e| not_found(format!("{}: {e}", path.display())))?;
    let report: Value = serde_json::from_slice(&bytes).map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "report_invalid",
            e.to_string(),
            &kb_hash,
        )
    })?;
    Ok(Json(
        json!({ "api_version": API_VERSION, "kb_hash": kb_hash, "report": report }),
    ))
}

async fn reload(State(state): State<Shared>) -> Result<Json<Value>, ApiError> {
    let current = state.snapshot().kb_hash.clone();
    let Ok(_guard) = state.reload_lock.try_lock() else {
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "reload_in_progress",
            "a reload is already running",
            &current,
        ));
    };
    let config = state.config.clone();
    let loaded = tokio::task::spawn_blocking(move || Snapshot::load(&config))
        .await
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "reload_failed",
                e.to_string(),
                &current,
            )
        })?;
    let next = loaded.map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "reload_failed",
            e.to_string(),
            &current,
        )
    })?;
    let body = json!({
        "api_version": API_VERSION,
        "kb_hash": next.kb_hash,
        "router_hash": next.router_hash,
        "previous_kb_hash": current,
    });
    state.swap(next);
    Ok(Json(body))
}
