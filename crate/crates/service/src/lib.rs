//! HTTP front end for the dependency analyzer.
//!
//! `POST /api/v1/dependency-map` analyzes a local repository checkout and
//! returns its canonical report. Reports are cached per repository path and
//! content fingerprint, so any byte change to the manifest, analyzer config
//! or an artifact forces a fresh analysis.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use dashmap::DashMap;
use depmap_core::error::IngestError;
use depmap_core::ingest::load_repository;
use depmap_core::report::{report_for, report_timestamp, DependencyReport};
use serde_json::{json, Value};

pub const ROUTE: &str = "/api/v1/dependency-map";
pub const CACHE_HEADER: &str = "x-depmap-cache";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub cache_ttl: Duration,
    /// Timestamp stamped on every report instead of the wall clock.
    pub fixed_time: Option<DateTime<Utc>>,
}

impl ServiceConfig {
    /// Honours `SOURCE_DATE_EPOCH` like the CLI does.
    pub fn from_env(cache_ttl: Duration) -> Self {
        let fixed_time = std::env::var_os("SOURCE_DATE_EPOCH").map(|_| report_timestamp());
        Self { cache_ttl, fixed_time }
    }
}

type CacheKey = (PathBuf, String);

/// Reports keyed by canonical repository path and content fingerprint.
/// Expired entries are dropped on lookup and swept on insert.
pub struct ReportCache {
    ttl: Duration,
    entries: DashMap<CacheKey, (Instant, Arc<DependencyReport>)>,
}

impl ReportCache {
    pub fn new(ttl: Duration) -> Self {
        Self { ttl, entries: DashMap::new() }
    }

    fn get(&self, key: &CacheKey) -> Option<Arc<DependencyReport>> {
        let hit = self.entries.get(key).map(|e| (e.0, e.1.clone()));
        match hit {
            Some((at, report)) if at.elapsed() < self.ttl => Some(report),
            Some(_) => {
                self.entries.remove(key);
                None
            }
            None => None,
        }
    }

    fn insert(&self, key: CacheKey, report: Arc<DependencyReport>) {
        self.entries.retain(|_, (at, _)| at.elapsed() < self.ttl);
        self.entries.insert(key, (Instant::now(), report));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    pub cache: ReportCache,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(Self { cache: ReportCache::new(config.cache_ttl), config })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new().route(ROUTE, post(dependency_map)).route("/healthz", get(|| async { "ok" })).with_state(state)
}

#[derive(Debug)]
struct Request {
    repo_path: String,
    filter: Option<String>,
}

/// Validates the body, collecting every field problem.
fn parse_request(body: &[u8]) -> Result<Request, Vec<Value>> {
    let field_error = |field: &str, message: &str| json!({ "field": field, "message": message });
    let value: Value =
        serde_json::from_slice(body).map_err(|e| vec![field_error("", &format!("invalid JSON: {e}"))])?;
    let Value::Object(map) = value else {
        return Err(vec![field_error("", "body must be a JSON object")]);
    };
    let mut errors = Vec::new();
    let repo_path = match map.get("repoPath") {
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        Some(Value::String(_)) => {
            errors.push(field_error("repoPath", "must be a non-empty string"));
            None
        }
        Some(_) => {
            errors.push(field_error("repoPath", "must be a string"));
            None
        }
        None => {
            errors.push(field_error("repoPath", "is required"));
            None
        }
    };
    let filter = match map.get("filter") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            errors.push(field_error("filter", "must be a string"));
            None
        }
    };
    for key in map.keys().filter(|k| !matches!(k.as_str(), "repoPath" | "filter")) {
        errors.push(field_error(key, "unknown field"));
    }
    match repo_path {
        Some(repo_path) if errors.is_empty() => Ok(Request { repo_path, filter }),
        _ => Err(errors),
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

fn error_response(status: StatusCode, body: Value) -> Response {
    json_response(status, format!("{body:#}\n"))
}

enum Outcome {
    Report { report: Arc<DependencyReport>, hit: bool },
    Unprocessable(IngestError),
}

fn analyze(state: &AppState, repo_path: &str) -> Outcome {
    let repo = match load_repository(std::path::Path::new(repo_path)) {
        Ok(r) => r,
        Err(e) => return Outcome::Unprocessable(e),
    };
    let root = repo.root.canonicalize().unwrap_or_else(|_| repo.root.clone());
    let key = (root, repo.fingerprint.clone());
    if let Some(report) = state.cache.get(&key) {
        return Outcome::Report { report, hit: true };
    }
    let at = state.config.fixed_time.unwrap_or_else(Utc::now);
    let report = Arc::new(report_for(&repo, at));
    state.cache.insert(key, report.clone());
    Outcome::Report { report, hit: false }
}

async fn dependency_map(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req = match parse_request(&body) {
        Ok(r) => r,
        Err(fields) => {
            return error_response(StatusCode::BAD_REQUEST, json!({ "error": "invalid request", "fields": fields }))
        }
    };
    let worker = state.clone();
    let path = req.repo_path.clone();
    let outcome = tokio::task::spawn_blocking(move || analyze(&worker, &path)).await;
    match outcome {
        Ok(Outcome::Report { report, hit }) => {
            let body = (*report).clone().filtered(req.filter.as_deref()).to_canonical_json();
            let mut resp = json_response(StatusCode::OK, body);
            resp.headers_mut().insert(CACHE_HEADER, HeaderValue::from_static(if hit { "hit" } else { "miss" }));
            resp
        }
        Ok(Outcome::Unprocessable(IngestError::Io { path, source })) => {
            internal(format!("{}: {source}", path.display()))
        }
        Ok(Outcome::Unprocessable(e)) => {
            let mut body = json!({ "error": e.to_string() });
            if let Some(f) = e.field() {
                body["field"] = json!(f);
            }
            error_response(StatusCode::UNPROCESSABLE_ENTITY, body)
        }
        Err(join) => internal(join.to_string()),
    }
}

fn internal(detail: String) -> Response {
    let id = uuid::Uuid::new_v4().to_string();
    log::error!("request failed [{id}]: {detail}");
    error_response(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": "internal error", "diagnosticId": id }))
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: &str, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation_collects_all_fields() {
        assert!(parse_request(br#"{"repoPath": "x"}"#).is_ok());
        assert_eq!(parse_request(br#"{"repoPath": "x", "filter": "A1"}"#).unwrap().filter.as_deref(), Some("A1"));
        let errs = parse_request(br#"{"filter": 3, "extra": true}"#).unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e["field"].as_str().unwrap()).collect();
        assert_eq!(fields, vec!["repoPath", "filter", "extra"]);
        assert!(parse_request(b"[1]").is_err());
        assert!(parse_request(b"{").is_err());
    }

    #[test]
    fn cache_entries_expire() {
        let cache = ReportCache::new(Duration::from_millis(0));
        let report = Arc::new(DependencyReport {
            diagnostics: Vec::new(),
            generated_at: String::new(),
            models: Vec::new(),
            repo_root: String::new(),
        });
        let key = (PathBuf::from("/r"), "f".to_string());
        cache.insert(key.clone(), report);
        assert!(cache.get(&key).is_none());
        assert!(cache.is_empty());
    }
}
