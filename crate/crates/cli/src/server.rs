//! Local HTTP service behind the labeling UI.
//!
//! Label writes go through one mutex and are appended and synced to the
//! label file before the response is sent.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use lanecue_core::dataio::{append_record, LabelRecord, LabelStore};
use lanecue_core::BehaviorLabel;

use crate::imageio::list_frames;

pub struct AppState {
    frame_ids: Vec<String>,
    frame_paths: HashMap<String, PathBuf>,
    labels_path: PathBuf,
    store: Mutex<LabelStore>,
}

impl AppState {
    /// Lists the frames once and replays the label file.
    pub fn open(frames_dir: &std::path::Path, labels_path: PathBuf) -> Result<Self> {
        let frames = list_frames(frames_dir)?;
        let store = LabelStore::load(&labels_path)
            .with_context(|| format!("reading {}", labels_path.display()))?;
        Ok(Self {
            frame_ids: frames.iter().map(|(id, _)| id.clone()).collect(),
            frame_paths: frames.into_iter().collect(),
            labels_path,
            store: Mutex::new(store),
        })
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct LabelJson {
    pub frame_id: String,
    pub label: String,
    pub timestamp: f64,
}

impl From<&LabelRecord> for LabelJson {
    fn from(r: &LabelRecord) -> Self {
        Self {
            frame_id: r.frame_id.clone(),
            label: r.label.name().to_string(),
            timestamp: r.timestamp,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Progress {
    pub labeled: usize,
    pub total: usize,
}

#[derive(Deserialize)]
struct LabelBody {
    label: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn frames(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(state.frame_ids.clone())
}

async fn frame_image(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(path) = state.frame_paths.get(&id) else {
        return error(StatusCode::NOT_FOUND, "unknown frame");
    };
    match tokio::fs::read(path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("reading frame: {e}")),
    }
}

async fn labels(State(state): State<Arc<AppState>>) -> Json<Vec<LabelJson>> {
    let store = state.store.lock().expect("label store poisoned");
    Json(store.iter().map(LabelJson::from).collect())
}

async fn progress(State(state): State<Arc<AppState>>) -> Json<Progress> {
    let store = state.store.lock().expect("label store poisoned");
    let labeled = state.frame_ids.iter().filter(|id| store.get(id).is_some()).count();
    Json(Progress {
        labeled,
        total: state.frame_ids.len(),
    })
}

async fn set_label(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Response {
    if !state.frame_paths.contains_key(&id) {
        return error(StatusCode::NOT_FOUND, "unknown frame");
    }
    let body: LabelBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")),
    };
    let Ok(label) = body.label.parse::<BehaviorLabel>() else {
        return error(StatusCode::BAD_REQUEST, "unknown label");
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let record = match LabelRecord::new(id, label, timestamp) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let written = tokio::task::spawn_blocking(move || {
        let mut store = state.store.lock().expect("label store poisoned");
        append_record(&state.labels_path, &record)?;
        let json = LabelJson::from(&record);
        store.insert(record);
        Ok::<_, lanecue_core::Error>(json)
    })
    .await;
    match written {
        Ok(Ok(json)) => Json(json).into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("writing label: {e}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("writer task: {e}")),
    }
}

async fn missing_ui() -> Html<&'static str> {
    Html("<!doctype html><title>lanecue</title><p>Labeling UI assets are not built. The JSON API is under /api.</p>")
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/frames", get(frames))
        .route("/api/frames/{id}/image", get(frame_image))
        .route("/api/frames/{id}/label", post(set_label))
        .route("/api/labels", get(labels))
        .route("/api/progress", get(progress))
        .with_state(state);
    match ui_dir.filter(|d| d.is_dir()) {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(get(missing_ui)),
    }
}

/// Serves on 127.0.0.1 until Ctrl-C.
pub async fn serve(state: AppState, ui_dir: Option<PathBuf>, port: u16) -> Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("labeling service on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state), ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
