//! HTTP API over the annotation store and exported visualization bundles.
//!
//! | method | path | body / result |
//! |---|---|---|
//! | GET | `/api/queue` | unannotated citations |
//! | GET | `/api/citations/:id` | citation, its history and the first tree question |
//! | PUT | `/api/citations/:id/annotation` | records an annotation; 422 with field errors |
//! | GET | `/api/decision-tree` | decision tree config |
//! | POST | `/api/decision-tree/traverse` | `{"path": [...]}` → next question or leaf |
//! | GET | `/api/visualizations/*path` | files of the exported bundle |
//!
//! Everything else is served from the static asset directory when one is set.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use retrace_core::annotation::{
    traverse_decision_tree, AnnotationError, AnnotationEvent, AnnotationInput, AnnotationStore, CitoDecisionTree,
    FieldError, InTextCitation, TreeStep,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use tower_http::services::ServeDir;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Store(#[from] AnnotationError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Shared state: one writer store behind a mutex, the tree and bundle paths.
#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<AnnotationStore>>,
    tree: Arc<CitoDecisionTree>,
    exports_dir: Option<PathBuf>,
    static_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: AnnotationStore, tree: CitoDecisionTree) -> AppState {
        AppState { store: Arc::new(Mutex::new(store)), tree: Arc::new(tree), exports_dir: None, static_dir: None }
    }

    pub fn with_exports(mut self, dir: impl Into<PathBuf>) -> AppState {
        self.exports_dir = Some(dir.into());
        self
    }

    pub fn with_static(mut self, dir: impl Into<PathBuf>) -> AppState {
        self.static_dir = Some(dir.into());
        self
    }

    /// Runs `f` with the store locked; a poisoned lock is recovered since
    /// every write is already durable in the log.
    fn with_store<T>(&self, f: impl FnOnce(&mut AnnotationStore) -> T) -> T {
        let mut guard = self.store.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CitationView {
    pub citation: InTextCitation,
    pub history: Vec<AnnotationEvent>,
    pub tree: TreeStep,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TraverseRequest {
    pub path: Vec<String>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn field_errors(errors: Vec<FieldError>) -> Response {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "errors": errors }))).into_response()
}

async fn queue(State(s): State<AppState>) -> Json<Vec<InTextCitation>> {
    Json(s.with_store(|st| st.queue().into_iter().cloned().collect()))
}

async fn citation(State(s): State<AppState>, Path(id): Path<String>) -> Response {
    let found = s.with_store(|st| {
        st.citation(&id).map(|c| (c, st.history(&id).into_iter().cloned().collect::<Vec<_>>()))
    });
    match found {
        Some((citation, history)) => {
            let tree = traverse_decision_tree::<&str>(&s.tree, &[]).expect("root step");
            Json(CitationView { citation, history, tree }).into_response()
        }
        None => error(StatusCode::NOT_FOUND, format!("unknown citation `{id}`")),
    }
}

async fn annotate(State(s): State<AppState>, Path(id): Path<String>, body: Option<Json<Value>>) -> Response {
    let Some(Json(body)) = body else {
        return field_errors(vec![FieldError { field: "body".into(), message: "expected a JSON object".into() }]);
    };
    let input = match AnnotationInput::from_value(&body) {
        Ok(i) => i,
        Err(errors) => return field_errors(errors),
    };
    let state = s.clone();
    let result = tokio::task::spawn_blocking(move || state.with_store(|st| st.record(&id, &input, None))).await;
    match result {
        Ok(Ok(event)) => (StatusCode::OK, Json(event)).into_response(),
        Ok(Err(AnnotationError::Validation(errors))) => field_errors(errors),
        Ok(Err(e @ AnnotationError::UnknownCitation(_))) => error(StatusCode::NOT_FOUND, e.to_string()),
        Ok(Err(e)) => {
            log::error!("annotation write failed: {e}");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn decision_tree(State(s): State<AppState>) -> Json<CitoDecisionTree> {
    Json((*s.tree).clone())
}

async fn traverse(State(s): State<AppState>, Json(req): Json<TraverseRequest>) -> Response {
    match traverse_decision_tree(&s.tree, &req.path) {
        Ok(step) => Json(step).into_response(),
        Err(AnnotationError::Navigation { level, selection, options }) => (
            StatusCode::BAD_REQUEST,
            Json(json!({ "error": "invalid selection", "level": level, "selection": selection, "options": options })),
        )
            .into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn no_exports() -> Response {
    error(StatusCode::NOT_FOUND, "no visualization bundle configured")
}

pub fn router(state: AppState) -> Router {
    let mut app = Router::new()
        .route("/api/queue", get(queue))
        .route("/api/citations/:id", get(citation))
        .route("/api/citations/:id/annotation", put(annotate))
        .route("/api/decision-tree", get(decision_tree))
        .route("/api/decision-tree/traverse", post(traverse));
    app = match &state.exports_dir {
        Some(dir) => app.nest_service("/api/visualizations", ServeDir::new(dir)),
        None => app.route("/api/visualizations/*path", get(no_exports)),
    };
    if let Some(dir) = &state.static_dir {
        app = app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true));
    }
    app.with_state(state)
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(state: AppState, addr: SocketAddr) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr, source })?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
