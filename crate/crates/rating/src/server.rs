//! HTTP JSON API over one or more loaded studies.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::rubric::RUBRICS_JSON;
use crate::store::{RatingService, Submission};
use crate::study::{ImageRole, TaskView};
use crate::RatingError;

#[derive(Debug, Clone, Default)]
pub struct AppState {
    studies: Arc<BTreeMap<String, Arc<RatingService>>>,
}

impl AppState {
    pub fn new(services: impl IntoIterator<Item = RatingService>) -> Self {
        let studies = services
            .into_iter()
            .map(|s| (s.study().id.clone(), Arc::new(s)))
            .collect();
        AppState {
            studies: Arc::new(studies),
        }
    }

    pub fn study(&self, id: &str) -> Result<&Arc<RatingService>, RatingError> {
        self.studies
            .get(id)
            .ok_or_else(|| RatingError::UnknownStudy(id.to_string()))
    }
}

impl RatingError {
    pub fn status(&self) -> StatusCode {
        match self {
            RatingError::InvalidScore(_) | RatingError::EmptyRater => StatusCode::BAD_REQUEST,
            RatingError::UnknownStudy(_) | RatingError::UnknownTask(_) | RatingError::NoRatings => {
                StatusCode::NOT_FOUND
            }
            RatingError::DuplicateRating { .. } => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RatingError::UnknownStudy(_) => "unknown_study",
            RatingError::UnknownTask(_) => "unknown_task",
            RatingError::InvalidScore(_) => "invalid_score",
            RatingError::DuplicateRating { .. } => "duplicate_rating",
            RatingError::NoRatings => "no_ratings",
            RatingError::EmptyRater => "empty_rater",
            _ => "internal",
        }
    }
}

impl IntoResponse for RatingError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{self}");
        }
        (
            status,
            Json(json!({ "error": self.code(), "message": self.to_string() })),
        )
            .into_response()
    }
}

/// Body of `GET .../next`: either a blinded task or `{"done": true}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextTask {
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskView>,
}

#[derive(Debug, Deserialize)]
struct RaterQuery {
    rater: String,
}

async fn next(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RaterQuery>,
) -> Result<Json<NextTask>, RatingError> {
    let svc = app.study(&id)?;
    let task = svc.next_task(&q.rater)?.map(TaskView::from);
    Ok(Json(NextTask {
        done: task.is_none(),
        task,
    }))
}

async fn submit(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(sub): Json<Submission>,
) -> Result<impl IntoResponse, RatingError> {
    let svc = app.study(&id)?.clone();
    // the append syncs to disk
    let ack = tokio::task::spawn_blocking(move || svc.submit(sub))
        .await
        .map_err(|e| RatingError::Io(std::io::Error::other(e)))??;
    Ok((StatusCode::CREATED, Json(ack)))
}

async fn summary(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, RatingError> {
    Ok(Json(app.study(&id)?.summarize()?))
}

async fn study_info(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, RatingError> {
    let svc = app.study(&id)?;
    Ok(Json(json!({
        "id": svc.study().id,
        "tasks": svc.study().tasks().len(),
        "ratings": svc.count(),
    })))
}

async fn rubrics() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], RUBRICS_JSON)
}

async fn image(
    State(app): State<AppState>,
    Path((id, task_id, file)): Path<(String, String, String)>,
) -> Result<Response, RatingError> {
    let svc = app.study(&id)?;
    let role = match file.as_str() {
        "input.png" => ImageRole::Input,
        "output.png" => ImageRole::Output,
        _ => return Ok(StatusCode::NOT_FOUND.into_response()),
    };
    let path = svc
        .study()
        .image_path(&task_id, role)
        .ok_or_else(|| RatingError::UnknownTask(task_id.clone()))?;
    let bytes = tokio::task::spawn_blocking(move || std::fs::read(path))
        .await
        .map_err(|e| RatingError::Io(std::io::Error::other(e)))??;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/rubrics", get(rubrics))
        .route("/api/studies/{id}", get(study_info))
        .route("/api/studies/{id}/next", get(next))
        .route("/api/studies/{id}/ratings", post(submit))
        .route("/api/studies/{id}/summary", get(summary))
        .route("/images/{id}/{task}/{file}", get(image))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("rating service on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
