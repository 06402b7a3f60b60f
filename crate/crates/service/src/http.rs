//! HTTP API over a read-only store.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::engine::{Engine, PairQuery, PredictRequest, TeamRequest};
use crate::error::ServiceError;

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope {
    manifest: String,
    error: ErrorBody,
}

struct ApiError {
    manifest: String,
    error: ServiceError,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.error {
            ServiceError::User(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Infeasible(_) => StatusCode::CONFLICT,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorEnvelope {
            manifest: self.manifest,
            error: ErrorBody {
                kind: self.error.kind(),
                message: self.error.to_string(),
            },
        };
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<Engine>;
type ApiResult = std::result::Result<Response, ApiError>;

fn fail(engine: &Engine, error: ServiceError) -> ApiError {
    ApiError {
        manifest: engine.manifest_hash().to_string(),
        error,
    }
}

fn reply<T: Serialize>(engine: &Engine, r: crate::error::Result<T>) -> ApiResult {
    match r {
        Ok(data) => Ok(Json(engine.wrap(data)).into_response()),
        Err(e) => Err(fail(engine, e)),
    }
}

async fn health(State(engine): State<Shared>) -> ApiResult {
    reply(&engine, Ok(engine.health()))
}

async fn players(State(engine): State<Shared>) -> ApiResult {
    reply(&engine, Ok(engine.players()))
}

async fn pairs(State(engine): State<Shared>, q: Result<Query<PairQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q.map_err(|e| fail(&engine, ServiceError::User(e.body_text())))?;
    reply(&engine, engine.pairs(&q))
}

async fn predict(State(engine): State<Shared>, body: Result<Json<PredictRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(|e| fail(&engine, ServiceError::User(e.body_text())))?;
    reply(&engine, engine.predict(&req))
}

async fn build_team(State(engine): State<Shared>, body: Result<Json<TeamRequest>, JsonRejection>) -> ApiResult {
    let Json(req) = body.map_err(|e| fail(&engine, ServiceError::User(e.body_text())))?;
    let worker = engine.clone();
    let r = tokio::task::spawn_blocking(move || worker.build_team(&req))
        .await
        .map_err(|e| fail(&engine, ServiceError::Internal(e.to_string())))?;
    reply(&engine, r)
}

pub fn router(engine: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/players", get(players))
        .route("/pairs", get(pairs))
        .route("/predict", post(predict))
        .route("/team/build", post(build_team))
        .with_state(engine)
}

pub async fn serve(engine: Engine, addr: &str) -> crate::error::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::User(format!("cannot listen on {addr}: {e}")))?;
    eprintln!(
        "listening on {}",
        listener.local_addr().map(|a| a.to_string()).unwrap_or_default()
    );
    axum::serve(listener, router(Arc::new(engine)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
