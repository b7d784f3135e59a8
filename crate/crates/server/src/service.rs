//! The HTTP API.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::error::{ApiError, ErrorKind};
use crate::session::{CreateSession, RoundRequest, SessionStore};
use crate::wire::{
    op_to_wire, BestResponseRequest, PayoffRequest, StrategySpecWire, BASE_PRESETS, WIRE_VERSION,
};

#[derive(Clone, Debug, Default)]
pub struct ServiceConfig {
    /// Built web UI, served for every path outside `/api`.
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origins; `*` allows any.
    pub cors: Vec<String>,
    /// Directory for per-session JSON-lines transcripts.
    pub transcript_dir: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    sessions: Arc<SessionStore>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.body())).into_response()
    }
}

/// Parses a JSON body, reporting malformed input in the API's error shape
/// instead of axum's plain-text rejection.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn router(cfg: &ServiceConfig) -> Router {
    let state = AppState {
        sessions: Arc::new(SessionStore::new(cfg.transcript_dir.clone())),
    };
    let api = Router::new()
        .route("/api/presets", get(presets))
        .route("/api/payoff", post(payoff))
        .route("/api/best-response", post(best_response))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(session_state).delete(delete_session))
        .route("/api/session/{id}/round", post(play_round))
        .route("/api/{*rest}", axum::routing::any(api_not_found))
        .with_state(state);
    let app = match &cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    match cors_layer(&cfg.cors) {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let base = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        return Some(base.allow_origin(Any));
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    Some(base.allow_origin(AllowOrigin::list(list)))
}

pub async fn serve(addr: SocketAddr, cfg: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(&cfg))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn api_not_found() -> ApiError {
    ApiError::new(ErrorKind::NotFound, "UnknownRoute", "no such API route")
}

async fn presets() -> Json<Value> {
    let strategies: Vec<Value> = BASE_PRESETS
        .iter()
        .map(|name| {
            let s = StrategySpecWire::preset(name).to_strategy().expect("base preset");
            let m = s.resolve().expect("base presets are SU(3)");
            json!({ "name": name, "matrix": op_to_wire(&m), "takes_of": false })
        })
        .chain([
            json!({ "name": "conjugate", "takes_of": true,
                    "description": "entrywise complex conjugate of the inner spec" }),
            json!({ "name": "conjugate-shuffle1", "takes_of": true,
                    "description": "shuffle1 times the conjugate of the inner spec" }),
            json!({ "name": "conjugate-shuffle2", "takes_of": true,
                    "description": "shuffle2 times the conjugate of the inner spec" }),
        ])
        .collect();
    Json(json!({
        "version": WIRE_VERSION,
        "strategies": strategies,
        "policies": [
            { "name": "identity", "description": "Alice always plays the identity",
              "exploitable": true,
              "hint": "in the entangled game Bob wins every round with identity and stay" },
            { "name": "fair-h", "description": "Alice always plays H",
              "exploitable": true,
              "hint": "fair against identity, but a revealed fixed operator can be countered" },
            { "name": "shuffle1", "description": "Alice always plays shuffle1", "exploitable": true,
              "hint": "a fixed classical operator is countered by its conjugate and stay" },
            { "name": "shuffle2", "description": "Alice always plays shuffle2", "exploitable": true,
              "hint": "a fixed classical operator is countered by its conjugate and stay" },
            { "name": "uniform-shuffles",
              "description": "uniform mixture of identity, shuffle1 and shuffle2, redrawn each round",
              "exploitable": false,
              "hint": "equilibrium mixture; Bob's best is 2/3 by switching" },
            { "name": "adaptive-counter",
              "description": "plays the counter to Bob's previous move",
              "exploitable": false,
              "hint": "repeating a move loses; the counter only sees the previous round" },
        ],
        "regimes": ["unentangled", "entangled"],
        "modes": ["incoherent", "coherent"],
        "gamma": { "switch": 0.0, "stay": std::f64::consts::FRAC_PI_2 },
    }))
}

async fn payoff(bytes: Bytes) -> Result<Json<Value>, ApiError> {
    let req: PayoffRequest = body(&bytes)?;
    Ok(Json(serde_json::to_value(req.evaluate()?)?))
}

async fn best_response(bytes: Bytes) -> Result<Json<Value>, ApiError> {
    let req: BestResponseRequest = body(&bytes)?;
    let result = tokio::task::spawn_blocking(move || req.run())
        .await
        .map_err(|e| ApiError::new(ErrorKind::Internal, "SearchAborted", e.to_string()))??;
    Ok(Json(serde_json::to_value(result)?))
}

async fn create_session(State(s): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let created = s.sessions.create(&req)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn play_round(
    State(s): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Value>, ApiError> {
    let req: RoundRequest = body(&bytes)?;
    Ok(Json(serde_json::to_value(s.sessions.play(&id, &req)?)?))
}

async fn session_state(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    Ok(Json(serde_json::to_value(s.sessions.state(&id)?)?))
}

async fn delete_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    s.sessions.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}
