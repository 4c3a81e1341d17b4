use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;

use crate::error::ApiError;
use crate::store::{AppendObservation, CreateTrial, Store};

/// Where to keep sessions and where to listen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub data_dir: PathBuf,
    pub bind: SocketAddr,
}

impl Config {
    pub const DATA_DIR_VAR: &'static str = "SEQPRT_DATA_DIR";
    pub const BIND_VAR: &'static str = "SEQPRT_BIND_ADDR";

    /// `SEQPRT_DATA_DIR` (default `./seqprt-data`) and `SEQPRT_BIND_ADDR`
    /// (default `127.0.0.1:8080`).
    pub fn from_env() -> Result<Config, String> {
        let data_dir = std::env::var_os(Self::DATA_DIR_VAR).map_or_else(|| PathBuf::from("seqprt-data"), PathBuf::from);
        let bind = match std::env::var(Self::BIND_VAR) {
            Ok(s) => s.parse().map_err(|e| format!("{}='{s}': {e}", Self::BIND_VAR))?,
            Err(_) => SocketAddr::from(([127, 0, 0, 1], 8080)),
        };
        Ok(Config { data_dir, bind })
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn create(State(store): State<Arc<Store>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateTrial = parse(&body)?;
    let (view, created) = store.create(req).await?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(view)).into_response())
}

async fn list(State(store): State<Arc<Store>>) -> Response {
    Json(store.list().await).into_response()
}

async fn fetch(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(store.snapshot(&id).await?).into_response())
}

async fn remove(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    store.delete(&id).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn append(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: AppendObservation = parse(&body)?;
    Ok(Json(store.append(&id, req).await?).into_response())
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/trials", post(create).get(list))
        .route("/trials/{id}", get(fetch).delete(remove))
        .route("/trials/{id}/observations", post(append))
        .with_state(store)
}

/// Open the store and serve until the process is stopped.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let store = Arc::new(Store::open(&config.data_dir)?);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    eprintln!(
        "serving {} trial(s) from {} on http://{}",
        store.list().await.len(),
        config.data_dir.display(),
        listener.local_addr()?
    );
    axum::serve(listener, router(store)).await
}
