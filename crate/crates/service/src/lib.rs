//! Local HTTP/JSON API over the `dddm` library.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/api/health` | |
//! | POST | `/api/datasets` | dataset CSV |
//! | GET | `/api/datasets` | |
//! | POST | `/api/datasets/simulate` | `{"placement": "deterministic" \| "seeded-uniform", "seed": 7}` |
//! | GET | `/api/datasets/{id}` | |
//! | POST | `/api/detect` | `{"dataset_id", "mode": "mh" \| "su" \| "basic" \| "broad", "params", "force", "page"}` |
//! | POST | `/api/sweep` | `{"dataset_id", "kind", "grid", "params", "ratio", "within_spans"}` |
//! | POST | `/api/temporal` | `{"dataset_id", "spec": {"unit", "span", "statistic"}, "params", "force"}` |
//!
//! Errors come back as `{"errors": [{"field", "message"}]}`: 422 for bad
//! input, 404 for an unknown dataset, 413 for an oversized body.

pub mod api;
mod error;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use store::{Dataset, DatasetHandle, DatasetStore};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Largest accepted request body, in bytes.
    pub body_limit: usize,
    pub compute_timeout: Duration,
    pub spill_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            body_limit: 64 * 1024 * 1024,
            compute_timeout: Duration::from_secs(60),
            spill_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<DatasetStore>,
    pub compute_timeout: Duration,
}

impl AppState {
    pub fn new(store: DatasetStore, compute_timeout: Duration) -> Self {
        Self {
            store: Arc::new(store),
            compute_timeout,
        }
    }

    pub fn from_config(config: &ServiceConfig) -> std::io::Result<Self> {
        let store = match &config.spill_dir {
            Some(dir) => DatasetStore::with_spill_dir(dir)?,
            None => DatasetStore::in_memory(),
        };
        Ok(Self::new(store, config.compute_timeout))
    }
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else {
        return false;
    };
    let host = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"))
        .unwrap_or("");
    let host = host.rsplit_once(':').map_or(host, |(h, port)| {
        if port.chars().all(|c| c.is_ascii_digit()) {
            h
        } else {
            host
        }
    });
    matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: AppState, body_limit: usize) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/health", get(api::health))
        .route(
            "/api/datasets",
            post(api::upload_dataset).get(api::list_datasets),
        )
        .route("/api/datasets/simulate", post(api::simulate_dataset))
        .route("/api/datasets/{id}", get(api::get_dataset))
        .route("/api/detect", post(api::detect))
        .route("/api/sweep", post(api::sweep))
        .route("/api/temporal", post(api::temporal))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

/// Binds `config.addr` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::from_config(&config)?;
    let app = router(state, config.body_limit);
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
