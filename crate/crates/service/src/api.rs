use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use dddm::analytics::{
    summarize, sweep_concurrent_span, sweep_visit_counts, sweep_within_span, temporal_analysis,
    SummaryStats, SweepKind, SweepSeries, TemporalResult, TemporalSpec, DEFAULT_WITHIN_SPANS,
};
use dddm::detect::{
    aggregate_windows, condition_status, mhsu_status_basic, mhsu_status_broad, SpanCheck,
};
use dddm::ingest::parse_dataset;
use dddm::simgen::{default_cohorts, generate_sample, Placement};
use dddm::{DddmParams, RawParams, StatusRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::store::{Dataset, DatasetHandle};
use crate::AppState;

pub const PAGE_SIZE: usize = 1000;

type ApiResult<T> = Result<T, ApiError>;

fn body(body: Result<Bytes, BytesRejection>) -> ApiResult<Bytes> {
    body.map_err(|rejection| ApiError::Rejected {
        status: rejection.status(),
        message: rejection.body_text(),
    })
}

fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(bytes)
        .map_err(|e| ApiError::field("body", format!("invalid JSON request: {e}")))
}

fn dataset(state: &AppState, id: &str) -> ApiResult<Arc<Dataset>> {
    state
        .store
        .get(id)
        .ok_or_else(|| ApiError::NotFound(id.to_string()))
}

fn store(
    state: &AppState,
    records: Vec<dddm::VisitRecord>,
    warnings: Vec<String>,
) -> ApiResult<DatasetHandle> {
    state
        .store
        .insert(records, warnings)
        .map_err(|e| ApiError::Internal(format!("could not persist dataset: {e}")))?
        .ok_or_else(|| ApiError::field("body", "dataset has no visit records"))
}

/// Runs `job` on the blocking pool under the configured time limit and
/// returns its output with the elapsed wall time in milliseconds.
async fn compute<T, F>(state: &AppState, job: F) -> ApiResult<(T, f64)>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    let started = Instant::now();
    let task = tokio::task::spawn_blocking(job);
    match tokio::time::timeout(state.compute_timeout, task).await {
        Err(_) => Err(ApiError::Timeout(state.compute_timeout)),
        Ok(Err(join)) => Err(ApiError::Internal(format!("computation failed: {join}"))),
        Ok(Ok(result)) => result.map(|value| (value, started.elapsed().as_secs_f64() * 1000.0)),
    }
}

pub async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub async fn upload_dataset(
    State(state): State<AppState>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult<(StatusCode, Json<DatasetHandle>)> {
    let bytes = body(raw)?;
    let parsed = parse_dataset(bytes.as_ref())?;
    let handle = store(&state, parsed.records, parsed.warnings)?;
    Ok((StatusCode::CREATED, Json(handle)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementKind {
    #[default]
    Deterministic,
    SeededUniform,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateRequest {
    pub placement: PlacementKind,
    pub seed: Option<u64>,
}

pub async fn simulate_dataset(
    State(state): State<AppState>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult<(StatusCode, Json<DatasetHandle>)> {
    let bytes = body(raw)?;
    let request: SimulateRequest = if bytes.iter().all(u8::is_ascii_whitespace) {
        SimulateRequest::default()
    } else {
        parse_json(&bytes)?
    };
    let placement = match (request.placement, request.seed) {
        (PlacementKind::Deterministic, _) => Placement::Deterministic,
        (PlacementKind::SeededUniform, Some(seed)) => Placement::SeededUniform { seed },
        (PlacementKind::SeededUniform, None) => {
            return Err(ApiError::field(
                "seed",
                "seeded-uniform placement needs a seed",
            ))
        }
    };
    let records = generate_sample(&default_cohorts(), placement)?;
    let handle = store(&state, records, Vec::new())?;
    Ok((StatusCode::CREATED, Json(handle)))
}

pub async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetHandle>> {
    Json(state.store.list())
}

pub async fn get_dataset(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<DatasetHandle>> {
    Ok(Json(dataset(&state, &id)?.handle.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectMode {
    Mh,
    Su,
    Basic,
    Broad,
}

fn first_page() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectRequest {
    pub dataset_id: String,
    pub mode: DetectMode,
    #[serde(default)]
    pub params: RawParams,
    #[serde(default)]
    pub force: bool,
    #[serde(default = "first_page")]
    pub page: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DetectResponse {
    pub dataset_id: String,
    pub mode: DetectMode,
    pub params: DddmParams,
    pub force: bool,
    pub summary: SummaryStats,
    /// Broad mode only: one row per client, OR-ed over windows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patient_summary: Option<SummaryStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_count: Option<u32>,
    pub total_rows: usize,
    pub page: usize,
    pub page_size: usize,
    pub page_count: usize,
    pub rows: Vec<StatusRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub duration_ms: f64,
}

pub async fn detect(
    State(state): State<AppState>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<DetectResponse>> {
    let request: DetectRequest = parse_json(&body(raw)?)?;
    let data = dataset(&state, &request.dataset_id)?;
    let params = request.params.resolve(&DddmParams::default())?;
    let warnings = params.validate()?;
    if request.page == 0 {
        return Err(ApiError::field("page", "pages are numbered from 1"));
    }
    let (mode, force) = (request.mode, request.force);
    let job_params = params.clone();
    let (rows, duration_ms) = compute(&state, move || {
        let records = &data.records;
        let check = if force {
            SpanCheck::Force
        } else {
            SpanCheck::Enforce
        };
        Ok(match mode {
            DetectMode::Mh => condition_status(records, &job_params.mh_criteria())?,
            DetectMode::Su => condition_status(records, &job_params.su_criteria())?,
            DetectMode::Basic => mhsu_status_basic(records, &job_params, check)?,
            DetectMode::Broad => mhsu_status_broad(records, &job_params)?,
        })
    })
    .await?;

    let total_rows = rows.len();
    let page_count = total_rows.div_ceil(PAGE_SIZE).max(1);
    if request.page > page_count {
        return Err(ApiError::field(
            "page",
            format!("page {} is past the last page {page_count}", request.page),
        ));
    }
    let (patient_summary, window_count) = if mode == DetectMode::Broad {
        let windows = rows.iter().filter_map(|r| r.window_index).max();
        (Some(summarize(&aggregate_windows(&rows))), windows)
    } else {
        (None, None)
    };
    let page_rows = rows
        .iter()
        .skip((request.page - 1) * PAGE_SIZE)
        .take(PAGE_SIZE)
        .cloned()
        .collect();
    Ok(Json(DetectResponse {
        dataset_id: request.dataset_id,
        mode,
        params,
        force,
        summary: summarize(&rows),
        patient_summary,
        window_count,
        total_rows,
        page: request.page,
        page_size: PAGE_SIZE,
        page_count,
        rows: page_rows,
        warnings,
        duration_ms,
    }))
}

fn default_ratio() -> u32 {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub dataset_id: String,
    pub kind: SweepKind,
    #[serde(default)]
    pub grid: Option<Vec<u32>>,
    #[serde(default)]
    pub params: RawParams,
    #[serde(default = "default_ratio")]
    pub ratio: u32,
    #[serde(default)]
    pub within_spans: Option<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepResponse {
    pub dataset_id: String,
    pub kind: SweepKind,
    pub params: DddmParams,
    pub grid: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_spans: Option<Vec<u32>>,
    pub series: Vec<SweepSeries>,
    pub duration_ms: f64,
}

pub async fn sweep(
    State(state): State<AppState>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<SweepResponse>> {
    let request: SweepRequest = parse_json(&body(raw)?)?;
    let data = dataset(&state, &request.dataset_id)?;
    let kind = request.kind;
    let params = request.params.resolve(&kind.default_base())?;
    let grid = request.grid.unwrap_or_else(|| kind.default_grid());
    let ratio = (kind == SweepKind::VisitCount).then_some(request.ratio);
    let within_spans = (kind == SweepKind::ConcurrentSpan).then(|| {
        request
            .within_spans
            .unwrap_or_else(|| DEFAULT_WITHIN_SPANS.to_vec())
    });

    let (base, xs, spans) = (params.clone(), grid.clone(), within_spans.clone());
    let (series, duration_ms) = compute(&state, move || {
        let records = &data.records;
        Ok(match kind {
            SweepKind::WithinSpan => vec![sweep_within_span(records, &base, &xs)?],
            SweepKind::VisitCount => {
                vec![sweep_visit_counts(records, &base, &xs, ratio.unwrap_or(2))?]
            }
            SweepKind::ConcurrentSpan => {
                sweep_concurrent_span(records, &base, &spans.unwrap_or_default(), &xs)?
            }
        })
    })
    .await?;
    Ok(Json(SweepResponse {
        dataset_id: request.dataset_id,
        kind,
        params,
        grid,
        ratio,
        within_spans,
        series,
        duration_ms,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalRequest {
    pub dataset_id: String,
    #[serde(default = "TemporalSpec::month_of_year")]
    pub spec: TemporalSpec,
    #[serde(default)]
    pub params: RawParams,
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TemporalResponse {
    pub dataset_id: String,
    pub params: DddmParams,
    pub force: bool,
    #[serde(flatten)]
    pub result: TemporalResult,
    pub duration_ms: f64,
}

pub async fn temporal(
    State(state): State<AppState>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<TemporalResponse>> {
    let request: TemporalRequest = parse_json(&body(raw)?)?;
    let data = dataset(&state, &request.dataset_id)?;
    let params = request.params.resolve(&DddmParams::default())?;
    let (spec, force, job_params) = (request.spec, request.force, params.clone());
    let (result, duration_ms) = compute(&state, move || {
        let check = if force {
            SpanCheck::Force
        } else {
            SpanCheck::Enforce
        };
        Ok(temporal_analysis(&data.records, &job_params, &spec, check)?)
    })
    .await?;
    Ok(Json(TemporalResponse {
        dataset_id: request.dataset_id,
        params,
        force,
        result,
        duration_ms,
    }))
}
