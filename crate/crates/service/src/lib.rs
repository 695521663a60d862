//! HTTP/JSON what-if service: register models, inspect them, and query
//! predictions, CDE rankings and interventions.

pub mod fixtures;
pub mod registry;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use mode_core::dataset::{read_csv, ColumnKind, DataError, Instance, KindHint, SchemaHint};
use mode_core::discovery::{DiscoveryError, TraceRecord, DEFAULT_ALPHA, DEFAULT_MAX_COND};
use mode_core::mode::{
    apply_intervention, build_model, whatif, BuildOptions, ModeError, RankBy, Variant,
    WhatIfOptions, DEFAULT_DELTA, DEFAULT_K,
};
use mode_core::models::{FeatureInfo, ModelError, ModelSpec, OutcomeKind};

pub use registry::Registry;

pub const BODY_LIMIT: usize = 10 * 1024 * 1024;

/// Error body: `{error, detail}`.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.to_string(),
                detail: detail.into(),
            },
        }
    }

    fn bad_request(error: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, detail)
    }

    fn not_found(error: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, error, detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "payload_too_large"
        } else {
            "invalid_json"
        };
        let status = if status == StatusCode::PAYLOAD_TOO_LARGE {
            status
        } else {
            StatusCode::BAD_REQUEST
        };
        Self::new(status, code, r.body_text())
    }
}

impl From<DataError> for ApiError {
    fn from(e: DataError) -> Self {
        Self::bad_request("invalid_data", e.to_string())
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::MissingFeature(_) => "missing_feature",
            ModelError::InvalidValue { .. } => "invalid_value",
            ModelError::IncompatibleOutcome { .. } | ModelError::WrongOutcomeKind { .. } => {
                "incompatible_outcome"
            }
            ModelError::ExceedanceUnavailable => "exceedance_unavailable",
            ModelError::Io(_) => {
                return Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string())
            }
            _ => "invalid_model",
        };
        Self::bad_request(code, e.to_string())
    }
}

impl From<DiscoveryError> for ApiError {
    fn from(e: DiscoveryError) -> Self {
        Self::bad_request("discovery_failed", e.to_string())
    }
}

impl From<ModeError> for ApiError {
    fn from(e: ModeError) -> Self {
        match e {
            ModeError::UnknownFeature(f) => {
                Self::bad_request("unknown_feature", format!("unknown feature '{f}'"))
            }
            ModeError::MissingFeatureValue(f) => {
                Self::bad_request("missing_feature", format!("instance has no value for '{f}'"))
            }
            ModeError::InvalidArgument(d) => Self::bad_request("invalid_argument", d),
            ModeError::Model(m) => m.into(),
            ModeError::Discovery(d) => d.into(),
            ModeError::Data(d) => d.into(),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
}

#[derive(Debug, Clone, Default)]
pub struct ServeConfig {
    pub bind: String,
    pub port: u16,
    pub model_dir: Option<PathBuf>,
    /// Origins allowed by CORS; empty allows none.
    pub cors_origins: Vec<String>,
}

pub fn router(state: AppState, cors_origins: &[String]) -> Router {
    let origins: Vec<HeaderValue> = cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/fixtures", get(list_fixtures))
        .route("/api/models", get(list_models).post(create_model))
        .route("/api/models/{id}", get(get_model))
        .route("/api/models/{id}/whatif", post(post_whatif))
        .route("/api/models/{id}/intervene", post(post_intervene))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(cors)
        .with_state(state)
}

/// Runs the service until interrupted.
pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let registry = match &config.model_dir {
        Some(dir) => Registry::with_dir(dir).map_err(std::io::Error::other)?,
        None => Registry::new(),
    };
    let state = AppState {
        registry: Arc::new(registry),
    };
    let app = router(state, &config.cors_origins);
    let addr: SocketAddr = format!("{}:{}", config.bind, config.port)
        .parse()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn list_fixtures() -> Json<Vec<fixtures::Fixture>> {
    Json(fixtures::list())
}

async fn list_models(State(state): State<AppState>) -> Json<Vec<registry::Summary>> {
    Json(state.registry.list())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub fixture_id: Option<String>,
    #[serde(default)]
    pub outcome: Option<String>,
    pub model_spec: ModelSpec,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub max_cond: Option<usize>,
    #[serde(default)]
    pub all_features: bool,
    #[serde(default)]
    pub name: Option<String>,
    /// Column kinds overriding inference for inline CSV.
    #[serde(default)]
    pub kinds: BTreeMap<String, KindHint>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub model_id: String,
    pub parents: Vec<String>,
    pub warnings: Vec<String>,
}

async fn create_model(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<CreateResponse>)> {
    let Json(req) = body?;
    let table = match (&req.csv, &req.fixture_id) {
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request(
                "invalid_request",
                "give either csv or fixture_id, not both",
            ))
        }
        (None, None) => {
            return Err(ApiError::bad_request("invalid_request", "csv or fixture_id is required"))
        }
        (None, Some(id)) => {
            let t = fixtures::table(id)
                .ok_or_else(|| ApiError::not_found("unknown_fixture", format!("no fixture '{id}'")))?;
            match &req.outcome {
                Some(o) if o != t.outcome() => t.with_outcome(o)?,
                _ => t,
            }
        }
        (Some(csv), None) => {
            let outcome = req
                .outcome
                .as_deref()
                .ok_or_else(|| ApiError::bad_request("invalid_request", "outcome is required"))?;
            let hints: SchemaHint = req.kinds.clone().into_iter().collect();
            read_csv(csv.as_bytes(), outcome, &hints)?
        }
    };
    let opts = BuildOptions {
        alpha: req.alpha.unwrap_or(DEFAULT_ALPHA),
        max_cond: req.max_cond.unwrap_or(DEFAULT_MAX_COND),
        variant: if req.all_features {
            Variant::AllVariables
        } else {
            Variant::ParentsOnly
        },
    };
    let spec = req.model_spec.clone();
    let model = tokio::task::spawn_blocking(move || build_model(&table, &spec, &opts))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let warnings = model.metadata.warnings.clone();
    let parents = model.feature_names.clone();
    let entry = state.registry.insert(req.name, model)?;
    Ok((
        StatusCode::CREATED,
        Json(CreateResponse {
            model_id: entry.id.clone(),
            parents,
            warnings,
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: ColumnKind,
    pub min: f64,
    pub max: f64,
    /// The model uses this feature.
    pub used: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub model_id: String,
    pub name: String,
    pub created_at: u64,
    pub model_kind: String,
    pub outcome: String,
    pub outcome_kind: OutcomeKind,
    pub class_of_interest: Option<u8>,
    pub features: Vec<FeatureMeta>,
    pub parents: Vec<String>,
    pub n_train: usize,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discovery_trace: Option<Vec<TraceRecord>>,
}

async fn get_model(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ModelMetadata>> {
    let entry = lookup(&state, &id)?;
    let m = &entry.model;
    let features = m
        .metadata
        .schema
        .iter()
        .map(|FeatureInfo { name, kind, min, max }| FeatureMeta {
            used: m.feature_index(name).is_some(),
            name: name.clone(),
            kind: kind.clone(),
            min: *min,
            max: *max,
        })
        .collect();
    Ok(Json(ModelMetadata {
        model_id: entry.id.clone(),
        name: entry.name.clone(),
        created_at: entry.created_at,
        model_kind: m.kind().to_string(),
        outcome: m.outcome.clone(),
        outcome_kind: m.outcome_kind,
        class_of_interest: (m.outcome_kind == OutcomeKind::Binary).then_some(1),
        features,
        parents: m.feature_names.clone(),
        n_train: m.metadata.n_train,
        warnings: m.metadata.warnings.clone(),
        discovery_trace: m.metadata.discovery.as_ref().map(|d| d.trace.clone()),
    }))
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<registry::Entry>> {
    state
        .registry
        .get(id)
        .ok_or_else(|| ApiError::not_found("unknown_model", format!("no model '{id}'")))
}

#[derive(Debug, Clone, Deserialize)]
pub struct QueryOptions {
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta_overrides: BTreeMap<String, f64>,
    #[serde(default)]
    pub class_of_interest: Option<u8>,
    #[serde(default)]
    pub rank_by: Option<RankBy>,
    #[serde(default)]
    pub include_excluded: bool,
    #[serde(default)]
    pub exceedance_threshold: Option<f64>,
}

impl QueryOptions {
    fn into_options(self) -> WhatIfOptions {
        WhatIfOptions {
            k: self.k.unwrap_or(DEFAULT_K),
            delta: self.delta.unwrap_or(DEFAULT_DELTA),
            delta_overrides: self.delta_overrides,
            class_of_interest: self.class_of_interest.unwrap_or(1),
            rank_by: self.rank_by.unwrap_or_default(),
            include_excluded: self.include_excluded,
            exceedance_threshold: self.exceedance_threshold,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct WhatIfRequest {
    pub instance: Instance,
    #[serde(flatten)]
    pub options: QueryOptions,
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn post_whatif(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<WhatIfRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let entry = lookup(&state, &id)?;
    let Json(req) = body?;
    let report = whatif(&entry.model, &req.instance, &req.options.into_options())?;
    Ok(json_text(report.to_json()))
}

#[derive(Debug, Deserialize)]
pub struct InterveneRequest {
    pub instance: Instance,
    pub feature: String,
    pub new_value: f64,
    #[serde(flatten)]
    pub options: QueryOptions,
}

async fn post_intervene(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<InterveneRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let entry = lookup(&state, &id)?;
    let Json(req) = body?;
    let out = apply_intervention(
        &entry.model,
        &req.instance,
        &req.feature,
        req.new_value,
        &req.options.into_options(),
    )?;
    Ok(json_text(serde_json::to_string(&out).expect("result serializes")))
}
