//! HTTP JSON service: prediction, sweeps and the preset catalogue.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tower_http::cors::{Any, CorsLayer};

use htsim_core::model::Violation;
use htsim_core::presets::preset_profiles;
use htsim_core::sim::validate_pair;
use htsim_core::sweep::{PointMode, VaryTarget};
use htsim_core::{load_params, run_sweep, simulate, EngineError, EngineParams, SweepSpec, TeamProfile, Variant};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const MAX_TRIALS: u64 = 10_000_000;
pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "HTSIM_PORT";
pub const TIMEOUT_ENV: &str = "HTSIM_REQUEST_TIMEOUT_SECS";
pub const CORS_ENV: &str = "HTSIM_CORS_ORIGIN";
/// Seconds a client is asked to wait after a 503.
pub const RETRY_AFTER_SECS: u64 = 5;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Wall-clock budget per simulation request.
    pub request_timeout: Duration,
    /// Upper bound on trials, per request for predict and per point for sweeps.
    pub max_trials: u64,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            request_timeout: Duration::from_secs(120),
            max_trials: MAX_TRIALS,
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `HTSIM_REQUEST_TIMEOUT_SECS` and `HTSIM_CORS_ORIGIN`.
    pub fn from_env() -> Self {
        let mut cfg = ServiceConfig::default();
        if let Some(secs) = std::env::var(TIMEOUT_ENV).ok().and_then(|s| s.parse::<f64>().ok()) {
            if secs.is_finite() && secs >= 0.0 {
                cfg.request_timeout = Duration::from_secs_f64(secs);
            }
        }
        cfg.cors_origin = std::env::var(CORS_ENV).ok().filter(|s| !s.is_empty());
        cfg
    }
}

/// Error body returned with every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, field_path: Option<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.into(),
            message: message.into(),
            field_path,
        }
    }

    fn bad_request(code: &str, message: impl Into<String>, field: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message, Some(field.into()))
    }

    fn over_budget(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "over_budget", message, None)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut resp = (status, Json(&self)).into_response();
        if status == StatusCode::SERVICE_UNAVAILABLE {
            resp.headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from(RETRY_AFTER_SECS));
        }
        resp
    }
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub home: TeamProfile,
    pub away: TeamProfile,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params_preset: Variant,
    /// Dotted parameter keys applied on top of the preset.
    #[serde(default)]
    pub overrides: Map<String, Value>,
}

/// A [`SweepSpec`] plus parameter selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub base_home: TeamProfile,
    pub base_away: TeamProfile,
    pub vary: VaryTarget,
    #[serde(default)]
    pub mode: PointMode,
    pub points: Vec<f64>,
    pub trials_per_point: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params_preset: Variant,
    #[serde(default)]
    pub overrides: Map<String, Value>,
}

impl SweepRequest {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            base_home: self.base_home,
            base_away: self.base_away,
            vary: self.vary,
            mode: self.mode,
            points: self.points.clone(),
            trials_per_point: self.trials_per_point,
            seed: self.seed,
        }
    }
}

fn missing_field(msg: &str) -> Option<&str> {
    msg.strip_prefix("missing field `")?.split('`').next()
}

/// Deserialize a request body, reporting the dotted path of the first bad field.
pub fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        let mut field = (path != ".").then_some(path);
        if let Some(name) = missing_field(&msg) {
            field = Some(match field {
                Some(p) => format!("{p}.{name}"),
                None => name.to_string(),
            });
        }
        let code = if inner.is_syntax() || inner.is_eof() { "invalid_json" } else { "invalid_field" };
        ApiError::new(StatusCode::BAD_REQUEST, code, msg, field)
    })
}

fn violation_error(violations: &[Violation], message: String) -> ApiError {
    let semantic = violations.iter().all(|v| v.kind.is_semantic());
    let status = if semantic { StatusCode::UNPROCESSABLE_ENTITY } else { StatusCode::BAD_REQUEST };
    let first = violations
        .iter()
        .find(|v| v.kind.is_semantic() == semantic)
        .map(|v| v.field.clone());
    let code = if semantic { "semantic_violation" } else { "invalid_field" };
    ApiError::new(status, code, message, first)
}

/// Map a library error onto the wire; `trials_field` names the trial-count key.
pub fn engine_error(e: EngineError, trials_field: &str) -> ApiError {
    let msg = e.to_string();
    match e {
        EngineError::RatingBelowOne { field, .. } => ApiError::bad_request("invalid_field", msg, field),
        EngineError::InvalidProfile(v) => violation_error(&v, msg),
        EngineError::InvalidSweepPoint { violations, .. } => violation_error(&violations, msg),
        EngineError::UnknownParam(key) | EngineError::InvalidParam { key, .. } => {
            ApiError::bad_request("invalid_param", msg, format!("overrides.{key}"))
        }
        EngineError::ZeroTrials => ApiError::bad_request("invalid_field", msg, trials_field),
        EngineError::InvalidSweep(_) => ApiError::bad_request("invalid_field", msg, "points"),
        EngineError::InvalidForecast(_) | EngineError::EmptyOutcomeCounts => {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", msg, None)
        }
    }
}

fn check_trials(trials: u64, max: u64, field: &str) -> Result<(), ApiError> {
    if trials == 0 || trials > max {
        return Err(ApiError::bad_request(
            "invalid_field",
            format!("{field} must be in 1..={max}, got {trials}"),
            field,
        ));
    }
    Ok(())
}

fn params(variant: Variant, overrides: &Map<String, Value>) -> Result<EngineParams, ApiError> {
    load_params(variant, overrides).map_err(|e| engine_error(e, "trials"))
}

fn json_bytes<T: Serialize>(v: &T) -> Response {
    let body = serde_json::to_vec(v).expect("report serializes");
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

/// Run `job` on the blocking pool within the request budget.
async fn within_budget<T: Send + 'static>(
    cfg: &ServiceConfig,
    job: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    let handle = tokio::task::spawn_blocking(job);
    match tokio::time::timeout(cfg.request_timeout, handle).await {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), None)),
        Err(_) => Err(ApiError::over_budget(format!(
            "request exceeded the {:.1} s budget; retry later or with fewer trials",
            cfg.request_timeout.as_secs_f64()
        ))),
    }
}

async fn predict(State(cfg): State<Arc<ServiceConfig>>, body: Bytes) -> Result<Response, ApiError> {
    let req: PredictRequest = parse_body(&body)?;
    check_trials(req.trials, cfg.max_trials, "trials")?;
    let params = params(req.params_preset, &req.overrides)?;
    let violations = validate_pair(&req.home, &req.away);
    if !violations.is_empty() {
        return Err(engine_error(EngineError::InvalidProfile(violations), "trials"));
    }
    let report = within_budget(&cfg, move || simulate(&req.home, &req.away, &params, req.trials, req.seed)).await?;
    Ok(json_bytes(&report.map_err(|e| engine_error(e, "trials"))?))
}

async fn sweep(State(cfg): State<Arc<ServiceConfig>>, body: Bytes) -> Result<Response, ApiError> {
    let req: SweepRequest = parse_body(&body)?;
    if req.points.is_empty() {
        return Err(ApiError::bad_request("invalid_field", "points must not be empty", "points"));
    }
    check_trials(req.trials_per_point, cfg.max_trials, "trials_per_point")?;
    let params = params(req.params_preset, &req.overrides)?;
    let spec = req.spec();
    htsim_core::sweep::validate_spec(&spec).map_err(|e| engine_error(e, "trials_per_point"))?;
    let result = within_budget(&cfg, move || run_sweep(&spec, &params)).await?;
    Ok(json_bytes(&result.map_err(|e| engine_error(e, "trials_per_point"))?))
}

async fn profiles() -> Response {
    json_bytes(&preset_profiles())
}

async fn healthz() -> Json<Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

pub fn router(cfg: ServiceConfig) -> Router {
    let cors = match &cfg.cors_origin {
        Some(origin) => match origin.parse::<HeaderValue>() {
            Ok(v) => CorsLayer::new().allow_origin(v),
            Err(_) => CorsLayer::new().allow_origin(Any),
        },
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);
    Router::new()
        .route("/api/v1/predict", post(predict))
        .route("/api/v1/sweep", post(sweep))
        .route("/api/v1/profiles", get(profiles))
        .route("/healthz", get(healthz))
        .layer(cors)
        .with_state(Arc::new(cfg))
}

/// Port from `HTSIM_PORT`, or the default.
pub fn port_from_env() -> Result<u16, String> {
    match std::env::var(PORT_ENV) {
        Ok(s) => s.parse().map_err(|_| format!("{PORT_ENV}={s} is not a port number")),
        Err(_) => Ok(DEFAULT_PORT),
    }
}

pub async fn serve(host: &str, port: u16, cfg: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(cfg)).await
}
