//! HTTP facade over the keypad library, plus a demo PIN session.

pub mod api;
pub mod error;
mod openapi;
pub mod session;

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use illusionpad::bundle::{BundleImages, KeypadRequest, SCHEMA_VERSION};
use illusionpad::keypad::{HybridKeypad, RenderStyle};
use illusionpad::perception::{simulate_perception, ViewingConditions};
use illusionpad::visibility::{VerdictReport, VisibilityEvaluator, DEFAULT_V_TH};
use illusionpad::{DafSpec, GrayImage, SsimParams};
use serde::de::DeserializeOwned;
use tokio::sync::Semaphore;

use api::*;
use error::{ApiError, ApiResult};
use session::{PressRequest, Session, SessionRequest, SessionStore, SubmitOutcome};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub profiles_dir: Option<PathBuf>,
    pub workers: usize,
    pub session_ttl: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            profiles_dir: None,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            session_ttl: session::DEFAULT_TTL,
        }
    }
}

const CACHE_SLOTS: usize = 8;

struct CachedKeypad {
    keypad: HybridKeypad,
    evaluator: VisibilityEvaluator,
}

pub struct AppState {
    config: ServerConfig,
    pool: Arc<Semaphore>,
    sessions: SessionStore,
    cache: Mutex<VecDeque<(String, Arc<CachedKeypad>)>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Arc<Self> {
        Arc::new(Self {
            pool: Arc::new(Semaphore::new(config.workers.max(1))),
            config,
            sessions: SessionStore::default(),
            cache: Mutex::new(VecDeque::new()),
        })
    }

    fn profiles_dir(&self) -> Option<&std::path::Path> {
        self.config.profiles_dir.as_deref()
    }

    /// Runs CPU-bound work on the blocking pool, at most `workers` at a time.
    async fn compute<T, F>(&self, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce() -> ApiResult<T> + Send + 'static,
    {
        let _permit =
            self.pool.clone().acquire_owned().await.map_err(|_| {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "worker pool closed")
            })?;
        tokio::task::spawn_blocking(f).await.map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("worker failed: {e}"),
            )
        })?
    }

    fn cached(&self, key: &str) -> Option<Arc<CachedKeypad>> {
        let cache = self.cache.lock().expect("cache poisoned");
        cache.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    }

    fn remember(&self, key: String, value: Arc<CachedKeypad>) {
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.iter().any(|(k, _)| *k == key) {
            return;
        }
        if cache.len() >= CACHE_SLOTS {
            cache.pop_front();
        }
        cache.push_back((key, value));
    }
}

pub fn app(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/hybrid", post(hybrid))
        .route("/simulate", post(simulate))
        .route("/session", post(create_session))
        .route("/session/:id/press", post(press))
        .route("/session/:id/submit", post(submit))
        .route("/spec", get(spec))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn wants_png(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("image/png"))
}

fn png_response(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn hybrid(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let req: HybridRequest = parse_body(&body)?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let request = req.to_keypad_request(state.profiles_dir(), seed)?;
    let (keypad, meta, images) = state
        .compute(move || {
            let (keypad, meta) = request.build(&RenderStyle::default())?;
            let images = BundleImages::encode(&keypad)?;
            Ok((keypad, meta, images))
        })
        .await?;
    log::info!(
        "hybrid {}x{} sigma_hf {}",
        meta.resolution.0,
        meta.resolution.1,
        meta.sigma_hf
    );
    if wants_png(&headers) {
        return Ok(png_response(images.hybrid));
    }
    Ok(Json(HybridResponse {
        schema_version: SCHEMA_VERSION,
        metadata: meta,
        layout: keypad.layout,
        images: BundleImagesB64 {
            hybrid: b64(&images.hybrid),
            user_high: b64(&images.user_high),
            surfer_low: b64(&images.surfer_low),
        },
    })
    .into_response())
}

fn cache_key(req: &KeypadRequest) -> ApiResult<String> {
    serde_json::to_string(req)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn simulate(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let req: SimulateRequest = parse_body(&body)?;
    let pos = req.position.resolve()?;
    let v_th = req.v_th.unwrap_or(DEFAULT_V_TH);
    if !(v_th > 0.0 && v_th <= 1.0) {
        return Err(ApiError::bad_request(format!(
            "v_th = {v_th} outside (0, 1]"
        )));
    }
    let daf = DafSpec::default();

    let (perceived, conditions, verdict) = match (&req.keypad, &req.png) {
        (Some(k), None) => {
            let seed = k.seed.ok_or_else(|| {
                ApiError::bad_request("keypad.seed is required to reference a keypad")
            })?;
            let request = k.to_keypad_request(state.profiles_dir(), seed)?;
            let key = cache_key(&request)?;
            let entry = match state.cached(&key) {
                Some(e) => e,
                None => {
                    let built = state
                        .compute(move || {
                            let (keypad, _) = request.build(&RenderStyle::default())?;
                            let evaluator =
                                VisibilityEvaluator::new(&keypad, daf, SsimParams::default())?;
                            Ok(Arc::new(CachedKeypad { keypad, evaluator }))
                        })
                        .await?;
                    state.remember(key, built.clone());
                    built
                }
            };
            state
                .compute(move || {
                    let (hybrid, _) = entry.evaluator.perceived(&pos)?;
                    let verdict = entry.evaluator.verdict(&pos, v_th)?;
                    let cond = entry.evaluator.conditions(&pos)?;
                    let report = VerdictReport::new(&verdict, &pos, &entry.keypad);
                    Ok((hybrid.encode_png()?, cond, Some(report)))
                })
                .await?
        }
        (None, Some(png)) => {
            let bytes = unb64(png)?;
            let device = req
                .device
                .clone()
                .unwrap_or_default()
                .resolve(state.profiles_dir())?;
            state
                .compute(move || {
                    let image = GrayImage::decode_png(&bytes)
                        .map_err(|e| ApiError::bad_request(format!("invalid png: {e}")))?;
                    let device = device.at_resolution(image.width(), image.height());
                    let out = simulate_perception(&image, &device.display, &pos, &daf)?;
                    let cond = ViewingConditions::new(&pos, &device.display, &daf)?;
                    Ok((out.encode_png()?, cond, None))
                })
                .await?
        }
        _ => {
            return Err(ApiError::bad_request(
                "provide exactly one of keypad or png",
            ))
        }
    };

    if wants_png(&headers) {
        return Ok(png_response(perceived));
    }
    Ok(Json(SimulateResponse {
        schema_version: SCHEMA_VERSION,
        perceived: b64(&perceived),
        conditions: ConditionsBody {
            f1: conditions.f1,
            visual_angle_deg: conditions.angle.degrees(),
            extrapolated_angles: conditions.extrapolated_angles,
        },
        verdict,
    })
    .into_response())
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: SessionRequest = parse_body(&body)?;
    let device = req.device.resolve(state.profiles_dir())?;
    let session = Session::new(&req, device)?;
    let snap = session.snapshot();
    let keypad = state.compute(move || snap.render()).await?;
    let ttl = state.config.session_ttl;
    let view_base = session.view("", ttl, Some(keypad));
    let id = state.sessions.insert(session, ttl);
    log::info!("session created");
    let view = session::SessionView {
        session_id: id,
        ..view_base
    };
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn live_session(state: &AppState, id: &str) -> ApiResult<Arc<tokio::sync::Mutex<Session>>> {
    let handle = state.sessions.get(id)?;
    let expired = handle.lock().await.expired(state.config.session_ttl);
    if expired {
        state.sessions.remove(id);
        return Err(ApiError::not_found("session expired"));
    }
    Ok(handle)
}

async fn press(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: PressRequest = parse_body(&body)?;
    let handle = live_session(&state, &id).await?;
    let mut session = handle.lock().await;
    let reshuffled = session.press(req.button)?;
    let keypad = if reshuffled {
        let snap = session.snapshot();
        Some(state.compute(move || snap.render()).await?)
    } else {
        None
    };
    Ok(Json(session.view(&id, state.config.session_ttl, keypad)).into_response())
}

async fn submit(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let handle = live_session(&state, &id).await?;
    let mut session = handle.lock().await;
    let accepted = session.submit()?;
    log::info!(
        "session attempt {}",
        if accepted { "accepted" } else { "rejected" }
    );
    let snap = session.snapshot();
    let keypad = state.compute(move || snap.render()).await?;
    let outcome = SubmitOutcome {
        accepted,
        session: session.view(&id, state.config.session_ttl, Some(keypad)),
    };
    let status = if session.locked() {
        StatusCode::LOCKED
    } else {
        StatusCode::OK
    };
    Ok((status, Json(outcome)).into_response())
}

async fn spec() -> Json<serde_json::Value> {
    Json(openapi::document())
}
