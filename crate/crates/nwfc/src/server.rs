//! HTTP facade over one generation session.
//!
//! `GET /api/chunk/{a}/{b}` generates on demand: a missing chunk and the
//! rest of its rectangle closure are produced before the response is sent.
//! Generation runs on blocking threads and is serialized by a single writer
//! lock; committed chunks are read under a shared lock that is only taken
//! exclusively for the instant a new chunk is inserted.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use nwfc_core::nwfc::{self, PlanError, SubgridPlan};
use nwfc_core::solver::{Rules, DEFAULT_BUDGET};
use nwfc_core::{ChunkStore, GenerateError, Tileset, WeightField, WorldConfig, WorldError};
use serde::{Deserialize, Serialize};

use crate::clock::Deadline;
use crate::doc::{to_compact, BrushDoc, ChunkDoc, ManifestDoc, RectDoc, StatsDoc, TilesetDoc, TilingDoc};
use crate::persist::{self, PersistError};

/// Largest chunk index served. The closure of `(a, b)` holds `a * b`
/// chunks, so this bounds the work one request can trigger.
pub const MAX_CHUNK_INDEX: u32 = 256;

/// Largest grid `/api/generate` accepts, in cells.
pub const MAX_GENERATE_CELLS: usize = 4_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Error body `{"error": code, "detail": text}` with a status code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    detail: &'a str,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl ToString) -> Self {
        Self { status, code, detail: detail.to_string() }
    }

    fn bad_request(code: &'static str, detail: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, detail)
    }

    fn internal(code: &'static str, detail: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, code, detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_compact(&ErrorBody { error: self.code, detail: &self.detail });
        (self.status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

impl From<WorldError> for ApiError {
    fn from(e: WorldError) -> Self {
        match e {
            WorldError::HashMismatch { .. } => Self::new(StatusCode::CONFLICT, "tileset_hash_mismatch", e),
            WorldError::Index { .. } => Self::bad_request("bad_chunk_index", e),
            WorldError::Generate(g) => generate_error(g),
            other => Self::internal("world", other),
        }
    }
}

fn generate_error(e: GenerateError) -> ApiError {
    match e {
        GenerateError::Plan(p) => ApiError::bad_request("plan", p),
        GenerateError::SubgridUnsat { .. } => ApiError::internal("subgrid_unsat", e),
        GenerateError::BudgetExceeded { .. } => ApiError::internal("budget_exceeded", e),
        other => ApiError::internal("generate", other),
    }
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("bad_json", e))
}

/// Everything one server process serves.
pub struct Session {
    rules: Rules<'static>,
    tileset_json: String,
    world: RwLock<ChunkStore>,
    writer: tokio::sync::Mutex<()>,
    brush: RwLock<WeightField>,
    world_dir: Option<PathBuf>,
}

impl Session {
    /// Opens a session. With a `world_dir` holding a saved world, that world
    /// is loaded and must match the tileset, seed and chunk size.
    ///
    /// The tileset is leaked: a process serves one session and the compiled
    /// rules borrow it for the rest of the run.
    pub fn new(
        tileset: Tileset,
        world_seed: u64,
        chunk: usize,
        world_dir: Option<PathBuf>,
    ) -> Result<Self, ServerError> {
        let tileset: &'static Tileset = Box::leak(Box::new(tileset));
        let rules = Rules::new(tileset);
        let config = WorldConfig { world_seed, chunk_size: chunk, tileset_hash: rules.tileset_hash().to_owned() };
        let store = match &world_dir {
            Some(dir) if dir.join(persist::MANIFEST_FILE).exists() => {
                let store = persist::load_world(dir, &config)?;
                log::info!("loaded {} chunks from {}", store.len(), dir.display());
                store
            }
            _ => ChunkStore::new(config)?,
        };
        Ok(Self {
            tileset_json: to_compact(&TilesetDoc::from_tileset(tileset)),
            rules,
            world: RwLock::new(store),
            writer: tokio::sync::Mutex::new(()),
            brush: RwLock::new(WeightField::neutral()),
            world_dir,
        })
    }

    pub fn tileset(&self) -> &'static Tileset {
        self.rules.tileset()
    }

    /// Runs `f` with shared access to the committed chunks.
    pub fn with_world<T>(&self, f: impl FnOnce(&ChunkStore) -> T) -> T {
        f(&self.world.read().expect("world lock poisoned"))
    }

    /// Writes unsaved chunks and the manifest, if a world directory is set.
    pub fn flush(&self) -> Result<(), PersistError> {
        match &self.world_dir {
            Some(dir) => self.with_world(|w| persist::save_world(w, dir)),
            None => Ok(()),
        }
    }

    fn chunk_body(&self, a: u32, b: u32) -> Option<String> {
        self.with_world(|w| w.get(a, b).map(|c| to_compact(&ChunkDoc::from(c))))
    }

    /// Generates the missing part of the closure of `(a, b)`. Caller holds
    /// the writer lock.
    fn generate_closure(&self, a: u32, b: u32) -> Result<(), WorldError> {
        let missing = self.with_world(|w| w.missing_for(a, b))?;
        if missing.is_empty() {
            return Ok(());
        }
        let weights = self.brush.read().expect("brush lock poisoned").clone();
        let clock = Deadline::unlimited();
        for &(ca, cb) in &missing {
            let chunk = self.with_world(|w| w.generate_chunk(&self.rules, &weights, ca, cb, DEFAULT_BUDGET, &clock))?;
            self.world.write().expect("world lock poisoned").insert(chunk)?;
        }
        log::info!("generated {} chunks for ({a}, {b}) in {:?}", missing.len(), clock.elapsed());
        if let Err(e) = self.flush() {
            log::error!("saving world failed: {e}");
        }
        Ok(())
    }
}

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/tileset", get(get_tileset))
        .route("/api/generate", post(post_generate))
        .route("/api/chunk/{a}/{b}", get(get_chunk))
        .route("/api/world", get(get_world))
        .route("/api/layers", get(get_layers))
        .route("/api/brush", post(post_brush))
        .with_state(session)
}

async fn index() -> Html<&'static str> {
    Html(crate::assets::INDEX_HTML)
}

async fn get_tileset(State(s): State<Arc<Session>>) -> Response {
    json_response(s.tileset_json.clone())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    width: usize,
    height: usize,
    #[serde(default = "default_chunk")]
    chunk: usize,
    seed: u64,
    #[serde(default)]
    brush: Option<BrushDoc>,
}

fn default_chunk() -> usize {
    5
}

#[derive(Serialize)]
struct GenerateResponse {
    #[serde(flatten)]
    tiling: TilingDoc,
    stats: StatsDoc,
}

async fn post_generate(State(s): State<Arc<Session>>, body: Bytes) -> Result<Response, ApiError> {
    let req: GenerateRequest = parse_body(&body)?;
    let cells = req.width.saturating_mul(req.height);
    if cells > MAX_GENERATE_CELLS {
        return Err(ApiError::bad_request(
            "too_large",
            format!("{cells} cells exceeds the limit of {MAX_GENERATE_CELLS}"),
        ));
    }
    let plan =
        SubgridPlan::new(req.height, req.width, req.chunk).map_err(|e: PlanError| ApiError::bad_request("plan", e))?;
    let weights = match &req.brush {
        Some(doc) => doc.to_field().map_err(|e| ApiError::bad_request("bad_brush", e))?,
        None => WeightField::neutral(),
    };
    let session = Arc::clone(&s);
    let result = tokio::task::spawn_blocking(move || {
        let clock = Deadline::unlimited();
        nwfc::generate_with(&plan, &session.rules, &weights, req.seed, DEFAULT_BUDGET, &clock)
    })
    .await
    .map_err(|e| ApiError::internal("internal", e))?;
    let (tiling, _, stats) = result.map_err(generate_error)?;
    Ok(json_response(to_compact(&GenerateResponse { tiling: TilingDoc::from(&tiling), stats: StatsDoc::from(&stats) })))
}

fn chunk_index(raw: &str) -> Result<u32, ApiError> {
    match raw.parse::<u32>() {
        Ok(v) if (1..=MAX_CHUNK_INDEX).contains(&v) => Ok(v),
        _ => Err(ApiError::bad_request(
            "bad_chunk_index",
            format!("chunk index {raw:?} must be an integer in 1..={MAX_CHUNK_INDEX}"),
        )),
    }
}

async fn get_chunk(State(s): State<Arc<Session>>, Path((a, b)): Path<(String, String)>) -> Result<Response, ApiError> {
    let (a, b) = (chunk_index(&a)?, chunk_index(&b)?);
    if let Some(body) = s.chunk_body(a, b) {
        return Ok(json_response(body));
    }
    let _writer = s.writer.lock().await;
    let session = Arc::clone(&s);
    tokio::task::spawn_blocking(move || session.generate_closure(a, b))
        .await
        .map_err(|e| ApiError::internal("internal", e))??;
    let body = s.chunk_body(a, b).ok_or_else(|| ApiError::internal("internal", "chunk missing after generation"))?;
    Ok(json_response(body))
}

async fn get_world(State(s): State<Arc<Session>>) -> Response {
    json_response(s.with_world(|w| to_compact(&ManifestDoc::new(w.config(), w.generation_order()))))
}

#[derive(Serialize)]
struct LayersResponse {
    brush_epoch: u64,
    layers: Vec<crate::doc::LayerDoc>,
}

async fn get_layers(State(s): State<Arc<Session>>) -> Response {
    let brush = s.brush.read().expect("brush lock poisoned");
    json_response(to_compact(&LayersResponse {
        brush_epoch: brush.epoch(),
        layers: BrushDoc::from_field(&brush).layers,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BrushRequest {
    tag: String,
    rect: RectDoc,
    mul: f64,
}

#[derive(Serialize)]
struct EpochResponse {
    brush_epoch: u64,
}

async fn post_brush(State(s): State<Arc<Session>>, body: Bytes) -> Result<Response, ApiError> {
    let req: BrushRequest = parse_body(&body)?;
    if req.tag.is_empty() {
        return Err(ApiError::bad_request("bad_brush", "tag must not be empty"));
    }
    let rect = req.rect.to_rect().map_err(|e| ApiError::bad_request("bad_brush", e))?;
    let epoch = s
        .brush
        .write()
        .expect("brush lock poisoned")
        .paint(&req.tag, rect, req.mul)
        .map_err(|e| ApiError::bad_request("bad_brush", e))?;
    Ok(json_response(to_compact(&EpochResponse { brush_epoch: epoch })))
}

/// Serves on `listener` until `shutdown` resolves, then flushes the world.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    session: Arc<Session>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    axum::serve(listener, router(Arc::clone(&session))).with_graceful_shutdown(shutdown).await?;
    session.flush()?;
    Ok(())
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(addr: SocketAddr, session: Arc<Session>) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr, source })?;
    log::info!("listening on http://{}", listener.local_addr()?);
    serve_on(listener, session, async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("cannot listen for interrupt: {e}");
            std::future::pending::<()>().await;
        }
    })
    .await
}
