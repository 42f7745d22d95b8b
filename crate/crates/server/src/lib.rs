//! HTTP API over the folio engine.
//!
//! Books live in a [`Store`]; generation runs on the blocking pool, so a
//! slow book never stalls other requests.

mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use folio_core::planner::{import_settings, parse_constraints, FieldError};
use folio_core::render::render_page;
use folio_core::rng::next_seed;
use folio_core::{Book, Constraints, Engine, Error, ErrorClass};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use store::{Entry, Job, Store};

const UPLOAD_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    /// Where book outputs and uploads are written.
    pub spill_dir: PathBuf,
    /// Static files served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Finished books kept in memory; older ones are read back from disk.
    pub resident_books: usize,
}

impl Config {
    pub fn new(spill_dir: impl Into<PathBuf>) -> Config {
        Config {
            spill_dir: spill_dir.into(),
            static_dir: None,
            resident_books: 16,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    store: Arc<Mutex<Store>>,
}

impl AppState {
    pub fn new(engine: Arc<Engine>, config: &Config) -> AppState {
        AppState {
            engine,
            store: Arc::new(Mutex::new(Store::new(config.spill_dir.clone(), config.resident_books))),
        }
    }

    fn store(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().expect("book store poisoned")
    }

    fn entry(&self, id: &str) -> Result<Entry, ApiError> {
        self.store()
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("no book `{id}`")))
    }
}

pub fn router(engine: Arc<Engine>, config: &Config) -> Router {
    let state = AppState::new(engine, config);
    let api = Router::new()
        .route("/api/books", post(create_book))
        .route("/api/books/{id}", get(book_info))
        .route("/api/books/{id}/regenerate", post(regenerate))
        .route("/api/books/{id}/pages/{page}", get(page_svg))
        .route("/api/books/{id}/pages/images/{name}", get(page_image))
        .route("/api/books/{id}/settings", get(settings_file))
        .route("/api/books/{id}/layout", get(layout_file))
        .route("/api/rules", get(rules))
        .route("/api/fonts", get(fonts))
        .route("/api/settings/validate", post(validate))
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT))
        .with_state(state);
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until the process is stopped.
pub async fn serve(engine: Arc<Engine>, config: Config, addr: SocketAddr) -> std::io::Result<()> {
    std::fs::create_dir_all(&config.spill_dir)?;
    let app = router(engine, &config);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}

/// A JSON error body with its status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn fields(errors: Vec<FieldError>) -> ApiError {
        let message = errors
            .iter()
            .map(|e| format!("{}: {}", e.field, e.message))
            .collect::<Vec<_>>()
            .join("; ");
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": message, "fields": errors }),
        }
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        match (&e, e.class()) {
            (Error::Constraint { field, message }, _) => ApiError::fields(vec![FieldError {
                field: field.clone(),
                message: message.clone(),
            }]),
            (_, ErrorClass::Infeasible) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
            (Error::Io { .. }, _) => ApiError::internal(e.to_string()),
            _ => ApiError::bad_request(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn fresh_seed() -> u64 {
    let (hi, _) = uuid::Uuid::new_v4().as_u64_pair();
    hi
}

/// Reads pinned constraints from a request; empty text means "all auto".
fn request_constraints(text: &str, engine: &Engine) -> ApiResult<Constraints> {
    let c = match parse_constraints(text) {
        Ok(c) => c,
        Err(Error::NoFields) => Constraints::default(),
        Err(e) => return Err(e.into()),
    };
    let errors = c.field_errors(&engine.rules);
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(ApiError::fields(errors))
    }
}

fn safe_name(name: &str) -> Option<String> {
    Path::new(name)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty() && !n.starts_with('.'))
}

/// Runs a job and writes its output into a fresh directory under `book_dir`.
async fn run_job(state: &AppState, book_dir: PathBuf, job: Job) -> ApiResult<(Arc<Book>, PathBuf)> {
    let engine = Arc::clone(&state.engine);
    tokio::task::spawn_blocking(move || -> ApiResult<(Arc<Book>, PathBuf)> {
        let book = engine.generate(&job.source, job.images.as_deref(), &job.constraints, job.seed)?;
        let out = book_dir.join(format!("r-{}", uuid::Uuid::new_v4().simple()));
        book.write_to(&out, engine.fonts.map())?;
        Ok((Arc::new(book), out))
    })
    .await
    .map_err(|e| ApiError::internal(format!("generation task failed: {e}")))?
}

fn book_body(id: &str, entry_revision: u32, seed: u64, book: &Book) -> Value {
    let settings: Value = serde_json::from_str(&book.settings_json()).expect("settings are JSON");
    json!({
        "bookId": id,
        "revision": entry_revision,
        "seed": seed,
        "bookType": book.stats.book_type,
        "settings": settings,
        "pageCount": book.page_count(),
        "warnings": book.warnings,
    })
}

async fn create_book(State(state): State<AppState>, mut form: Multipart) -> ApiResult<Response> {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let book_dir = state.store().book_dir(&id);
    let upload = book_dir.join("upload");
    let mut source = None;
    let mut constraints_text = String::new();
    let mut images = false;
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::bad_request(e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        match name.as_str() {
            "manuscript" => {
                source = Some(field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?);
            }
            "constraints" | "settings" => {
                constraints_text = field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
            }
            "images" | "images[]" => {
                let file = field
                    .file_name()
                    .and_then(safe_name)
                    .ok_or_else(|| ApiError::bad_request("image upload without a file name"))?;
                let data = field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
                std::fs::create_dir_all(&upload).map_err(|e| ApiError::internal(e.to_string()))?;
                std::fs::write(upload.join(&file), &data).map_err(|e| ApiError::internal(e.to_string()))?;
                images = true;
            }
            other => return Err(ApiError::bad_request(format!("unexpected form field `{other}`"))),
        }
    }
    let source = source.ok_or_else(|| {
        ApiError::fields(vec![FieldError {
            field: "manuscript".into(),
            message: "missing".into(),
        }])
    })?;
    let constraints = request_constraints(&constraints_text, &state.engine)?;
    let job = Job {
        seed: constraints.seed.unwrap_or_else(fresh_seed),
        source,
        images: images.then_some(upload),
        constraints,
    };
    let (book, dir) = match run_job(&state, book_dir.clone(), job.clone()).await {
        Ok(done) => done,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&book_dir);
            return Err(e);
        }
    };
    let seed = job.seed;
    let revision = state.store().put(&id, job, Arc::clone(&book), dir);
    Ok((StatusCode::CREATED, Json(book_body(&id, revision, seed, &book))).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RegenerateRequest {
    #[serde(default)]
    keep_settings: bool,
}

async fn regenerate(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let req: RegenerateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        RegenerateRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("regenerate request: {e}")))?
    };
    let constraints = if req.keep_settings {
        import_settings(&settings_text(&entry)?, &state.engine.rules)?
    } else {
        entry.job.constraints.clone()
    };
    let seed = next_seed(entry.job.seed);
    let run = Job {
        constraints,
        seed,
        ..entry.job.clone()
    };
    let book_dir = state.store().book_dir(&id);
    let (book, dir) = run_job(&state, book_dir, run).await?;
    // later runs start from what the user pinned, not from this revision
    let job = Job { seed, ..entry.job };
    let revision = state.store().put(&id, job, Arc::clone(&book), dir);
    Ok(Json(book_body(&id, revision, seed, &book)).into_response())
}

async fn book_info(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let settings: Value =
        serde_json::from_str(&settings_text(&entry)?).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(json!({
        "bookId": id,
        "revision": entry.revision,
        "seed": entry.job.seed,
        "settings": settings,
        "pageCount": entry.page_count,
        "warnings": entry.warnings,
    }))
    .into_response())
}

fn read_output(entry: &Entry, rel: &str) -> ApiResult<String> {
    let path = entry.dir.join(rel);
    std::fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => ApiError::not_found(format!("{rel} not found")),
        _ => ApiError::internal(format!("{}: {e}", path.display())),
    })
}

fn settings_text(entry: &Entry) -> ApiResult<String> {
    match entry.book() {
        Some(book) => Ok(book.settings_json()),
        None => read_output(entry, "settings.json"),
    }
}

async fn page_svg(State(state): State<AppState>, UrlPath((id, page)): UrlPath<(String, String)>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let stem = page
        .strip_suffix(".svg")
        .ok_or_else(|| ApiError::not_found(format!("no page `{page}`")))?;
    let svg = if stem == "back-cover" {
        match entry.book() {
            Some(book) => book
                .back_cover_svg()
                .ok_or_else(|| ApiError::not_found("no back cover"))?,
            None => read_output(&entry, "pages/back-cover.svg")?,
        }
    } else {
        let n: usize = stem
            .parse()
            .map_err(|_| ApiError::not_found(format!("no page `{page}`")))?;
        if n == 0 || n > entry.page_count {
            return Err(ApiError::not_found(format!(
                "page {n} out of range 1–{}",
                entry.page_count
            )));
        }
        match entry.book() {
            Some(book) => render_page(&book.layout.pages[n - 1]),
            None => read_output(&entry, &format!("pages/{}", folio_core::pipeline::page_file(n)))?,
        }
    };
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn page_image(State(state): State<AppState>, UrlPath((id, name)): UrlPath<(String, String)>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let file = safe_name(&name).ok_or_else(|| ApiError::not_found("no such image"))?;
    let path = entry.dir.join("images").join(&file);
    let data = std::fs::read(&path).map_err(|_| ApiError::not_found(format!("no image `{file}`")))?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("svg") => "image/svg+xml",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], data).into_response())
}

async fn settings_file(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    Ok(json_text(settings_text(&entry)?))
}

async fn layout_file(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let text = match entry.book() {
        Some(book) => book.layout_json(),
        None => read_output(&entry, "layout.json")?,
    };
    Ok(json_text(text))
}

async fn rules(State(state): State<AppState>) -> Response {
    json_text(state.engine.rules.to_json())
}

async fn fonts(State(state): State<AppState>) -> Response {
    let map = state.engine.fonts.map();
    let pairings: Vec<Value> = state
        .engine
        .rules
        .pairings
        .iter()
        .map(|p| {
            let slot = |s: &folio_core::rules::FontSlot| {
                json!({ "family": s.family, "weight": s.weight, "source": map.source_for(s) })
            };
            json!({
                "id": p.id,
                "title": slot(&p.title),
                "body": slot(&p.body),
                "leading": p.leading,
                "bookTypes": p.book_types,
                "bodyClass": p.body_class,
            })
        })
        .collect();
    Json(json!({ "pairings": pairings })).into_response()
}

async fn validate(State(state): State<AppState>, body: String) -> ApiResult<Response> {
    let c = parse_constraints(&body)?;
    let errors = c.field_errors(&state.engine.rules);
    if errors.is_empty() {
        Ok(Json(json!({ "valid": true, "fields": [] })).into_response())
    } else {
        Err(ApiError::fields(errors))
    }
}
