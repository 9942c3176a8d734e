//! HTTP API: dataset upload and preview, background evolutionary runs,
//! preloaded examples, and chat sessions with export/import.

pub mod error;
pub mod state;

use std::io::Cursor;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::Deserialize;
use serde_json::{json, Value};

use gp4nldr_core::data::{load_csv, CsvOptions, LabelColumn};
use gp4nldr_core::explain::{ChatSession, Message};
use gp4nldr_core::llm::{ChatProvider, HttpProvider, MockProvider, ProviderConfig};
use gp4nldr_core::result::{forest_for, run_with_progress};
use gp4nldr_core::{examples, ChatState, RunConfig, RunResult, SessionArchive};

pub use error::ApiError;
pub use state::{AppState, Job, JobState, ServiceConfig};
use state::{new_id, SessionEntry};

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

pub const PREVIEW_ROWS: usize = 10;

pub fn app(state: AppState) -> Router {
    Router::new()
        .route("/api/datasets", post(upload_dataset).get(list_datasets))
        .route("/api/datasets/{id}/preview", get(preview_dataset))
        .route("/api/runs", post(submit_run))
        .route("/api/runs/{id}", get(get_job))
        .route("/api/runs/{id}/result", get(get_result))
        .route("/api/examples", get(list_examples))
        .route("/api/examples/{id}", get(get_example))
        .route("/api/chat/sessions", post(create_session))
        .route("/api/chat/sessions/{id}/messages", post(post_message))
        .route("/api/chat/sessions/{id}/export", get(export_session))
        .route("/api/sessions/import", post(import_session))
        .with_state(Arc::new(state))
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Deserialize)]
struct UploadQuery {
    name: Option<String>,
    label: Option<String>,
    header: Option<bool>,
}

async fn upload_dataset(
    State(state): State<Shared>,
    Query(q): Query<UploadQuery>,
    body: String,
) -> ApiResult<impl IntoResponse> {
    let label = q.label.as_deref().map_or(LabelColumn::Last, LabelColumn::parse);
    let mut options = CsvOptions::new(q.name.unwrap_or_else(|| "uploaded".into()), label);
    if q.header == Some(false) {
        options = options.headerless();
    }
    let dataset = load_csv(Cursor::new(body.into_bytes()), &options)
        .map_err(|e| ApiError::bad_request("invalid_dataset", e.to_string()))?;
    let id = new_id();
    let meta = dataset.meta();
    state
        .datasets
        .lock()
        .expect("dataset registry")
        .insert(id.clone(), Arc::new(dataset));
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "meta": meta }))))
}

async fn list_datasets(State(state): State<Shared>) -> Json<Value> {
    let registry = state.datasets.lock().expect("dataset registry");
    let mut items: Vec<Value> = registry
        .iter()
        .map(|(id, d)| json!({ "id": id, "meta": d.meta() }))
        .collect();
    items.sort_by(|a, b| a["id"].as_str().cmp(&b["id"].as_str()));
    Json(Value::Array(items))
}

async fn preview_dataset(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let d = state.dataset(&id).ok_or_else(|| ApiError::not_found("dataset", &id))?;
    let n = d.n_instances().min(PREVIEW_ROWS);
    let take = |m: &gp4nldr_core::Matrix| (0..n).map(|i| m.row(i).to_vec()).collect::<Vec<_>>();
    Ok(Json(json!({
        "id": id,
        "meta": d.meta(),
        "original": take(d.rows()),
        "scaled": take(d.scaled()),
        "labels": d.labels()[..n],
    })))
}

#[derive(Deserialize)]
struct SubmitRun {
    dataset_id: String,
    #[serde(default)]
    config: Option<Value>,
}

async fn submit_run(State(state): State<Shared>, Json(req): Json<SubmitRun>) -> ApiResult<impl IntoResponse> {
    let config: RunConfig = match req.config {
        None => RunConfig::default(),
        Some(v) => serde_json::from_value(v)
            .map_err(|e| ApiError::bad_request("invalid_config", e.to_string()))?,
    };
    config.validate().map_err(|e| {
        ApiError::bad_request("invalid_config", e.to_string()).with_field(e.field)
    })?;
    let dataset = state
        .dataset(&req.dataset_id)
        .ok_or_else(|| ApiError::not_found("dataset", &req.dataset_id).with_field("dataset_id"))?;

    let now = Utc::now();
    let id = new_id();
    let job = Job {
        id: id.clone(),
        dataset_id: req.dataset_id,
        state: JobState::Queued,
        progress: 0,
        generations: config.generations,
        fitness_history: Vec::new(),
        created_at: now,
        updated_at: now,
        result: None,
        error: None,
        config: config.clone(),
    };
    state.jobs.lock().expect("job registry").insert(id.clone(), job);

    let jobs = state.jobs.clone();
    let workers = state.workers.clone();
    let job_id = id.clone();
    tokio::spawn(async move {
        let _permit = workers.acquire_owned().await.expect("worker pool open");
        update(&jobs, &job_id, |j| j.state = JobState::Running);
        let progress_jobs = jobs.clone();
        let progress_id = job_id.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            run_with_progress(&dataset, &config, &forest_for(&config), |g, best| {
                update(&progress_jobs, &progress_id, |j| {
                    j.progress = g;
                    j.fitness_history.push(best);
                });
            })
        })
        .await;
        update(&jobs, &job_id, |j| match outcome {
            Ok(Ok(result)) => {
                j.state = JobState::Done;
                j.fitness_history = result.fitness_history.clone();
                j.progress = j.generations;
                j.result = Some(Arc::new(result));
            }
            Ok(Err(e)) => {
                j.state = JobState::Failed;
                j.error = Some(e.to_string());
            }
            Err(e) => {
                j.state = JobState::Failed;
                j.error = Some(format!("worker crashed: {e}"));
            }
        });
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id }))))
}

fn update(jobs: &std::sync::Mutex<std::collections::HashMap<String, Job>>, id: &str, f: impl FnOnce(&mut Job)) {
    if let Some(job) = jobs.lock().expect("job registry").get_mut(id) {
        f(job);
        job.updated_at = Utc::now();
    }
}

async fn get_job(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Job>> {
    state.job(&id).map(Json).ok_or_else(|| ApiError::not_found("run", &id))
}

fn finished_result(state: &AppState, id: &str) -> ApiResult<Arc<RunResult>> {
    let job = state.job(id).ok_or_else(|| ApiError::not_found("run", id))?;
    match (job.state, job.result) {
        (JobState::Done, Some(r)) => Ok(r),
        (JobState::Failed, _) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "run_failed",
            job.error.unwrap_or_default(),
        )),
        _ => Err(ApiError::new(StatusCode::CONFLICT, "run_not_finished", "the run has not finished yet")),
    }
}

async fn get_result(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let result = finished_result(&state, &id)?;
    Ok(json_text(SessionArchive::new((*result).clone(), None).to_json()))
}

async fn list_examples() -> ApiResult<Json<Value>> {
    let mut items = Vec::new();
    for e in &examples::EXAMPLES {
        let a = examples::archive(e.id)
            .expect("listed")
            .map_err(|err| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "example_corrupt", err.to_string()))?;
        let r = &a.result;
        items.push(json!({
            "id": e.id,
            "title": e.title,
            "dataset": r.dataset.name,
            "fitness": r.config.fitness,
            "dimensions": r.config.final_dimensions,
            "generations": r.config.generations,
            "population_size": r.config.population_size,
            "bloat": r.config.bloat,
            "accuracy_original": r.accuracy_original,
            "accuracy_embedding": r.accuracy_embedding,
        }));
    }
    Ok(Json(Value::Array(items)))
}

fn example_archive(id: &str) -> ApiResult<SessionArchive> {
    examples::archive(id)
        .ok_or_else(|| ApiError::not_found("example", id))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "example_corrupt", e.to_string()))
}

async fn get_example(Path(id): Path<String>) -> ApiResult<Response> {
    Ok(json_text(example_archive(&id)?.to_json()))
}

#[derive(Deserialize, Default)]
struct ProviderRequest {
    model_id: Option<String>,
    api_key: Option<String>,
    base_url: Option<String>,
    #[serde(default)]
    mock: bool,
}

fn provider_for(state: &AppState, req: &ProviderRequest) -> (Arc<dyn ChatProvider>, String) {
    let mut cfg = ProviderConfig::from_env();
    if let Some(m) = &req.model_id {
        cfg.model_id = m.clone();
    }
    if let Some(k) = &req.api_key {
        cfg.api_key = k.clone();
    }
    if let Some(u) = &req.base_url {
        cfg.base_url = u.clone();
    }
    let model = cfg.model_id.clone();
    if state.config.force_mock || req.mock {
        (Arc::new(MockProvider::echo()), model)
    } else {
        (Arc::new(HttpProvider::new(cfg)), model)
    }
}

#[derive(Deserialize)]
struct CreateSession {
    run_id: Option<String>,
    example_id: Option<String>,
    word_limit: Option<usize>,
    #[serde(flatten)]
    provider: ProviderRequest,
}

fn session_view(id: &str, session: &ChatSession) -> Value {
    json!({
        "session_id": id,
        "run_ref": session.run_ref,
        "model_id": session.model_id,
        "word_limit": session.word_limit,
        "messages": session.messages,
    })
}

async fn create_session(State(state): State<Shared>, Json(req): Json<CreateSession>) -> ApiResult<Json<Value>> {
    let (result, run_ref) = match (&req.run_id, &req.example_id) {
        (Some(run), None) => (finished_result(&state, run)?, format!("run:{run}")),
        (None, Some(ex)) => (Arc::new(example_archive(ex)?.result), format!("example:{ex}")),
        _ => {
            return Err(ApiError::bad_request(
                "invalid_request",
                "give exactly one of run_id and example_id",
            ))
        }
    };
    if req.word_limit == Some(0) {
        return Err(ApiError::bad_request("invalid_request", "word_limit must be at least 1").with_field("word_limit"));
    }
    let (provider, model) = provider_for(&state, &req.provider);
    let mut session = ChatSession::new(run_ref, model);
    if let Some(w) = req.word_limit {
        session.word_limit = w;
    }
    let explainer = state.explainer.clone();
    let entry = tokio::task::spawn_blocking(move || {
        explainer
            .begin(&mut session, &result, provider.as_ref())
            .map(|_| SessionEntry { session, result, provider })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let id = new_id();
    let view = session_view(&id, &entry.session);
    state
        .sessions
        .lock()
        .expect("session registry")
        .insert(id, Arc::new(tokio::sync::Mutex::new(entry)));
    Ok(Json(view))
}

#[derive(Deserialize)]
struct PostMessage {
    question: String,
}

async fn post_message(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<PostMessage>,
) -> ApiResult<Json<Value>> {
    let shared = state.session(&id).ok_or_else(|| ApiError::not_found("session", &id))?;
    // one in-flight exchange per session: the lock is held across the call
    let mut guard = shared.lock_owned().await;
    let explainer = state.explainer.clone();
    let (guard, turn) = tokio::task::spawn_blocking(move || {
        let entry = &mut *guard;
        let turn = explainer.ask(&mut entry.session, &req.question, &entry.result, entry.provider.as_ref());
        (guard, turn)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let turn = turn?;
    let messages: &[Message] = &guard.session.messages;
    Ok(Json(json!({
        "answer": turn.answer,
        "matched_keywords": turn.matched_keywords,
        "retrieved": turn.retrieved,
        "messages": messages,
    })))
}

async fn export_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let shared = state.session(&id).ok_or_else(|| ApiError::not_found("session", &id))?;
    let entry = shared.lock().await;
    let archive = SessionArchive::new((*entry.result).clone(), Some(ChatState::from_session(&entry.session)));
    Ok(json_text(archive.to_json()))
}

async fn import_session(
    State(state): State<Shared>,
    Query(provider): Query<ProviderRequest>,
    body: String,
) -> ApiResult<Json<Value>> {
    let archive = SessionArchive::from_json(&body).map_err(|e| match e {
        gp4nldr_core::ArchiveError::UnsupportedVersion(_) => {
            ApiError::bad_request("unsupported_version", e.to_string())
        }
        gp4nldr_core::ArchiveError::Corrupt(_) => ApiError::bad_request("corrupt_archive", e.to_string()),
    })?;
    let (provider, model) = provider_for(&state, &provider);
    let id = new_id();
    let result = Arc::new(archive.result);
    let entry = match archive.chat {
        Some(chat) => SessionEntry {
            session: chat.into_session(format!("import:{id}")),
            result,
            provider,
        },
        // a bare run result starts a fresh conversation, like a new session
        None => {
            let mut session = ChatSession::new(format!("import:{id}"), model);
            let explainer = state.explainer.clone();
            tokio::task::spawn_blocking(move || {
                explainer
                    .begin(&mut session, &result, provider.as_ref())
                    .map(|_| SessionEntry { session, result, provider })
            })
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??
        }
    };
    let view = session_view(&id, &entry.session);
    state
        .sessions
        .lock()
        .expect("session registry")
        .insert(id, Arc::new(tokio::sync::Mutex::new(entry)));
    Ok(Json(view))
}
