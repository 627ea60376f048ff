//! HTTP surface for the quiz client.
//!
//! | method | path                        | body / result                                   |
//! |--------|-----------------------------|-------------------------------------------------|
//! | GET    | `/api/lecture/{id}/question` | `{question, stem, format, answers, m}`          |
//! | POST   | `/api/lecture/{id}/answer`   | `{question, answer_index}` → `{correct, points, grade, bucket}` |
//! | GET    | `/api/lecture/{id}/grade`    | `{grade, bucket, n_answered}`                    |
//! | GET    | `/api/content/tree`          | the content tree without items                   |
//! | POST   | `/api/content/import`        | a content document (needs `X-Admin-Key`)         |
//!
//! Quiz endpoints need an `X-Student-Token` header matching the roster.
//! Every state change is appended to the answer log and synced before the
//! response is sent.
//!
//! A data directory holds `content.json`, `roster.json` and `answers.log`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{ContentTree, NodeId, NodeKind, TextFormat};
use crate::document::{ContentDocument, DocumentError, ImportSummary};
use crate::engine::{AllocationPolicy, Engine, EngineError, EventKind, GradeReport, StudentId};
use crate::item_bank::{presented_order, ItemBank, QuestionId};
use crate::log::{replay_log, AnswerLog, LogEntry, LogError};

pub const CONTENT_FILE: &str = "content.json";
pub const ROSTER_FILE: &str = "roster.json";
pub const LOG_FILE: &str = "answers.log";
pub const TOKEN_HEADER: &str = "x-student-token";
pub const ADMIN_HEADER: &str = "x-admin-key";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: StudentId,
    pub token: String,
    /// The student agreed to have grades recorded.
    #[serde(default)]
    pub consent: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    #[serde(default)]
    pub admin_key: Option<String>,
    #[serde(default)]
    pub students: Vec<RosterEntry>,
}

impl Roster {
    pub fn lookup(&self, token: &str) -> Option<&RosterEntry> {
        self.students.iter().find(|s| s.token == token)
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("roster: {0}")]
    Roster(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An HTTP error: status plus message, sent as `{"error": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::EmptyLecture(_) | EngineError::NoPriorAllocation(_) => StatusCode::CONFLICT,
            EngineError::UnknownQuestion(_) | EngineError::QuestionNotInLecture { .. } => StatusCode::NOT_FOUND,
            EngineError::AnswerIndexOutOfRange { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<LogError> for ApiError {
    fn from(e: LogError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

/// What a student sees of a served question. Carries no correctness data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub question: QuestionId,
    pub stem: String,
    pub format: TextFormat,
    pub answers: Vec<String>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub question: QuestionId,
    pub answer_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub correct: bool,
    pub points: f64,
    pub grade: f64,
    pub bucket: u8,
}

#[derive(Debug)]
pub struct ServiceState {
    content: ContentTree,
    engine: Engine,
    log: AnswerLog,
    roster: Roster,
    seed: u64,
    data_dir: Option<PathBuf>,
}

pub type SharedState = Arc<Mutex<ServiceState>>;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl ServiceState {
    /// A service with no persistence.
    pub fn in_memory(
        content: ContentTree,
        bank: ItemBank,
        roster: Roster,
        policy: AllocationPolicy,
        seed: u64,
    ) -> Self {
        ServiceState {
            content,
            engine: Engine::new(bank, policy),
            log: AnswerLog::in_memory(),
            roster,
            seed,
            data_dir: None,
        }
    }

    /// Loads content and roster from `data_dir` and replays its answer log.
    pub fn open(data_dir: &Path, policy: AllocationPolicy, seed: u64) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(data_dir)?;
        let mut content = ContentTree::new();
        let mut bank = ItemBank::new();
        let content_path = data_dir.join(CONTENT_FILE);
        if content_path.exists() {
            ContentDocument::load(&content_path)?.import_into(&mut content, &mut bank)?;
        }
        let roster_path = data_dir.join(ROSTER_FILE);
        let roster = if roster_path.exists() {
            serde_json::from_slice(&std::fs::read(&roster_path)?).map_err(|e| ServiceError::Roster(e.to_string()))?
        } else {
            Roster::default()
        };
        let log = AnswerLog::open(&data_dir.join(LOG_FILE))?;
        let engine = replay_log(log.entries(), bank, policy)?;
        Ok(ServiceState { content, engine, log, roster, seed, data_dir: Some(data_dir.to_owned()) })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn content(&self) -> &ContentTree {
        &self.content
    }

    pub fn log(&self) -> &AnswerLog {
        &self.log
    }

    pub fn into_shared(self) -> SharedState {
        Arc::new(Mutex::new(self))
    }

    fn authenticate(&self, token: Option<&str>) -> Result<StudentId, ApiError> {
        let entry = token
            .and_then(|t| self.roster.lookup(t))
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "missing or unknown student token"))?;
        if !entry.consent {
            return Err(ApiError::new(StatusCode::FORBIDDEN, "student has not consented to grade recording"));
        }
        Ok(entry.id.clone())
    }

    fn lecture(&self, id: &str) -> Result<NodeId, ApiError> {
        let id = NodeId::from(id);
        match self.content.get(&id) {
            Some(node) if node.kind == NodeKind::Lecture => Ok(id),
            _ => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown lecture {id}"))),
        }
    }

    fn log_event(&mut self, event: &crate::engine::Event) -> Result<(), ApiError> {
        self.log.append(LogEntry::from_event(event, Utc::now()))?;
        self.engine.apply(event)?;
        Ok(())
    }

    pub fn next_question(&mut self, token: Option<&str>, lecture: &str) -> Result<QuestionView, ApiError> {
        let student = self.authenticate(token)?;
        let lecture = self.lecture(lecture)?;
        let draw_seed = splitmix64(self.seed ^ splitmix64(self.engine.last_seq() + 1));
        let alloc = self.engine.plan_next(&student, &lecture, draw_seed)?;
        let seed = alloc.presentation_seed();
        let question = self.engine.bank().render(alloc.question(), seed).map_err(EngineError::from)?;
        let order = presented_order(&question, seed);
        self.log_event(&alloc.event)?;
        Ok(QuestionView {
            question: question.id.clone(),
            stem: question.stem.clone(),
            format: question.format,
            answers: order.iter().map(|&i| question.answers[i].text.clone()).collect(),
            m: alloc.m,
        })
    }

    pub fn submit_answer(
        &mut self,
        token: Option<&str>,
        lecture: &str,
        request: &AnswerRequest,
    ) -> Result<AnswerResponse, ApiError> {
        let student = self.authenticate(token)?;
        let lecture = self.lecture(lecture)?;
        let item = self
            .engine
            .bank()
            .get(&request.question)
            .ok_or_else(|| EngineError::UnknownQuestion(request.question.clone()))?;
        if item.lecture() != &lecture {
            return Err(EngineError::QuestionNotInLecture { question: request.question.clone(), lecture }.into());
        }
        let seq = self
            .engine
            .state(&student, &lecture)
            .and_then(|s| s.outstanding.as_ref())
            .filter(|o| o.question == request.question)
            .map(|o| o.seq)
            .ok_or_else(|| EngineError::NoPriorAllocation(request.question.clone()))?;
        let question = self.engine.bank().render(&request.question, seq).map_err(EngineError::from)?;
        let order = presented_order(&question, seq);
        let canonical = *order
            .get(request.answer_index)
            .ok_or(EngineError::AnswerIndexOutOfRange { index: request.answer_index, len: order.len() })?;
        let event = self.engine.plan_answer(&student, &lecture, &request.question, canonical)?;
        self.log_event(&event)?;
        let EventKind::Answered { correct, points, .. } = event.kind else {
            unreachable!("plan_answer yields answer events")
        };
        let report = self.engine.report(&student, &lecture);
        Ok(AnswerResponse { correct, points, grade: report.grade, bucket: report.bucket })
    }

    pub fn grade(&self, token: Option<&str>, lecture: &str) -> Result<GradeReport, ApiError> {
        let student = self.authenticate(token)?;
        let lecture = self.lecture(lecture)?;
        Ok(self.engine.report(&student, &lecture))
    }

    pub fn tree(&self) -> ContentDocument {
        ContentDocument::tree_only(&self.content)
    }

    /// Imports a document and persists the full content store.
    pub fn import(&mut self, admin_key: Option<&str>, doc: &ContentDocument) -> Result<ImportSummary, ApiError> {
        match (&self.roster.admin_key, admin_key) {
            (Some(expected), Some(given)) if expected == given => {}
            _ => return Err(ApiError::new(StatusCode::UNAUTHORIZED, "missing or wrong admin key")),
        }
        let mut content = self.content.clone();
        let mut bank = self.engine.bank().clone();
        let summary = doc
            .import_into(&mut content, &mut bank)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        if let Some(dir) = &self.data_dir {
            ContentDocument::export(&content, &bank)
                .save(&dir.join(CONTENT_FILE))
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        }
        self.content = content;
        *self.engine.bank_mut() = bank;
        Ok(summary)
    }
}

fn header<'a>(headers: &'a HeaderMap, name: &str) -> Option<&'a str> {
    headers.get(name).and_then(|v| v.to_str().ok())
}

fn lock(state: &SharedState) -> std::sync::MutexGuard<'_, ServiceState> {
    state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

async fn next_question(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Json<QuestionView>, ApiError> {
    lock(&state).next_question(header(&headers, TOKEN_HEADER), &id).map(Json)
}

async fn submit_answer(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Json(request): Json<AnswerRequest>,
) -> Result<Json<AnswerResponse>, ApiError> {
    lock(&state).submit_answer(header(&headers, TOKEN_HEADER), &id, &request).map(Json)
}

async fn get_grade(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Json<GradeReport>, ApiError> {
    lock(&state).grade(header(&headers, TOKEN_HEADER), &id).map(Json)
}

async fn content_tree(State(state): State<SharedState>) -> Json<ContentDocument> {
    Json(lock(&state).tree())
}

async fn import_content(
    State(state): State<SharedState>,
    headers: HeaderMap,
    Json(doc): Json<ContentDocument>,
) -> Result<Json<ImportSummary>, ApiError> {
    lock(&state).import(header(&headers, ADMIN_HEADER), &doc).map(Json)
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/lecture/{id}/question", get(next_question))
        .route("/api/lecture/{id}/answer", post(submit_answer))
        .route("/api/lecture/{id}/grade", get(get_grade))
        .route("/api/content/tree", get(content_tree))
        .route("/api/content/import", post(import_content))
        .with_state(state)
}

pub async fn serve(state: SharedState, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
