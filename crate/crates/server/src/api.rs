//! JSON API over dialogue sessions, NSU classification and the
//! active-learning annotation loop.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use nsu_core::active::{write_curve, ActiveError, ActiveSession, CurvePoint, TaskStatus};
use nsu_core::corpus::NsuClass;
use nsu_core::dialogue::semantics::parse_set;
use nsu_core::dialogue::state::Weighted;
use nsu_core::dialogue::{DialogueState, Party, Snapshot};
use nsu_core::learn::ClassDist;
use nsu_core::rules::RuleSet;
use nsu_core::session::{Classifier, Session, SessionError, TurnInput, TurnRecord};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self::bad_request(e)
    }
}

impl From<ActiveError> for ApiError {
    fn from(e: ActiveError) -> Self {
        let status = match e {
            ActiveError::UnknownTask(_) => StatusCode::NOT_FOUND,
            ActiveError::NotPending(_) => StatusCode::CONFLICT,
            ActiveError::Learn(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Active-learning state plus the texts shown to annotators.
pub struct AlService {
    pub session: ActiveSession,
    /// (NSU, antecedent) text per pool instance.
    pub texts: Vec<(String, String)>,
}

pub struct AppState {
    rules: Arc<RuleSet>,
    classifier: Arc<Classifier>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    al: Option<Mutex<AlService>>,
}

impl AppState {
    pub fn new(rules: RuleSet, classifier: Classifier, al: Option<AlService>) -> Arc<Self> {
        Arc::new(AppState {
            rules: Arc::new(rules),
            classifier: Arc::new(classifier),
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            al: al.map(Mutex::new),
        })
    }

    async fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
    }

    fn al(&self) -> ApiResult<&Mutex<AlService>> {
        self.al
            .as_ref()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "active learning is not enabled"))
    }

    /// Gold label of a pool instance, when the pool carries one.
    pub async fn gold_label(&self, task: usize) -> Option<NsuClass> {
        let al = self.al.as_ref()?.lock().await;
        al.session.pool.get(task)?.label
    }

    /// Writes every session's turn log as `<id>.json` under `dir`.
    pub async fn dump_logs(&self, dir: &std::path::Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (id, s) in self.sessions.read().await.iter() {
            let path = dir.join(format!("{id}.json"));
            let json = serde_json::to_string_pretty(s.lock().await.log()).map_err(std::io::Error::other)?;
            std::fs::write(&path, json)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/utterance", post(utterance))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/log", get(session_log))
        .route("/classify", post(classify))
        .route("/al/next", get(al_next))
        .route("/al/{task}/label", post(al_label))
        .route("/al/curve", get(al_curve))
        .with_state(state)
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct CreateSession {
    /// Initial state in snapshot text form.
    pub state: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub state: Snapshot,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let req = body.map(|b| b.0).unwrap_or_default();
    let mut session = Session::new(app.rules.clone(), Some(app.classifier.clone()));
    if let Some(text) = req.state {
        let s = DialogueState::from_text(&text).map_err(ApiError::bad_request)?;
        session = session.with_state(s);
    }
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed));
    let state = session.state.snapshot();
    app.sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(SessionCreated { id, state })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct Utterance {
    pub text: String,
    pub speaker: Option<Party>,
    /// Dialogue act, e.g. `Assert(rain(IND_1))`.
    pub semantics: Option<String>,
    pub fec: Vec<String>,
    pub nsu: Option<String>,
    pub term: Option<String>,
}

impl Utterance {
    fn into_input(self) -> ApiResult<TurnInput> {
        let fec = parse_set(&format!("{{{}}}", self.fec.join(", "))).map_err(ApiError::bad_request)?;
        Ok(TurnInput {
            speaker: self.speaker.unwrap_or(Party::User),
            act: self
                .semantics
                .map(|s| s.parse())
                .transpose()
                .map_err(ApiError::bad_request)?,
            fec,
            nsu: self
                .nsu
                .map(|s| s.parse::<NsuClass>())
                .transpose()
                .map_err(ApiError::bad_request)?,
            term: self
                .term
                .map(|s| s.parse())
                .transpose()
                .map_err(ApiError::bad_request)?,
            text: self.text,
        })
    }
}

async fn utterance(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<Utterance>,
) -> ApiResult<Json<TurnRecord>> {
    let session = app.session(&id).await?;
    if body.text.trim().is_empty() {
        return Err(ApiError::bad_request("empty utterance"));
    }
    let input = body.into_input()?;
    let mut s = session.lock().await;
    let record = s.turn(input)?.clone();
    Ok(Json(record))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct FormatQuery {
    pub format: Option<String>,
}

fn is_text(q: &FormatQuery) -> bool {
    matches!(q.format.as_deref(), Some("text") | Some("csv"))
}

async fn session_state(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<FormatQuery>,
) -> ApiResult<Response> {
    let session = app.session(&id).await?;
    let snap = session.lock().await.state.snapshot();
    Ok(if is_text(&q) {
        ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], snap.to_text()).into_response()
    } else {
        Json(snap).into_response()
    })
}

async fn session_log(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Vec<TurnRecord>>> {
    let session = app.session(&id).await?;
    let log = session.lock().await.log().to_vec();
    Ok(Json(log))
}

#[derive(Debug, Deserialize)]
pub struct ClassifyRequest {
    pub nsu: String,
    pub antecedent: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub is_nsu: bool,
    pub class: NsuClass,
    pub distribution: Vec<Weighted>,
    pub features: Vec<FeatureEntry>,
}

async fn classify(State(app): State<Arc<AppState>>, Json(req): Json<ClassifyRequest>) -> ApiResult<Json<ClassifyResponse>> {
    let c = app.classifier.classify(&req.nsu, &req.antecedent)?;
    Ok(Json(ClassifyResponse {
        is_nsu: c.is_nsu,
        class: *c.distribution.argmax(),
        distribution: c
            .distribution
            .sorted()
            .into_iter()
            .map(|(v, p)| Weighted {
                value: v.to_string(),
                prob: p,
            })
            .collect(),
        features: c
            .features
            .iter()
            .map(|(n, v)| FeatureEntry {
                name: n.to_string(),
                value: v.to_string(),
            })
            .collect(),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AlTaskView {
    pub task: usize,
    pub nsu: String,
    pub antecedent: String,
    pub file_id: String,
    pub sentence_id: u32,
    pub entropy: f64,
    pub predicted: Vec<Weighted>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AlProgress {
    pub task: usize,
    pub status: String,
    /// Size of the training set.
    pub labeled_count: usize,
    /// Pool instances without a label.
    pub pool_size: usize,
    pub curve: Vec<CurvePoint>,
}

fn weighted(d: &ClassDist) -> Vec<Weighted> {
    let mut v: Vec<Weighted> = d
        .support()
        .map(|(c, p)| Weighted {
            value: c.to_string(),
            prob: p,
        })
        .collect();
    v.sort_by(|a, b| b.prob.total_cmp(&a.prob));
    v
}

async fn al_next(State(app): State<Arc<AppState>>) -> ApiResult<Response> {
    let mut al = app.al()?.lock().await;
    let Some(t) = al.session.next_batch(1)?.into_iter().next() else {
        return Ok(StatusCode::NO_CONTENT.into_response());
    };
    let inst = &al.session.pool[t.id];
    let (nsu, antecedent) = al.texts[t.id].clone();
    Ok(Json(AlTaskView {
        task: t.id,
        nsu,
        antecedent,
        file_id: inst.file_id.clone(),
        sentence_id: inst.sentence_id,
        entropy: t.entropy,
        predicted: weighted(&t.predicted),
    })
    .into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct LabelRequest {
    pub class: Option<String>,
    pub skip: bool,
}

async fn al_label(
    State(app): State<Arc<AppState>>,
    Path(task): Path<usize>,
    Json(req): Json<LabelRequest>,
) -> ApiResult<Json<AlProgress>> {
    let mut al = app.al()?.lock().await;
    match (req.skip, req.class) {
        (true, _) => al.session.skip(task)?,
        (false, Some(c)) => {
            let class: NsuClass = c.parse().map_err(ApiError::bad_request)?;
            if class == NsuClass::NoNsu {
                return Err(ApiError::bad_request("NoNsu is not an annotation label"));
            }
            al.session.label(task, class)?
        }
        (false, None) => return Err(ApiError::bad_request("give a class or skip")),
    }
    let status = match al.session.status[task] {
        TaskStatus::Labeled(c) => format!("labeled:{c}"),
        TaskStatus::Skipped => "skipped".into(),
        TaskStatus::Pending => "pending".into(),
        TaskStatus::Unqueried => "unqueried".into(),
    };
    Ok(Json(AlProgress {
        task,
        status,
        labeled_count: al.session.train.len(),
        pool_size: al.session.unlabeled(),
        curve: al.session.curve().to_vec(),
    }))
}

async fn al_curve(State(app): State<Arc<AppState>>, Query(q): Query<FormatQuery>) -> ApiResult<Response> {
    let al = app.al()?.lock().await;
    let curve = al.session.curve().to_vec();
    if is_text(&q) {
        let mut buf = Vec::new();
        write_curve(&curve, &mut buf).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let body = String::from_utf8(buf).expect("csv is utf-8");
        return Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response());
    }
    Ok(Json(curve).into_response())
}
