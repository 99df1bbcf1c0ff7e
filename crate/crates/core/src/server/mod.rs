// SPDX-License-Identifier: Apache-2.0

//! HTTP front end. Each game has a single writer; reads are served from the
//! last committed snapshot. Bodies are capped at 128 KiB.

mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use store::{new_token, valid_game_id, GameStore, StoreError};

use crate::game::{
    scoreboard, token_digest, Command, EventPayload, FinishReason, Game, GameConfig, GameError,
    GameEvent, MutantId, PlayerId, PlayerRecord, Role, Scoreboard, TestId,
};
use crate::runner::Assertion;

pub const MAX_BODY_BYTES: usize = 128 * 1024;

/// An error response: HTTP status, a stable code and a human message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_number")]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    /// Events the rejected submission produced, when it was logged.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<GameEvent>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            line: None,
            events: Vec::new(),
        }
    }
}

fn status_number<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

#[derive(Serialize)]
struct SubmissionBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    mutant: Option<MutantId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<TestId>,
    events: Vec<GameEvent>,
}

impl SubmissionBody {
    fn events(events: Vec<GameEvent>) -> Json<Self> {
        Json(SubmissionBody {
            mutant: None,
            test: None,
            events,
        })
    }
}

#[derive(Serialize)]
struct Created {
    game_id: String,
    creator_token: String,
}

#[derive(Serialize)]
struct Joined {
    player: PlayerId,
    token: String,
}

#[derive(Serialize)]
struct FeedBody<'a> {
    events: &'a [GameEvent],
    last_seq: u64,
}

/// Status for each engine error.
pub fn game_error_status(e: &GameError) -> StatusCode {
    match e {
        GameError::NotAttacker | GameError::NotDefender | GameError::NotMutantOwner(_) => {
            StatusCode::FORBIDDEN
        }
        GameError::ActorNotInGame(_) => StatusCode::UNAUTHORIZED,
        GameError::UnknownMutant(_) => StatusCode::NOT_FOUND,
        GameError::GameNotActive
        | GameError::MutantNotAlive(_)
        | GameError::ClaimAlreadyOpen(_)
        | GameError::NoOpenClaim(_)
        | GameError::RoleFull(_) => StatusCode::CONFLICT,
        GameError::InvalidName(_) | GameError::InvalidConfig(_) | GameError::InvalidUnit(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        GameError::OutOfOrderEvent { .. } | GameError::InconsistentEvent(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::GameNotFound(_) => StatusCode::NOT_FOUND,
            StoreError::Game(g) => game_error_status(g),
            StoreError::StorageFailure(_) | StoreError::ReadOnly(_) => StatusCode::SERVICE_UNAVAILABLE,
            StoreError::Recovery { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

/// JSON body extractor whose failures use the [`ApiError`] shape.
pub struct Body<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        let bytes = Bytes::from_request(req, state).await.map_err(|e: BytesRejection| {
            if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
                ApiError::new(
                    StatusCode::PAYLOAD_TOO_LARGE,
                    "PAYLOAD_TOO_LARGE",
                    format!("request bodies are limited to {MAX_BODY_BYTES} bytes"),
                )
            } else {
                ApiError::new(e.status(), "BAD_REQUEST", e.body_text())
            }
        })?;
        serde_json::from_slice(&bytes).map(Body).map_err(|e| {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_BODY", e.to_string())
        })
    }
}

type AppState = Arc<GameStore>;

pub fn router(store: Arc<GameStore>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/join", post(join))
        .route("/games/{id}/mutants", post(submit_mutant))
        .route("/games/{id}/tests", post(submit_test))
        .route("/games/{id}/claims", post(claim))
        .route("/games/{id}/claims/{mutant}/counter", post(counter))
        .route("/games/{id}/scoreboard", get(get_scoreboard))
        .route("/games/{id}/events", get(get_events))
        .route("/games/{id}/finish", post(finish))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(store)
}

/// Serves until ctrl-c.
pub async fn serve(store: Arc<GameStore>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn game_id(id: &str) -> Result<&str, ApiError> {
    if valid_game_id(id) {
        Ok(id)
    } else {
        Err(StoreError::GameNotFound(id.to_string()).into())
    }
}

fn bearer(headers: &HeaderMap) -> Result<String, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "MISSING_TOKEN", "a bearer token is required"))
}

fn authenticate(game: &Game, headers: &HeaderMap) -> Result<PlayerRecord, ApiError> {
    let digest = token_digest(&bearer(headers)?);
    game.state()
        .player_by_token_digest(&digest)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "INVALID_TOKEN", "token does not belong to a player of this game"))
}

/// Runs a command on the blocking pool; kill checks can be CPU heavy.
async fn run(store: AppState, id: String, cmd: Command) -> Result<Vec<GameEvent>, ApiError> {
    tokio::task::spawn_blocking(move || store.execute(&id, &cmd))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?
        .map_err(ApiError::from)
}

/// Maps the events of a submission to its response. Rejections were logged
/// like any other event but answer 422.
fn submission_response(events: Vec<GameEvent>) -> Result<Json<SubmissionBody>, ApiError> {
    let first = events.first().map(|e| e.payload.clone());
    let reject = |code: &str, message: &str, line: Option<u32>| ApiError {
        line,
        events: events.clone(),
        ..ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    };
    match first {
        Some(EventPayload::MutantRejected { code, message, line, .. }) => Err(reject(&code, &message, line)),
        Some(EventPayload::TestRejected { code, message, .. })
        | Some(EventPayload::CounterRejected { code, message, .. }) => Err(reject(&code, &message, None)),
        Some(EventPayload::MutantAccepted { mutant, .. }) => Ok(Json(SubmissionBody {
            mutant: Some(mutant),
            test: None,
            events,
        })),
        Some(EventPayload::TestAccepted { test, .. }) => Ok(Json(SubmissionBody {
            mutant: None,
            test: Some(test),
            events,
        })),
        _ => Ok(SubmissionBody::events(events)),
    }
}

async fn create_game(State(store): State<AppState>, Body(config): Body<GameConfig>) -> Result<Response, ApiError> {
    let (id, token) = tokio::task::spawn_blocking(move || store.create(config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))??;
    Ok((StatusCode::CREATED, Json(Created { game_id: id, creator_token: token })).into_response())
}

async fn get_game(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let game = store.snapshot(game_id(&id)?)?;
    let body = game.state().to_canonical_json();
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JoinBody {
    name: String,
    role: Role,
    team: String,
}

async fn join(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Body(body): Body<JoinBody>,
) -> Result<Json<Joined>, ApiError> {
    game_id(&id)?;
    let token = new_token();
    let cmd = Command::Join {
        name: body.name,
        role: body.role,
        team: body.team,
        token_digest: Some(token_digest(&token)),
    };
    let events = run(store, id, cmd).await?;
    match events.first().map(|e| &e.payload) {
        Some(EventPayload::PlayerJoined { player, .. }) => Ok(Json(Joined { player: *player, token })),
        _ => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", "join produced no player")),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MutantBody {
    source: String,
    #[serde(default)]
    submission_id: Option<String>,
}

async fn submit_mutant(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(body): Body<MutantBody>,
) -> Result<Json<SubmissionBody>, ApiError> {
    let player = authenticate(store.snapshot(game_id(&id)?)?.as_ref(), &headers)?;
    let cmd = Command::SubmitMutant {
        player: player.id,
        source: body.source,
        submission_id: body.submission_id,
    };
    submission_response(run(store, id, cmd).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TestBody {
    assertions: Vec<Assertion>,
    #[serde(default)]
    submission_id: Option<String>,
}

async fn submit_test(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(body): Body<TestBody>,
) -> Result<Json<SubmissionBody>, ApiError> {
    let player = authenticate(store.snapshot(game_id(&id)?)?.as_ref(), &headers)?;
    let cmd = Command::SubmitTest {
        player: player.id,
        assertions: body.assertions,
        submission_id: body.submission_id,
    };
    submission_response(run(store, id, cmd).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimBody {
    mutant: MutantId,
    #[serde(default)]
    submission_id: Option<String>,
}

async fn claim(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(body): Body<ClaimBody>,
) -> Result<Json<SubmissionBody>, ApiError> {
    let player = authenticate(store.snapshot(game_id(&id)?)?.as_ref(), &headers)?;
    let cmd = Command::ClaimEquivalence {
        player: player.id,
        mutant: body.mutant,
        submission_id: body.submission_id,
    };
    submission_response(run(store, id, cmd).await?)
}

async fn counter(
    State(store): State<AppState>,
    Path((id, mutant)): Path<(String, String)>,
    headers: HeaderMap,
    Body(body): Body<TestBody>,
) -> Result<Json<SubmissionBody>, ApiError> {
    let player = authenticate(store.snapshot(game_id(&id)?)?.as_ref(), &headers)?;
    let mutant: MutantId = mutant
        .parse()
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_MUTANT", format!("unknown mutant {mutant}")))?;
    let cmd = Command::CounterClaim {
        player: player.id,
        mutant,
        assertions: body.assertions,
        submission_id: body.submission_id,
    };
    submission_response(run(store, id, cmd).await?)
}

async fn get_scoreboard(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<Scoreboard>, ApiError> {
    let game = store.snapshot(game_id(&id)?)?;
    Ok(Json(scoreboard(game.state())))
}

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

async fn get_events(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<Since>,
) -> Result<Response, ApiError> {
    let game = store.snapshot(game_id(&id)?)?;
    Ok(Json(FeedBody {
        events: game.events_since(q.since),
        last_seq: game.state().last_seq,
    })
    .into_response())
}

async fn finish(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<SubmissionBody>, ApiError> {
    let game = store.snapshot(game_id(&id)?)?;
    let digest = token_digest(&bearer(&headers)?);
    if game.state().creator_token_digest.as_deref() != Some(digest.as_str()) {
        return Err(if game.state().player_by_token_digest(&digest).is_some() {
            ApiError::new(StatusCode::FORBIDDEN, "NOT_CREATOR", "only the game's creator may finish it")
        } else {
            ApiError::new(StatusCode::UNAUTHORIZED, "INVALID_TOKEN", "token does not belong to this game")
        });
    }
    let cmd = Command::Finish {
        reason: FinishReason::Requested,
    };
    Ok(SubmissionBody::events(run(store, id, cmd).await?))
}
