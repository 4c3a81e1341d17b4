use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::http::StatusCode;
use serde::{Deserialize, Serialize};
use tokio::io::AsyncWriteExt;
use tokio::sync::Mutex;

use seqprt::design::design_exact_prop;
use seqprt::{
    design, Alternative, Decision, DesignResult, Family, McOptions, Method, Msprt, Observation, Status, TestSpec,
    Trial, WaldBoundaries,
};

use crate::error::ApiError;

/// Request body of `POST /trials`. Supply either `gamma` or `calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateTrial {
    pub spec: TestSpec,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub calibrate: Option<Calibration>,
    #[serde(default)]
    pub idempotency_key: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Calibrate a proportion test on the lattice instead of by simulation.
    #[serde(default)]
    pub exact: bool,
}

fn default_reps() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub type1_est: f64,
    pub asn_null: f64,
    pub n_reps: u64,
    pub seed: u64,
    pub method: Method,
}

/// Request body of `POST /trials/{id}/observations`: `value` alone, `values`
/// as a pair for two-sample tests, or `group` with `value` to send the two
/// groups separately.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AppendObservation {
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub group: Option<u8>,
    #[serde(default)]
    pub idempotency_key: Option<String>,
}

impl AppendObservation {
    fn observation(&self) -> Result<Observation, ApiError> {
        let obs = match (self.value, self.values.as_deref(), self.group) {
            (Some(v), None, None) => Observation::Value(v),
            (Some(v), None, Some(g @ (1 | 2))) => Observation::Group { group: g, value: v },
            (None, Some(&[a, b]), None) => Observation::Pair([a, b]),
            (None, Some(vs), None) => {
                return Err(ApiError::bad_request(format!(
                    "`values` must hold 2 numbers, got {}",
                    vs.len()
                )))
            }
            (_, _, Some(g)) if g != 1 && g != 2 => {
                return Err(ApiError::bad_request(format!("`group` must be 1 or 2, got {g}")))
            }
            _ => {
                return Err(ApiError::bad_request(
                    "send exactly one of `value` or `values` (with `group` only alongside `value`)",
                ))
            }
        };
        let finite = match obs {
            Observation::Value(v) | Observation::Group { value: v, .. } => v.is_finite(),
            Observation::Pair([a, b]) => a.is_finite() && b.is_finite(),
        };
        if !finite {
            return Err(ApiError::bad_request("observations must be finite numbers"));
        }
        Ok(obs)
    }
}

/// The outcome of one appended observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub id: String,
    /// Zero-based position of the observation in the session log.
    pub index: usize,
    /// Observations (pairs) scored after this step.
    pub n: u32,
    /// ln L_n of the right (or only) test; absent while L_n is undefined.
    pub log_lr: Option<f64>,
    #[serde(rename = "L")]
    pub lr: Option<f64>,
    /// ln L_n of the left test of a two-sided trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_lr_left: Option<f64>,
    pub boundaries: WaldBoundaries,
    pub gamma: f64,
    pub decision: Decision,
    /// True when this response repeats an earlier append with the same key.
    pub replayed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryView {
    pub n: u32,
    pub log_lr: f64,
    #[serde(rename = "L")]
    pub lr: f64,
}

/// Full snapshot returned by `GET /trials/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub created_at: u64,
    pub updated_at: u64,
    pub spec: TestSpec,
    pub boundaries: WaldBoundaries,
    pub gamma: f64,
    pub alternatives: Vec<Alternative>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSummary>,
    pub status: Status,
    pub decision: Option<Decision>,
    pub n: u32,
    pub observations: Vec<Observation>,
    pub trajectory: Vec<TrajectoryView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_left: Option<Vec<TrajectoryView>>,
}

/// One row of `GET /trials`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub family: Family,
    pub side: seqprt::Side,
    pub status: Status,
    pub n: u32,
    pub decision: Option<Decision>,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Created {
        id: String,
        at: u64,
        procedure: Msprt,
        #[serde(default)]
        calibration: Option<CalibrationSummary>,
        #[serde(default)]
        idempotency_key: Option<String>,
    },
    Observation {
        at: u64,
        observation: Observation,
        #[serde(default)]
        idempotency_key: Option<String>,
    },
    Deleted {
        at: u64,
    },
}

struct Session {
    id: String,
    path: PathBuf,
    created_at: u64,
    updated_at: u64,
    procedure: Msprt,
    calibration: Option<CalibrationSummary>,
    trial: Trial,
    observations: Vec<Observation>,
    steps: Vec<StepView>,
    keys: HashMap<String, usize>,
    create_key: Option<String>,
    deleted: bool,
}

impl Session {
    fn new(id: String, path: PathBuf, at: u64, procedure: Msprt, calibration: Option<CalibrationSummary>) -> Self {
        Session {
            trial: procedure.start(),
            id,
            path,
            created_at: at,
            updated_at: at,
            procedure,
            calibration,
            observations: Vec::new(),
            steps: Vec::new(),
            keys: HashMap::new(),
            create_key: None,
            deleted: false,
        }
    }

    /// Score `obs` on a copy of the trial; commit only through [`Session::commit`].
    fn try_step(&self, obs: Observation) -> Result<(Trial, StepView), ApiError> {
        if self.trial.is_terminal() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "terminal",
                format!("trial '{}' has already reached a decision", self.id),
            ));
        }
        let mut trial = self.trial.clone();
        let decision = self.procedure.step(&mut trial, obs)?;
        let n = trial.n();
        let last = |i: usize| {
            let before = self.trial.parts.get(i)?.state.trajectory.len();
            let after = &trial.parts[i].state.trajectory;
            (after.len() > before).then(|| after[after.len() - 1].log_lr)
        };
        let log_lr = last(0);
        let view = StepView {
            id: self.id.clone(),
            index: self.observations.len(),
            n,
            log_lr,
            lr: log_lr.map(f64::exp),
            log_lr_left: if trial.parts.len() > 1 { last(1) } else { None },
            boundaries: self.procedure.boundaries(),
            gamma: self.procedure.gamma,
            decision,
            replayed: false,
        };
        Ok((trial, view))
    }

    fn commit(&mut self, trial: Trial, view: StepView, obs: Observation, key: Option<String>, at: u64) {
        if let Some(k) = key {
            self.keys.insert(k, view.index);
        }
        self.trial = trial;
        self.observations.push(obs);
        self.steps.push(view);
        self.updated_at = at;
    }

    fn status(&self) -> Status {
        self.trial.parts[0].state.status
    }

    fn view(&self) -> SessionView {
        let traj = |i: usize| {
            self.trial.parts[i]
                .state
                .trajectory
                .iter()
                .map(|p| TrajectoryView {
                    n: p.n,
                    log_lr: p.log_lr,
                    lr: p.lr(),
                })
                .collect::<Vec<_>>()
        };
        SessionView {
            id: self.id.clone(),
            created_at: self.created_at,
            updated_at: self.updated_at,
            spec: self.procedure.spec,
            boundaries: self.procedure.boundaries(),
            gamma: self.procedure.gamma,
            alternatives: self.procedure.parts.iter().map(|p| p.alternative).collect(),
            calibration: self.calibration,
            status: self.status(),
            decision: self.trial.decision,
            n: self.trial.n(),
            observations: self.observations.clone(),
            trajectory: traj(0),
            trajectory_left: (self.trial.parts.len() > 1).then(|| traj(1)),
        }
    }

    fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            family: self.procedure.spec.family,
            side: self.procedure.spec.side,
            status: self.status(),
            n: self.trial.n(),
            decision: self.trial.decision,
            created_at: self.created_at,
            updated_at: self.updated_at,
        }
    }

    /// Rebuild a session by folding its event log.
    fn replay(path: PathBuf, text: &str) -> std::io::Result<Option<Session>> {
        let bad =
            |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {msg}", path.display()));
        let mut lines = text.split_inclusive('\n').peekable();
        let mut session: Option<Session> = None;
        while let Some(line) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = match serde_json::from_str(line) {
                Ok(e) => e,
                // Skip a torn final line.
                Err(_) if lines.peek().is_none() && !line.ends_with('\n') => break,
                Err(e) => return Err(bad(e.to_string())),
            };
            match (event, session.as_mut()) {
                (
                    Event::Created {
                        id,
                        at,
                        procedure,
                        calibration,
                        idempotency_key,
                    },
                    None,
                ) => {
                    let mut s = Session::new(id, path.clone(), at, procedure, calibration);
                    s.create_key = idempotency_key;
                    session = Some(s);
                }
                (
                    Event::Observation {
                        at,
                        observation,
                        idempotency_key,
                    },
                    Some(s),
                ) => {
                    let (trial, view) = s.try_step(observation).map_err(|e| {
                        bad(format!(
                            "observation {} does not replay: {}",
                            s.observations.len(),
                            e.message
                        ))
                    })?;
                    s.commit(trial, view, observation, idempotency_key, at);
                }
                (Event::Deleted { .. }, Some(s)) => s.deleted = true,
                (event, _) => return Err(bad(format!("unexpected event {event:?}"))),
            }
        }
        Ok(session.filter(|s| !s.deleted))
    }
}

type SessionRef = Arc<Mutex<Session>>;

#[derive(Default)]
struct Index {
    sessions: HashMap<String, SessionRef>,
    create_keys: HashMap<String, String>,
}

/// All sessions of one data directory.
pub struct Store {
    dir: PathBuf,
    index: StdMutex<Index>,
    creating: Mutex<()>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

async fn append_event(path: &Path, event: &Event) -> Result<(), ApiError> {
    let mut line = serde_json::to_string(event).expect("events serialize");
    line.push('\n');
    let mut f = tokio::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .await
        .map_err(ApiError::storage)?;
    f.write_all(line.as_bytes()).await.map_err(ApiError::storage)?;
    f.sync_data().await.map_err(ApiError::storage)?;
    Ok(())
}

impl Store {
    /// Open (creating if needed) a data directory and refold every session in it.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Store> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut index = Index::default();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            if let Some(s) = Session::replay(path, &text)? {
                if let Some(k) = &s.create_key {
                    index.create_keys.insert(k.clone(), s.id.clone());
                }
                index.sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(Store {
            dir,
            index: StdMutex::new(index),
            creating: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn get(&self, id: &str) -> Result<SessionRef, ApiError> {
        self.index
            .lock()
            .expect("index lock")
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Create a session. Returns the snapshot and whether it is new; a
    /// repeated idempotency key returns the existing session.
    pub async fn create(&self, req: CreateTrial) -> Result<(SessionView, bool), ApiError> {
        let _guard = self.creating.lock().await;
        if let Some(key) = &req.idempotency_key {
            let existing = self.index.lock().expect("index lock").create_keys.get(key).cloned();
            if let Some(id) = existing {
                if let Ok(s) = self.get(&id) {
                    return Ok((s.lock().await.view(), false));
                }
            }
        }
        req.spec.validate()?;
        let (procedure, calibration) = match (req.gamma, req.calibrate) {
            (Some(_), Some(_)) => return Err(ApiError::bad_request("send either `gamma` or `calibrate`, not both")),
            (None, None) => return Err(ApiError::bad_request("send `gamma` or a `calibrate` request")),
            (Some(gamma), None) => (Msprt::new(req.spec, gamma)?, None),
            (None, Some(cal)) => {
                let spec = req.spec;
                let d: DesignResult = tokio::task::spawn_blocking(move || {
                    if cal.exact {
                        design_exact_prop(&spec)
                    } else {
                        design(&spec, McOptions::new(cal.reps, cal.seed))
                    }
                })
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
                if !d.feasible {
                    return Err(ApiError::new(
                        StatusCode::UNPROCESSABLE_ENTITY,
                        "infeasible",
                        format!("boundary rejections alone ({:.5}) exceed alpha", d.early_reject),
                    ));
                }
                let summary = CalibrationSummary {
                    type1_est: d.type1_est,
                    asn_null: d.asn_null,
                    n_reps: d.n_reps,
                    seed: d.seed,
                    method: d.method,
                };
                (d.procedure()?, Some(summary))
            }
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let path = self.dir.join(format!("{id}.jsonl"));
        let at = now_ms();
        append_event(
            &path,
            &Event::Created {
                id: id.clone(),
                at,
                procedure: procedure.clone(),
                calibration,
                idempotency_key: req.idempotency_key.clone(),
            },
        )
        .await?;
        let mut session = Session::new(id.clone(), path, at, procedure, calibration);
        session.create_key = req.idempotency_key.clone();
        let view = session.view();
        let mut index = self.index.lock().expect("index lock");
        if let Some(k) = req.idempotency_key {
            index.create_keys.insert(k, id.clone());
        }
        index.sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok((view, true))
    }

    /// Append one observation. The event is on disk before this returns.
    pub async fn append(&self, id: &str, req: AppendObservation) -> Result<StepView, ApiError> {
        let obs = req.observation()?;
        let session = self.get(id)?;
        let mut s = session.lock().await;
        if s.deleted {
            return Err(ApiError::not_found(id));
        }
        if let Some(i) = req.idempotency_key.as_ref().and_then(|k| s.keys.get(k)) {
            let mut view = s.steps[*i].clone();
            view.replayed = true;
            return Ok(view);
        }
        let (trial, view) = s.try_step(obs)?;
        let at = now_ms().max(s.updated_at);
        append_event(
            &s.path,
            &Event::Observation {
                at,
                observation: obs,
                idempotency_key: req.idempotency_key.clone(),
            },
        )
        .await?;
        s.commit(trial, view.clone(), obs, req.idempotency_key, at);
        Ok(view)
    }

    pub async fn snapshot(&self, id: &str) -> Result<SessionView, ApiError> {
        let session = self.get(id)?;
        let s = session.lock().await;
        if s.deleted {
            return Err(ApiError::not_found(id));
        }
        Ok(s.view())
    }

    /// Summaries, most recently updated first.
    pub async fn list(&self) -> Vec<SessionSummary> {
        let sessions: Vec<SessionRef> = self
            .index
            .lock()
            .expect("index lock")
            .sessions
            .values()
            .cloned()
            .collect();
        let mut out = Vec::with_capacity(sessions.len());
        for s in sessions {
            let s = s.lock().await;
            if !s.deleted {
                out.push(s.summary());
            }
        }
        out.sort_by(|a, b| b.updated_at.cmp(&a.updated_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Tombstone a session. Deleting an unknown or deleted id is a no-op.
    pub async fn delete(&self, id: &str) -> Result<(), ApiError> {
        let Ok(session) = self.get(id) else {
            return Ok(());
        };
        let mut s = session.lock().await;
        if s.deleted {
            return Ok(());
        }
        append_event(&s.path, &Event::Deleted { at: now_ms() }).await?;
        s.deleted = true;
        let mut index = self.index.lock().expect("index lock");
        index.sessions.remove(id);
        if let Some(k) = &s.create_key {
            index.create_keys.remove(k);
        }
        Ok(())
    }
}
