//! HTTP service for live MSPRT trials.
//!
//! Each trial is a session stored as an append-only JSON-lines event log
//! (`<data dir>/<id>.jsonl`). The in-memory state of a session is the fold of
//! its log through the sequential engine, so a restarted service rebuilds
//! every session exactly.
//!
//! | Method | Path | Body |
//! |---|---|---|
//! | `POST` | `/trials` | [`CreateTrial`] |
//! | `GET` | `/trials` | |
//! | `GET` | `/trials/{id}` | |
//! | `DELETE` | `/trials/{id}` | |
//! | `POST` | `/trials/{id}/observations` | [`AppendObservation`] |
//!
//! Errors are returned as `{"code": ..., "message": ...}`. There is no
//! authentication; the default bind address is loopback only.

mod api;
mod error;
mod store;

pub use api::{router, serve, Config};
pub use error::ApiError;
pub use store::{
    AppendObservation, Calibration, CalibrationSummary, CreateTrial, SessionSummary, SessionView, StepView, Store,
};
