pub mod design;
pub mod dist;
pub mod engine;
pub mod error;
pub mod obsfile;
pub mod seqlr;
pub mod spec;
pub mod umpbt;

pub use design::{design, design_exact_prop, oc, oc_exact_prop, DesignResult, McOptions, Method, OcResult};
pub use engine::{Cause, Decision, DecisionKind, Msprt, Trial, WaldBoundaries};
pub use error::{Error, Result};
pub use seqlr::{LrModel, Observation, Status, SufficientStats, TrajectoryPoint, TrialState};
pub use spec::{Family, Side, TestSpec};
pub use umpbt::Alternative;
