//! The MSPRT stopping rule.
//!
//! Sample until L_n ≥ A (reject H₀) or L_n ≤ B (accept H₀). If neither
//! happens by the maximum sample size N, reject iff L_N ≥ γ. A two-sided test
//! runs a right and a left test of size α/2 on the same data with a shared γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqlr::{LrModel, Observation, Status, TrajectoryPoint, TrialState};
use crate::spec::{Side, TestSpec};
use crate::umpbt::{umpbt, Alternative};

/// Wald's SPRT boundaries A = (1−β)/α and B = β/(1−α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldBoundaries {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl WaldBoundaries {
    pub fn new(alpha: f64, beta: f64) -> Self {
        WaldBoundaries {
            a: (1.0 - beta) / alpha,
            b: beta / (1.0 - alpha),
        }
    }

    pub fn for_spec(spec: &TestSpec) -> Self {
        Self::new(spec.alpha, spec.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    ContinueSampling,
    RejectNull,
    AcceptNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    CrossedA,
    CrossedB,
    TerminationGammaReject,
    TerminationGammaAccept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub kind: DecisionKind,
    /// Observations (pairs for two-sample tests) scored when the decision was made.
    pub at_n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<Cause>,
    /// The one-sided test that triggered a rejection in a two-sided trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

impl Decision {
    pub fn is_terminal(&self) -> bool {
        self.kind != DecisionKind::ContinueSampling
    }

    fn cont(at_n: u32) -> Self {
        Decision {
            kind: DecisionKind::ContinueSampling,
            at_n,
            cause: None,
            side: None,
        }
    }
}

/// Outcome of checking the Wald boundaries at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Crossing {
    /// Part `i` reached A.
    Reject(usize),
    /// Every part has reached B.
    Accept,
    None,
}

/// Boundary check shared by the live engine and the simulators. `retired`
/// marks parts that have reached B; a retired part can no longer reject.
pub(crate) fn check_boundaries(log_lr: &[f64], retired: &mut [bool], ln_a: &[f64], ln_b: &[f64]) -> Crossing {
    for i in 0..log_lr.len() {
        if !retired[i] && log_lr[i] >= ln_a[i] {
            return Crossing::Reject(i);
        }
    }
    for i in 0..log_lr.len() {
        if log_lr[i] <= ln_b[i] {
            retired[i] = true;
        }
    }
    if retired.iter().all(|&r| r) {
        Crossing::Accept
    } else {
        Crossing::None
    }
}

/// The largest terminal ln L_N over parts still able to reject.
pub(crate) fn terminal_statistic(log_lr: &[f64], retired: &[bool]) -> f64 {
    log_lr
        .iter()
        .zip(retired)
        .filter(|(_, &r)| !r)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether terminal statistic `log_stat` reaches γ (ties reject).
pub(crate) fn reaches_gamma(log_stat: f64, gamma: f64) -> bool {
    log_stat >= gamma.ln()
}

/// One one-sided component of a procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub spec: TestSpec,
    pub alternative: Alternative,
    pub boundaries: WaldBoundaries,
}

impl Part {
    pub fn model(&self) -> LrModel {
        LrModel::new(&self.spec, &self.alternative).expect("part alternatives match their spec")
    }
}

/// A fully specified MSPRT: the specification, its one-sided parts with
/// their alternatives and boundaries, and the termination threshold γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Msprt {
    pub spec: TestSpec,
    pub parts: Vec<Part>,
    pub gamma: f64,
}

impl Msprt {
    /// Derive the UMPBT alternative of every part.
    pub fn new(spec: TestSpec, gamma: f64) -> Result<Self> {
        spec.validate_sequential()?;
        let parts = spec
            .one_sided_parts()
            .into_iter()
            .map(|p| {
                Ok(Part {
                    alternative: umpbt(&p)?,
                    boundaries: WaldBoundaries::for_spec(&p),
                    spec: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(spec, parts, gamma)
    }

    /// Use explicit alternatives, one per one-sided part.
    pub fn with_alternatives(spec: TestSpec, alternatives: &[Alternative], gamma: f64) -> Result<Self> {
        spec.validate_sequential()?;
        let subs = spec.one_sided_parts();
        if subs.len() != alternatives.len() {
            return Err(Error::usage(format!(
                "expected {} alternatives, got {}",
                subs.len(),
                alternatives.len()
            )));
        }
        let parts = subs
            .into_iter()
            .zip(alternatives)
            .map(|(p, alt)| {
                LrModel::new(&p, alt)?;
                Ok(Part {
                    alternative: *alt,
                    boundaries: WaldBoundaries::for_spec(&p),
                    spec: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(spec, parts, gamma)
    }

    fn from_parts(spec: TestSpec, parts: Vec<Part>, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::spec(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Msprt { spec, parts, gamma })
    }

    /// Boundaries of the first part (all parts share them).
    pub fn boundaries(&self) -> WaldBoundaries {
        self.parts[0].boundaries
    }

    pub fn n_max(&self) -> u32 {
        self.spec.n_max
    }

    pub fn start(&self) -> Trial {
        Trial {
            parts: self
                .parts
                .iter()
                .map(|p| SideTrial {
                    side: p.spec.side,
                    state: TrialState::new(),
                    retired: false,
                })
                .collect(),
            decision: None,
            n_max: self.spec.n_max,
        }
    }

    /// Absorb one observation into `trial` and apply the stopping rule.
    pub fn step(&self, trial: &mut Trial, obs: Observation) -> Result<Decision> {
        if trial.parts.len() != self.parts.len() || trial.n_max != self.spec.n_max {
            return Err(Error::usage("trial was not started from this procedure"));
        }
        if trial.decision.is_some() {
            return Err(Error::usage("the trial has already reached a decision"));
        }
        TrialState::check(self.spec.family, obs)?;

        let mut next: Vec<TrialState> = trial.parts.iter().map(|p| p.state.clone()).collect();
        let mut scored = Vec::with_capacity(next.len());
        for (state, part) in next.iter_mut().zip(&self.parts) {
            scored.push(state.update(&part.model(), obs)?);
        }
        for (side, state) in trial.parts.iter_mut().zip(next) {
            side.state = state;
        }
        let n = trial.n();
        if scored.iter().any(Option::is_none) {
            return Ok(Decision::cont(n));
        }

        let log_lr: Vec<f64> = trial.parts.iter().map(|p| p.state.log_lr).collect();
        let ln_a: Vec<f64> = self.parts.iter().map(|p| p.boundaries.a.ln()).collect();
        let ln_b: Vec<f64> = self.parts.iter().map(|p| p.boundaries.b.ln()).collect();
        let mut retired: Vec<bool> = trial.parts.iter().map(|p| p.retired).collect();
        let crossing = check_boundaries(&log_lr, &mut retired, &ln_a, &ln_b);
        for (p, r) in trial.parts.iter_mut().zip(&retired) {
            p.retired = *r;
        }
        let two_sided = self.parts.len() > 1;
        let decision = match crossing {
            Crossing::Reject(i) => Decision {
                kind: DecisionKind::RejectNull,
                at_n: n,
                cause: Some(Cause::CrossedA),
                side: two_sided.then_some(self.parts[i].spec.side),
            },
            Crossing::Accept => Decision {
                kind: DecisionKind::AcceptNull,
                at_n: n,
                cause: Some(Cause::CrossedB),
                side: None,
            },
            Crossing::None if n >= self.spec.n_max => {
                let stat = terminal_statistic(&log_lr, &retired);
                if reaches_gamma(stat, self.gamma) {
                    let i = (0..log_lr.len())
                        .filter(|&i| !retired[i])
                        .max_by(|&a, &b| log_lr[a].total_cmp(&log_lr[b]))
                        .unwrap_or(0);
                    Decision {
                        kind: DecisionKind::RejectNull,
                        at_n: n,
                        cause: Some(Cause::TerminationGammaReject),
                        side: two_sided.then_some(self.parts[i].spec.side),
                    }
                } else {
                    Decision {
                        kind: DecisionKind::AcceptNull,
                        at_n: n,
                        cause: Some(Cause::TerminationGammaAccept),
                        side: None,
                    }
                }
            }
            Crossing::None => Decision::cont(n),
        };
        if decision.is_terminal() {
            let status = match decision.kind {
                DecisionKind::RejectNull => Status::RejectedNull,
                _ => Status::AcceptedNull,
            };
            for p in &mut trial.parts {
                p.state.status = status;
            }
            trial.decision = Some(decision);
        }
        Ok(decision)
    }

    /// Fold [`Msprt::step`] over `observations`, stopping at the first
    /// terminal decision.
    pub fn run_batch<I, O>(&self, observations: I) -> Result<BatchOutcome>
    where
        I: IntoIterator<Item = O>,
        O: Into<Observation>,
    {
        let mut trial = self.start();
        let mut decision = Decision::cont(0);
        let mut consumed = 0;
        for obs in observations {
            decision = self.step(&mut trial, obs.into())?;
            consumed += 1;
            if decision.is_terminal() {
                break;
            }
        }
        Ok(BatchOutcome {
            decision,
            consumed,
            trial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideTrial {
    pub side: Side,
    pub state: TrialState,
    /// Reached B; can no longer reject.
    pub retired: bool,
}

/// A running trial: one likelihood-ratio state per one-sided part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub parts: Vec<SideTrial>,
    pub decision: Option<Decision>,
    n_max: u32,
}

impl Trial {
    /// Observations (pairs) scored so far.
    pub fn n(&self) -> u32 {
        self.parts[0].state.n()
    }

    pub fn is_terminal(&self) -> bool {
        self.decision.is_some()
    }

    /// Trajectory of the first part (the only one for one-sided tests).
    pub fn trajectory(&self) -> &[TrajectoryPoint] {
        &self.parts[0].state.trajectory
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    /// The terminal decision, or the last continue decision if the data ran out.
    pub decision: Decision,
    /// Observations consumed before stopping.
    pub consumed: usize,
    pub trial: Trial,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_boundaries() {
        let w = WaldBoundaries::new(0.005, 0.2);
        assert!((w.a - 160.0).abs() < 1e-9);
        assert!((w.b - 0.20101).abs() < 1e-5);
    }

    #[test]
    fn ties_resolve_toward_stopping() {
        let mut retired = [false];
        assert_eq!(
            check_boundaries(&[2.0], &mut retired, &[2.0], &[-1.0]),
            Crossing::Reject(0)
        );
        assert_eq!(
            check_boundaries(&[-1.0], &mut retired, &[2.0], &[-1.0]),
            Crossing::Accept
        );
        assert!(reaches_gamma(3f64.ln(), 3.0));
    }

    #[test]
    fn retired_side_cannot_reject() {
        let mut retired = [false, false];
        let (a, b) = ([1.0, 1.0], [-1.0, -1.0]);
        assert_eq!(check_boundaries(&[-2.0, 0.0], &mut retired, &a, &b), Crossing::None);
        assert_eq!(check_boundaries(&[5.0, 0.0], &mut retired, &a, &b), Crossing::None);
        assert_eq!(check_boundaries(&[5.0, -3.0], &mut retired, &a, &b), Crossing::Accept);
        assert_eq!(terminal_statistic(&[5.0, 0.5], &[true, false]), 0.5);
    }

    #[test]
    fn step_after_decision_is_an_error() {
        let m = Msprt::new(TestSpec::one_z(0.0, 1.0, 2), 10.0).unwrap();
        let out = m.run_batch([0.0, 0.0]).unwrap();
        assert!(out.decision.is_terminal());
        let mut t = out.trial;
        assert!(matches!(m.step(&mut t, 0.0.into()), Err(Error::Usage(_))));
    }
}
