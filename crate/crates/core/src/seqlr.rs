//! Streaming likelihood ratios from constant-size sufficient statistics.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dist::special::log_add_exp;
use crate::error::{Error, Result};
use crate::spec::{Family, Side, TestSpec};
use crate::umpbt::Alternative;

/// Running count, sum, sum of squares, and Welford mean / centered sum of
/// squares for one sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u32,
    pub sum: f64,
    pub sum_sq: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
        let d = x - self.mean;
        self.mean += d / f64::from(self.n);
        self.m2 += d * (x - self.mean);
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    /// Sample standard deviation with divisor n−1.
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2.max(0.0) / f64::from(self.n - 1)).sqrt()
    }
}

/// Sufficient statistics for every family. One-sample families use `x`;
/// two-sample families use `x` for group 1 and `y` for group 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub x: Moments,
    #[serde(default)]
    pub y: Moments,
    #[serde(default)]
    pub successes: u64,
}

impl SufficientStats {
    /// Observations scored so far (pairs for two-sample families).
    pub fn n(&self) -> u32 {
        self.x.n
    }
}

/// One observation as it arrives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    /// One value: a measurement or a 0/1 outcome.
    Value(f64),
    /// One value per group, scored together.
    Pair([f64; 2]),
    /// A value for one group (1 or 2), held until its partner arrives.
    Group { group: u8, value: f64 },
}

impl From<f64> for Observation {
    fn from(v: f64) -> Self {
        Observation::Value(v)
    }
}

impl From<(f64, f64)> for Observation {
    fn from((a, b): (f64, f64)) -> Self {
        Observation::Pair([a, b])
    }
}

/// The log likelihood ratio of a one-sided test as a function of the
/// sufficient statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrModel {
    OneZ {
        null: f64,
        diff: f64,
        var: f64,
    },
    OneT {
        null: f64,
        shift_per_sd: f64,
    },
    OneProp {
        p0: f64,
        near: f64,
        far: f64,
        ln_psi: f64,
        ln_1m_psi: f64,
    },
    TwoZ {
        diff: f64,
        var: f64,
    },
    TwoT {
        shift_per_sd: f64,
    },
}

/// ln R(p) = (n−S) ln((1−p)/(1−p0)) + S ln(p/p0), with empty counts
/// contributing nothing so that p ∈ {0, 1} is handled.
fn log_binom_ratio(p: f64, p0: f64, n: u64, s: u64) -> f64 {
    let fails = n - s;
    let mut out = 0.0;
    if fails > 0 {
        out += fails as f64 * ((-p).ln_1p() - (-p0).ln_1p());
    }
    if s > 0 {
        out += s as f64 * (p.ln() - p0.ln());
    }
    out
}

/// ln of [(1 + k t0²)/(1 + k t1²)]^{e} with the s = 0 limit: the ratio tends
/// to 1 when the centered mean is nonzero and is undefined otherwise.
fn log_t_ratio(centered: f64, sd: f64, shift_per_sd: f64, k: f64, expo: f64) -> Result<f64> {
    if sd == 0.0 {
        if centered != 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateSample(
            "all observations equal the null value; the t statistic is undefined".into(),
        ));
    }
    let t0 = centered / sd;
    let t1 = t0 - shift_per_sd;
    Ok(expo * ((k * t0 * t0).ln_1p() - (k * t1 * t1).ln_1p()))
}

impl LrModel {
    pub fn new(spec: &TestSpec, alt: &Alternative) -> Result<Self> {
        if spec.side == Side::TwoSided {
            return Err(Error::usage("likelihood ratios are defined per one-sided test"));
        }
        let mismatch = || Error::usage(format!("alternative {alt:?} does not belong to a {} test", spec.family));
        Ok(match (spec.family, *alt) {
            (Family::OneZ, Alternative::Point { theta1, .. }) => {
                let s = spec.sigma()?;
                LrModel::OneZ {
                    null: spec.null,
                    diff: theta1 - spec.null,
                    var: s * s,
                }
            }
            (Family::TwoZ, Alternative::Point { theta1, .. }) => {
                let s = spec.sigma()?;
                LrModel::TwoZ {
                    diff: theta1,
                    var: s * s,
                }
            }
            (Family::OneT, Alternative::DataDependentT { shift_per_sd, .. }) => LrModel::OneT {
                null: spec.null,
                shift_per_sd,
            },
            (Family::TwoT, Alternative::DataDependentT { shift_per_sd, .. }) => LrModel::TwoT { shift_per_sd },
            (Family::OneProp, Alternative::Mixture { near, far, psi, .. }) => LrModel::OneProp {
                p0: spec.null,
                near,
                far,
                ln_psi: psi.ln(),
                ln_1m_psi: (-psi).ln_1p(),
            },
            (Family::OneProp, Alternative::Point { theta1, .. }) => LrModel::OneProp {
                p0: spec.null,
                near: theta1,
                far: theta1,
                ln_psi: f64::NEG_INFINITY,
                ln_1m_psi: 0.0,
            },
            _ => return Err(mismatch()),
        })
    }

    pub fn family(&self) -> Family {
        match self {
            LrModel::OneZ { .. } => Family::OneZ,
            LrModel::OneT { .. } => Family::OneT,
            LrModel::OneProp { .. } => Family::OneProp,
            LrModel::TwoZ { .. } => Family::TwoZ,
            LrModel::TwoT { .. } => Family::TwoT,
        }
    }

    /// ln L_n, or `None` while there are too few observations to evaluate it.
    pub fn log_lr(&self, st: &SufficientStats) -> Result<Option<f64>> {
        let n = st.n();
        if n < self.family().first_evaluable_n() {
            return Ok(None);
        }
        let nf = f64::from(n);
        let v = match *self {
            LrModel::OneZ { null, diff, var } => diff / var * (st.x.sum - nf * null) - nf * diff * diff / (2.0 * var),
            LrModel::TwoZ { diff, var } => {
                let d = (st.y.sum - st.x.sum) / nf;
                let v = 2.0 * var / nf;
                (diff * d - 0.5 * diff * diff) / v
            }
            LrModel::OneT { null, shift_per_sd } => {
                let k = nf / (nf - 1.0);
                log_t_ratio(st.x.mean - null, st.x.sd(), shift_per_sd, k, 0.5 * nf)?
            }
            LrModel::TwoT { shift_per_sd } => {
                let df = 2.0 * nf - 2.0;
                let pooled = ((st.x.m2.max(0.0) + st.y.m2.max(0.0)) / df).sqrt();
                let se_per_sd = (2.0 / nf).sqrt();
                let centered = (st.y.mean - st.x.mean) / se_per_sd;
                // t1 = (D − shift·s)/(s·√(2/n)) = t0 − shift/√(2/n)
                log_t_ratio(centered, pooled, shift_per_sd / se_per_sd, 1.0 / df, nf)?
            }
            LrModel::OneProp {
                p0,
                near,
                far,
                ln_psi,
                ln_1m_psi,
            } => {
                let (n, s) = (u64::from(n), st.successes);
                log_add_exp(
                    ln_psi + log_binom_ratio(near, p0, n, s),
                    ln_1m_psi + log_binom_ratio(far, p0, n, s),
                )
            }
        };
        Ok(Some(v))
    }

    /// ln L_n for a proportion test directly from (n, successes).
    pub fn log_lr_counts(&self, n: u64, successes: u64) -> Option<f64> {
        match *self {
            LrModel::OneProp {
                p0,
                near,
                far,
                ln_psi,
                ln_1m_psi,
            } if n > 0 => Some(log_add_exp(
                ln_psi + log_binom_ratio(near, p0, n, successes),
                ln_1m_psi + log_binom_ratio(far, p0, n, successes),
            )),
            _ => None,
        }
    }
}

/// Likelihood ratio L_n (not its log) for a one-sided spec and alternative.
pub fn likelihood_ratio(spec: &TestSpec, alt: &Alternative, st: &SufficientStats) -> Result<f64> {
    let model = LrModel::new(spec, alt)?;
    Ok(model.log_lr(st)?.map_or(1.0, f64::exp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    RejectedNull,
    AcceptedNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: u32,
    pub log_lr: f64,
}

impl TrajectoryPoint {
    pub fn lr(&self) -> f64 {
        self.log_lr.exp()
    }
}

/// Streaming state of one one-sided likelihood ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    pub stats: SufficientStats,
    /// Current ln L_n; 0 before the first evaluable step.
    pub log_lr: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Pending::is_empty")]
    pending: Pending,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Pending {
    group1: VecDeque<f64>,
    group2: VecDeque<f64>,
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.group1.is_empty() && self.group2.is_empty()
    }
}

impl Default for TrialState {
    fn default() -> Self {
        TrialState {
            stats: SufficientStats::default(),
            log_lr: 0.0,
            trajectory: Vec::new(),
            status: Status::Active,
            pending: Pending::default(),
        }
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("observation {v} is not finite")))
    }
}

/// Validate an observation against a family and turn it into the values
/// to absorb: one value, or a complete pair.
fn normalize(family: Family, obs: Observation) -> Result<Observation> {
    match (family.is_two_sample(), obs) {
        (false, Observation::Value(v)) => {
            let v = finite(v)?;
            if family == Family::OneProp && v != 0.0 && v != 1.0 {
                return Err(Error::domain(format!(
                    "proportion tests take 0/1 observations, got {v}"
                )));
            }
            Ok(Observation::Value(v))
        }
        (true, Observation::Pair([a, b])) => Ok(Observation::Pair([finite(a)?, finite(b)?])),
        (true, Observation::Group { group, value }) if group == 1 || group == 2 => Ok(Observation::Group {
            group,
            value: finite(value)?,
        }),
        (true, Observation::Group { group, .. }) => Err(Error::usage(format!("group must be 1 or 2, got {group}"))),
        (true, Observation::Value(_)) => Err(Error::usage(format!(
            "{family} tests take paired observations (one value per group)"
        ))),
        (false, _) => Err(Error::usage(format!("{family} tests take single observations"))),
    }
}

impl TrialState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> u32 {
        self.stats.n()
    }

    /// Whether the observation is well-formed for `family`; does not touch
    /// the state.
    pub fn check(family: Family, obs: Observation) -> Result<()> {
        normalize(family, obs).map(|_| ())
    }

    /// Absorb one observation. Returns the new trajectory point when a step
    /// was scored, `None` when the observation was buffered or the likelihood
    /// ratio is not yet defined. The state is unchanged on error.
    pub fn update(&mut self, model: &LrModel, obs: Observation) -> Result<Option<TrajectoryPoint>> {
        if self.status != Status::Active {
            return Err(Error::usage("the trial has already reached a decision"));
        }
        let family = model.family();
        let pair = match normalize(family, obs)? {
            Observation::Value(v) => {
                let mut next = self.stats;
                next.x.push(v);
                if family == Family::OneProp && v == 1.0 {
                    next.successes += 1;
                }
                return self.commit(model, next);
            }
            Observation::Pair(p) => p,
            Observation::Group { group, value } => {
                let (mine, other) = if group == 1 {
                    (&mut self.pending.group1, &mut self.pending.group2)
                } else {
                    (&mut self.pending.group2, &mut self.pending.group1)
                };
                match other.pop_front() {
                    None => {
                        mine.push_back(value);
                        return Ok(None);
                    }
                    Some(partner) => {
                        let pair = if group == 1 { [value, partner] } else { [partner, value] };
                        let mut next = self.stats;
                        next.x.push(pair[0]);
                        next.y.push(pair[1]);
                        match self.commit(model, next) {
                            Ok(point) => return Ok(point),
                            Err(e) => {
                                let other = if group == 1 {
                                    &mut self.pending.group2
                                } else {
                                    &mut self.pending.group1
                                };
                                other.push_front(partner);
                                return Err(e);
                            }
                        }
                    }
                }
            }
        };
        let mut next = self.stats;
        next.x.push(pair[0]);
        next.y.push(pair[1]);
        self.commit(model, next)
    }

    fn commit(&mut self, model: &LrModel, next: SufficientStats) -> Result<Option<TrajectoryPoint>> {
        let scored = model.log_lr(&next)?;
        self.stats = next;
        Ok(scored.map(|log_lr| {
            self.log_lr = log_lr;
            let point = TrajectoryPoint { n: next.n(), log_lr };
            self.trajectory.push(point);
            point
        }))
    }

    /// Values waiting for a partner in the other group.
    pub fn buffered(&self) -> (usize, usize) {
        (self.pending.group1.len(), self.pending.group2.len())
    }

    pub fn lr(&self) -> f64 {
        self.log_lr.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::umpbt::{umpbt_one_prop, umpbt_one_t};

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.5, -2.0, 3.25, 0.0, 7.5, 1e-3];
        let m = Moments::from_slice(&xs);
        let mean = xs.iter().sum::<f64>() / 6.0;
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        assert!((m.mean - mean).abs() < 1e-14);
        assert!((m.m2 - ss).abs() < 1e-12);
    }

    #[test]
    fn t_needs_two_observations() {
        let spec = TestSpec::one_t(0.0, 10);
        let model = LrModel::new(&spec, &umpbt_one_t(&spec).unwrap()).unwrap();
        let mut st = TrialState::new();
        assert_eq!(st.update(&model, 1.0.into()).unwrap(), None);
        assert!(st.update(&model, 2.0.into()).unwrap().is_some());
        assert_eq!(st.trajectory.len(), 1);
    }

    #[test]
    fn identical_t_observations() {
        let spec = TestSpec::one_t(0.0, 10);
        let model = LrModel::new(&spec, &umpbt_one_t(&spec).unwrap()).unwrap();
        let mut st = TrialState::new();
        st.update(&model, 2.0.into()).unwrap();
        let p = st.update(&model, 2.0.into()).unwrap().unwrap();
        assert_eq!(p.log_lr, 0.0);

        let mut at_null = TrialState::new();
        at_null.update(&model, 0.0.into()).unwrap();
        let before = at_null.clone();
        let err = at_null.update(&model, 0.0.into()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSample(_)));
        assert_eq!(at_null, before);
    }

    #[test]
    fn prop_rejects_non_binary() {
        let spec = TestSpec::one_prop(0.2, 30);
        let model = LrModel::new(&spec, &umpbt_one_prop(&spec).unwrap()).unwrap();
        let mut st = TrialState::new();
        assert!(matches!(st.update(&model, 0.5.into()), Err(Error::Domain(_))));
        assert_eq!(st.n(), 0);
    }

    #[test]
    fn group_values_pair_up() {
        let spec = TestSpec::two_z(1.0, 10, 10);
        let alt = crate::umpbt::umpbt_two_z(&spec).unwrap();
        let model = LrModel::new(&spec, &alt).unwrap();
        let mut a = TrialState::new();
        let mut b = TrialState::new();
        assert!(a
            .update(&model, Observation::Group { group: 2, value: 0.7 })
            .unwrap()
            .is_none());
        assert!(a
            .update(&model, Observation::Group { group: 2, value: 0.1 })
            .unwrap()
            .is_none());
        assert_eq!(a.buffered(), (0, 2));
        a.update(&model, Observation::Group { group: 1, value: 0.3 }).unwrap();
        b.update(&model, (0.3, 0.7).into()).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.buffered(), (0, 1));
        assert!(a.update(&model, 1.0.into()).is_err());
    }
}
