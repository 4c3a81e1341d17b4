//! Calibration of the termination threshold γ and operating
//! characteristics.
//!
//! Continuous families are calibrated by Monte Carlo under H₀ with a
//! defensive importance-sampling proposal: a quarter of the replications
//! come from the null and the rest are tilted toward the UMPBT
//! alternatives, concentrating them in the rejection region that determines
//! γ. Proportion tests can instead be evaluated exactly on the
//! (n, successes) lattice.

mod exact;
mod fixed;
mod simulate;
mod study;

use serde::{Deserialize, Serialize};

pub use exact::{lattice_outcome, LatticeOutcome};
pub use fixed::{
    effective_n, effective_n_candidates, find_n_star, fixed_design_alt, fixed_power, nct_sf, prop_point_alternatives,
};

pub use study::{reorder_study, Reorder, ReorderStudy};

use crate::engine::{Msprt, WaldBoundaries};
use crate::error::{Error, Result};
use crate::spec::{Family, TestSpec};
use crate::umpbt::Alternative;
use simulate::{simulate_at, simulate_null_weighted, End, Rep, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    ExactDp,
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub reps: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            reps: 1_000_000,
            seed: 1,
            threads: None,
        }
    }
}

impl McOptions {
    pub fn new(reps: u64, seed: u64) -> Self {
        McOptions {
            reps,
            seed,
            threads: None,
        }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    fn check(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::usage("reps must be positive"));
        }
        Ok(())
    }
}

mod gamma_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// A calibrated MSPRT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub spec: TestSpec,
    pub boundaries: WaldBoundaries,
    /// One alternative per one-sided part (two for a two-sided test).
    pub alternatives: Vec<Alternative>,
    /// Termination threshold; serialized as null (+∞) for infeasible designs.
    #[serde(with = "gamma_serde")]
    pub gamma: f64,
    /// False when boundary rejections alone already exceed α.
    pub feasible: bool,
    pub type1_est: f64,
    /// Monte Carlo standard error of `type1_est` (0 for exact results).
    pub type1_se: f64,
    /// Probability of rejecting at A before N under H₀.
    pub early_reject: f64,
    /// Average sample number under H₀ (pairs for two-sample tests).
    pub asn_null: f64,
    pub n_reps: u64,
    pub seed: u64,
    pub method: Method,
}

impl DesignResult {
    pub fn procedure(&self) -> Result<Msprt> {
        Msprt::with_alternatives(self.spec, &self.alternatives, self.gamma)
    }
}

/// Operating characteristics at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcResult {
    /// Parameter value (standardized mean for t families).
    pub theta: f64,
    /// P(reject H₀).
    pub power: f64,
    /// P(accept H₀) = 1 − power.
    pub type2_est: f64,
    /// Monte Carlo standard error of `power` (0 for exact results).
    pub power_se: f64,
    pub asn: f64,
    pub asn_se: f64,
    /// P(stopping before N).
    pub early_stop: f64,
    /// Stopping-time counts indexed by n (Monte Carlo only).
    pub stop_time_histogram: Vec<u64>,
    /// Stopping-time probabilities indexed by n.
    pub stop_time_probs: Vec<f64>,
    pub n_reps: u64,
    pub seed: u64,
    pub method: Method,
}

fn procedure_with_gamma(spec: &TestSpec, gamma: f64) -> Result<Msprt> {
    Msprt::new(*spec, gamma)
}

/// Choose γ from weighted terminal statistics.
///
/// `survivors` holds (ln statistic, weight) with weights already divided by
/// the replication count; `budget` is α minus the boundary rejection
/// probability. Continuous families place γ midway (in log scale) between
/// the last admitted and the first excluded order statistic. Lattice
/// families admit whole groups of tied values and put γ just above the
/// largest excluded value.
fn select_gamma(mut survivors: Vec<(f64, f64, u64)>, budget: f64, discrete: bool, ln_a: f64, b: f64) -> (f64, f64) {
    survivors.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.2.cmp(&y.2)));
    let mut used = 0.0;
    let mut k = 0;
    while k < survivors.len() {
        let mut end = k + 1;
        if discrete {
            while end < survivors.len() && survivors[end].0 == survivors[k].0 {
                end += 1;
            }
        }
        let add: f64 = survivors[k..end].iter().map(|s| s.1).sum();
        if used + add > budget {
            break;
        }
        used += add;
        k = end;
    }
    if k == survivors.len() {
        return (b, used);
    }
    let excluded = survivors[k].0;
    if discrete {
        return (just_above(excluded), used);
    }
    let upper = if k == 0 { ln_a } else { survivors[k - 1].0 };
    ((0.5 * (upper + excluded)).exp(), used)
}

/// The smallest double γ with ln γ > v.
fn just_above(v: f64) -> f64 {
    let mut g = v.exp();
    while g.ln() <= v {
        g = g.next_up();
    }
    g
}

/// Calibrate γ by Monte Carlo under H₀.
pub fn design(spec: &TestSpec, opts: McOptions) -> Result<DesignResult> {
    opts.check()?;
    let provisional = procedure_with_gamma(spec, f64::INFINITY)?;
    let alternatives: Vec<Alternative> = provisional.parts.iter().map(|p| p.alternative).collect();
    let sim = Simulator::new(&provisional);
    let tilts = sim.tilts(&alternatives);
    let reps = simulate_null_weighted(&sim, &tilts, opts.reps, opts.seed, opts.threads)?;

    let r = opts.reps as f64;
    let mut early = 0.0;
    let mut early_sq = 0.0;
    let mut asn = 0.0;
    let mut survivors = Vec::new();
    for (i, rep) in reps.iter().enumerate() {
        asn += rep.weight * f64::from(rep.n);
        match rep.end {
            End::Reject => {
                early += rep.weight;
                early_sq += rep.weight * rep.weight;
            }
            End::Accept => {}
            End::Survive(v) => survivors.push((v, rep.weight / r, i as u64)),
        }
    }
    let early_reject = early / r;
    let boundaries = provisional.boundaries();
    let discrete = spec.family.is_discrete();
    let (gamma, feasible, type1, sq) = if early_reject > spec.alpha {
        (f64::INFINITY, false, early_reject, early_sq)
    } else {
        let (gamma, used) = select_gamma(
            survivors.clone(),
            spec.alpha - early_reject,
            discrete,
            boundaries.a.ln(),
            boundaries.b,
        );
        let ln_g = gamma.ln();
        let extra_sq: f64 = survivors
            .iter()
            .filter(|s| s.0 >= ln_g)
            .map(|s| (s.1 * r).powi(2))
            .sum();
        (gamma, true, early_reject + used, early_sq + extra_sq)
    };
    let se = ((sq / r - type1 * type1).max(0.0) / r).sqrt();
    Ok(DesignResult {
        spec: *spec,
        boundaries,
        alternatives,
        gamma,
        feasible,
        type1_est: type1,
        type1_se: se,
        early_reject,
        asn_null: asn / r,
        n_reps: opts.reps,
        seed: opts.seed,
        method: Method::MonteCarlo,
    })
}

/// Calibrate γ for a proportion test exactly on the lattice.
pub fn design_exact_prop(spec: &TestSpec) -> Result<DesignResult> {
    if spec.family != Family::OneProp {
        return Err(Error::usage("exact calibration applies to proportion tests only"));
    }
    if spec.n_max > 10_000 {
        return Err(Error::usage("exact calibration supports n_max up to 10000"));
    }
    let provisional = procedure_with_gamma(spec, f64::INFINITY)?;
    let outcome = lattice_outcome(&provisional, spec.null)?;
    let boundaries = provisional.boundaries();
    let alternatives = provisional.parts.iter().map(|p| p.alternative).collect();
    let (gamma, feasible, type1) = if outcome.early_reject > spec.alpha {
        (f64::INFINITY, false, outcome.early_reject)
    } else {
        let survivors = outcome
            .terminal
            .iter()
            .enumerate()
            .map(|(i, &(v, m))| (v, m, i as u64))
            .collect();
        let (gamma, used) = select_gamma(
            survivors,
            spec.alpha - outcome.early_reject,
            true,
            boundaries.a.ln(),
            boundaries.b,
        );
        (gamma, true, outcome.early_reject + used)
    };
    Ok(DesignResult {
        spec: *spec,
        boundaries,
        alternatives,
        gamma,
        feasible,
        type1_est: type1,
        type1_se: 0.0,
        early_reject: outcome.early_reject,
        asn_null: outcome.asn(),
        n_reps: 0,
        seed: 0,
        method: Method::ExactDp,
    })
}

fn summarize(theta: f64, reps: &[Rep], n_max: u32, gamma: f64, opts: McOptions) -> OcResult {
    let r = reps.len() as f64;
    let ln_g = gamma.ln();
    let mut hist = vec![0u64; n_max as usize + 1];
    let (mut rej, mut sum_n, mut sum_n2, mut early) = (0u64, 0.0, 0.0, 0u64);
    for rep in reps {
        hist[rep.n as usize] += 1;
        let n = f64::from(rep.n);
        sum_n += n;
        sum_n2 += n * n;
        let reject = match rep.end {
            End::Reject => true,
            End::Accept => false,
            End::Survive(v) => v >= ln_g,
        };
        rej += u64::from(reject);
        early += u64::from(rep.n < n_max);
    }
    let power = rej as f64 / r;
    let asn = sum_n / r;
    OcResult {
        theta,
        power,
        type2_est: 1.0 - power,
        power_se: (power * (1.0 - power) / r).sqrt(),
        asn,
        asn_se: ((sum_n2 / r - asn * asn).max(0.0) / r).sqrt(),
        early_stop: early as f64 / r,
        stop_time_probs: hist.iter().map(|&c| c as f64 / r).collect(),
        stop_time_histogram: hist,
        n_reps: opts.reps,
        seed: opts.seed,
        method: Method::MonteCarlo,
    }
}

/// Operating characteristics by Monte Carlo at parameter `theta`. For t
/// families data are drawn with unit variance, so `theta − null` is the
/// standardized effect size.
pub fn oc(design: &DesignResult, theta: f64, opts: McOptions) -> Result<OcResult> {
    opts.check()?;
    check_theta(&design.spec, theta)?;
    let procedure = design.procedure()?;
    let sim = Simulator::new(&procedure);
    let reps = simulate_at(&sim, theta, opts.reps, opts.seed, opts.threads)?;
    Ok(summarize(theta, &reps, design.spec.n_max, design.gamma, opts))
}

/// Exact operating characteristics of a proportion design at true p.
pub fn oc_exact_prop(design: &DesignResult, p: f64) -> Result<OcResult> {
    check_theta(&design.spec, p)?;
    let procedure = design.procedure()?;
    let out = lattice_outcome(&procedure, p)?;
    let power = out.reject_prob(design.gamma);
    let probs = out.stop_probs();
    let n_max = design.spec.n_max as usize;
    Ok(OcResult {
        theta: p,
        power,
        type2_est: 1.0 - power,
        power_se: 0.0,
        asn: out.asn(),
        asn_se: 0.0,
        early_stop: probs[..n_max].iter().sum(),
        stop_time_histogram: Vec::new(),
        stop_time_probs: probs,
        n_reps: 0,
        seed: 0,
        method: Method::ExactDp,
    })
}

fn check_theta(spec: &TestSpec, theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::domain("theta must be finite"));
    }
    if spec.family == Family::OneProp && !(0.0..=1.0).contains(&theta) {
        return Err(Error::domain(format!(
            "proportion theta must lie in [0, 1], got {theta}"
        )));
    }
    Ok(())
}

/// Sample-size cost of replacing a size-0.05 fixed design with a
/// size-`target_alpha` MSPRT, as a multiple of the fixed sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCurve {
    /// Fixed design sample size N.
    pub n_fixed: u32,
    /// θ*: the fixed design alternative of the size-0.05 test.
    pub theta_star: f64,
    /// Maximum sample size of the MSPRT.
    pub n_star: u32,
    pub asn_null: f64,
    pub asn_alt: f64,
    pub gamma: f64,
}

impl CostCurve {
    /// [π₀·ASN(H₀) + (1−π₀)·ASN(θ*)] / N.
    pub fn multiple(&self, pi0: f64) -> f64 {
        (pi0 * self.asn_null + (1.0 - pi0) * self.asn_alt) / f64::from(self.n_fixed)
    }
}

/// Build the MSPRT matching `fixed` (a fixed design, usually at α = 0.05)
/// at size `target_alpha`, and measure its ASN under H₀ and at θ*.
pub fn cost_curve(fixed: &TestSpec, target_alpha: f64, opts: McOptions) -> Result<CostCurve> {
    let theta_star = fixed_design_alt(fixed)?;
    let n_star = find_n_star(fixed, target_alpha)?;
    let seq = TestSpec {
        alpha: target_alpha,
        ..fixed.with_n_max(n_star)
    };
    let design = if seq.family == Family::OneProp {
        design_exact_prop(&seq)?
    } else {
        design(&seq, opts)?
    };
    let (h0, h1) = if seq.family == Family::OneProp {
        (oc_exact_prop(&design, seq.null)?, oc_exact_prop(&design, theta_star)?)
    } else {
        (oc(&design, seq.null, opts)?, oc(&design, theta_star, opts)?)
    };
    Ok(CostCurve {
        n_fixed: fixed.n_max,
        theta_star,
        n_star,
        asn_null: h0.asn,
        asn_alt: h1.asn,
        gamma: design.gamma,
    })
}

/// Average multiple of the fixed design's sample size at null fraction `pi0`.
pub fn cost_multiple(fixed: &TestSpec, target_alpha: f64, pi0: f64, opts: McOptions) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::domain(format!("pi0 must lie in [0, 1], got {pi0}")));
    }
    Ok(cost_curve(fixed, target_alpha, opts)?.multiple(pi0))
}
