//! Replication engine shared by calibration and operating characteristics.

use rayon::prelude::*;

use crate::dist::{RngSeed, StreamRng};
use crate::engine::{check_boundaries, terminal_statistic, Crossing, Msprt};
use crate::error::{Error, Result};
use crate::seqlr::{LrModel, SufficientStats};
use crate::spec::Family;
use crate::umpbt::Alternative;

/// How one replication ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum End {
    Reject,
    Accept,
    /// Reached N inside (B, A); carries the terminal ln statistic.
    Survive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Rep {
    pub n: u32,
    pub end: End,
    /// Importance weight dP₀/dQ of the observed prefix (1 without tilting).
    pub weight: f64,
}

/// Data-generating setup: one-sample draws are `mean + sd·Z`; two-sample
/// draws put the groups at ∓`mean`/2 so their difference has mean `mean`;
/// proportions draw Bernoulli(`mean`).
#[derive(Debug, Clone)]
pub(crate) struct Simulator {
    family: Family,
    models: Vec<LrModel>,
    ln_a: Vec<f64>,
    ln_b: Vec<f64>,
    n_max: u32,
    sd: f64,
    null: f64,
}

impl Simulator {
    pub fn new(procedure: &Msprt) -> Self {
        let spec = procedure.spec;
        let sd = if spec.family.needs_sigma() {
            spec.sigma0.unwrap_or(1.0)
        } else {
            1.0
        };
        Simulator {
            family: spec.family,
            models: procedure.parts.iter().map(|p| p.model()).collect(),
            ln_a: procedure.parts.iter().map(|p| p.boundaries.a.ln()).collect(),
            ln_b: procedure.parts.iter().map(|p| p.boundaries.b.ln()).collect(),
            n_max: spec.n_max,
            sd,
            null: spec.null,
        }
    }

    /// Null value of the simulated parameter.
    pub fn null(&self) -> f64 {
        self.null
    }

    /// The parameter value each part's alternative points to, in simulation
    /// units (σ = 1 for t families).
    pub fn tilts(&self, alternatives: &[Alternative]) -> Vec<f64> {
        alternatives
            .iter()
            .map(|alt| match *alt {
                Alternative::Point { theta1, .. } => theta1,
                Alternative::DataDependentT { null, shift_per_sd, .. } => null + shift_per_sd,
                Alternative::Mixture { far, .. } => far,
            })
            .collect()
    }

    fn draw(&self, mean: f64, rng: &mut StreamRng, st: &mut SufficientStats) {
        match self.family {
            Family::OneProp => {
                let hit = rng.bernoulli(mean);
                st.x.push(if hit { 1.0 } else { 0.0 });
                st.successes += u64::from(hit);
            }
            Family::OneZ | Family::OneT => st.x.push(mean + self.sd * rng.std_normal()),
            Family::TwoZ | Family::TwoT => {
                let a = -0.5 * mean + self.sd * rng.std_normal();
                let b = 0.5 * mean + self.sd * rng.std_normal();
                st.x.push(a);
                st.y.push(b);
            }
        }
    }

    /// Run one trial with data drawn at parameter `mean`.
    pub fn run(&self, mean: f64, rng: &mut StreamRng) -> (u32, End, SufficientStats) {
        let k = self.models.len();
        let mut st = SufficientStats::default();
        let mut retired = [false; 2];
        let mut log_lr = [0.0; 2];
        loop {
            self.draw(mean, rng, &mut st);
            let n = st.n();
            let mut scored = true;
            for (i, m) in self.models.iter().enumerate() {
                match m.log_lr(&st) {
                    Ok(Some(v)) => log_lr[i] = v,
                    Ok(None) => scored = false,
                    Err(_) => log_lr[i] = 0.0,
                }
            }
            if scored {
                match check_boundaries(&log_lr[..k], &mut retired[..k], &self.ln_a, &self.ln_b) {
                    Crossing::Reject(_) => return (n, End::Reject, st),
                    Crossing::Accept => return (n, End::Accept, st),
                    Crossing::None => {}
                }
            }
            if n >= self.n_max {
                return (n, End::Survive(terminal_statistic(&log_lr[..k], &retired[..k])), st);
            }
        }
    }

    /// ln of the density ratio of the first n observations at parameter
    /// `mean` against the null.
    pub fn log_tilt_ratio(&self, mean: f64, st: &SufficientStats) -> f64 {
        let n = f64::from(st.n());
        match self.family {
            Family::OneProp => {
                let (n, s) = (st.n() as u64, st.successes);
                let fails = (n - s) as f64;
                let mut out = 0.0;
                if fails > 0.0 {
                    out += fails * ((-mean).ln_1p() - (-self.null).ln_1p());
                }
                if s > 0 {
                    out += s as f64 * (mean.ln() - self.null.ln());
                }
                out
            }
            Family::OneZ | Family::OneT => {
                let v = self.sd * self.sd;
                (mean - self.null) / v * st.x.sum - n * (mean * mean - self.null * self.null) / (2.0 * v)
            }
            Family::TwoZ | Family::TwoT => {
                let v = self.sd * self.sd;
                0.5 * mean / v * (st.y.sum - st.x.sum) - n * mean * mean / (4.0 * v)
            }
        }
    }
}

/// Map `f` over replication indices `0..reps` in parallel, returning results
/// in index order. The output does not depend on the thread count.
pub(crate) fn par_reps<T, F>(reps: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let run = || (0..reps).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))
            .map(|pool| pool.install(run)),
        None => Ok(run()),
    }
}

/// Plain Monte Carlo at parameter `theta`.
pub(crate) fn simulate_at(
    sim: &Simulator,
    theta: f64,
    reps: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<Rep>> {
    par_reps(reps, threads, |i| {
        let mut rng = StreamRng::new(RngSeed::new(seed, i));
        let (n, end, _) = sim.run(theta, &mut rng);
        Rep { n, end, weight: 1.0 }
    })
}

/// Share of importance-sampling replications drawn from the null itself.
/// The rest are tilted toward the alternatives, which caps every weight at
/// 1/NULL_SHARE.
pub(crate) const NULL_SHARE: f64 = 0.25;

/// Importance-sampled replications under H₀. Replication i draws from the
/// null when i mod 4 = 0 and otherwise from one of `tilts`, cycling through
/// them; the weight is the null density over the mixture density
/// NULL_SHARE·f₀ + (1 − NULL_SHARE)/k·Σ f_j.
pub(crate) fn simulate_null_weighted(
    sim: &Simulator,
    tilts: &[f64],
    reps: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<Rep>> {
    let k = tilts.len() as f64;
    let per_tilt = (1.0 - NULL_SHARE) / k;
    par_reps(reps, threads, |i| {
        let mut rng = StreamRng::new(RngSeed::new(seed, i));
        let slot = i % 4;
        let mean = if slot == 0 {
            sim.null()
        } else {
            tilts[(slot as usize - 1 + (i / 4) as usize) % tilts.len()]
        };
        let (n, end, st) = sim.run(mean, &mut rng);
        let mix: f64 = tilts.iter().map(|&t| per_tilt * sim.log_tilt_ratio(t, &st).exp()).sum();
        Rep {
            n,
            end,
            weight: 1.0 / (NULL_SHARE + mix),
        }
    })
}
