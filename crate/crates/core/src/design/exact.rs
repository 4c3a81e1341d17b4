//! Exact evaluation of proportion tests by forward dynamic programming over
//! the (n, successes) lattice. The likelihood ratio depends on the data only
//! through (n, Σx), so the lattice carries the whole trial distribution.

use crate::engine::{check_boundaries, terminal_statistic, Crossing, Msprt};
use crate::error::{Error, Result};
use crate::seqlr::LrModel;
use crate::spec::Family;

/// Distribution of a proportion MSPRT's outcome at one true p.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOutcome {
    /// P(reject at a boundary crossing before or at N).
    pub early_reject: f64,
    /// P(accept at a boundary crossing before or at N).
    pub early_accept: f64,
    /// Terminal ln statistic and its probability, for trials reaching N
    /// inside (B, A). Sorted by statistic, descending.
    pub terminal: Vec<(f64, f64)>,
    /// P(boundary stop at n), indexed by n (entry 0 unused). Terminal stops
    /// are not included.
    pub boundary_stop: Vec<f64>,
}

impl LatticeOutcome {
    /// P(reject H₀) under termination threshold γ.
    pub fn reject_prob(&self, gamma: f64) -> f64 {
        let ln_gamma = gamma.ln();
        self.early_reject
            + self
                .terminal
                .iter()
                .filter(|(v, _)| *v >= ln_gamma)
                .map(|(_, m)| m)
                .sum::<f64>()
    }

    /// Probability of reaching N without a boundary crossing.
    pub fn survive_prob(&self) -> f64 {
        self.terminal.iter().map(|(_, m)| m).sum()
    }

    /// P(stop at n) including terminal stops at N.
    pub fn stop_probs(&self) -> Vec<f64> {
        let mut out = self.boundary_stop.clone();
        if let Some(last) = out.last_mut() {
            *last += self.survive_prob();
        }
        out
    }

    pub fn asn(&self) -> f64 {
        self.stop_probs().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Propagate Bernoulli(p) data through the procedure's stopping rule.
pub fn lattice_outcome(procedure: &Msprt, p: f64) -> Result<LatticeOutcome> {
    if procedure.spec.family != Family::OneProp {
        return Err(Error::usage("the lattice evaluation applies to proportion tests only"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
    }
    let models: Vec<LrModel> = procedure.parts.iter().map(|pt| pt.model()).collect();
    let ln_a: Vec<f64> = procedure.parts.iter().map(|pt| pt.boundaries.a.ln()).collect();
    let ln_b: Vec<f64> = procedure.parts.iter().map(|pt| pt.boundaries.b.ln()).collect();
    let k = models.len();
    let masks = 1usize << k;
    let n_max = procedure.spec.n_max as usize;

    // mass[s * masks + mask]: probability of being active with s successes
    // and the given set of retired parts.
    let mut mass = vec![0.0; masks];
    mass[0] = 1.0;
    let mut out = LatticeOutcome {
        early_reject: 0.0,
        early_accept: 0.0,
        terminal: Vec::new(),
        boundary_stop: vec![0.0; n_max + 1],
    };
    let q = 1.0 - p;
    let mut terminal: Vec<(f64, f64)> = Vec::new();
    for n in 1..=n_max {
        let mut next = vec![0.0; (n + 1) * masks];
        for s in 0..n {
            for m in 0..masks {
                let w = mass[s * masks + m];
                if w == 0.0 {
                    continue;
                }
                next[s * masks + m] += w * q;
                next[(s + 1) * masks + m] += w * p;
            }
        }
        let mut after = vec![0.0; (n + 1) * masks];
        for s in 0..=n {
            let mut log_lr = [0.0; 2];
            for (i, model) in models.iter().enumerate() {
                log_lr[i] = model.log_lr_counts(n as u64, s as u64).expect("proportion model");
            }
            for m in 0..masks {
                let w = next[s * masks + m];
                if w == 0.0 {
                    continue;
                }
                let mut retired = [m & 1 != 0, m & 2 != 0];
                match check_boundaries(&log_lr[..k], &mut retired[..k], &ln_a, &ln_b) {
                    Crossing::Reject(_) => {
                        out.early_reject += w;
                        out.boundary_stop[n] += w;
                    }
                    Crossing::Accept => {
                        out.early_accept += w;
                        out.boundary_stop[n] += w;
                    }
                    Crossing::None if n == n_max => {
                        terminal.push((terminal_statistic(&log_lr[..k], &retired[..k]), w));
                    }
                    Crossing::None => {
                        let nm = usize::from(retired[0]) | (usize::from(retired[1]) << 1);
                        after[s * masks + nm] += w;
                    }
                }
            }
        }
        mass = after;
    }
    terminal.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Merge equal statistics.
    for (v, w) in terminal {
        match out.terminal.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.terminal.push((v, w)),
        }
    }
    Ok(out)
}
