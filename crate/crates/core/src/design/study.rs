//! Replaying a fixed data set in random orders.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::simulate::par_reps;
use super::McOptions;
use crate::dist::{RngSeed, StreamRng};
use crate::engine::{DecisionKind, Msprt};
use crate::error::{Error, Result};
use crate::seqlr::Observation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reorder {
    /// Random permutation of the data.
    Shuffle,
    /// Draw the sequence with replacement from the data.
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReorderStudy {
    pub mode: Reorder,
    /// Mean number of observations used before the decision.
    pub mean_n: f64,
    pub reject_fraction: f64,
    /// Orders that ran out of data without a decision.
    pub undecided_fraction: f64,
    pub n_reps: u64,
    pub seed: u64,
}

/// Run `procedure` on `opts.reps` random orderings of `data`.
pub fn reorder_study(procedure: &Msprt, data: &[Observation], mode: Reorder, opts: McOptions) -> Result<ReorderStudy> {
    if data.is_empty() {
        return Err(Error::usage("no observations to reorder"));
    }
    let outcomes = par_reps(opts.reps, opts.threads, |i| {
        let mut rng = StreamRng::new(RngSeed::new(opts.seed, i));
        let order: Vec<Observation> = match mode {
            Reorder::Shuffle => {
                let mut v = data.to_vec();
                v.shuffle(&mut rng);
                v
            }
            Reorder::Resample => (0..data.len()).map(|_| data[rng.gen_range(0..data.len())]).collect(),
        };
        procedure
            .run_batch(order)
            .map(|out| (out.decision.at_n, out.decision.kind))
    })?;
    let r = opts.reps as f64;
    let (mut sum_n, mut rejects, mut open) = (0.0, 0u64, 0u64);
    for o in outcomes {
        let (n, kind) = o?;
        sum_n += f64::from(n);
        rejects += u64::from(kind == DecisionKind::RejectNull);
        open += u64::from(kind == DecisionKind::ContinueSampling);
    }
    Ok(ReorderStudy {
        mode,
        mean_n: sum_n / r,
        reject_fraction: rejects as f64 / r,
        undecided_fraction: open as f64 / r,
        n_reps: opts.reps,
        seed: opts.seed,
    })
}
