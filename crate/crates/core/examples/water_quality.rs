//! Sequential monitoring of well contamination: test whether more than 3%
//! of stations are contaminated, sampling at most 46 stations.

use seqprt::design::{reorder_study, Reorder};
use seqprt::{design_exact_prop, obsfile, Alternative, McOptions, TestSpec};

fn main() -> seqprt::Result<()> {
    let spec = TestSpec::one_prop(0.03, 46);
    let d = design_exact_prop(&spec)?;
    if let Alternative::Mixture { near, far, psi, .. } = d.alternatives[0] {
        println!(
            "alternative: {near:.5} (weight {psi:.4}) and {far:.5} (weight {:.4})",
            1.0 - psi
        );
    }
    println!("gamma = {:.4}, exact type I error {:.5}", d.gamma, d.type1_est);

    let data = obsfile::parse(include_str!("../../../data/water.csv"))?;
    let procedure = d.procedure()?;
    let out = procedure.run_batch(data.clone())?;
    for p in out.trial.trajectory() {
        println!("station {:>2}: L = {:>9.4}", p.n, p.lr());
    }
    println!(
        "{:?} after station {} ({:?})",
        out.decision.kind, out.decision.at_n, out.decision.cause
    );

    let opts = McOptions::new(10_000, 1);
    for mode in [Reorder::Shuffle, Reorder::Resample] {
        let s = reorder_study(&procedure, &data, mode, opts)?;
        println!(
            "{mode:?}: mean stations {:.2}, reject fraction {:.4}",
            s.mean_n, s.reject_fraction
        );
    }
    Ok(())
}
