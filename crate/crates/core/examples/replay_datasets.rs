//! Replay the bundled data sets through their procedures.

use seqprt::{obsfile, Msprt, TestSpec};

fn main() -> seqprt::Result<()> {
    let cases = [
        (
            "one_z.csv",
            TestSpec::one_z(3.0, 1.5, 30),
            27.856,
            include_str!("../../../data/one_z.csv"),
        ),
        (
            "one_t.csv",
            TestSpec::one_t(3.0, 30),
            33.152,
            include_str!("../../../data/one_t.csv"),
        ),
        (
            "one_prop.csv",
            TestSpec::one_prop(0.2, 30),
            22.63,
            include_str!("../../../data/one_prop.csv"),
        ),
        (
            "two_z.csv",
            TestSpec::two_z(1.5, 30, 30),
            27.928,
            include_str!("../../../data/two_z.csv"),
        ),
        (
            "two_t.csv",
            TestSpec::two_t(30, 30),
            32.972,
            include_str!("../../../data/two_t.csv"),
        ),
    ];
    for (file, spec, gamma, text) in cases {
        let procedure = Msprt::new(spec, gamma)?;
        let out = procedure.run_batch(obsfile::parse(text)?)?;
        let last = out.trial.trajectory().last().map_or(1.0, |p| p.lr());
        println!(
            "{file:<13} {:<17} n = {:>2}  L_n = {:>9.4}  ({:?})",
            format!("{:?}", out.decision.kind),
            out.decision.at_n,
            last,
            out.decision.cause.expect("terminal decisions carry a cause"),
        );
    }
    Ok(())
}
