//! Two-sample tests. Values may arrive as pairs or one group at a time; a
//! value waits until its partner from the other group arrives.

use seqprt::{design, oc, McOptions, Observation, TestSpec};

fn main() -> seqprt::Result<()> {
    let opts = McOptions::new(50_000, 1);
    for spec in [TestSpec::two_z(1.0, 25, 25), TestSpec::two_t(25, 25)] {
        let d = design(&spec, opts)?;
        let r = oc(&d, 0.8, opts)?;
        println!(
            "{}: gamma = {:.3}, power at difference 0.8 = {:.4}, ASN = {:.2}",
            spec.family, d.gamma, r.power, r.asn
        );
    }

    let procedure = design(&TestSpec::two_t(25, 25), opts)?.procedure()?;
    let mut trial = procedure.start();
    let group1 = [0.1, -0.4, 0.3, 0.9, -0.2];
    let group2 = [1.2, 0.8, 1.9, 1.1, 0.7];
    for &v in &group1 {
        procedure.step(&mut trial, Observation::Group { group: 1, value: v })?;
    }
    println!(
        "after five group-1 values: {} pairs scored, buffered {:?}",
        trial.n(),
        trial.parts[0].state.buffered()
    );
    for &v in &group2 {
        let d = procedure.step(&mut trial, Observation::Group { group: 2, value: v })?;
        println!("pair {}: {:?}", d.at_n, d.kind);
    }
    Ok(())
}
