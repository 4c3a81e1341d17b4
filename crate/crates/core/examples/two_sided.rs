//! A two-sided z MSPRT: a right and a left test at alpha/2 sharing one
//! termination threshold.

use seqprt::{design, oc, McOptions, Msprt, Side, TestSpec};

fn main() -> seqprt::Result<()> {
    let spec = TestSpec::one_z(0.0, 1.0, 40).with_side(Side::TwoSided);
    let opts = McOptions::new(50_000, 1);
    let d = design(&spec, opts)?;
    let alts: Vec<f64> = d.alternatives.iter().filter_map(|a| a.point()).collect();
    println!("alternatives {alts:?}, gamma = {:.3}", d.gamma);
    for theta in [-0.8, -0.4, 0.0, 0.4, 0.8] {
        let r = oc(&d, theta, opts)?;
        println!("theta = {theta:>5.2}: power {:.4}, ASN {:.2}", r.power, r.asn);
    }

    let procedure: Msprt = d.procedure()?;
    let out = procedure.run_batch([
        -1.2, -1.8, -0.9, -1.5, -2.1, -1.3, -1.7, -1.1, -1.6, -1.4, -1.9, -1.2, -1.5, -1.3,
    ])?;
    println!(
        "decreasing data: {:?} at n = {} by the {} test",
        out.decision.kind,
        out.decision.at_n,
        out.decision.side.map_or("-", |s| s.as_str())
    );
    Ok(())
}
