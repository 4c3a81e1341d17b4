//! Exact calibration and operating characteristics of a proportion MSPRT,
//! computed on the (n, successes) lattice instead of by simulation.

use seqprt::{design_exact_prop, oc_exact_prop, Alternative, TestSpec};

fn main() -> seqprt::Result<()> {
    let spec = TestSpec::one_prop(0.2, 30);
    let d = design_exact_prop(&spec)?;
    if let Alternative::Mixture { near, far, psi, .. } = d.alternatives[0] {
        println!(
            "alternative: {near:.4} with weight {psi:.5}, {far:.4} with weight {:.5}",
            1.0 - psi
        );
    }
    println!(
        "gamma = {:.4}, exact type I error = {:.6}, ASN under H0 = {:.4}",
        d.gamma, d.type1_est, d.asn_null
    );
    for p in [0.2, 0.25, 0.3, 0.35, 0.4, 0.5] {
        let r = oc_exact_prop(&d, p)?;
        println!(
            "p = {p:.2}: power {:.5}  ASN {:.3}  P(stop before 30) {:.4}",
            r.power, r.asn, r.early_stop
        );
    }
    Ok(())
}
