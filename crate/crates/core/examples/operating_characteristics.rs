//! Power and average sample number of a calibrated one-sample t MSPRT
//! across standardized effect sizes, next to the fixed-sample test.

use seqprt::design::fixed_power;
use seqprt::{design, oc, McOptions, TestSpec};

fn main() -> seqprt::Result<()> {
    let spec = TestSpec::one_t(0.0, 30);
    let opts = McOptions::new(50_000, 1);
    let d = design(&spec, opts)?;
    println!("gamma = {:.3}, ASN under H0 = {:.2}", d.gamma, d.asn_null);
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "effect", "power", "fixed", "ASN", "early"
    );
    for i in 0..=10 {
        let effect = 0.1 * f64::from(i);
        let r = oc(&d, effect, opts)?;
        println!(
            "{effect:>6.2} {:>8.4} {:>8.4} {:>8.2} {:>8.3}",
            r.power,
            fixed_power(&spec, effect)?,
            r.asn,
            r.early_stop
        );
    }
    Ok(())
}
