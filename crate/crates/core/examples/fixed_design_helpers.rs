//! Fixed-sample companions of the sequential designs: the alternative a
//! fixed test detects with 80% power, the sample size needed at a stricter
//! level, and the effective maximum sample size of a proportion test.

use seqprt::design::{effective_n, effective_n_candidates, find_n_star, fixed_design_alt};
use seqprt::{Side, TestSpec};

fn main() -> seqprt::Result<()> {
    let z = TestSpec::one_z(0.0, 1.0, 30).with_alpha(0.05);
    println!("one-z, N = 30, alpha = 0.05: theta_a = {:.7}", fixed_design_alt(&z)?);
    println!("same power at alpha = 0.005 needs N* = {}", find_n_star(&z, 0.005)?);

    for n in [30, 100] {
        let t = TestSpec::one_t(0.0, n);
        println!(
            "one-t, N = {n}, alpha = 0.005: standardized theta_a = {:.5}",
            fixed_design_alt(&t)?
        );
    }

    println!(
        "proportion p0 = 0.03, N = 46: theta_a = {:.5}",
        fixed_design_alt(&TestSpec::one_prop(0.03, 46))?
    );
    println!(
        "proportion p0 = 0.2, N = 30: record sizes {:?}, effective N = {}",
        effective_n_candidates(30, 0.2, 0.005, Side::Right)?,
        effective_n(30, 0.2, 0.005, Side::Right)?
    );
    Ok(())
}
