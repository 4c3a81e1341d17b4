//! Expected sample size of an alpha = 0.005 MSPRT as a multiple of a
//! 0.05-level fixed design, for several null fractions.

use seqprt::design::cost_curve;
use seqprt::{McOptions, TestSpec};

fn main() -> seqprt::Result<()> {
    let opts = McOptions::new(50_000, 1);
    for n in [30, 60, 100] {
        let curve = cost_curve(&TestSpec::one_t(0.0, n).with_alpha(0.05), 0.005, opts)?;
        let multiples: Vec<String> = [0.5, 0.8, 0.9, 1.0]
            .iter()
            .map(|&pi0| format!("{pi0}: {:.3}", curve.multiple(pi0)))
            .collect();
        println!("N = {n:>3} (N* = {:>3}): {}", curve.n_star, multiples.join(", "));
    }
    Ok(())
}
