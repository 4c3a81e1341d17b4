//! Calibrate a one-sample z MSPRT and print the design as JSON.
//!
//! cargo run --example design_one_z -- [reps] [seed]

use seqprt::{design, McOptions, TestSpec};

fn main() -> seqprt::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let spec = TestSpec::one_z(3.0, 1.5, 30).with_alpha(0.005).with_beta(0.2);
    let d = design(&spec, McOptions::new(reps, seed))?;

    println!("{}", serde_json::to_string_pretty(&d).expect("design serializes"));
    println!(
        "reject if L_n >= {:.1}, accept if L_n <= {:.4}; at n = 30 reject iff L_30 >= {:.3}",
        d.boundaries.a, d.boundaries.b, d.gamma
    );
    Ok(())
}
