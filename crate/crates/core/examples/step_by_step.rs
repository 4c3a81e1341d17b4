//! Feed observations one at a time, save the trial mid-way and resume it.

use seqprt::{Msprt, Observation, TestSpec, Trial};

fn main() -> seqprt::Result<()> {
    let procedure = Msprt::new(TestSpec::one_t(3.0, 30), 33.152)?;
    let data = [
        1.738717, 5.076539, 1.116762, 3.105214, 5.567161, 2.095638, 2.291750, 2.046943, 2.571340, 3.207162, 4.841446,
        1.797331,
    ];

    let mut trial = procedure.start();
    for &x in &data[..6] {
        let d = procedure.step(&mut trial, Observation::Value(x))?;
        let lr = trial.trajectory().last().map(|p| p.lr());
        println!(
            "n = {:>2}  L = {:>8}  {:?}",
            d.at_n,
            lr.map_or("-".into(), |l| format!("{l:.4}")),
            d.kind
        );
    }

    let saved = serde_json::to_string(&trial).expect("trial serializes");
    println!("saved {} bytes of state", saved.len());
    let mut trial: Trial = serde_json::from_str(&saved).expect("trial deserializes");

    for &x in &data[6..] {
        let d = procedure.step(&mut trial, x.into())?;
        println!(
            "n = {:>2}  L = {:>8.4}  {:?}",
            d.at_n,
            trial.trajectory().last().unwrap().lr(),
            d.kind
        );
        if d.is_terminal() {
            break;
        }
    }
    Ok(())
}
