#![allow(dead_code)]

use seqprt::obsfile;
use seqprt::Observation;

pub const ONE_Z: &str = include_str!("../../../../data/one_z.csv");
pub const ONE_T: &str = include_str!("../../../../data/one_t.csv");
pub const ONE_PROP: &str = include_str!("../../../../data/one_prop.csv");
pub const TWO_Z: &str = include_str!("../../../../data/two_z.csv");
pub const TWO_T: &str = include_str!("../../../../data/two_t.csv");
pub const WATER: &str = include_str!("../../../../data/water.csv");

pub fn load(text: &str) -> Vec<Observation> {
    obsfile::parse(text).expect("bundled data parses")
}

pub fn values(text: &str) -> Vec<f64> {
    load(text)
        .into_iter()
        .map(|o| match o {
            Observation::Value(v) => v,
            other => panic!("expected single values, got {other:?}"),
        })
        .collect()
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: {actual} differs from {expected} by more than {tol}"
    );
}
