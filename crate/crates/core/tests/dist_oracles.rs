use proptest::prelude::*;
use seqprt::dist::{
    binom_cdf, binom_pmf, binom_tail, std_normal_cdf, std_normal_quantile, std_normal_sf, t_cdf, t_quantile, t_sf,
    RngSeed, StreamRng,
};
use statrs::distribution::{Binomial, ContinuousCDF, Discrete, DiscreteCDF, Normal, StudentsT};

#[test]
fn normal_matches_statrs() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in -800..=800 {
        let x = i as f64 / 100.0;
        let (a, b) = (std_normal_cdf(x), n.cdf(x));
        assert!((a - b).abs() <= 1e-14 + 1e-9 * b, "cdf at {x}: {a} vs {b}");
        let (a, b) = (std_normal_sf(x), n.sf(x));
        assert!((a - b).abs() <= 1e-14 + 1e-9 * b, "sf at {x}: {a} vs {b}");
    }
}

#[test]
fn normal_reference_values() {
    let cases = [
        (-0.74, 0.229_649_997_164_790_6),
        (-5.0, 2.866_515_718_791_939e-7),
        (-20.0, 2.753_624_118_606_233e-89),
        (1.0, 0.841_344_746_068_542_9),
    ];
    for (x, want) in cases {
        let got = std_normal_cdf(x);
        assert!((got / want - 1.0).abs() < 1e-13, "cdf at {x}: {got} vs {want}");
    }
}

#[test]
fn normal_quantile_inverts_cdf() {
    for i in 1..1000 {
        let p = i as f64 / 1000.0;
        let x = std_normal_quantile(p).unwrap();
        assert!((std_normal_cdf(x) - p).abs() < 1e-12, "p={p}");
    }
    for p in [1e-300, 1e-100, 1e-20, 1e-10] {
        let x = std_normal_quantile(p).unwrap();
        assert!((std_normal_cdf(x) / p - 1.0).abs() < 1e-9, "p={p}");
    }
    assert!((std_normal_quantile(0.995).unwrap() - 2.575_829_303_548_9).abs() < 1e-9);
    assert!(std_normal_quantile(0.0).is_err());
    assert!(std_normal_quantile(1.0).is_err());
}

#[test]
fn student_t_matches_statrs() {
    for df in [1.0, 2.0, 5.0, 29.0, 58.0, 200.0] {
        let t = StudentsT::new(0.0, 1.0, df).unwrap();
        for i in -200..=200 {
            let x = i as f64 / 20.0;
            let (a, b) = (t_cdf(x, df), t.cdf(x));
            assert!((a - b).abs() <= 1e-9, "df {df} cdf at {x}: {a} vs {b}");
        }
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let q = t_quantile(p, df).unwrap();
            assert!((t_cdf(q, df) - p).abs() < 1e-10, "df {df} p {p}");
        }
    }
}

#[test]
fn student_t_reference_quantiles() {
    assert!((t_quantile(0.995, 29.0).unwrap() - 2.756_385_903_670_335).abs() < 1e-9);
    assert!((t_quantile(0.995, 58.0).unwrap() - 2.663_286_953_537_658).abs() < 1e-9);
    assert!((t_quantile(0.975, 1.0).unwrap() - 12.706_204_736_432_102).abs() < 1e-8);
}

#[test]
fn student_t_approaches_normal() {
    for i in 1..100 {
        let p = i as f64 / 100.0;
        let a = t_quantile(p, 1e6).unwrap();
        let b = std_normal_quantile(p).unwrap();
        assert!((a - b).abs() < 1e-4, "p {p}: {a} vs {b}");
    }
}

#[test]
fn t_tails_are_accurate_far_out() {
    let s = t_sf(40.0, 29.0);
    assert!(s > 0.0 && s < 1e-25);
    assert!((t_sf(3.0, 5.0) + t_cdf(3.0, 5.0) - 1.0).abs() < 1e-15);
}

#[test]
fn binomial_matches_statrs() {
    for (n, p) in [(30u64, 0.2), (46, 0.03), (100, 0.5), (7, 0.9)] {
        let b = Binomial::new(p, n).unwrap();
        for k in 0..=n {
            let pmf = binom_pmf(k as i64, n, p);
            assert!((pmf - b.pmf(k)).abs() <= 1e-13 + 1e-10 * pmf, "pmf n {n} p {p} k {k}");
            let cdf = binom_cdf(k as i64, n, p);
            assert!((cdf - b.cdf(k)).abs() <= 1e-12, "cdf n {n} p {p} k {k}");
            assert!((cdf + binom_tail(k as i64, n, p) - 1.0).abs() < 1e-12);
        }
        assert_eq!(binom_tail(-1, n, p), 1.0);
        assert_eq!(binom_tail(n as i64, n, p), 0.0);
    }
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let draw = |stream| {
        let mut r = StreamRng::new(RngSeed::new(7, stream));
        (0..8).map(|_| r.std_normal()).collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

proptest! {
    #[test]
    fn normal_quantile_is_monotone(a in 1e-12f64..1.0, b in 1e-12f64..1.0) {
        prop_assume!(a < b && b < 1.0);
        prop_assert!(std_normal_quantile(a).unwrap() < std_normal_quantile(b).unwrap());
    }

    #[test]
    fn t_quantile_round_trips(p in 1e-6f64..0.999_999, df in 1.0f64..500.0) {
        let q = t_quantile(p, df).unwrap();
        prop_assert!((t_cdf(q, df) - p).abs() < 1e-9);
    }

    #[test]
    fn t_is_symmetric(x in -50.0f64..50.0, df in 1.0f64..300.0) {
        prop_assert!((t_cdf(x, df) - t_sf(-x, df)).abs() < 1e-14);
    }
}
