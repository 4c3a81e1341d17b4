//! Fixed-sample-size design helpers: the alternative a fixed test detects
//! with power 1−β, the fixed-design power itself, the sample size needed at a
//! stricter size, and the effective maximum sample size of proportion tests.

use crate::dist::special::ln_gamma;
use crate::dist::{binom_tail, std_normal_cdf, std_normal_quantile, std_normal_sf, t_quantile};
use crate::error::{Error, Result};
use crate::spec::{Family, Side, TestSpec};
use crate::umpbt::{prop_point_at, randomized_cutoff};

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (f0, f1, fm) = (f(x0), f(x1), f(0.5 * (x0 + x1)));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            adaptive_simpson(&f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// P(T > x) for a noncentral t with `df` degrees of freedom and
/// noncentrality `ncp`, from T = (Z + ncp)/W with W = √(χ²_df/df):
/// P(T > x) = ∫ f_W(w) Φ(ncp − x w) dw.
pub fn nct_sf(x: f64, df: f64, ncp: f64) -> Result<f64> {
    if df.is_nan() || df <= 0.0 || !x.is_finite() || !ncp.is_finite() {
        return Err(Error::domain(format!(
            "invalid noncentral t arguments x={x}, df={df}, ncp={ncp}"
        )));
    }
    let half = 0.5 * df;
    let log_norm = std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half);
    let density = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        (log_norm + (df - 1.0) * w.ln() - half * w * w).exp()
    };
    let mode = ((df - 1.0).max(0.0) / df).sqrt();
    let spread = (0.5 / df).sqrt();
    let lo = (mode - 14.0 * spread).max(0.0);
    let hi = mode + 14.0 * spread;
    let v = integrate(|w| density(w) * std_normal_cdf(ncp - x * w), lo, hi, 32, 1e-12);
    Ok(v.clamp(0.0, 1.0))
}

fn upper_quantile(spec: &TestSpec, alpha: f64, df: f64) -> Result<f64> {
    if spec.family.is_t() {
        t_quantile(1.0 - alpha, df)
    } else {
        std_normal_quantile(1.0 - alpha)
    }
}

/// (one-sided part spec, sign) for fixed-design computations; two-sided
/// tests use the right tail at α/2.
fn directed(spec: &TestSpec) -> (TestSpec, f64) {
    let part = spec.one_sided_parts()[0];
    let sign = if part.side == Side::Left { -1.0 } else { 1.0 };
    (part, sign)
}

fn two_sample_scale(spec: &TestSpec) -> f64 {
    (1.0 / f64::from(spec.n1_max()) + 1.0 / f64::from(spec.n2_max())).sqrt()
}

/// Power of the conservative fixed-sample proportion test that rejects for
/// X > c₀ (right side), at true proportion p.
fn prop_power(n: u64, p0: f64, alpha: f64, side: Side, p: f64) -> f64 {
    let (p0, p) = if side == Side::Left {
        (1.0 - p0, 1.0 - p)
    } else {
        (p0, p)
    };
    let rc = randomized_cutoff(n, p0, alpha);
    binom_tail(rc.c0 as i64, n, p)
}

/// Power of the size-α fixed-sample test of `spec` at parameter `theta`
/// (standardized mean for t families). The proportion test is the
/// non-randomized one that rejects for X > c₀.
pub fn fixed_power(spec: &TestSpec, theta: f64) -> Result<f64> {
    spec.validate()?;
    let (part, sign) = directed(spec);
    let a = part.alpha;
    Ok(match spec.family {
        Family::OneZ => {
            let z = std_normal_quantile(1.0 - a)?;
            let shift = sign * (theta - spec.null) * f64::from(spec.n_max).sqrt() / spec.sigma()?;
            std_normal_sf(z - shift)
        }
        Family::TwoZ => {
            let z = std_normal_quantile(1.0 - a)?;
            std_normal_sf(z - sign * theta / (spec.sigma()? * two_sample_scale(spec)))
        }
        Family::OneT => {
            let n = f64::from(spec.n_max);
            let crit = upper_quantile(spec, a, n - 1.0)?;
            nct_sf(crit, n - 1.0, sign * (theta - spec.null) * n.sqrt())?
        }
        Family::TwoT => {
            let df = f64::from(spec.n1_max() + spec.n2_max()) - 2.0;
            let crit = upper_quantile(spec, a, df)?;
            nct_sf(crit, df, sign * theta / two_sample_scale(spec))?
        }
        Family::OneProp => prop_power(u64::from(spec.n_max), spec.null, a, part.side, theta),
    })
}

/// Bisection for the root of an increasing function on [lo, hi].
fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The fixed-design alternative θₐ: the parameter value at which the size-α
/// fixed-sample test has power 1−β. For t families the value is a
/// standardized mean; for proportions the non-randomized test is used.
pub fn fixed_design_alt(spec: &TestSpec) -> Result<f64> {
    spec.validate()?;
    let (part, sign) = directed(spec);
    let target = 1.0 - spec.beta;
    match spec.family {
        Family::OneZ => {
            let z = std_normal_quantile(1.0 - part.alpha)? + std_normal_quantile(1.0 - spec.beta)?;
            Ok(spec.null + sign * z * spec.sigma()? / f64::from(spec.n_max).sqrt())
        }
        Family::TwoZ => {
            let z = std_normal_quantile(1.0 - part.alpha)? + std_normal_quantile(1.0 - spec.beta)?;
            Ok(sign * z * spec.sigma()? * two_sample_scale(spec))
        }
        Family::OneT | Family::TwoT => {
            let power = |effect: f64| fixed_power(spec, spec.null + sign * effect).map(|p| p - target);
            let mut hi = 1.0;
            while power(hi)? < 0.0 {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(Error::Infeasible("power never reaches 1 - beta".into()));
                }
            }
            Ok(spec.null + sign * bisect(power, 0.0, hi, 1e-12)?)
        }
        Family::OneProp => {
            let n = u64::from(spec.n_max);
            let (p0, flip) = match part.side {
                Side::Left => (1.0 - spec.null, true),
                _ => (spec.null, false),
            };
            let rc = randomized_cutoff(n, p0, part.alpha);
            if rc.c0 >= n {
                return Err(Error::Infeasible(format!(
                    "alpha={} is too small for N={n}: the fixed test never rejects",
                    part.alpha
                )));
            }
            let power = |p: f64| Ok(binom_tail(rc.c0 as i64, n, p) - target);
            let p = bisect(power, p0, 1.0, 1e-13)?;
            Ok(if flip { 1.0 - p } else { p })
        }
    }
}

/// N*: the smallest maximum sample size (per group for two-sample tests) at
/// which the fixed test of size `target_alpha` has power 1−β at the fixed
/// design alternative of `spec` (typically a size-0.05 design).
pub fn find_n_star(spec: &TestSpec, target_alpha: f64) -> Result<u32> {
    let theta = fixed_design_alt(spec)?;
    let target = 1.0 - spec.beta;
    let at = |n: u32| -> Result<f64> {
        let s = TestSpec {
            alpha: target_alpha,
            ..spec.with_n_max(n)
        };
        fixed_power(&s, theta)
    };
    let first = spec.family.first_evaluable_n();
    const LIMIT: u32 = 1_000_000;
    if spec.family == Family::OneProp {
        // Discreteness makes the power saw-toothed in N, so scan.
        for n in first..=100_000 {
            let s = TestSpec {
                alpha: target_alpha,
                ..spec.with_n_max(n)
            };
            if randomized_cutoff(u64::from(n), s.null, target_alpha).c0 < u64::from(n) && at(n)? >= target {
                return Ok(n);
            }
        }
        return Err(Error::Infeasible(
            "no sample size up to 100000 reaches the target power".into(),
        ));
    }
    let mut hi = first.max(1);
    while at(hi)? < target {
        hi = hi.saturating_mul(2);
        if hi > LIMIT {
            return Err(Error::Infeasible("required sample size exceeds 1000000".into()));
        }
    }
    let mut lo = first;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if at(mid)? >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Point UMPBT alternatives of the proportion test for n = 1..=n_max
/// (right side, or mirrored for the left side).
pub fn prop_point_alternatives(n_max: u32, p0: f64, alpha: f64, side: Side) -> Result<Vec<f64>> {
    let p0 = if side == Side::Left { 1.0 - p0 } else { p0 };
    (1..=n_max).map(|n| prop_point_at(u64::from(n), p0, alpha)).collect()
}

/// Sample sizes at which the point alternative sets a strict record low.
pub fn effective_n_candidates(n_max: u32, p0: f64, alpha: f64, side: Side) -> Result<Vec<u32>> {
    if n_max == 0 {
        return Err(Error::spec("n_max must be at least 1"));
    }
    if !(p0 > 0.0 && p0 < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::spec("p0 and alpha must lie in (0, 1)"));
    }
    let side = if side == Side::TwoSided { Side::Right } else { side };
    let points = prop_point_alternatives(n_max, p0, alpha, side)?;
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        if p < best - 1e-6 {
            best = p;
            out.push(i as u32 + 1);
        }
    }
    Ok(out)
}

/// The effective maximum sample size of a proportion test: the largest
/// n ≤ n_max at which the point alternative sets a record low.
pub fn effective_n(n_max: u32, p0: f64, alpha: f64, side: Side) -> Result<u32> {
    Ok(*effective_n_candidates(n_max, p0, alpha, side)?
        .last()
        .expect("n = 1 is always a candidate"))
}
