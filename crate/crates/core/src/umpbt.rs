//! UMPBT alternatives and their evidence thresholds.
//!
//! Each one-sided test gets the alternative that maximizes the probability
//! that the likelihood ratio exceeds the threshold δ matched to the size-α
//! fixed-sample rejection region.

use serde::{Deserialize, Serialize};

use crate::dist::special::logit;
use crate::dist::{binom_pmf, binom_tail, std_normal_quantile, t_quantile};
use crate::error::{Error, Result};
use crate::spec::{Family, Side, TestSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alternative {
    /// A single parameter value.
    Point { theta1: f64, delta: f64 },
    /// The t-test alternative `null + shift_per_sd · s`, re-evaluated at the
    /// current sample standard deviation (pooled for two samples).
    DataDependentT {
        null: f64,
        /// The t quantile the shift is built from (effective for two samples).
        quantile: f64,
        /// Signed shift per unit of standard deviation.
        shift_per_sd: f64,
        delta: f64,
    },
    /// Two-point mixture for proportions. `near` comes from the smaller
    /// cutoff c₀−1 and carries weight `psi`; `far` comes from c₀.
    Mixture {
        near: f64,
        far: f64,
        psi: f64,
        delta_near: f64,
        delta_far: f64,
    },
}

impl Alternative {
    /// The alternative value at sample standard deviation `sd`. Point
    /// alternatives ignore `sd`; mixtures have no single value.
    pub fn theta_at(&self, sd: f64) -> Option<f64> {
        match *self {
            Alternative::Point { theta1, .. } => Some(theta1),
            Alternative::DataDependentT { null, shift_per_sd, .. } => Some(null + shift_per_sd * sd),
            Alternative::Mixture { .. } => None,
        }
    }

    /// The point value, if the alternative is a point.
    pub fn point(&self) -> Option<f64> {
        match *self {
            Alternative::Point { theta1, .. } => Some(theta1),
            _ => None,
        }
    }

    /// Mixture support ordered by value, paired with weights.
    pub fn mixture_components(&self) -> Option<[(f64, f64); 2]> {
        match *self {
            Alternative::Mixture { near, far, psi, .. } => {
                let mut pts = [(near, psi), (far, 1.0 - psi)];
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                Some(pts)
            }
            _ => None,
        }
    }

    /// Evidence threshold δ; for a mixture, the pair (δ near, δ far).
    pub fn delta(&self) -> (f64, Option<f64>) {
        match *self {
            Alternative::Point { delta, .. } | Alternative::DataDependentT { delta, .. } => (delta, None),
            Alternative::Mixture {
                delta_near, delta_far, ..
            } => (delta_near, Some(delta_far)),
        }
    }
}

fn check(spec: &TestSpec, family: Family) -> Result<()> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::spec(format!(
            "expected a {family} specification, got {}",
            spec.family
        )));
    }
    if spec.side == Side::TwoSided {
        return Err(Error::spec(
            "UMPBT alternatives are one-sided; split two-sided tests with one_sided_parts()",
        ));
    }
    Ok(())
}

/// z_α, the upper-α normal quantile.
fn z_upper(alpha: f64) -> Result<f64> {
    std_normal_quantile(1.0 - alpha)
}

/// One-sample z test: θ₀ ± z_α σ/√N with δ = exp(z_α²/2).
pub fn umpbt_one_z(spec: &TestSpec) -> Result<Alternative> {
    check(spec, Family::OneZ)?;
    let z = z_upper(spec.alpha)?;
    let sigma = spec.sigma()?;
    Ok(Alternative::Point {
        theta1: spec.null + spec.side.sign() * z * sigma / f64::from(spec.n_max).sqrt(),
        delta: (0.5 * z * z).exp(),
    })
}

/// One-sample t test: θ₀ ± t_{α;N−1} s_n/√N with δ = [t²/(N−1) + 1]^{N/2}.
pub fn umpbt_one_t(spec: &TestSpec) -> Result<Alternative> {
    check(spec, Family::OneT)?;
    let n = f64::from(spec.n_max);
    let t = t_quantile(1.0 - spec.alpha, n - 1.0)?;
    Ok(Alternative::DataDependentT {
        null: spec.null,
        quantile: t,
        shift_per_sd: spec.side.sign() * t / n.sqrt(),
        delta: (0.5 * n * (t * t / (n - 1.0)).ln_1p()).exp(),
    })
}

/// Two-sample z test: difference z_α σ √(1/N₁ + 1/N₂) with δ = exp(z_α²/2).
pub fn umpbt_two_z(spec: &TestSpec) -> Result<Alternative> {
    check(spec, Family::TwoZ)?;
    let z = z_upper(spec.alpha)?;
    let scale = (1.0 / f64::from(spec.n1_max()) + 1.0 / f64::from(spec.n2_max())).sqrt();
    Ok(Alternative::Point {
        theta1: spec.side.sign() * z * spec.sigma()? * scale,
        delta: (0.5 * z * z).exp(),
    })
}

/// Two-sample t test with ν = N₁+N₂−2 degrees of freedom.
///
/// The difference alternative is `t_eff · s_p · √(1/N₁ + 1/N₂)` where
/// `1 + t_eff²/ν = (1 + t_{α;ν}²/ν)^{M/(M−1)}`, `M = N₁+N₂`, and
/// δ = (1 + t_{α;ν}²/ν)^{M/2}.
pub fn umpbt_two_t(spec: &TestSpec) -> Result<Alternative> {
    check(spec, Family::TwoT)?;
    let (n1, n2) = (f64::from(spec.n1_max()), f64::from(spec.n2_max()));
    let m = n1 + n2;
    let nu = m - 2.0;
    let t = t_quantile(1.0 - spec.alpha, nu)?;
    let log_base = (t * t / nu).ln_1p();
    let t_eff = (nu * (log_base * m / (m - 1.0)).exp_m1()).sqrt();
    Ok(Alternative::DataDependentT {
        null: 0.0,
        quantile: t_eff,
        shift_per_sd: spec.side.sign() * t_eff * (1.0 / n1 + 1.0 / n2).sqrt(),
        delta: (0.5 * m * log_base).exp(),
    })
}

/// Cutoff and randomization weight of the size-α fixed-sample binomial test
/// that rejects for X > c₀, and for X = c₀ with probability ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedCutoff {
    pub c0: u64,
    pub psi: f64,
}

/// c₀ = min{c : P(X > c) ≤ α} and ψ = [α − P(X > c₀)] / P(X = c₀) for
/// X ~ Binomial(n, p0).
pub fn randomized_cutoff(n: u64, p0: f64, alpha: f64) -> RandomizedCutoff {
    let mut c0 = 0;
    while c0 < n && binom_tail(c0 as i64, n, p0) > alpha {
        c0 += 1;
    }
    let pmf = binom_pmf(c0 as i64, n, p0);
    let psi = ((alpha - binom_tail(c0 as i64, n, p0)) / pmf).clamp(0.0, 1.0);
    RandomizedCutoff { c0, psi }
}

const EDGE: f64 = 1e-9;

/// h_N(p, δ) in log-δ form: the number of successes at which the likelihood
/// ratio for alternative p against p0 equals δ.
pub fn h_n(p: f64, ln_delta: f64, n: f64, p0: f64) -> f64 {
    let log_ratio_fail = (-p).ln_1p() - (-p0).ln_1p();
    (ln_delta - n * log_ratio_fail) / (logit(p) - logit(p0))
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// argmin over p ∈ (p0, 1) of h_N(p, δ). The minimizer is located on a
/// logit-spaced grid, checked for a single dip, then refined by golden-section
/// search.
pub fn argmin_h(ln_delta: f64, n: f64, p0: f64) -> Result<f64> {
    const GRID: usize = 96;
    let lo = logit(p0 + EDGE.max(p0 * 1e-9));
    let hi = logit(1.0 - EDGE);
    let f = |u: f64| h_n(sigmoid(u), ln_delta, n, p0);
    let step = (hi - lo) / (GRID - 1) as f64;
    let us: Vec<f64> = (0..GRID).map(|i| lo + step * i as f64).collect();
    let hs: Vec<f64> = us.iter().map(|&u| f(u)).collect();

    let mut turns = 0;
    let mut falling = true;
    for w in hs.windows(2) {
        let tol = 1e-12 * w[0].abs().max(1.0);
        if falling && w[1] > w[0] + tol {
            falling = false;
            turns += 1;
        } else if !falling && w[1] < w[0] - tol {
            turns += 1;
        }
    }
    if turns > 1 {
        return Err(Error::domain(format!(
            "h_N is not unimodal for p0={p0}, N={n}, ln δ={ln_delta}"
        )));
    }

    let best = hs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (mut a, mut b) = (us[best.saturating_sub(1)], us[(best + 1).min(GRID - 1)]);

    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    Ok(sigmoid(0.5 * (a + b)))
}

/// Solve h_N(p(δ), δ) = target for δ by bisection on ln δ. Returns
/// (p(δ), ln δ).
pub fn solve_cutoff(target: f64, n: f64, p0: f64) -> Result<(f64, f64)> {
    let g = |ln_delta: f64| -> Result<f64> {
        let p = argmin_h(ln_delta, n, p0)?;
        Ok(h_n(p, ln_delta, n, p0))
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Infeasible(format!(
                "no evidence threshold reaches cutoff {target} at N={n}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let ln_delta = 0.5 * (lo + hi);
    Ok((argmin_h(ln_delta, n, p0)?, ln_delta))
}

/// Right-sided point alternative whose rejection region is {X > cutoff − …},
/// i.e. solves h_N(p(δ), δ) = cutoff. Cutoffs at or below N·p0 collapse onto
/// p0 (δ = 1); a cutoff of N gives p = 1.
fn point_for_cutoff(cutoff: i64, n: u64, p0: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    if (cutoff as f64) <= nf * p0 {
        return Ok((p0, 1.0));
    }
    if cutoff as u64 >= n {
        return Ok((1.0, f64::INFINITY));
    }
    let (p, ln_delta) = solve_cutoff(cutoff as f64, nf, p0)?;
    Ok((p, ln_delta.exp()))
}

fn mirror(p: f64) -> f64 {
    1.0 - p
}

fn prop_parts(spec: &TestSpec) -> Result<(u64, f64, RandomizedCutoff)> {
    check(spec, Family::OneProp)?;
    let n = u64::from(spec.n_max);
    let p0 = match spec.side {
        Side::Left => mirror(spec.null),
        _ => spec.null,
    };
    let rc = randomized_cutoff(n, p0, spec.alpha);
    if rc.c0 >= n {
        return Err(Error::Infeasible(format!(
            "alpha={} is too small for N={n}: the fixed test at p0={} has no rejection region",
            spec.alpha, spec.null
        )));
    }
    Ok((n, p0, rc))
}

/// Proportion test: two-point mixture over the alternatives matched to the
/// cutoffs c₀−1 and c₀ of the randomized fixed-sample test, weighted ψ and
/// 1−ψ. Left-sided tests are mirrored through p ↦ 1−p.
pub fn umpbt_one_prop(spec: &TestSpec) -> Result<Alternative> {
    let (n, p0, rc) = prop_parts(spec)?;
    let (near, delta_near) = point_for_cutoff(rc.c0 as i64 - 1, n, p0)?;
    let (far, delta_far) = point_for_cutoff(rc.c0 as i64, n, p0)?;
    let (near, far) = match spec.side {
        Side::Left => (mirror(near), mirror(far)),
        _ => (near, far),
    };
    Ok(Alternative::Mixture {
        near,
        far,
        psi: rc.psi,
        delta_near,
        delta_far,
    })
}

/// The non-randomized point alternative for a proportion test, matched to
/// cutoff c₀. Equals the `far` component of [`umpbt_one_prop`].
pub fn point_umpbt_one_prop(spec: &TestSpec) -> Result<Alternative> {
    let (n, p0, rc) = prop_parts(spec)?;
    let (p, delta) = point_for_cutoff(rc.c0 as i64, n, p0)?;
    let theta1 = match spec.side {
        Side::Left => mirror(p),
        _ => p,
    };
    Ok(Alternative::Point { theta1, delta })
}

/// Point alternative for the proportion test at an arbitrary maximum sample
/// size, allowing c₀ = N (alternative 1). Used to scan sample sizes.
pub(crate) fn prop_point_at(n: u64, p0: f64, alpha: f64) -> Result<f64> {
    let rc = randomized_cutoff(n, p0, alpha);
    Ok(point_for_cutoff(rc.c0 as i64, n, p0)?.0)
}

/// The UMPBT alternative for any one-sided specification.
pub fn umpbt(spec: &TestSpec) -> Result<Alternative> {
    match spec.family {
        Family::OneZ => umpbt_one_z(spec),
        Family::OneT => umpbt_one_t(spec),
        Family::OneProp => umpbt_one_prop(spec),
        Family::TwoZ => umpbt_two_z(spec),
        Family::TwoT => umpbt_two_t(spec),
    }
}
