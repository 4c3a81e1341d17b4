//! Test specifications: which test, which direction, and the design
//! parameters (null value, error probabilities, maximum sample size).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// One-sample z test, known σ.
    OneZ,
    /// One-sample t test, unknown σ.
    OneT,
    /// One-sample test of a binomial proportion.
    OneProp,
    /// Two-sample z test for a difference in means, known common σ.
    TwoZ,
    /// Two-sample t test for a difference in means, unknown common σ.
    TwoT,
}

impl Family {
    pub fn is_two_sample(self) -> bool {
        matches!(self, Family::TwoZ | Family::TwoT)
    }

    pub fn is_t(self) -> bool {
        matches!(self, Family::OneT | Family::TwoT)
    }

    pub fn needs_sigma(self) -> bool {
        matches!(self, Family::OneZ | Family::TwoZ)
    }

    /// Binary data: the likelihood ratio lives on a lattice.
    pub fn is_discrete(self) -> bool {
        self == Family::OneProp
    }

    /// The first sample size at which the likelihood ratio is defined.
    pub fn first_evaluable_n(self) -> u32 {
        if self.is_t() {
            2
        } else {
            1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::OneZ => "one-z",
            Family::OneT => "one-t",
            Family::OneProp => "one-prop",
            Family::TwoZ => "two-z",
            Family::TwoT => "two-t",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "one-z" | "onez" => Ok(Family::OneZ),
            "one-t" | "onet" => Ok(Family::OneT),
            "one-prop" | "oneprop" => Ok(Family::OneProp),
            "two-z" | "twoz" => Ok(Family::TwoZ),
            "two-t" | "twot" => Ok(Family::TwoT),
            other => Err(Error::spec(format!("unknown test family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
    TwoSided,
}

impl Side {
    /// +1 for right, −1 for left.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
            Side::TwoSided => panic!("two-sided tests have no single direction"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
            Side::TwoSided => "two",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "right" | "greater" => Ok(Side::Right),
            "left" | "less" => Ok(Side::Left),
            "two" | "two-sided" | "two_sided" | "both" => Ok(Side::TwoSided),
            other => Err(Error::spec(format!("unknown side '{other}'"))),
        }
    }
}

/// Everything that defines an MSPRT before any data arrive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub family: Family,
    pub side: Side,
    /// θ₀. For two-sample families this is the null mean difference and must be 0.
    pub null: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Maximum sample size (group 1 for two-sample families).
    pub n_max: u32,
    /// Maximum size of group 2; equal to `n_max` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
}

impl TestSpec {
    pub const DEFAULT_ALPHA: f64 = 0.005;
    pub const DEFAULT_BETA: f64 = 0.2;

    fn base(family: Family, null: f64, n_max: u32, sigma0: Option<f64>) -> Self {
        TestSpec {
            family,
            side: Side::Right,
            null,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            n_max,
            n2_max: None,
            sigma0,
        }
    }

    pub fn one_z(null: f64, sigma0: f64, n_max: u32) -> Self {
        Self::base(Family::OneZ, null, n_max, Some(sigma0))
    }

    pub fn one_t(null: f64, n_max: u32) -> Self {
        Self::base(Family::OneT, null, n_max, None)
    }

    pub fn one_prop(null: f64, n_max: u32) -> Self {
        Self::base(Family::OneProp, null, n_max, None)
    }

    pub fn two_z(sigma0: f64, n1_max: u32, n2_max: u32) -> Self {
        TestSpec {
            n2_max: Some(n2_max),
            ..Self::base(Family::TwoZ, 0.0, n1_max, Some(sigma0))
        }
    }

    pub fn two_t(n1_max: u32, n2_max: u32) -> Self {
        TestSpec {
            n2_max: Some(n2_max),
            ..Self::base(Family::TwoT, 0.0, n1_max, None)
        }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_n_max(mut self, n_max: u32) -> Self {
        self.n_max = n_max;
        if self.family.is_two_sample() {
            self.n2_max = Some(n_max);
        }
        self
    }

    pub fn n1_max(&self) -> u32 {
        self.n_max
    }

    pub fn n2_max(&self) -> u32 {
        self.n2_max.unwrap_or(self.n_max)
    }

    /// Known σ for the z families.
    pub fn sigma(&self) -> Result<f64> {
        self.sigma0
            .ok_or_else(|| Error::spec(format!("{} test requires sigma0", self.family)))
    }

    /// Check every invariant of the specification.
    pub fn validate(&self) -> Result<()> {
        let TestSpec { alpha, beta, .. } = *self;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::spec(format!("alpha must satisfy 0 < alpha < 1, got {alpha}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::spec(format!("beta must satisfy 0 < beta < 1, got {beta}")));
        }
        if alpha + beta >= 1.0 {
            return Err(Error::spec(format!(
                "alpha + beta must be < 1 so that A > 1 > B, got {}",
                alpha + beta
            )));
        }
        if !self.null.is_finite() {
            return Err(Error::spec("null value must be finite"));
        }
        if self.n_max == 0 || self.n2_max() == 0 {
            return Err(Error::spec("maximum sample size must be at least 1"));
        }
        if self.family.is_t() && (self.n_max < 2 || self.n2_max() < 2) {
            return Err(Error::spec("t tests need n_max >= 2 to estimate the variance"));
        }
        if self.family == Family::OneProp && !(self.null > 0.0 && self.null < 1.0) {
            return Err(Error::spec(format!(
                "proportion null must satisfy 0 < p0 < 1, got {}",
                self.null
            )));
        }
        if self.family.is_two_sample() && self.null != 0.0 {
            return Err(Error::spec("two-sample tests fix the null mean difference at 0"));
        }
        if !self.family.is_two_sample() && self.n2_max.is_some() {
            return Err(Error::spec("n2_max only applies to two-sample tests"));
        }
        match (self.family.needs_sigma(), self.sigma0) {
            (true, None) => return Err(Error::spec(format!("{} test requires sigma0", self.family))),
            (true, Some(s)) if !(s > 0.0 && s.is_finite()) => {
                return Err(Error::spec(format!("sigma0 must be positive, got {s}")))
            }
            (false, Some(_)) => return Err(Error::spec(format!("{} test does not take sigma0", self.family))),
            _ => {}
        }
        Ok(())
    }

    /// The one-sided tests that make up this test: itself, or a right and a
    /// left test at α/2 for a two-sided test.
    pub fn one_sided_parts(&self) -> Vec<TestSpec> {
        match self.side {
            Side::TwoSided => {
                let half = TestSpec {
                    alpha: self.alpha / 2.0,
                    ..*self
                };
                vec![half.with_side(Side::Right), half.with_side(Side::Left)]
            }
            _ => vec![*self],
        }
    }

    /// Validation plus the paired-accrual constraint of the sequential engine.
    pub(crate) fn validate_sequential(&self) -> Result<()> {
        self.validate()?;
        if self.family.is_two_sample() && self.n_max != self.n2_max() {
            return Err(Error::spec(
                "sequential two-sample tests accrue in pairs and need n1_max == n2_max",
            ));
        }
        Ok(())
    }
}
