use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqprt::{Family, McOptions, Side, TestSpec};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "seqprt",
    version,
    about = "Design, evaluate and run modified sequential probability ratio tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the UMPBT alternative and calibrate the termination threshold γ
    Design(DesignArgs),
    /// Power, Type II error and average sample number at given parameter values
    Oc(OcArgs),
    /// Apply the stopping rule to observations from a file or standard input
    Run(RunArgs),
    /// The UMPBT alternative and its evidence threshold
    Umpbt(UmpbtArgs),
    /// Effective maximum sample size of a proportion test
    EffectiveN(HelperArgs),
    /// Fixed design alternative θa at which the fixed test has power 1−β
    FindAlt(HelperArgs),
    /// N*: maximum sample size at --target-alpha matching the power of a fixed design
    FindN(FindNArgs),
    /// Expected MSPRT sample size as a multiple of a fixed design's
    Cost(CostArgs),
    /// Serve the trial monitoring HTTP API
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestFamily {
    OneZ,
    OneT,
    OneProp,
    TwoZ,
    TwoT,
}

impl From<TestFamily> for Family {
    fn from(f: TestFamily) -> Family {
        match f {
            TestFamily::OneZ => Family::OneZ,
            TestFamily::OneT => Family::OneT,
            TestFamily::OneProp => Family::OneProp,
            TestFamily::TwoZ => Family::TwoZ,
            TestFamily::TwoT => Family::TwoT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestSide {
    Right,
    Left,
    Two,
}

impl From<TestSide> for Side {
    fn from(s: TestSide) -> Side {
        match s {
            TestSide::Right => Side::Right,
            TestSide::Left => Side::Left,
            TestSide::Two => Side::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// The test specification shared by every analysis command.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, value_enum)]
    pub test: TestFamily,
    #[arg(long, value_enum, default_value_t = TestSide::Right)]
    pub side: TestSide,
    /// Null value θ₀ (required for one-prop; defaults to 0 otherwise)
    #[arg(long, allow_negative_numbers = true)]
    pub null: Option<f64>,
    /// Known standard deviation for z tests
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Size α (default 0.005; 0.05 for find-n and cost, where it is the fixed design's size)
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = TestSpec::DEFAULT_BETA)]
    pub beta: f64,
    /// Maximum sample size N
    #[arg(long, conflicts_with = "n1_max")]
    pub n_max: Option<u32>,
    /// Maximum size of group 1 (two-sample tests)
    #[arg(long)]
    pub n1_max: Option<u32>,
    /// Maximum size of group 2 (two-sample tests; defaults to group 1's)
    #[arg(long)]
    pub n2_max: Option<u32>,
}

impl SpecArgs {
    pub fn to_spec(&self, default_alpha: f64) -> Result<TestSpec, CliError> {
        let family = Family::from(self.test);
        let n_max = self
            .n_max
            .or(self.n1_max)
            .ok_or_else(|| CliError::usage("--n-max (or --n1-max) is required"))?;
        let null = match (self.null, family) {
            (Some(v), _) => v,
            (None, Family::OneProp) => return Err(CliError::usage("--null is required for one-prop")),
            (None, _) => 0.0,
        };
        if self.n2_max.is_some() && !family.is_two_sample() {
            return Err(CliError::usage("--n2-max applies to two-sample tests only"));
        }
        let spec = TestSpec {
            family,
            side: self.side.into(),
            null,
            alpha: self.alpha.unwrap_or(default_alpha),
            beta: self.beta,
            n_max,
            n2_max: self.n2_max,
            sigma0: self.sigma0,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo replications
    #[arg(long, default_value_t = 1_000_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exact lattice computation instead of Monte Carlo (one-prop only)
    #[arg(long)]
    pub exact: bool,
}

impl McArgs {
    pub fn options(&self) -> Result<McOptions, CliError> {
        let opts = McOptions::new(self.reps, self.seed);
        match self.threads {
            Some(0) => Err(CliError::usage("--threads must be positive")),
            Some(t) => Ok(opts.threads(t)),
            None => Ok(opts),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result to FILE instead of standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OcArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Termination threshold; calibrated first when absent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Parameter values (standardized mean for t tests), comma separated
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Termination threshold; calibrated first when absent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Observation file: one value per line, two comma-separated for two-sample tests
    #[arg(
        long,
        value_name = "FILE",
        required_unless_present = "interactive",
        conflicts_with = "interactive"
    )]
    pub obs: Option<PathBuf>,
    /// Read observations one line at a time from standard input
    #[arg(long)]
    pub interactive: bool,
    /// Write the trajectory as CSV, or as SVG when FILE ends in .svg
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct UmpbtArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Sample standard deviation at which to evaluate a t alternative
    #[arg(long)]
    pub sd: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HelperArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FindNArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = TestSpec::DEFAULT_ALPHA)]
    pub target_alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = TestSpec::DEFAULT_ALPHA)]
    pub target_alpha: f64,
    /// Long-run fractions of true nulls, comma separated
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [0.8, 0.9, 1.0])]
    pub pi0: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Session directory (default: $SEQPRT_DATA_DIR or ./seqprt-data)
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Listen address (default: $SEQPRT_BIND_ADDR or 127.0.0.1:8080)
    #[arg(long)]
    pub bind: Option<SocketAddr>,
}
