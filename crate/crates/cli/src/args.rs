use std::path::PathBuf;

use biosec::attack::DependenceModel;
use biosec::birthday::FalsePairRounding;
use biosec::stats::Sided;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::grid::{Preset, Quantity, Scale};
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "biosec", version, about = "Security limits of biometric systems from their false match rate")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "BIOSEC_PRECISION_BITS", default_value_t = biosec::numerics::DEFAULT_PRECISION)]
    pub precision_bits: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Confidence interval for an estimated FMR.
    Ci(CiArgs),
    /// Estimate the FMR from a file of impostor scores, one per line.
    EstimateFmr(EstimateArgs),
    /// Student-t quantile.
    TQuantile(TQuantileArgs),
    /// Untargeted attack bounds and critical values.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Collision probabilities among enrolled users.
    #[command(subcommand)]
    Birthday(BirthdayCommand),
    /// Evaluate a quantity over a 2-D parameter grid and write CSV.
    Grid(GridArgs),
    /// Monte-Carlo cross-checks.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SidedArg {
    One,
    Two,
}

impl From<SidedArg> for Sided {
    fn from(s: SidedArg) -> Self {
        match s {
            SidedArg::One => Sided::OneSided,
            SidedArg::Two => Sided::TwoSided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Independent,
    Dependent,
}

impl From<ModelArg> for DependenceModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Independent => DependenceModel::Independent,
            ModelArg::Dependent => DependenceModel::Dependent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoundingArg {
    Continuous,
    Nearest,
}

impl From<RoundingArg> for FalsePairRounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::Continuous => FalsePairRounding::Continuous,
            RoundingArg::Nearest => FalsePairRounding::Nearest,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Significance {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SidedArg::Two)]
    pub sided: SidedArg,
}

/// FMR given either as a point value or as an estimate with its number of
/// comparisons, which turns it into a confidence interval.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false, id = "fmr_source")]
pub struct FmrSource {
    /// Point value of the FMR.
    #[arg(long)]
    pub fmr: Option<String>,
    /// Estimated FMR; requires --n.
    #[arg(long, requires = "n")]
    pub fmr_hat: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct FmrArgs {
    #[command(flatten)]
    pub source: FmrSource,
    /// Comparisons behind --fmr-hat.
    #[arg(long)]
    pub n: Option<u64>,
    #[command(flatten)]
    pub sig: Significance,
}

#[derive(Args, Debug)]
pub struct CiArgs {
    #[arg(long)]
    pub fmr_hat: String,
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub sig: Significance,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub threshold: f64,
    #[command(flatten)]
    pub sig: Significance,
}

#[derive(Args, Debug)]
pub struct TQuantileArgs {
    #[arg(long)]
    pub df: u64,
    /// Cumulative probability, in [0.5, 1).
    #[arg(long)]
    pub prob: String,
}

#[derive(Subcommand, Debug)]
pub enum AttackCommand {
    /// Bounds on the median rounds of an untargeted attack.
    Bounds {
        #[command(flatten)]
        fmr: FmrArgs,
        #[arg(long)]
        n_users: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Independent)]
        model: ModelArg,
        /// Also report attempts for authentication mode (N times more).
        #[arg(long)]
        authentication: bool,
    },
    /// Largest population meeting a security level.
    CriticalPopulation {
        #[command(flatten)]
        fmr: FmrArgs,
        #[arg(long)]
        security_bits: String,
    },
    /// Largest FMR meeting a security level for a population.
    CriticalFmr {
        #[arg(long)]
        n_users: u64,
        #[arg(long)]
        security_bits: String,
    },
    /// Comparisons needed to certify the critical FMR.
    ParadoxN {
        #[arg(long)]
        n_users: u64,
        #[arg(long)]
        security_bits: String,
        #[command(flatten)]
        sig: Significance,
    },
    /// Median first-success round for a per-round success probability.
    Median {
        #[arg(long)]
        fmr: String,
        #[arg(long, default_value_t = 1)]
        n_users: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum BirthdayCommand {
    /// Collision probability treating pairs as independent.
    Approx {
        #[command(flatten)]
        fmr: FmrArgs,
        #[arg(long)]
        n_users: u64,
    },
    /// Largest population keeping the collision probability at or below p.
    CriticalPopulation {
        #[command(flatten)]
        fmr: FmrArgs,
        #[arg(long)]
        p_max: String,
    },
    /// Largest FMR keeping the collision probability at or below p.
    CriticalFmr {
        #[arg(long)]
        n_users: u64,
        #[arg(long)]
        p_max: String,
    },
    /// Collision probability drawing pairs from a finite reference set.
    Exact {
        #[arg(long)]
        fmr: String,
        #[arg(long)]
        k_users: u64,
        #[arg(long)]
        n_users: u64,
        #[arg(long, value_enum, default_value_t = RoundingArg::Continuous)]
        rounding: RoundingArg,
        /// Add bounds from the confidence interval with n = K(K-1)/2.
        #[arg(long)]
        ci: bool,
        #[command(flatten)]
        sig: Significance,
    },
    /// Exact minus approximate probability over reference sizes.
    Gap {
        #[arg(long)]
        fmr: String,
        #[arg(long)]
        n_users: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        k_users: Vec<u64>,
    },
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output file. fig3 writes one file per comparison count, named
    /// `<stem>_n1e<k>.<ext>`, unless --comparisons is given.
    #[arg(long)]
    pub out: PathBuf,
    /// Steps per axis.
    #[arg(long)]
    pub steps: Option<usize>,
    /// fig3 only: a single comparison count.
    #[arg(long)]
    pub comparisons: Option<u64>,

    #[arg(long, value_enum, conflicts_with = "preset", requires_all = ["x_param", "y_param"])]
    pub value: Option<Quantity>,
    #[arg(long)]
    pub x_param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    pub x_scale: Scale,
    #[arg(long)]
    pub y_param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    pub y_scale: Scale,
    /// Remaining parameters as name=value, repeatable.
    #[arg(long = "fixed")]
    pub fixed: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum SimulateCommand {
    /// Monte-Carlo untargeted attack, checked against the analytic bounds.
    Attack {
        #[arg(long)]
        fmr: String,
        #[arg(long)]
        n_users: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}
