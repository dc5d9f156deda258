//! Empirical FMR estimation and Student-t confidence intervals.
//!
//! Score convention: the step function is applied literally, so a comparison
//! counts as a false match when `threshold - score >= 0`, i.e. the score is at
//! or below the threshold (distance-like scores). Callers with similarity
//! scores should negate both scores and threshold.

mod student_t;
pub mod table;

use std::fmt;
use std::str::FromStr;

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{check_probability, sci, BigReal, Context};

pub use student_t::{
    normal_quantile, normal_upper_tail, regularized_incomplete_beta, t_cdf, t_quantile,
    t_upper_tail, NORMAL_FALLBACK_DF,
};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Impostor scores and the decision threshold they are compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
    threshold: f64,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>, threshold: f64) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::domain(
                "estimate_fmr",
                format!("scores must be finite, got {bad}"),
            ));
        }
        if !threshold.is_finite() {
            return Err(Error::domain("estimate_fmr", "threshold must be finite"));
        }
        Ok(ScoreVector { scores, threshold })
    }

    /// Reads one score per line. Blank lines and `#` comments are skipped.
    pub fn parse_column(text: &str, threshold: f64) -> Result<Self> {
        let scores = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<f64>().map_err(|_| Error::Parse(l.to_string())))
            .collect::<Result<Vec<_>>>()?;
        ScoreVector::new(scores, threshold)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of scores with `threshold - score >= 0`.
    pub fn false_matches(&self) -> u64 {
        self.scores
            .iter()
            .filter(|&&v| self.threshold - v >= 0.0)
            .count() as u64
    }
}

/// Empirical FMR together with the comparison count and significance level
/// it was estimated with.
#[derive(Clone, Debug, PartialEq)]
pub struct FmrEstimate {
    fmr_hat: BigReal,
    n: u64,
    alpha: f64,
}

impl FmrEstimate {
    pub fn new(fmr_hat: BigReal, n: u64, alpha: f64) -> Result<Self> {
        check_probability("fmr_estimate", "fmr_hat", &fmr_hat)?;
        if n == 0 {
            return Err(Error::domain("fmr_estimate", "requires n >= 1 comparisons"));
        }
        check_alpha(alpha)?;
        Ok(FmrEstimate { fmr_hat, n, alpha })
    }

    pub fn from_counts(ctx: &Context, false_matches: u64, total: u64, alpha: f64) -> Result<Self> {
        if total == 0 {
            return Err(Error::domain("fmr_estimate", "requires total comparisons >= 1"));
        }
        if false_matches > total {
            return Err(Error::domain(
                "fmr_estimate",
                format!("false matches ({false_matches}) exceed total comparisons ({total})"),
            ));
        }
        let f = Float::with_val(ctx.precision(), ctx.int(false_matches) / ctx.int(total));
        FmrEstimate::new(f, total, alpha)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(FmrEstimate { alpha, ..self })
    }

    pub fn fmr_hat(&self) -> &BigReal {
        &self.fmr_hat
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(
            "fmr_estimate",
            format!("requires significance level 0 < alpha < 1, got {alpha}"),
        ));
    }
    Ok(())
}

/// Empirical FMR of a score vector at the default significance level.
pub fn estimate_fmr(ctx: &Context, scores: &ScoreVector) -> Result<FmrEstimate> {
    FmrEstimate::from_counts(
        ctx,
        scores.false_matches(),
        scores.scores.len() as u64,
        DEFAULT_ALPHA,
    )
}

/// Which quantile of the t distribution sets the interval half-width.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Sided {
    /// `c = t_quantile(n - 1, 1 - alpha)`
    OneSided,
    /// `c = t_quantile(n - 1, 1 - alpha / 2)`, i.e. `P(-c <= T <= c) = 1 - alpha`.
    #[default]
    TwoSided,
}

impl Sided {
    /// Cumulative probability whose quantile is used for `alpha`.
    pub fn tail_prob(self, ctx: &Context, alpha: f64) -> BigReal {
        let a = ctx.real(alpha);
        match self {
            Sided::OneSided => Float::with_val(ctx.precision(), 1 - a),
            Sided::TwoSided => Float::with_val(ctx.precision(), 1 - a / 2u32),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sided::OneSided => "one",
            Sided::TwoSided => "two",
        }
    }
}

impl fmt::Display for Sided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sided {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "one-sided" | "one_sided" => Ok(Sided::OneSided),
            "two" | "two-sided" | "two_sided" => Ok(Sided::TwoSided),
            other => Err(Error::Parse(other.to_string())),
        }
    }
}

/// `[CIL, CIU]` around an empirical FMR, clamped to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceInterval {
    pub point: BigReal,
    pub lower: BigReal,
    pub upper: BigReal,
    pub c_alpha: BigReal,
    pub n: u64,
    pub alpha: f64,
    pub sided: Sided,
    /// Set when `fmr_hat` is 0 or 1 and the interval collapses to a point.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    pub fn width(&self) -> BigReal {
        Float::with_val(self.upper.prec(), &self.upper - &self.lower)
    }
}

/// `fmr_hat ∓ c * sqrt(fmr_hat (1 - fmr_hat) / (n - 1))`, clamped to `[0, 1]`.
pub fn confidence_interval(ctx: &Context, est: &FmrEstimate, sided: Sided) -> Result<ConfidenceInterval> {
    if est.n < 2 {
        return Err(Error::domain(
            "confidence_interval",
            "requires n >= 2 comparisons (n - 1 degrees of freedom)",
        ));
    }
    let p = sided.tail_prob(ctx, est.alpha);
    if p < 0.5 {
        return Err(Error::domain(
            "confidence_interval",
            format!("one-sided interval requires alpha <= 0.5, got {}", est.alpha),
        ));
    }
    let c = t_quantile(ctx, est.n - 1, &p)?;
    confidence_interval_with_quantile(ctx, est, sided, c)
}

/// As [`confidence_interval`] with a precomputed quantile `c_alpha`. Useful
/// when many intervals share the same `(n, alpha, sided)`.
pub fn confidence_interval_with_quantile(
    ctx: &Context,
    est: &FmrEstimate,
    sided: Sided,
    c_alpha: BigReal,
) -> Result<ConfidenceInterval> {
    if est.n < 2 {
        return Err(Error::domain(
            "confidence_interval",
            "requires n >= 2 comparisons (n - 1 degrees of freedom)",
        ));
    }
    let prec = ctx.precision();
    let f = ctx.cast(&est.fmr_hat);
    let degenerate = f.is_zero() || f == 1;
    let variance = Float::with_val(prec, &f * Float::with_val(prec, 1 - &f)) / ctx.int(est.n - 1);
    let half = Float::with_val(prec, &c_alpha * ctx.sqrt(&variance));
    let lower = Float::with_val(prec, &f - &half).max(&ctx.zero());
    let upper = Float::with_val(prec, &f + &half).min(&ctx.one());
    Ok(ConfidenceInterval {
        point: f,
        lower,
        upper,
        c_alpha,
        n: est.n,
        alpha: est.alpha,
        sided,
        degenerate,
    })
}

impl fmt::Display for ConfidenceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] (c = {}, {}-sided, alpha = {}, n = {})",
            sci(&self.lower),
            sci(&self.upper),
            sci(&self.c_alpha),
            self.sided,
            self.alpha,
            self.n
        )
    }
}

/// Where an FMR value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FmrBasis {
    Point,
    ConfidenceInterval,
}

impl FmrBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            FmrBasis::Point => "point",
            FmrBasis::ConfidenceInterval => "ci",
        }
    }
}

/// Either a single FMR value or a confidence interval around one.
///
/// Bounds that must be pessimistic for the defender substitute the interval
/// endpoint that makes them so; see [`FmrInput::high`] and [`FmrInput::low`].
#[derive(Clone, Debug, PartialEq)]
pub enum FmrInput {
    Point(BigReal),
    Interval(ConfidenceInterval),
}

impl FmrInput {
    pub fn basis(&self) -> FmrBasis {
        match self {
            FmrInput::Point(_) => FmrBasis::Point,
            FmrInput::Interval(_) => FmrBasis::ConfidenceInterval,
        }
    }

    /// The point estimate.
    pub fn point(&self) -> &BigReal {
        match self {
            FmrInput::Point(f) => f,
            FmrInput::Interval(ci) => &ci.point,
        }
    }

    /// CIU, or the point value.
    pub fn high(&self) -> &BigReal {
        match self {
            FmrInput::Point(f) => f,
            FmrInput::Interval(ci) => &ci.upper,
        }
    }

    /// CIL, or the point value.
    pub fn low(&self) -> &BigReal {
        match self {
            FmrInput::Point(f) => f,
            FmrInput::Interval(ci) => &ci.lower,
        }
    }

    pub fn interval(&self) -> Option<&ConfidenceInterval> {
        match self {
            FmrInput::Point(_) => None,
            FmrInput::Interval(ci) => Some(ci),
        }
    }
}

impl From<ConfidenceInterval> for FmrInput {
    fn from(ci: ConfidenceInterval) -> Self {
        FmrInput::Interval(ci)
    }
}
