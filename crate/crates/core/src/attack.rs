//! Untargeted attack complexity.
//!
//! A non-adaptive attacker submits one query per round; the query is compared
//! against all `N` enrolled templates and succeeds if any comparison is a
//! false match. The number of rounds to first success is geometric, and every
//! bound here is a bound on its median.
//!
//! Security levels are carried as `log2(attempts)` so that `S = 2^128` and
//! products like `N * S` never leave the extended-precision domain.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::numerics::{ceil_integer, check_open_probability, floor_integer, sci, BigReal, Context};
use crate::stats::{normal_quantile, FmrBasis, FmrInput, Sided};

/// Required attacker work, `S = 2^log2_attempts`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecurityLevel {
    log2_attempts: BigReal,
}

impl SecurityLevel {
    pub fn from_bits(bits: BigReal) -> Result<Self> {
        if !bits.is_finite() || bits < 0 {
            return Err(Error::domain(
                "security_level",
                format!("requires a finite number of bits >= 0, got {}", sci(&bits)),
            ));
        }
        Ok(SecurityLevel { log2_attempts: bits })
    }

    pub fn bits(&self) -> &BigReal {
        &self.log2_attempts
    }

    /// `S = 2^bits`.
    pub fn attempts(&self, ctx: &Context) -> BigReal {
        ctx.exp2(&self.log2_attempts)
    }
}

/// Number of enrolled users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Population(u64);

impl Population {
    pub fn new(n_users: u64) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::domain("population", "requires at least one user"));
        }
        Ok(Population(n_users))
    }

    pub fn n_users(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Statistical relation between the per-user match events inside one round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DependenceModel {
    #[default]
    Independent,
    /// Arbitrary dependence, bounded through Bonferroni's inequality.
    Dependent,
}

impl DependenceModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DependenceModel::Independent => "independent",
            DependenceModel::Dependent => "dependent",
        }
    }
}

impl FromStr for DependenceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(DependenceModel::Independent),
            "dependent" => Ok(DependenceModel::Dependent),
            other => Err(Error::Parse(other.to_string())),
        }
    }
}

/// Bounds on the median number of rounds an untargeted attacker needs,
/// both as `log2(rounds)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackBounds {
    pub log2_lower: BigReal,
    /// `+inf` when the FMR used for the upper bound (CIL) is zero.
    pub log2_upper: BigReal,
    pub model: DependenceModel,
    pub fmr_basis: FmrBasis,
    /// FMR substituted into the lower bound (CIU with an interval).
    pub fmr_for_lower: BigReal,
    /// FMR substituted into the upper bound (CIL with an interval).
    pub fmr_for_upper: BigReal,
}

impl AttackBounds {
    pub fn lower_rounds(&self, ctx: &Context) -> BigReal {
        ctx.exp2(&self.log2_lower)
    }

    pub fn upper_rounds(&self, ctx: &Context) -> BigReal {
        ctx.exp2(&self.log2_upper)
    }

    /// Authentication mode: each guess has to be replayed against every
    /// claimed identity, multiplying the attacker's work by `N`.
    pub fn scaled_for_authentication(&self, ctx: &Context, pop: Population) -> AttackBounds {
        let log2_n = ctx.log2(&ctx.int(pop.n_users()));
        AttackBounds {
            log2_lower: Float::with_val(ctx.precision(), &self.log2_lower + &log2_n),
            log2_upper: Float::with_val(ctx.precision(), &self.log2_upper + &log2_n),
            ..self.clone()
        }
    }
}

/// Median of the first-success round for per-round success probability `p`:
/// `ceil(-1 / log2(1 - p))`.
pub fn geometric_median(ctx: &Context, success_prob: &BigReal) -> Result<Integer> {
    check_open_probability("geometric_median", "success_prob", success_prob)?;
    let neg_p = Float::with_val(ctx.precision(), -success_prob);
    let ln_q = ctx.log1p(&neg_p)?;
    let rounds = Float::with_val(ctx.precision(), -ctx.ln2() / ln_q);
    Ok(ceil_integer(&rounds))
}

/// Per-round success probability `1 - (1 - f)^N` under independence.
pub fn success_probability(ctx: &Context, fmr: &BigReal, pop: Population) -> Result<BigReal> {
    ctx.one_minus_pow(fmr, &ctx.int(pop.n_users()))
}

/// Bounds on the median attack rounds against `pop` users.
///
/// * independent: `ln2 / (N (f + f^2)) <= m <= ln2 / (N f)`
/// * dependent (`f <= 1/(2N)`): `ln2 / (N f + N^2 f^2) <= m <= ln2 / f`
///
/// With a confidence interval, CIU is used in the lower bound and CIL in the
/// upper bound, so the pair brackets every FMR inside the interval.
pub fn untargeted_bounds(
    ctx: &Context,
    fmr: &FmrInput,
    pop: Population,
    model: DependenceModel,
) -> Result<AttackBounds> {
    const OP: &str = "untargeted_bounds";
    let prec = ctx.precision();
    let high = ctx.cast(fmr.high());
    let low = ctx.cast(fmr.low());
    match fmr {
        FmrInput::Point(_) => check_open_probability(OP, "FMR", &high)?,
        FmrInput::Interval(_) => {
            check_open_probability(OP, "CIU", &high)?;
            if low < 0 || low >= 1 {
                return Err(Error::domain(OP, "requires 0 <= CIL < 1"));
            }
        }
    }

    let n = ctx.int(pop.n_users());
    let ln2 = ctx.ln2();
    let n_high = Float::with_val(prec, &n * &high);

    let (lower, upper) = match model {
        DependenceModel::Independent => {
            let high_sq = Float::with_val(prec, high.square_ref());
            let denom = Float::with_val(prec, &n * Float::with_val(prec, &high + &high_sq));
            let lower = Float::with_val(prec, &ln2 / &denom);
            let upper = Float::with_val(prec, &ln2 / Float::with_val(prec, &n * &low));
            (lower, upper)
        }
        DependenceModel::Dependent => {
            let limit = Float::with_val(prec, ctx.int(2) * &n).recip();
            if high > limit {
                return Err(Error::domain(
                    OP,
                    format!(
                        "dependent model requires FMR <= 1/(2N) (Bonferroni-case attack bound); got FMR = {}, N = {}",
                        sci(&high),
                        pop
                    ),
                ));
            }
            let denom = Float::with_val(prec, &n_high + Float::with_val(prec, n_high.square_ref()));
            let lower = Float::with_val(prec, &ln2 / &denom);
            let upper = Float::with_val(prec, &ln2 / &low);
            (lower, upper)
        }
    };

    Ok(AttackBounds {
        log2_lower: ctx.log2(&lower),
        log2_upper: ctx.log2(&upper),
        model,
        fmr_basis: fmr.basis(),
        fmr_for_lower: high,
        fmr_for_upper: low,
    })
}

/// Largest population that keeps the median attack above `S` rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPopulation {
    /// `ln2 / (S (f + f^2))` before flooring.
    pub bound: BigReal,
    pub log2_bound: BigReal,
    /// `floor(bound)`, or 0 when the bound is below one user.
    pub count: Integer,
    /// No population of one or more users reaches the security level.
    pub unattainable: bool,
}

/// `N = floor(ln2 / (S (f + f^2)))`; with an interval, `f = CIU`.
pub fn critical_population(ctx: &Context, fmr: &FmrInput, sec: &SecurityLevel) -> Result<CriticalPopulation> {
    let prec = ctx.precision();
    let f = ctx.cast(fmr.high());
    check_open_probability("critical_population", "FMR", &f)?;
    let f_plus_f2 = Float::with_val(prec, &f + Float::with_val(prec, f.square_ref()));
    let neg_bits = Float::with_val(prec, -sec.bits());
    let bound = Float::with_val(prec, ctx.ln2() * ctx.exp2(&neg_bits)) / f_plus_f2;
    let unattainable = bound < 1;
    let count = if unattainable {
        Integer::new()
    } else {
        floor_integer(&bound)
    };
    Ok(CriticalPopulation {
        log2_bound: ctx.log2(&bound),
        bound,
        count,
        unattainable,
    })
}

/// Largest FMR for which `N` users still get `S` rounds of security:
/// the positive root of `f^2 + f - ln2/(N S) = 0`, evaluated as
/// `x / (1/2 + sqrt(1/4 + x))` with `x = ln2/(N S)`.
pub fn critical_fmr_untargeted(ctx: &Context, pop: Population, sec: &SecurityLevel) -> BigReal {
    let prec = ctx.precision();
    let neg_bits = Float::with_val(prec, -sec.bits());
    let x = Float::with_val(prec, ctx.ln2() * ctx.exp2(&neg_bits)) / ctx.int(pop.n_users());
    let quarter = ctx.real(0.25);
    let root = ctx.sqrt(&Float::with_val(prec, &quarter + &x));
    let denom = Float::with_val(prec, root + 0.5f64);
    Float::with_val(prec, x / denom)
}

/// Comparison budget needed before CIU can certify the critical FMR.
#[derive(Clone, Debug, PartialEq)]
pub struct ParadoxEstimate {
    pub critical_fmr: BigReal,
    /// Half-width the interval has to fit into, `critical_fmr / 2`.
    pub gap: BigReal,
    /// Normal quantile used for the half-width.
    pub c: BigReal,
    /// `c^2 f (1 - f) / gap^2 + 1`
    pub comparisons: BigReal,
    pub log2_comparisons: BigReal,
}

/// Impostor comparisons needed for CIU to drop below
/// [`critical_fmr_untargeted`]: with `f` the critical FMR and the interval
/// half-width pinned to `f / 2`, `n = c^2 f (1 - f) / (f/2)^2 + 1`.
pub fn confidence_paradox_n(
    ctx: &Context,
    pop: Population,
    sec: &SecurityLevel,
    alpha: f64,
    sided: Sided,
) -> Result<ParadoxEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("confidence_paradox_n", "requires 0 < alpha < 1"));
    }
    let prec = ctx.precision();
    let f = critical_fmr_untargeted(ctx, pop, sec);
    let gap = Float::with_val(prec, &f / 2u32);
    let c = normal_quantile(ctx, &sided.tail_prob(ctx, alpha))?;
    let var = Float::with_val(prec, &f * Float::with_val(prec, 1 - &f));
    let ratio = Float::with_val(prec, var / Float::with_val(prec, gap.square_ref()));
    let comparisons = Float::with_val(prec, Float::with_val(prec, c.square_ref()) * ratio) + 1u32;
    Ok(ParadoxEstimate {
        log2_comparisons: ctx.log2(&comparisons),
        critical_fmr: f,
        gap,
        c,
        comparisons,
    })
}
