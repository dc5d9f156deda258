//! Biometric birthday problem: probability of at least one false match among
//! the `N(N-1)/2` pairs of an enrolled population.
//!
//! The approximate form treats every pair as an independent Bernoulli(FMR)
//! event, `P = 1 - (1 - f)^pairs`. The exact form draws the deployment's pairs
//! without replacement from the `K(K-1)/2` pairs of the reference set the FMR
//! was measured on, of which a fraction `f` falsely match:
//!
//! ```text
//! Q = prod_{i=1}^{pairs} ((1-f) Kp - i + 1) / (Kp - i + 1)
//!   = C((1-f) Kp, pairs) / C(Kp, pairs)
//! ```
//!
//! `(1-f) Kp` is generally not an integer; the binomials are evaluated through
//! `lgamma` over the reals. Rounding it to the nearest integer is available
//! for comparisons against exact counting.

use rayon::prelude::*;
use rug::{Float, Integer};

use crate::attack::Population;
use crate::error::{Error, Result};
use crate::numerics::{check_open_probability, check_probability, floor_integer, sci, BigReal, Context};
use crate::stats::{confidence_interval, FmrEstimate, FmrInput, Sided};

/// Guard bits added while differencing large `lgamma` values.
const LGAMMA_GUARD_BITS: u32 = 64;

/// Unordered pairs in a deployment of `n_users`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCount {
    pub n_users: u64,
    /// `n_users (n_users - 1) / 2`, integer-valued.
    pub n_pairs: BigReal,
}

impl PairCount {
    pub fn new(ctx: &Context, n_users: u64) -> Self {
        PairCount {
            n_users,
            n_pairs: ctx.integer(&pairs_of(n_users)),
        }
    }
}

/// Users (and their pairs) the FMR was measured on.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePool {
    pub k_users: u64,
    pub k_pairs: BigReal,
}

impl ReferencePool {
    pub fn new(ctx: &Context, k_users: u64) -> Result<Self> {
        if k_users < 2 {
            return Err(Error::domain("reference_pool", "requires K >= 2 users (at least one pair)"));
        }
        Ok(ReferencePool {
            k_users,
            k_pairs: ctx.integer(&pairs_of(k_users)),
        })
    }

    /// Exact pair count `K(K-1)/2`.
    pub fn pairs(&self) -> Integer {
        pairs_of(self.k_users)
    }
}

pub fn pairs_of(users: u64) -> Integer {
    let n = Integer::from(users);
    if users < 2 {
        return Integer::new();
    }
    (n.clone() * (n - 1u32)) / 2u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollisionMethod {
    Approximate,
    Exact,
}

impl CollisionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CollisionMethod::Approximate => "approximate",
            CollisionMethod::Exact => "exact",
        }
    }
}

/// How the number of non-matching reference pairs `(1 - f) Kp` is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FalsePairRounding {
    /// Keep `(1 - f) Kp` real.
    #[default]
    Continuous,
    /// Round `(1 - f) Kp` to the nearest integer.
    Nearest,
}

/// Diagnostics of an exact evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDetails {
    pub k_pairs: BigReal,
    /// `(1 - f) Kp`, after rounding if requested.
    pub non_matching_pairs: BigReal,
    /// `non_matching_pairs - pairs + 1 <= 0`: the product hits a zero factor
    /// and the no-collision probability is exactly 0.
    pub zero_case: bool,
    /// `non_matching_pairs - 1 <= pairs`, the commonly quoted exhaustion
    /// criterion. It fires one pair earlier than `zero_case`.
    pub coarse_zero_condition: bool,
}

impl ExactDetails {
    pub fn zero_conditions_disagree(&self) -> bool {
        self.zero_case != self.coarse_zero_condition
    }
}

/// Probability of at least one weak collision.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionResult {
    pub probability: BigReal,
    /// `ln(1 - probability)`, kept separately so probabilities within
    /// rounding of 1 stay meaningful.
    pub ln_no_collision: BigReal,
    /// Evaluated at CIL when the FMR came with an interval.
    pub lower: Option<BigReal>,
    /// Evaluated at CIU when the FMR came with an interval.
    pub upper: Option<BigReal>,
    pub pair_count: PairCount,
    pub method: CollisionMethod,
    pub exact: Option<ExactDetails>,
}

fn check_fmr_input(op: &'static str, fmr: &FmrInput) -> Result<()> {
    for (name, v) in [("FMR", fmr.point()), ("CIL", fmr.low()), ("CIU", fmr.high())] {
        if v.is_nan() || *v < 0 || *v >= 1 {
            return Err(Error::domain(op, format!("requires 0 <= {name} < 1, got {}", sci(v))));
        }
    }
    Ok(())
}

/// `P = 1 - (1 - f)^pairs`, with CIL/CIU giving the lower/upper bound.
pub fn birthday_approx(ctx: &Context, fmr: &FmrInput, pop: Population) -> Result<CollisionResult> {
    check_fmr_input("birthday_approx", fmr)?;
    let pair_count = PairCount::new(ctx, pop.n_users());
    let ln_q = ctx.ln_complement_pow(fmr.point(), &pair_count.n_pairs)?;
    let probability = ctx.one_minus_pow(fmr.point(), &pair_count.n_pairs)?;
    let (lower, upper) = match fmr.interval() {
        None => (None, None),
        Some(ci) => (
            Some(ctx.one_minus_pow(&ci.lower, &pair_count.n_pairs)?),
            Some(ctx.one_minus_pow(&ci.upper, &pair_count.n_pairs)?),
        ),
    };
    Ok(CollisionResult {
        probability,
        ln_no_collision: ln_q,
        lower,
        upper,
        pair_count,
        method: CollisionMethod::Approximate,
        exact: None,
    })
}

/// Largest population whose approximate collision probability stays at or
/// below `p_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthdayCriticalPopulation {
    /// `1/2 + 1/2 sqrt(1 + 8 ln(1 - p) / ln(1 - f))`
    pub exact_root: BigReal,
    /// `floor(exact_root)`
    pub count: Integer,
    /// `sqrt(2 ln(1 - p) / ln(1 - f))`, the large-N approximation.
    pub sqrt_approx: BigReal,
}

/// Critical population for collision probability `p_max`; with an
/// interval, `f = CIL`.
pub fn birthday_critical_population(
    ctx: &Context,
    fmr: &FmrInput,
    p_max: &BigReal,
) -> Result<BirthdayCriticalPopulation> {
    const OP: &str = "birthday_critical_population";
    let prec = ctx.precision();
    let f = ctx.cast(fmr.low());
    check_open_probability(OP, "FMR", &f)?;
    check_open_probability(OP, "p_max", p_max)?;
    let ln_1mp = ctx.log1p(&Float::with_val(prec, -p_max))?;
    let ln_1mf = ctx.log1p(&Float::with_val(prec, -&f))?;
    let ratio = Float::with_val(prec, ln_1mp / ln_1mf);
    let disc = Float::with_val(prec, Float::with_val(prec, &ratio * 8u32) + 1u32);
    let exact_root = Float::with_val(prec, Float::with_val(prec, ctx.sqrt(&disc) + 1u32) / 2u32);
    let sqrt_approx = ctx.sqrt(&Float::with_val(prec, ratio * 2u32));
    Ok(BirthdayCriticalPopulation {
        count: floor_integer(&exact_root),
        exact_root,
        sqrt_approx,
    })
}

/// Largest FMR keeping the approximate collision probability at or below
/// `p_max` for `pop` users: `-expm1(ln(1 - p) / pairs)`.
pub fn birthday_critical_fmr(ctx: &Context, pop: Population, p_max: &BigReal) -> Result<BigReal> {
    const OP: &str = "birthday_critical_fmr";
    check_open_probability(OP, "p_max", p_max)?;
    if pop.n_users() < 2 {
        return Err(Error::domain(
            OP,
            "requires N >= 2: a single user forms no pairs, so every FMR gives collision probability 0",
        ));
    }
    let prec = ctx.precision();
    let pairs = PairCount::new(ctx, pop.n_users());
    let ln_1mp = ctx.log1p(&Float::with_val(prec, -p_max))?;
    let e = Float::with_val(prec, ln_1mp / &pairs.n_pairs);
    Ok(Float::with_val(prec, -ctx.expm1(&e)))
}

/// No-collision probability of the without-replacement model, expressed in
/// pair counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactNoCollision {
    pub ln_q: BigReal,
    pub q: BigReal,
    pub details: ExactDetails,
}

impl ExactNoCollision {
    /// `1 - Q`, formed as `-expm1(ln Q)`.
    pub fn collision_probability(&self, ctx: &Context) -> BigReal {
        let p = Float::with_val(ctx.precision(), -ctx.expm1(&self.ln_q));
        p.clamp(&0, &1)
    }
}

/// `Q = C(m, pairs) / C(k_pairs, pairs)` with `m = (1 - f) k_pairs`.
///
/// `k_pairs` and `pairs` must be integer-valued with `0 <= pairs <= k_pairs`.
pub fn exact_no_collision(
    ctx: &Context,
    fmr: &BigReal,
    k_pairs: &BigReal,
    pairs: &BigReal,
    rounding: FalsePairRounding,
) -> Result<ExactNoCollision> {
    const OP: &str = "birthday_exact";
    check_probability(OP, "FMR", fmr)?;
    if !k_pairs.is_integer() || *k_pairs < 1 {
        return Err(Error::domain(OP, "requires an integer number of reference pairs >= 1"));
    }
    if !pairs.is_integer() || *pairs < 0 {
        return Err(Error::domain(OP, "requires an integer number of deployment pairs >= 0"));
    }
    if pairs > k_pairs {
        return Err(Error::domain(
            OP,
            format!(
                "requires deployment pairs N(N-1)/2 <= reference pairs K(K-1)/2 (cannot draw more pairs than the reference set defines); got {} > {}",
                sci(pairs),
                sci(k_pairs)
            ),
        ));
    }

    let prec = ctx.precision();
    let wide = Context::new(prec + LGAMMA_GUARD_BITS)?;
    let kp = wide.cast(k_pairs);
    let np = wide.cast(pairs);
    let mut m = Float::with_val(wide.precision(), Float::with_val(wide.precision(), 1 - fmr) * &kp);
    if rounding == FalsePairRounding::Nearest {
        m = m.round();
    }

    let margin = Float::with_val(wide.precision(), &m - &np) + 1u32;
    let zero_case = margin <= 0;
    let coarse_zero_condition = Float::with_val(wide.precision(), &m - 1u32) <= np;
    let details = ExactDetails {
        k_pairs: ctx.cast(&kp),
        non_matching_pairs: ctx.cast(&m),
        zero_case,
        coarse_zero_condition,
    };

    if np.is_zero() || fmr.is_zero() {
        return Ok(ExactNoCollision {
            ln_q: ctx.zero(),
            q: ctx.one(),
            details,
        });
    }
    if zero_case {
        return Ok(ExactNoCollision {
            ln_q: Float::with_val(prec, rug::float::Special::NegInfinity),
            q: ctx.zero(),
            details,
        });
    }

    let wp = wide.precision();
    let m1 = Float::with_val(wp, &m + 1u32);
    let k1 = Float::with_val(wp, &kp + 1u32);
    let k_rest = Float::with_val(wp, &kp - &np) + 1u32;
    let numer = Float::with_val(wp, wide.lgamma(&m1)? - wide.lgamma(&k1)?);
    let denom = Float::with_val(wp, wide.lgamma(&margin)? - wide.lgamma(&k_rest)?);
    let ln_q = ctx.cast(&Float::with_val(wp, numer - denom));
    let q = ctx.exp(&ln_q);
    Ok(ExactNoCollision { ln_q, q, details })
}

/// Exact collision probability for `pop` users given an FMR measured on the
/// pairs of `reference`. An interval input yields CIL/CIU bounds.
///
/// Use [`reference_interval`] to build the interval with `n = K(K-1)/2`
/// comparisons.
pub fn birthday_exact(
    ctx: &Context,
    fmr: &FmrInput,
    reference: &ReferencePool,
    pop: Population,
    rounding: FalsePairRounding,
) -> Result<CollisionResult> {
    let pair_count = PairCount::new(ctx, pop.n_users());
    let point = exact_no_collision(ctx, fmr.point(), &reference.k_pairs, &pair_count.n_pairs, rounding)?;
    let (lower, upper) = match fmr.interval() {
        None => (None, None),
        Some(ci) => {
            let lo = exact_no_collision(ctx, &ci.lower, &reference.k_pairs, &pair_count.n_pairs, rounding)?;
            let hi = exact_no_collision(ctx, &ci.upper, &reference.k_pairs, &pair_count.n_pairs, rounding)?;
            (Some(lo.collision_probability(ctx)), Some(hi.collision_probability(ctx)))
        }
    };
    Ok(CollisionResult {
        probability: point.collision_probability(ctx),
        ln_no_collision: point.ln_q,
        lower,
        upper,
        pair_count,
        method: CollisionMethod::Exact,
        exact: Some(point.details),
    })
}

/// Confidence interval for an FMR measured on all pairs of `reference`,
/// i.e. with `n = K(K-1)/2` comparisons and `n - 1` degrees of freedom.
pub fn reference_interval(
    ctx: &Context,
    fmr: &BigReal,
    reference: &ReferencePool,
    alpha: f64,
    sided: Sided,
) -> Result<FmrInput> {
    let n = reference.pairs().to_u64().ok_or_else(|| {
        Error::domain("birthday_exact", "reference pair count exceeds 2^64 - 1 comparisons")
    })?;
    let est = FmrEstimate::new(ctx.cast(fmr), n, alpha)?;
    Ok(FmrInput::Interval(confidence_interval(ctx, &est, sided)?))
}

/// One point of an exact-versus-approximate comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct GapPoint {
    pub k_users: u64,
    pub exact: BigReal,
    pub approx: BigReal,
    /// `|exact - approx|`
    pub gap: BigReal,
}

/// `|P_exact(K) - P_approx|` for each reference size in `k_sweep`.
pub fn exact_vs_approx_gap(
    ctx: &Context,
    fmr: &BigReal,
    pop: Population,
    k_sweep: &[u64],
) -> Result<Vec<GapPoint>> {
    let input = FmrInput::Point(ctx.cast(fmr));
    let approx = birthday_approx(ctx, &input, pop)?.probability;
    k_sweep
        .par_iter()
        .map(|&k| {
            let reference = ReferencePool::new(ctx, k)?;
            let exact = birthday_exact(ctx, &input, &reference, pop, FalsePairRounding::Continuous)?.probability;
            let gap = Float::with_val(ctx.precision(), &exact - &approx).abs();
            Ok(GapPoint {
                k_users: k,
                exact,
                approx: approx.clone(),
                gap,
            })
        })
        .collect()
}
