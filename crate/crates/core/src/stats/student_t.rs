//! Student-t and normal quantiles at working precision.
//!
//! The t upper tail is `P(T > t) = I_x(df/2, 1/2) / 2` with
//! `x = df / (df + t^2)`, where `I` is the regularized incomplete beta
//! function evaluated by its continued fraction (modified Lentz). Quantiles
//! come from a bracketed Newton iteration on the tail: a Newton step is
//! accepted only while it stays strictly inside the current bracket,
//! otherwise the bracket is bisected.

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{BigReal, Context};

/// Above this many degrees of freedom the t distribution is replaced by the
/// standard normal.
pub const NORMAL_FALLBACK_DF: u64 = 1_000_000;

/// Regularized incomplete beta `I_x(a, b)`.
///
/// `one_minus_x` must equal `1 - x`; passing it separately keeps full
/// relative accuracy when `x` is within rounding of 1.
pub fn regularized_incomplete_beta(
    ctx: &Context,
    a: &BigReal,
    b: &BigReal,
    x: &BigReal,
    one_minus_x: &BigReal,
) -> Result<BigReal> {
    if *x < 0 || *x > 1 {
        return Err(Error::domain("incomplete_beta", "requires 0 <= x <= 1"));
    }
    if x.is_zero() {
        return Ok(ctx.zero());
    }
    if one_minus_x.is_zero() {
        return Ok(ctx.one());
    }
    let prec = ctx.precision();
    // Continued fraction converges quickly for x < (a + 1) / (a + b + 2).
    let ab2 = Float::with_val(prec, a + b) + 2u32;
    let threshold = Float::with_val(prec, a + 1u32) / ab2;
    if *x < threshold {
        let front = beta_front(ctx, a, b, x, one_minus_x)?;
        Ok(Float::with_val(prec, front * beta_cf(ctx, a, b, x) / a))
    } else {
        let front = beta_front(ctx, b, a, one_minus_x, x)?;
        let tail = Float::with_val(prec, front * beta_cf(ctx, b, a, one_minus_x) / b);
        Ok(Float::with_val(prec, 1 - tail))
    }
}

/// `x^a (1-x)^b / B(a, b)`.
fn beta_front(
    ctx: &Context,
    a: &BigReal,
    b: &BigReal,
    x: &BigReal,
    one_minus_x: &BigReal,
) -> Result<BigReal> {
    let prec = ctx.precision();
    let ab = Float::with_val(prec, a + b);
    let ln_beta = Float::with_val(
        prec,
        ctx.lgamma(a)? + ctx.lgamma(b)? - ctx.lgamma(&ab)?,
    );
    let ln_front = Float::with_val(prec, a * ctx.ln(x)) + Float::with_val(prec, b * ctx.ln(one_minus_x))
        - ln_beta;
    Ok(ctx.exp(&ln_front))
}

fn beta_cf(ctx: &Context, a: &BigReal, b: &BigReal, x: &BigReal) -> BigReal {
    let prec = ctx.precision();
    let tiny = Float::with_val(prec, Float::i_exp(1, -(prec as i32) * 4));
    let eps = Float::with_val(prec, Float::i_exp(1, 8 - prec as i32));
    let max_iter = 200 + 20 * (a.to_f64().max(b.to_f64()).sqrt() as u64);

    let qab = Float::with_val(prec, a + b);
    let qap = Float::with_val(prec, a + 1u32);
    let qam = Float::with_val(prec, a - 1u32);

    let guard = |v: Float| if v.clone().abs() < tiny { tiny.clone() } else { v };

    let mut c = ctx.one();
    let mut d = guard(Float::with_val(prec, 1 - Float::with_val(prec, &qab * x) / &qap));
    d.recip_mut();
    let mut h = d.clone();

    for m in 1..=max_iter {
        let m_f = Float::with_val(prec, m);
        let m2 = Float::with_val(prec, 2 * m);

        // even step
        let num = Float::with_val(prec, &m_f * Float::with_val(prec, b - &m_f)) * x;
        let den = Float::with_val(prec, &qam + &m2) * Float::with_val(prec, a + &m2);
        let aa = num / den;
        d = guard(Float::with_val(prec, 1 + Float::with_val(prec, &aa * &d)));
        c = guard(Float::with_val(prec, 1 + Float::with_val(prec, &aa / &c)));
        d.recip_mut();
        h *= Float::with_val(prec, &d * &c);

        // odd step
        let num = -(Float::with_val(prec, a + &m_f) * Float::with_val(prec, &qab + &m_f)) * x;
        let den = Float::with_val(prec, a + &m2) * Float::with_val(prec, &qap + &m2);
        let aa = num / den;
        d = guard(Float::with_val(prec, 1 + Float::with_val(prec, &aa * &d)));
        c = guard(Float::with_val(prec, 1 + Float::with_val(prec, &aa / &c)));
        d.recip_mut();
        let del = Float::with_val(prec, &d * &c);
        h *= &del;
        if Float::with_val(prec, del - 1u32).abs() < eps {
            break;
        }
    }
    h
}

/// `P(T > t)` for `t >= 0`.
pub fn t_upper_tail(ctx: &Context, df: u64, t: &BigReal) -> Result<BigReal> {
    let prec = ctx.precision();
    if t.is_zero() {
        return Ok(Float::with_val(prec, 0.5));
    }
    let nu = ctx.int(df);
    let t2 = Float::with_val(prec, t.square_ref());
    let denom = Float::with_val(prec, &nu + &t2);
    let x = Float::with_val(prec, &nu / &denom);
    let one_minus_x = Float::with_val(prec, &t2 / &denom);
    let a = Float::with_val(prec, &nu / 2u32);
    let b = Float::with_val(prec, 0.5);
    let i = regularized_incomplete_beta(ctx, &a, &b, &x, &one_minus_x)?;
    Ok(i / 2u32)
}

/// Cumulative distribution `P(T <= t)`.
pub fn t_cdf(ctx: &Context, df: u64, t: &BigReal) -> Result<BigReal> {
    if df == 0 {
        return Err(Error::domain("t_cdf", "requires df >= 1"));
    }
    let abs_t = Float::with_val(ctx.precision(), t.abs_ref());
    let tail = t_upper_tail(ctx, df, &abs_t)?;
    if t.is_sign_negative() {
        Ok(tail)
    } else {
        Ok(Float::with_val(ctx.precision(), 1 - tail))
    }
}

fn t_pdf(ctx: &Context, df: u64, t: &BigReal) -> Result<BigReal> {
    let prec = ctx.precision();
    let nu = ctx.int(df);
    let half_nu = Float::with_val(prec, &nu / 2u32);
    let half_nu_p1 = Float::with_val(prec, Float::with_val(prec, &nu + 1u32) / 2u32);
    let t2_over_nu = Float::with_val(prec, t.square_ref()) / &nu;
    let ln_pdf = ctx.lgamma(&half_nu_p1)? - ctx.lgamma(&half_nu)?
        - Float::with_val(prec, ctx.ln(&Float::with_val(prec, &nu * ctx.pi())) / 2u32)
        - Float::with_val(prec, &half_nu_p1 * ctx.log1p(&t2_over_nu)?);
    Ok(ctx.exp(&Float::with_val(prec, ln_pdf)))
}

/// `P(Z > z)` for the standard normal.
pub fn normal_upper_tail(ctx: &Context, z: &BigReal) -> BigReal {
    let prec = ctx.precision();
    let arg = Float::with_val(prec, z / ctx.sqrt(&ctx.int(2)));
    Float::with_val(prec, arg.erfc_ref()) / 2u32
}

fn normal_pdf(ctx: &Context, z: &BigReal) -> BigReal {
    let prec = ctx.precision();
    let half_z2 = Float::with_val(prec, z.square_ref()) / 2u32;
    let norm = ctx.sqrt(&Float::with_val(prec, ctx.pi() * 2u32));
    Float::with_val(prec, ctx.exp(&-half_z2) / norm)
}

/// Solves `tail(x) = target` for `x >= 0`, `tail` decreasing from 1/2.
fn solve_tail<T, D>(ctx: &Context, target: &BigReal, tail: T, density: D) -> Result<BigReal>
where
    T: Fn(&BigReal) -> Result<BigReal>,
    D: Fn(&BigReal) -> Result<BigReal>,
{
    let prec = ctx.precision();
    let mut lo = ctx.zero();
    let mut hi = ctx.one();
    while tail(&hi)? > *target {
        lo = hi.clone();
        hi *= 2u32;
        if hi.is_infinite() {
            return Err(Error::domain("quantile", "tail probability too small to bracket"));
        }
    }
    let tol = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
    let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
    let max_iter = 4 * prec as usize;
    for _ in 0..max_iter {
        let g = Float::with_val(prec, tail(&x)? - target);
        if g.is_zero() {
            return Ok(x);
        }
        if g.is_sign_positive() {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        // tail' = -density, so the Newton step is x + g / density.
        let dens = density(&x)?;
        let mut next = if dens.is_zero() {
            Float::with_val(prec, &lo + &hi) / 2u32
        } else {
            Float::with_val(prec, &x + Float::with_val(prec, &g / &dens))
        };
        if next <= lo || next >= hi {
            next = Float::with_val(prec, &lo + &hi) / 2u32;
        }
        let step = Float::with_val(prec, &next - &x).abs();
        x = next;
        if step <= Float::with_val(prec, &tol * &x) {
            return Ok(x);
        }
        if Float::with_val(prec, &hi - &lo) <= Float::with_val(prec, &tol * &lo) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// `c` with `P(Z <= c) = p`, for `1/2 <= p < 1`.
pub fn normal_quantile(ctx: &Context, p: &BigReal) -> Result<BigReal> {
    check_tail_prob("normal_quantile", p)?;
    if *p == 0.5 {
        return Ok(ctx.zero());
    }
    let target = Float::with_val(ctx.precision(), 1 - p);
    solve_tail(
        ctx,
        &target,
        |z| Ok(normal_upper_tail(ctx, z)),
        |z| Ok(normal_pdf(ctx, z)),
    )
}

/// `c` with `P(T_df <= c) = tail_prob`, for `df >= 1` and
/// `1/2 <= tail_prob < 1`. Degrees of freedom above [`NORMAL_FALLBACK_DF`]
/// use the normal quantile.
pub fn t_quantile(ctx: &Context, df: u64, tail_prob: &BigReal) -> Result<BigReal> {
    if df == 0 {
        return Err(Error::domain("t_quantile", "requires df >= 1"));
    }
    check_tail_prob("t_quantile", tail_prob)?;
    if df > NORMAL_FALLBACK_DF {
        return normal_quantile(ctx, tail_prob);
    }
    if *tail_prob == 0.5 {
        return Ok(ctx.zero());
    }
    let target = Float::with_val(ctx.precision(), 1 - tail_prob);
    solve_tail(
        ctx,
        &target,
        |t| t_upper_tail(ctx, df, t),
        |t| t_pdf(ctx, df, t),
    )
}

fn check_tail_prob(op: &'static str, p: &BigReal) -> Result<()> {
    if p.is_nan() || *p < 0.5 || *p >= 1 {
        return Err(Error::domain(
            op,
            format!("requires 0.5 <= tail_prob < 1, got {}", crate::numerics::sci(p)),
        ));
    }
    Ok(())
}
