//! Extended-precision kernel.
//!
//! Every quantity in this crate is a [`BigReal`] evaluated at the binary
//! precision carried by a [`Context`]. The context is a plain value: clone it
//! freely across threads, nothing here touches global state.
//!
//! Probabilities that can sit very close to 0 or 1 (an FMR of `1e-48`, a
//! no-collision probability of `1 - 1e-30`) are routed through `log1p` and
//! `expm1` so that no digits are lost forming `1 - f`.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Real number at a fixed binary precision.
pub type BigReal = Float;

pub const DEFAULT_PRECISION: u32 = 256;
pub const MIN_PRECISION: u32 = 64;

/// Computation context: the mantissa width every result is rounded to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Context {
    precision: u32,
}

impl Default for Context {
    fn default() -> Self {
        Context {
            precision: DEFAULT_PRECISION,
        }
    }
}

impl Context {
    pub fn new(precision: u32) -> Result<Self> {
        if precision < MIN_PRECISION || precision > rug::float::prec_max() {
            return Err(Error::Precision {
                got: precision,
                min: MIN_PRECISION,
            });
        }
        Ok(Context { precision })
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Same computation at a different precision, e.g. for a reference
    /// evaluation at twice the working width.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Context::new(precision)
    }

    pub fn zero(&self) -> BigReal {
        Float::new(self.precision)
    }

    pub fn one(&self) -> BigReal {
        Float::with_val(self.precision, 1)
    }

    /// Exact conversion of a binary64 value (rounded only if the context is
    /// narrower than 53 bits, which [`Context::new`] forbids).
    pub fn real(&self, v: f64) -> BigReal {
        Float::with_val(self.precision, v)
    }

    pub fn int(&self, v: u64) -> BigReal {
        Float::with_val(self.precision, v)
    }

    pub fn integer(&self, v: &Integer) -> BigReal {
        Float::with_val(self.precision, v)
    }

    /// Re-rounds `x` to this context's precision.
    pub fn cast(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x)
    }

    /// Parses a decimal literal (`"1e-6"`, `"0.05"`, `"inf"`) directly at
    /// working precision, without a detour through `f64`.
    pub fn parse(&self, s: &str) -> Result<BigReal> {
        let trimmed = s.trim();
        Float::parse(trimmed)
            .map(|p| Float::with_val(self.precision, p))
            .map_err(|_| Error::Parse(trimmed.to_string()))
    }

    pub fn ln2(&self) -> BigReal {
        Float::with_val(self.precision, Constant::Log2)
    }

    pub fn pi(&self) -> BigReal {
        Float::with_val(self.precision, Constant::Pi)
    }

    /// `2^e` for a real exponent.
    pub fn exp2(&self, e: &BigReal) -> BigReal {
        Float::with_val(self.precision, e.exp2_ref())
    }

    pub fn log2(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.log2_ref())
    }

    pub fn log10(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.log10_ref())
    }

    pub fn ln(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.ln_ref())
    }

    pub fn exp(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.exp_ref())
    }

    pub fn sqrt(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.sqrt_ref())
    }

    /// `ln(1 + x)` for `x > -1`.
    pub fn log1p(&self, x: &BigReal) -> Result<BigReal> {
        if x.is_nan() || *x <= -1 {
            return Err(Error::domain("log1p", format!("requires x > -1, got {}", sci(x))));
        }
        Ok(Float::with_val(self.precision, x.ln_1p_ref()))
    }

    /// `e^x - 1`.
    pub fn expm1(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.exp_m1_ref())
    }

    /// `ln Γ(x)` for `x > 0`.
    pub fn lgamma(&self, x: &BigReal) -> Result<BigReal> {
        if x.is_nan() || *x <= 0 {
            return Err(Error::domain("lgamma", format!("requires x > 0, got {}", sci(x))));
        }
        Ok(Float::with_val(self.precision, x.ln_gamma_ref()))
    }

    /// `ln((1 - f)^m) = m * log1p(-f)`, i.e. the log of the probability that
    /// `m` independent events of probability `f` all fail.
    ///
    /// Returns `-inf` for `f = 1, m > 0` and `0` whenever `m = 0`.
    pub fn ln_complement_pow(&self, f: &BigReal, m: &BigReal) -> Result<BigReal> {
        check_probability("one_minus_pow", "f", f)?;
        if m.is_nan() || *m < 0 {
            return Err(Error::domain(
                "one_minus_pow",
                format!("requires exponent >= 0, got {}", sci(m)),
            ));
        }
        if m.is_zero() {
            return Ok(self.zero());
        }
        if *f == 1 {
            return Ok(Float::with_val(self.precision, rug::float::Special::NegInfinity));
        }
        let neg_f = Float::with_val(self.precision, -f);
        let log_q = self.log1p(&neg_f)?;
        Ok(Float::with_val(self.precision, &log_q * m))
    }

    /// `1 - (1 - f)^m` computed as `-expm1(m * log1p(-f))`.
    ///
    /// Result lies in `[0, 1]` and is nondecreasing in both `f` and `m`.
    pub fn one_minus_pow(&self, f: &BigReal, m: &BigReal) -> Result<BigReal> {
        let ln_q = self.ln_complement_pow(f, m)?;
        let mut p = self.expm1(&ln_q);
        p = -p;
        Ok(p.clamp(&0, &1))
    }

    /// `x^e` for `x >= 0`.
    pub fn pow(&self, x: &BigReal, e: &BigReal) -> BigReal {
        Float::with_val(self.precision, x.pow(e))
    }
}

/// Fails unless `0 <= x <= 1`.
pub(crate) fn check_probability(op: &'static str, name: &str, x: &BigReal) -> Result<()> {
    if x.is_nan() || *x < 0 || *x > 1 {
        return Err(Error::domain(
            op,
            format!("requires 0 <= {name} <= 1, got {}", sci(x)),
        ));
    }
    Ok(())
}

/// Fails unless `0 < x < 1`.
pub(crate) fn check_open_probability(op: &'static str, name: &str, x: &BigReal) -> Result<()> {
    if x.is_nan() || *x <= 0 || *x >= 1 {
        return Err(Error::domain(
            op,
            format!("requires 0 < {name} < 1, got {}", sci(x)),
        ));
    }
    Ok(())
}

/// Scientific notation with 17 significant digits (`1.3349045213657098e-35`,
/// `6.9314718055994531e+1`).
/// Infinities render as `inf` / `-inf`.
pub fn sci(x: &BigReal) -> String {
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let text = format!("{:.17e}", x);
    // Explicit sign on positive exponents, as JSON serializers write them.
    match text.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => text,
    }
}

/// `floor(x)` as an exact integer. `x` must be finite.
pub fn floor_integer(x: &BigReal) -> Integer {
    x.clone().floor().to_integer().unwrap_or_default()
}

/// `ceil(x)` as an exact integer. `x` must be finite.
pub fn ceil_integer(x: &BigReal) -> Integer {
    x.clone().ceil().to_integer().unwrap_or_default()
}
