//! Arbitrary-precision real arithmetic facade.
//!
//! [`BigReal`] wraps an MPFR float together with the precision (in decimal
//! digits) it was computed at. Binary operations produce a result at the
//! smaller of the two operand precisions, so precision can only be lost
//! explicitly, never silently gained.
//!
//! The fundamental constants and the Gamma function are evaluated by MPFR's
//! correctly rounded routines and memoized per precision.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rug::float::{Constant as MpfrConstant, Special};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{domain, Error, Result};

/// Smallest supported working precision in decimal digits.
pub const MIN_DIGITS: u32 = 15;
/// Guard digits added on top of the requested output precision.
pub const DEFAULT_GUARD: u32 = 15;
/// Smallest allowed guard.
pub const MIN_GUARD: u32 = 10;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Number of mantissa bits needed to carry `digits` decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 4
}

/// Requested output precision plus guard digits.
///
/// All module entry points compute internally at [`working_digits`](Self::working_digits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    guard: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_guard(digits, DEFAULT_GUARD)
    }

    pub fn with_guard(digits: u32, guard: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(domain(format!(
                "precision of {digits} digits is below the minimum of {MIN_DIGITS}"
            )));
        }
        if guard < MIN_GUARD {
            return Err(domain(format!(
                "guard of {guard} digits is below the minimum of {MIN_GUARD}"
            )));
        }
        Ok(Self { digits, guard })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    pub fn working_digits(&self) -> u32 {
        self.digits + self.guard
    }

    /// Same output precision with twice the guard.
    pub fn doubled_guard(&self) -> Self {
        Self {
            digits: self.digits,
            guard: self.guard * 2,
        }
    }

    /// `10^-digits` at working precision.
    pub fn tolerance(&self) -> BigReal {
        BigReal::pow10(-(self.digits as i32), self.working_digits())
    }
}

/// Arbitrary-precision real tagged with its working precision in decimal digits.
#[derive(Clone)]
pub struct BigReal {
    value: Float,
    digits: u32,
}

impl BigReal {
    fn wrap(value: Float, digits: u32) -> Self {
        Self { value, digits }
    }

    pub fn zero(digits: u32) -> Self {
        Self::from_int(0, digits)
    }

    pub fn one(digits: u32) -> Self {
        Self::from_int(1, digits)
    }

    pub fn from_int(v: i64, digits: u32) -> Self {
        Self::wrap(Float::with_val(digits_to_bits(digits), v), digits)
    }

    pub fn from_integer(v: &Integer, digits: u32) -> Self {
        Self::wrap(Float::with_val(digits_to_bits(digits), v), digits)
    }

    pub fn from_ratio(num: i64, den: i64, digits: u32) -> Self {
        Self::from_rational(&Rational::from((num, den)), digits)
    }

    pub fn from_rational(v: &Rational, digits: u32) -> Self {
        Self::wrap(Float::with_val(digits_to_bits(digits), v), digits)
    }

    pub fn from_f64(v: f64, digits: u32) -> Self {
        Self::wrap(Float::with_val(digits_to_bits(digits), v), digits)
    }

    /// `10^e`.
    pub fn pow10(e: i32, digits: u32) -> Self {
        let ten = Float::with_val(digits_to_bits(digits), 10);
        Self::wrap(ten.pow(e), digits)
    }

    pub fn infinity(digits: u32) -> Self {
        Self::wrap(
            Float::with_val(digits_to_bits(digits), Special::Infinity),
            digits,
        )
    }

    /// Parses a decimal literal (`"0.125"`, `"-3e-7"`) at the given precision.
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::Parse(format!("invalid real literal {s:?}: {e}")))?;
        Ok(Self::wrap(
            Float::with_val(digits_to_bits(digits), parsed),
            digits,
        ))
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Re-rounds (or zero-extends) to a different precision.
    pub fn with_digits(&self, digits: u32) -> Self {
        Self::wrap(
            Float::with_val(digits_to_bits(digits), &self.value),
            digits,
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_sign_negative() && !self.value.is_zero()
    }

    /// `Some(k)` when the value is exactly the integer `k`.
    pub fn as_exact_integer(&self) -> Option<Integer> {
        if self.value.is_integer() {
            self.value.to_integer()
        } else {
            None
        }
    }

    /// Nearest integer (ties away from zero).
    pub fn round_to_integer(&self) -> Option<Integer> {
        let rounded = Float::with_val(self.value.prec(), self.value.round_ref());
        rounded.to_integer()
    }

    /// Exact rational value of the binary float.
    pub fn to_rational(&self) -> Option<Rational> {
        self.value.to_rational()
    }

    /// Approximate `log10 |x|`; `-inf` at zero.
    pub fn log10_abs(&self) -> f64 {
        if self.value.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mantissa, exp) = self.value.to_f64_exp();
        mantissa.abs().log10() + f64::from(exp) * std::f64::consts::LOG10_2
    }

    fn unary(&self, f: impl FnOnce(&mut Float)) -> Self {
        let mut v = self.value.clone();
        f(&mut v);
        Self::wrap(v, self.digits)
    }

    pub fn abs(&self) -> Self {
        self.unary(|v| {
            v.abs_mut();
        })
    }

    pub fn sqrt(&self) -> Self {
        self.unary(|v| {
            v.sqrt_mut();
        })
    }

    pub fn cbrt(&self) -> Self {
        self.unary(|v| {
            v.cbrt_mut();
        })
    }

    pub fn square(&self) -> Self {
        self.unary(|v| {
            v.square_mut();
        })
    }

    pub fn recip(&self) -> Self {
        self.unary(|v| {
            v.recip_mut();
        })
    }

    pub fn exp(&self) -> Self {
        self.unary(|v| {
            v.exp_mut();
        })
    }

    /// `e^x - 1` without cancellation for small `x`.
    pub fn exp_m1(&self) -> Self {
        self.unary(|v| {
            v.exp_m1_mut();
        })
    }

    pub fn ln(&self) -> Self {
        self.unary(|v| {
            v.ln_mut();
        })
    }

    /// `ln(1 + x)` without cancellation for small `x`.
    pub fn ln_1p(&self) -> Self {
        self.unary(|v| {
            v.ln_1p_mut();
        })
    }

    pub fn sin(&self) -> Self {
        self.unary(|v| {
            v.sin_mut();
        })
    }

    pub fn cos(&self) -> Self {
        self.unary(|v| {
            v.cos_mut();
        })
    }

    pub fn tanh(&self) -> Self {
        self.unary(|v| {
            v.tanh_mut();
        })
    }

    pub fn sinh(&self) -> Self {
        self.unary(|v| {
            v.sinh_mut();
        })
    }

    pub fn cosh(&self) -> Self {
        self.unary(|v| {
            v.cosh_mut();
        })
    }

    pub fn atan(&self) -> Self {
        self.unary(|v| {
            v.atan_mut();
        })
    }

    pub fn asin(&self) -> Self {
        self.unary(|v| {
            v.asin_mut();
        })
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &BigReal) -> Self {
        let d = self.digits.min(x.digits);
        Self::wrap(
            Float::with_val(digits_to_bits(d), self.value.atan2_ref(&x.value)),
            d,
        )
    }

    pub fn powi(&self, e: i32) -> Self {
        Self::wrap(Float::with_val(self.value.prec(), (&self.value).pow(e)), self.digits)
    }

    pub fn powf(&self, e: &BigReal) -> Self {
        let d = self.digits.min(e.digits);
        Self::wrap(
            Float::with_val(digits_to_bits(d), (&self.value).pow(&e.value)),
            d,
        )
    }

    /// Multiplication by `2^e`, exact.
    pub fn mul_pow2(&self, e: i32) -> Self {
        self.unary(|v| {
            *v <<= e;
        })
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Decimal rendering with `sig` significant digits.
    ///
    /// Plain positional notation is used for exponents in `-6..=20`,
    /// scientific notation otherwise.
    pub fn to_decimal(&self, sig: usize) -> String {
        let raw = self.value.to_string_radix(10, Some(sig.max(1)));
        positional(&raw).unwrap_or(raw)
    }
}

fn positional(raw: &str) -> Option<String> {
    if !raw.bytes().next()?.is_ascii_digit() && !raw.starts_with('-') {
        return None;
    }
    let (mantissa, exp) = match raw.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => return Some(raw.to_string()),
    };
    if !(-6..=20).contains(&exp) {
        return None;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i32 + exp;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    Some(format!("{sign}{body}"))
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {} digits)", self.to_decimal(self.digits as usize), self.digits)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or(self.digits as usize);
        f.write_str(&self.to_decimal(sig))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl PartialEq<i64> for BigReal {
    fn eq(&self, other: &i64) -> bool {
        self.value == *other
    }
}

impl PartialOrd<i64> for BigReal {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.value.partial_cmp(other)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let d = self.digits.min(rhs.digits);
                BigReal::wrap(Float::with_val(digits_to_bits(d), &self.value $op &rhs.value), d)
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i64) -> BigReal {
                BigReal::wrap(Float::with_val(self.value.prec(), &self.value $op rhs), self.digits)
            }
        }
        impl $trait<i64> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i64) -> BigReal {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(mut self) -> BigReal {
        self.value = -self.value;
        self
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -(self.clone())
    }
}

impl std::iter::Sum for BigReal {
    fn sum<I: Iterator<Item = BigReal>>(mut iter: I) -> BigReal {
        let first = iter.next().expect("sum of empty BigReal iterator");
        iter.fold(first, |acc, x| acc + x)
    }
}

/// The fundamental constants the library needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstantName {
    Pi,
    Catalan,
    Zeta3,
    /// Γ(1/4)
    GammaQuarter,
}

impl ConstantName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantName::Pi => "pi",
            ConstantName::Catalan => "catalan",
            ConstantName::Zeta3 => "zeta3",
            ConstantName::GammaQuarter => "gamma_quarter",
        }
    }
}

impl FromStr for ConstantName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(ConstantName::Pi),
            "catalan" | "G" => Ok(ConstantName::Catalan),
            "zeta3" => Ok(ConstantName::Zeta3),
            "gamma_quarter" | "gamma14" => Ok(ConstantName::GammaQuarter),
            other => Err(domain(format!("unknown constant {other:?}"))),
        }
    }
}

type ConstantCache = Mutex<HashMap<(ConstantName, u32), Float>>;

fn constant_cache() -> &'static ConstantCache {
    static CACHE: OnceLock<ConstantCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Constant evaluated at exactly `digits` working digits (memoized).
pub(crate) fn constant_at(name: ConstantName, digits: u32) -> BigReal {
    let key = (name, digits);
    if let Some(v) = constant_cache().lock().unwrap().get(&key) {
        return BigReal::wrap(v.clone(), digits);
    }
    let bits = digits_to_bits(digits);
    let value = match name {
        ConstantName::Pi => Float::with_val(bits, MpfrConstant::Pi),
        ConstantName::Catalan => Float::with_val(bits, MpfrConstant::Catalan),
        ConstantName::Zeta3 => Float::with_val(bits, Float::zeta_u(3)),
        ConstantName::GammaQuarter => {
            let quarter = Float::with_val(bits, 0.25);
            quarter.gamma()
        }
    };
    constant_cache()
        .lock()
        .unwrap()
        .insert(key, value.clone());
    BigReal::wrap(value, digits)
}

pub(crate) fn pi(digits: u32) -> BigReal {
    constant_at(ConstantName::Pi, digits)
}

/// One of the supported constants, correct to `ctx.digits()` digits.
pub fn constant(name: ConstantName, ctx: &PrecisionContext) -> BigReal {
    constant_at(name, ctx.working_digits())
}

/// Looks a constant up by name (`pi`, `catalan`, `zeta3`, `gamma_quarter`).
pub fn constant_by_name(name: &str, ctx: &PrecisionContext) -> Result<BigReal> {
    Ok(constant(name.parse()?, ctx))
}

fn check_gamma_pole(x: &Float) -> Result<()> {
    if x.is_integer() && *x <= 0 {
        return Err(domain(format!(
            "Gamma has a pole at {}",
            x.to_string_radix(10, Some(10))
        )));
    }
    Ok(())
}

/// Γ(x) at `digits` working digits.
pub(crate) fn gamma_at(x: &BigReal, digits: u32) -> Result<BigReal> {
    check_gamma_pole(&x.value)?;
    let arg = Float::with_val(digits_to_bits(digits), &x.value);
    Ok(BigReal::wrap(arg.gamma(), digits))
}

/// The Gamma function, correct to `ctx.digits()` digits.
pub fn gamma(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    gamma_at(x, ctx.working_digits())
}

/// True when `result` is smaller than `10^-guard` times the largest
/// intermediate magnitude, i.e. most of the guard was cancelled away.
pub fn cancellation_detected(result: &BigReal, largest: &BigReal, guard: u32) -> bool {
    if largest.is_zero() {
        return false;
    }
    result.log10_abs() < largest.log10_abs() - f64::from(guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    #[test]
    fn context_invariants() {
        assert!(PrecisionContext::new(14).is_err());
        assert!(PrecisionContext::with_guard(30, 9).is_err());
        let c = ctx(30);
        assert_eq!(c.guard(), 15);
        assert_eq!(c.working_digits(), 45);
        assert_eq!(c.doubled_guard().working_digits(), 60);
    }

    #[test]
    fn arithmetic_takes_minimum_precision() {
        let a = BigReal::from_int(3, 40);
        let b = BigReal::from_int(7, 80);
        assert_eq!((&a + &b).digits(), 40);
        assert_eq!((&b * &a).digits(), 40);
        assert_eq!((&b / 2).digits(), 80);
    }

    #[test]
    fn unknown_constant_is_a_domain_error() {
        assert!(matches!(
            constant_by_name("euler", &ctx(20)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn constants_at_twenty_digits() {
        let c = ctx(20);
        assert_eq!(
            constant(ConstantName::Catalan, &c).to_decimal(20),
            "0.91596559417721901505"
        );
        assert_eq!(
            constant(ConstantName::Zeta3, &c).to_decimal(21),
            "1.20205690315959428540"
        );
    }

    #[test]
    fn gamma_known_values() {
        let c = ctx(30);
        let w = c.working_digits();
        let half = BigReal::from_ratio(1, 2, w);
        let g = gamma(&half, &c).unwrap();
        let root_pi = pi(w).sqrt();
        assert!((&g - &root_pi).abs() < c.tolerance());
        assert!(gamma(&BigReal::from_int(5, w), &c).unwrap() == 24);
        assert!(gamma(&BigReal::from_int(0, w), &c).is_err());
        assert!(gamma(&BigReal::from_int(-3, w), &c).is_err());
        assert!(gamma_at(&BigReal::from_int(-2, w), w).is_err());
    }

    #[test]
    fn cancellation_threshold() {
        let big = BigReal::from_int(1, 30);
        let small = BigReal::pow10(-20, 30);
        assert!(cancellation_detected(&small, &big, 15));
        assert!(!cancellation_detected(&BigReal::pow10(-5, 30), &big, 15));
    }
}
