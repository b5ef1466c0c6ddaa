//! Complete elliptic integrals of the first and second kind.
//!
//! Everything is computed from one arithmetic-geometric mean iteration that
//! takes the modulus *and* its complement as separate inputs. Callers that
//! know `x' = sqrt(1 - x^2)` accurately (the quadrature nodes do) therefore
//! never lose digits near `x = 1`, where `K` has its logarithmic singularity.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::mp::{pi, BigReal, PrecisionContext};

/// Which of the four complete elliptic integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EllipticKind {
    K,
    E,
    /// K'(x) = K(sqrt(1 - x^2))
    Kc,
    /// E'(x) = E(sqrt(1 - x^2))
    Ec,
}

impl EllipticKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EllipticKind::K => "K",
            EllipticKind::E => "E",
            EllipticKind::Kc => "Kc",
            EllipticKind::Ec => "Ec",
        }
    }

    /// The same integral at the complementary modulus (K <-> K', E <-> E').
    pub fn complement(&self) -> Self {
        match self {
            EllipticKind::K => EllipticKind::Kc,
            EllipticKind::E => EllipticKind::Ec,
            EllipticKind::Kc => EllipticKind::K,
            EllipticKind::Ec => EllipticKind::E,
        }
    }
}

impl fmt::Display for EllipticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EllipticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" => Ok(EllipticKind::K),
            "E" => Ok(EllipticKind::E),
            "Kc" | "K'" | "Kp" => Ok(EllipticKind::Kc),
            "Ec" | "E'" | "Ep" => Ok(EllipticKind::Ec),
            other => Err(Error::Parse(format!("unknown elliptic kind {other:?}"))),
        }
    }
}

/// K, E and K - E at one modulus.
#[derive(Clone, Debug)]
pub struct CompletePair {
    pub k: BigReal,
    pub e: BigReal,
    /// K - E, accumulated directly so it keeps full relative accuracy as x -> 0.
    pub k_minus_e: BigReal,
}

/// K(x), E(x) and K(x) - E(x) from the AGM of (1, x'), where `xp` must be
/// the complementary modulus of `x`.
///
/// E comes from the companion sum `K - E = K * sum_n 2^(n-1) c_n^2`
/// with `c_0 = x` and `c_(n+1) = c_n^2 / (4 a_(n+1))`.
pub fn complete_pair(x: &BigReal, xp: &BigReal, digits: u32) -> Result<CompletePair> {
    if xp.is_zero() {
        return Err(domain("K(x) has a logarithmic singularity at x = 1"));
    }
    if x.is_negative() || xp.is_negative() {
        return Err(domain("modulus and complementary modulus must be nonnegative"));
    }
    let x = x.with_digits(digits);
    let mut a = BigReal::one(digits);
    let mut b = xp.with_digits(digits);
    let mut c = x.clone();
    let mut sum = c.square().mul_pow2(-1);
    let eps = BigReal::pow10(-(digits as i32) - 3, digits);
    let mut weight = 0i32;
    for _ in 0..200 {
        let gap = (&a - &b).abs();
        if gap <= &eps * &a && c.square().mul_pow2(weight) < eps {
            break;
        }
        let a_next = (&a + &b).mul_pow2(-1);
        c = c.square() / (&a_next * 4);
        b = (&a * &b).sqrt();
        a = a_next;
        sum = sum + c.square().mul_pow2(weight);
        weight += 1;
    }
    let k = pi(digits) / (a * 2);
    let k_minus_e = &k * &sum;
    let e = &k - &k_minus_e;
    Ok(CompletePair { k, e, k_minus_e })
}

/// `sqrt((1 - x)(1 + x))`, the complementary modulus without cancellation.
pub fn complementary_modulus(x: &BigReal) -> BigReal {
    let one = BigReal::one(x.digits());
    ((&one - x) * (&one + x)).sqrt()
}

fn check_unit(x: &BigReal, what: &str) -> Result<()> {
    if x.is_negative() || *x > 1 {
        return Err(domain(format!("{what} requires 0 <= x <= 1")));
    }
    Ok(())
}

/// K(x) for 0 <= x < 1.
pub fn ell_k(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_unit(x, "K(x)")?;
    if *x == 1 {
        return Err(domain("K(x) has a logarithmic singularity at x = 1"));
    }
    let w = ctx.working_digits();
    let x = x.with_digits(w);
    Ok(complete_pair(&x, &complementary_modulus(&x), w)?.k)
}

/// E(x) for 0 <= x <= 1.
pub fn ell_e(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_unit(x, "E(x)")?;
    let w = ctx.working_digits();
    if *x == 1 {
        return Ok(BigReal::one(w));
    }
    let x = x.with_digits(w);
    Ok(complete_pair(&x, &complementary_modulus(&x), w)?.e)
}

/// K'(x) = K(sqrt(1 - x^2)) for 0 < x <= 1.
pub fn ell_kc(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_unit(x, "K'(x)")?;
    if x.is_zero() {
        return Err(domain("K'(x) has a logarithmic singularity at x = 0"));
    }
    let w = ctx.working_digits();
    let x = x.with_digits(w);
    Ok(complete_pair(&complementary_modulus(&x), &x, w)?.k)
}

/// E'(x) = E(sqrt(1 - x^2)) for 0 <= x <= 1.
pub fn ell_ec(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_unit(x, "E'(x)")?;
    let w = ctx.working_digits();
    if x.is_zero() {
        return Ok(BigReal::one(w));
    }
    let x = x.with_digits(w);
    Ok(complete_pair(&complementary_modulus(&x), &x, w)?.e)
}

/// Evaluates one of the four integrals.
pub fn ell(kind: EllipticKind, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    match kind {
        EllipticKind::K => ell_k(x, ctx),
        EllipticKind::E => ell_e(x, ctx),
        EllipticKind::Kc => ell_kc(x, ctx),
        EllipticKind::Ec => ell_ec(x, ctx),
    }
}

/// Modulus `y / sqrt(1 + y^2)`, its complement `1 / sqrt(1 + y^2)` and `sqrt(1 + y^2)`.
fn imaginary_reduction(y: &BigReal, digits: u32) -> Result<(BigReal, BigReal, BigReal)> {
    if y.is_negative() {
        return Err(domain("imaginary-argument formulas take y >= 0"));
    }
    let y = y.with_digits(digits);
    let s = (y.square() + 1).sqrt();
    Ok((&y / &s, s.recip(), s))
}

/// K(iy) = K(y / sqrt(1 + y^2)) / sqrt(1 + y^2).
pub fn ell_k_imag(y: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let w = ctx.working_digits();
    let (m, mc, s) = imaginary_reduction(y, w)?;
    Ok(complete_pair(&m, &mc, w)?.k / s)
}

/// E(iy) = sqrt(1 + y^2) E(y / sqrt(1 + y^2)).
pub fn ell_e_imag(y: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let w = ctx.working_digits();
    let (m, mc, s) = imaginary_reduction(y, w)?;
    Ok(complete_pair(&m, &mc, w)?.e * s)
}

/// K(iy) at a given working precision (used by the expression evaluator).
pub(crate) fn k_imag_at(y: &BigReal, digits: u32) -> Result<BigReal> {
    let (m, mc, s) = imaginary_reduction(y, digits)?;
    Ok(complete_pair(&m, &mc, digits)?.k / s)
}

pub(crate) fn e_imag_at(y: &BigReal, digits: u32) -> Result<BigReal> {
    let (m, mc, s) = imaginary_reduction(y, digits)?;
    Ok(complete_pair(&m, &mc, digits)?.e * s)
}

/// The four classical quadratic (Landen) transformations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadTransform {
    /// K'(x) = 2/(1+x) K((1-x)/(1+x))
    K1,
    /// K(x) = 1/(1+x) K(2 sqrt(x)/(1+x))
    K2,
    /// E'(x) = (1+x) E((1-x)/(1+x)) - x K'(x)
    E1,
    /// E(x) = (1+x)/2 E(2 sqrt(x)/(1+x)) + (1-x^2)/2 K(x)
    E2,
}

impl FromStr for QuadTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k1" => Ok(QuadTransform::K1),
            "k2" => Ok(QuadTransform::K2),
            "e1" => Ok(QuadTransform::E1),
            "e2" => Ok(QuadTransform::E2),
            other => Err(Error::Parse(format!("unknown quadratic transform {other:?}"))),
        }
    }
}

/// Both sides of a quadratic transform at `x`, each evaluated independently.
pub fn quad_transform(
    which: QuadTransform,
    x: &BigReal,
    ctx: &PrecisionContext,
) -> Result<(BigReal, BigReal)> {
    if x.is_negative() || *x >= 1 || (x.is_zero() && which == QuadTransform::K1) {
        return Err(domain("quadratic transforms are evaluated on 0 < x < 1"));
    }
    let w = ctx.working_digits();
    let x = x.with_digits(w);
    let xp = complementary_modulus(&x);
    let one = BigReal::one(w);
    let opx = &one + &x;
    // (1-x)/(1+x) and 2 sqrt(x)/(1+x) are complementary moduli of each other.
    let landen_down = (&one - &x) / &opx;
    let landen_up = x.sqrt() * 2 / &opx;
    Ok(match which {
        QuadTransform::K1 => {
            let lhs = complete_pair(&xp, &x, w)?.k;
            let rhs = complete_pair(&landen_down, &landen_up, w)?.k * 2 / &opx;
            (lhs, rhs)
        }
        QuadTransform::K2 => {
            let lhs = complete_pair(&x, &xp, w)?.k;
            let rhs = complete_pair(&landen_up, &landen_down, w)?.k / &opx;
            (lhs, rhs)
        }
        QuadTransform::E1 => {
            let lhs = complete_pair(&xp, &x, w)?.e;
            let kc = complete_pair(&xp, &x, w)?.k;
            let rhs = complete_pair(&landen_down, &landen_up, w)?.e * &opx - &x * kc;
            (lhs, rhs)
        }
        QuadTransform::E2 => {
            let at_x = complete_pair(&x, &xp, w)?;
            let rhs = complete_pair(&landen_up, &landen_down, w)?.e * &opx / 2
                + xp.square() * &at_x.k / 2;
            (at_x.e, rhs)
        }
    })
}

/// `2F1(1/3, 2/3; 1; 1 - s^3)` as `1 / AG3(1, s)` with the cubic AGM
/// `a <- (a + 2b)/3`, `b <- cbrt(b (a^2 + ab + b^2) / 3)`.
pub(crate) fn cubic_2f1_from_root(s: &BigReal, digits: u32) -> Result<BigReal> {
    if s.is_negative() || *s > 1 {
        return Err(domain("cubic AGM needs 0 <= s <= 1"));
    }
    if s.is_zero() {
        return Err(domain("2F1(1/3, 2/3; 1; z) is singular at z = 1"));
    }
    let mut a = BigReal::one(digits);
    let mut b = s.with_digits(digits);
    let eps = BigReal::pow10(-(digits as i32) - 3, digits);
    for _ in 0..200 {
        if (&a - &b).abs() <= &eps * &a {
            break;
        }
        let a_next = (&a + &b * 2) / 3;
        let b_next = (&b * (a.square() + &a * &b + b.square()) / 3).cbrt();
        a = a_next;
        b = b_next;
    }
    Ok(a.recip())
}

/// `2F1(1/3, 2/3; 1; z)` for 0 <= z < 1.
pub fn cubic_2f1(z: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    check_unit(z, "2F1(1/3, 2/3; 1; z)")?;
    let w = ctx.working_digits();
    let one = BigReal::one(w);
    cubic_2f1_from_root(&(&one - &z.with_digits(w)).cbrt(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::{constant, ConstantName};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    /// `pi/2 * sum (a)_k (b)_k / (k!)^2 x^(2k)` with a geometric tail bound.
    fn series_oracle(upper: (i64, i64), x: &BigReal) -> BigReal {
        let d = x.digits();
        let x2 = x.square();
        let a = BigReal::from_ratio(upper.0, upper.1, d);
        let b = BigReal::from_ratio(1, 2, d);
        let eps = BigReal::pow10(-(d as i32), d);
        let mut term = BigReal::one(d);
        let mut sum = BigReal::zero(d);
        let mut k = 0i64;
        loop {
            sum = sum + &term;
            let ratio = (&a + k) * (&b + k) / ((k + 1) * (k + 1)) * &x2;
            term = term * &ratio;
            k += 1;
            let tail = term.abs() / (BigReal::one(d) - &x2);
            if tail < eps && k > 2 {
                break;
            }
        }
        sum * pi(d) / 2
    }

    fn close(a: &BigReal, b: &BigReal, digits: i32) -> bool {
        (a - b).abs() < BigReal::pow10(-digits, a.digits())
    }

    #[test]
    fn values_at_zero_and_one() {
        let c = ctx();
        let w = c.working_digits();
        let zero = BigReal::zero(w);
        let one = BigReal::one(w);
        let half_pi = pi(w) / 2;
        assert!(close(&ell_k(&zero, &c).unwrap(), &half_pi, 40));
        assert!(close(&ell_e(&zero, &c).unwrap(), &half_pi, 40));
        assert!(ell_e(&one, &c).unwrap() == 1);
        assert!(close(&ell_kc(&one, &c).unwrap(), &half_pi, 40));
        assert!(ell_ec(&zero, &c).unwrap() == 1);
    }

    #[test]
    fn domain_errors() {
        let c = ctx();
        let w = c.working_digits();
        assert!(ell_k(&BigReal::one(w), &c).is_err());
        assert!(ell_e(&BigReal::from_ratio(3, 2, w), &c).is_err());
        assert!(ell_kc(&BigReal::zero(w), &c).is_err());
        assert!(ell_ec(&BigReal::from_int(-1, w), &c).is_err());
        assert!(ell_k_imag(&BigReal::from_int(-1, w), &c).is_err());
    }

    #[test]
    fn k_and_e_at_one_half_match_series() {
        let c = ctx();
        let w = c.working_digits();
        let half = BigReal::from_ratio(1, 2, w);
        let k = ell_k(&half, &c).unwrap();
        let e = ell_e(&half, &c).unwrap();
        assert!(k.to_decimal(21).starts_with("1.6857503548125960428"));
        assert!(e.to_decimal(21).starts_with("1.4674622093394271554"));
        assert!(close(&k, &series_oracle((1, 2), &half), 40));
        assert!(close(&e, &series_oracle((-1, 2), &half), 40));
    }

    #[test]
    fn agm_matches_series_on_a_grid() {
        let c = ctx();
        let w = c.working_digits();
        for i in 1..=9 {
            let x = BigReal::from_ratio(i, 10, w);
            assert!(close(&ell_k(&x, &c).unwrap(), &series_oracle((1, 2), &x), 25));
            assert!(close(&ell_e(&x, &c).unwrap(), &series_oracle((-1, 2), &x), 25));
        }
    }

    #[test]
    fn self_complementary_point() {
        let c = ctx();
        let w = c.working_digits();
        let r = BigReal::from_ratio(1, 2, w).sqrt();
        let k = ell_k(&r, &c).unwrap();
        let kc = ell_kc(&r, &c).unwrap();
        assert!(close(&k, &kc, 40));
        let g = constant(ConstantName::GammaQuarter, &c);
        let expected = g.powi(4) / (pi(w) * 16);
        assert!(close(&k.square(), &expected, 40));
    }

    #[test]
    fn imaginary_argument() {
        let c = ctx();
        let w = c.working_digits();
        let zero = BigReal::zero(w);
        assert!(close(&ell_k_imag(&zero, &c).unwrap(), &(pi(w) / 2), 40));
        assert!(close(&ell_e_imag(&zero, &c).unwrap(), &(pi(w) / 2), 40));
        let r = BigReal::from_ratio(1, 2, w).sqrt();
        let expected = ell_k(&r, &c).unwrap() * &r;
        assert!(close(
            &ell_k_imag(&BigReal::one(w), &c).unwrap(),
            &expected,
            40
        ));
    }

    #[test]
    fn quadratic_transforms_named_points() {
        let c = ctx();
        let w = c.working_digits();
        let (l, r) = quad_transform(QuadTransform::K1, &BigReal::from_ratio(1, 2, w), &c).unwrap();
        assert!(close(&l, &r, 40));
        let (l, r) = quad_transform(QuadTransform::E2, &BigReal::from_ratio(1, 3, w), &c).unwrap();
        assert!(close(&l, &r, 40));
        let tiny = BigReal::pow10(-25, w);
        let (l, r) = quad_transform(QuadTransform::K2, &tiny, &c).unwrap();
        assert!(close(&l, &r, 40));
        assert!(close(&l, &(pi(w) / 2), 20));
    }

    #[test]
    fn k_minus_e_keeps_relative_accuracy_near_zero() {
        let w = 60;
        let x = BigReal::pow10(-30, w);
        let p = complete_pair(&x, &complementary_modulus(&x), w).unwrap();
        // K - E = pi x^2 / 4 (1 + 3x^2/8 + ...)
        let expected = pi(w) * x.square() / 4;
        let rel = ((&p.k_minus_e - &expected) / &expected).abs();
        assert!(rel < BigReal::pow10(-50, w));
    }

    #[test]
    fn cubic_agm_matches_series() {
        let c = ctx();
        let w = c.working_digits();
        let z = BigReal::from_ratio(3, 10, w);
        // direct series sum_k (1/3)_k (2/3)_k / (k!)^2 z^k
        let mut term = BigReal::one(w);
        let mut sum = BigReal::zero(w);
        for k in 0..400i64 {
            sum = sum + &term;
            term = term * (BigReal::from_ratio(1, 3, w) + k) * (BigReal::from_ratio(2, 3, w) + k)
                / ((k + 1) * (k + 1))
                * &z;
        }
        assert!(close(&cubic_2f1(&z, &c).unwrap(), &sum, 40));
    }
}
