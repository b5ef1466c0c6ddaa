//! Generalized hypergeometric series `pFq`.
//!
//! Series at unit argument whose terms decay only algebraically (the 4F3 and
//! 7F6 values behind the moment formulas decay like `k^-(1+s)` with `s` as
//! small as 1) are summed directly up to `N` terms and completed with an
//! asymptotic expansion of the remainder. Because the term ratio `R(k)` is a
//! rational function, the remainder satisfies
//!
//! ```text
//! T(N) = t_N * phi(N),   phi(N) - R(N) phi(N + 1) = 1,
//! ```
//!
//! and `phi(N) = N * sum_j d_j N^-j` has coefficients that follow from
//! matching powers of `1/N`, with `d_0 = 1/s`. The same coefficients serve
//! every `N`, so the estimate at `N` and `2N` costs one extra block of terms
//! and the difference is reported as the error estimate.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};

use crate::error::{domain, Error, Result};
use crate::mp::{gamma_at, BigReal, PrecisionContext};

/// A series parameter: exact rational when possible, otherwise a real.
#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Exact(Rational),
    Real(BigReal),
}

impl Param {
    pub fn ratio(num: i64, den: i64) -> Self {
        Param::Exact(Rational::from((num, den)))
    }

    pub fn int(v: i64) -> Self {
        Param::Exact(Rational::from(v))
    }

    pub fn to_real(&self, digits: u32) -> BigReal {
        match self {
            Param::Exact(q) => BigReal::from_rational(q, digits),
            Param::Real(r) => r.with_digits(digits),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Param::Exact(q) => Some(q),
            Param::Real(_) => None,
        }
    }

    /// `Some(m)` when the parameter equals `-m` for an integer `m >= 0`.
    pub fn nonpositive_integer(&self) -> Option<u64> {
        let as_int = match self {
            Param::Exact(q) if *q.denom() == 1 => Some(q.numer().clone()),
            Param::Real(r) => r.as_exact_integer(),
            _ => None,
        }?;
        if as_int <= 0 {
            (-as_int).to_u64()
        } else {
            None
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Param::Exact(q) => *q == 1,
            Param::Real(r) => *r == 1,
        }
    }
}

impl From<Rational> for Param {
    fn from(q: Rational) -> Self {
        Param::Exact(q)
    }
}

impl From<BigReal> for Param {
    fn from(r: BigReal) -> Self {
        Param::Real(r)
    }
}

impl From<i64> for Param {
    fn from(v: i64) -> Self {
        Param::int(v)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Exact(q) => write!(f, "{q}"),
            Param::Real(r) => write!(f, "{}", r.to_decimal(20)),
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    /// `"3/2"`, `"-1"`, or a decimal literal such as `"0.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(q) = s.parse::<Rational>() {
            return Ok(Param::Exact(q));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let all_digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
            let int_body = int.strip_prefix('-').unwrap_or(int);
            if all_digits(int_body) && all_digits(frac) && !frac.is_empty() {
                let numer: Integer = format!("{int}{frac}")
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad parameter {s:?}")))?;
                let denom = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
                return Ok(Param::Exact(Rational::from((numer, denom))));
            }
        }
        Err(Error::Parse(format!("bad hypergeometric parameter {s:?}")))
    }
}

/// `pFq(upper; lower; z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypSpec {
    pub upper: Vec<Param>,
    pub lower: Vec<Param>,
    pub z: Param,
}

impl HypSpec {
    pub fn new(upper: Vec<Param>, lower: Vec<Param>, z: Param) -> Self {
        Self { upper, lower, z }
    }

    /// Unit-argument series built from `(num, den)` pairs.
    pub fn unit(upper: &[(i64, i64)], lower: &[(i64, i64)]) -> Self {
        let conv = |v: &[(i64, i64)]| v.iter().map(|&(n, d)| Param::ratio(n, d)).collect();
        Self::new(conv(upper), conv(lower), Param::int(1))
    }

    /// Order at which the series terminates (the smallest `m` with an upper
    /// parameter equal to `-m`).
    pub fn terminating_order(&self) -> Option<u64> {
        self.upper.iter().filter_map(Param::nonpositive_integer).min()
    }

    /// `sum lower - sum upper`; the series at `z = 1` converges iff this is positive.
    pub fn excess(&self, digits: u32) -> BigReal {
        let total = |v: &[Param]| {
            v.iter()
                .fold(BigReal::zero(digits), |acc, p| acc + p.to_real(digits))
        };
        total(&self.lower) - total(&self.upper)
    }

    /// Removes pairs of identical exact parameters from the two lists.
    pub fn reduced(&self) -> HypSpec {
        let mut upper = self.upper.clone();
        let mut lower = Vec::with_capacity(self.lower.len());
        for b in &self.lower {
            let hit = b.as_exact().and_then(|qb| {
                upper
                    .iter()
                    .position(|a| a.as_exact() == Some(qb) && a.nonpositive_integer().is_none())
            });
            match hit {
                Some(i) => {
                    upper.remove(i);
                }
                None => lower.push(b.clone()),
            }
        }
        HypSpec::new(upper, lower, self.z.clone())
    }

    fn is_exact(&self) -> bool {
        self.upper
            .iter()
            .chain(&self.lower)
            .chain(std::iter::once(&self.z))
            .all(|p| p.as_exact().is_some())
    }
}

impl fmt::Display for HypSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Param]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "{}F{}({};{};{})",
            self.upper.len(),
            self.lower.len(),
            join(&self.upper),
            join(&self.lower),
            self.z
        )
    }
}

impl FromStr for HypSpec {
    type Err = Error;

    /// Parses `"4F3(1/2,1/2,1,1;1,3/2,3/2;1)"` or the bare `"1/2,1/2;1;1/4"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = match s.find('(') {
            Some(open) if s.ends_with(')') => &s[open + 1..s.len() - 1],
            _ => s,
        };
        let parts: Vec<&str> = body.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "expected `upper;lower;z`, got {s:?}"
            )));
        }
        let list = |t: &str| -> Result<Vec<Param>> {
            t.split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(str::parse)
                .collect()
        };
        Ok(HypSpec::new(list(parts[0])?, list(parts[1])?, parts[2].parse()?))
    }
}

/// Outcome of a series evaluation.
#[derive(Clone, Debug)]
pub struct PfqResult {
    pub value: BigReal,
    /// Explicit terms summed.
    pub terms: usize,
    /// Asymptotic remainder added at unit argument, if any.
    pub tail: Option<BigReal>,
    /// Change of the value between `N` and `2N` explicit terms (zero for
    /// exact terminating sums).
    pub error_estimate: BigReal,
}

/// Rising factorial `a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: &BigReal, n: u64, ctx: &PrecisionContext) -> BigReal {
    let w = ctx.working_digits();
    let a = a.with_digits(w);
    (0..n).fold(BigReal::one(w), |acc, k| acc * (&a + k as i64))
}

/// Exact rising factorial of a rational.
pub fn pochhammer_exact(a: &Rational, n: u64) -> Rational {
    (0..n).fold(Rational::from(1), |acc, k| acc * (a.clone() + Integer::from(k)))
}

/// Evaluates the series to `ctx.digits()` digits.
pub fn pfq(spec: &HypSpec, ctx: &PrecisionContext) -> Result<BigReal> {
    pfq_detailed(spec, ctx, None).map(|r| r.value)
}

/// Like [`pfq`], with an explicit number of direct terms before the
/// asymptotic remainder at `z = 1` (the default scales with precision).
pub fn pfq_detailed(
    spec: &HypSpec,
    ctx: &PrecisionContext,
    terms: Option<usize>,
) -> Result<PfqResult> {
    let w = ctx.working_digits();
    let spec = spec.reduced();
    let order = spec.terminating_order();

    for b in &spec.lower {
        if let Some(m) = b.nonpositive_integer() {
            if order.map_or(true, |k| k > m) {
                return Err(domain(format!(
                    "lower parameter {b} is a nonpositive integer reached before termination"
                )));
            }
        }
    }

    if let Some(k) = order {
        let value = if spec.is_exact() {
            BigReal::from_rational(&terminating_exact(&spec, k), w)
        } else {
            direct_terms(&spec, w, k as usize + 1).0
        };
        return Ok(PfqResult {
            value,
            terms: k as usize + 1,
            tail: None,
            error_estimate: BigReal::zero(w),
        });
    }

    let p = spec.upper.len();
    let q = spec.lower.len();
    let z = spec.z.to_real(w);
    if p > q + 1 {
        return Err(Error::Refused(format!(
            "{p}F{q} with {p} > {q} + 1 diverges for every z != 0"
        )));
    }
    if p == q + 1 {
        if spec.z.is_one() {
            let s = spec.excess(w);
            if !(s > 0) {
                return Err(Error::Refused(format!(
                    "{spec} diverges at z = 1 (parameter excess {} <= 0)",
                    s.to_decimal(10)
                )));
            }
            return unit_argument(&spec, &s, w, terms);
        }
        if !(z.abs() < 1) {
            return Err(Error::Refused(format!(
                "{spec}: only |z| < 1 or z = 1 is supported"
            )));
        }
    }
    geometric(&spec, &z, w)
}

/// Exact value of a terminating series with rational parameters.
pub fn pfq_exact(spec: &HypSpec) -> Option<Rational> {
    let spec = spec.reduced();
    let k = spec.terminating_order()?;
    let blocked = spec
        .lower
        .iter()
        .any(|b| b.nonpositive_integer().is_some_and(|m| k > m));
    (spec.is_exact() && !blocked).then(|| terminating_exact(&spec, k))
}

fn terminating_exact(spec: &HypSpec, order: u64) -> Rational {
    let exact = |p: &Param| p.as_exact().cloned().expect("exact parameter");
    let upper: Vec<Rational> = spec.upper.iter().map(exact).collect();
    let lower: Vec<Rational> = spec.lower.iter().map(exact).collect();
    let z = exact(&spec.z);
    let mut term = Rational::from(1);
    let mut sum = term.clone();
    for k in 0..order {
        let kq = Integer::from(k);
        for a in &upper {
            term *= a.clone() + &kq;
        }
        for b in &lower {
            term /= b.clone() + &kq;
        }
        term *= &z;
        term /= Integer::from(k + 1);
        sum += &term;
    }
    sum
}

/// Term ratio `t_(k+1) / t_k`.
fn ratio(upper: &[BigReal], lower: &[BigReal], z: &BigReal, k: i64) -> BigReal {
    let d = z.digits();
    let mut num = z.clone();
    for a in upper {
        num = num * (a + k);
    }
    let mut den = BigReal::from_int(k + 1, d);
    for b in lower {
        den = den * (b + k);
    }
    num / den
}

/// Sum of the first `n` terms and the `n`-th term.
fn direct_terms(spec: &HypSpec, w: u32, n: usize) -> (BigReal, BigReal) {
    let upper: Vec<BigReal> = spec.upper.iter().map(|p| p.to_real(w)).collect();
    let lower: Vec<BigReal> = spec.lower.iter().map(|p| p.to_real(w)).collect();
    let z = spec.z.to_real(w);
    let mut term = BigReal::one(w);
    let mut sum = BigReal::zero(w);
    for k in 0..n {
        sum = sum + &term;
        term = term * ratio(&upper, &lower, &z, k as i64);
    }
    (sum, term)
}

fn max_param(spec: &HypSpec) -> f64 {
    spec.upper
        .iter()
        .chain(&spec.lower)
        .map(|p| p.to_real(20).to_f64().abs())
        .fold(0.0, f64::max)
}

/// Direct summation for |z| < 1 (p = q + 1) or any z (p <= q).
fn geometric(spec: &HypSpec, z: &BigReal, w: u32) -> Result<PfqResult> {
    let upper: Vec<BigReal> = spec.upper.iter().map(|p| p.to_real(w)).collect();
    let lower: Vec<BigReal> = spec.lower.iter().map(|p| p.to_real(w)).collect();
    let eps = BigReal::pow10(-(w as i32), w);
    let zabs = z.abs();
    let k_min = (2.0 * max_param(spec) + 2.0 * zabs.to_f64() + 4.0).ceil() as i64;
    let mut term = BigReal::one(w);
    let mut sum = BigReal::zero(w);
    let mut k = 0i64;
    loop {
        sum = sum + &term;
        let r = ratio(&upper, &lower, z, k);
        term = term * &r;
        k += 1;
        if k > k_min {
            let rate = r.abs().max(if spec.upper.len() > spec.lower.len() {
                zabs.clone()
            } else {
                BigReal::zero(w)
            });
            if rate < 1 {
                let bound = term.abs() / (BigReal::one(w) - &rate);
                if bound <= &eps * &sum.abs().max(BigReal::one(w)) {
                    return Ok(PfqResult {
                        value: sum,
                        terms: k as usize,
                        tail: None,
                        error_estimate: bound,
                    });
                }
            }
        }
        if k > 50_000_000 {
            return Err(Error::Refused(format!(
                "{spec}: direct summation needs more than 5e7 terms"
            )));
        }
    }
}

/// Truncated power series in `u`.
type Series = Vec<BigReal>;

fn series_mul_linear(s: &mut Series, c: &BigReal) {
    // s <- s * (1 + c u), truncated
    for i in (1..s.len()).rev() {
        let add = &s[i - 1] * c;
        s[i] = &s[i] + &add;
    }
}

fn series_div_linear(s: &mut Series, c: &BigReal) {
    // s <- s / (1 + c u)
    for i in 1..s.len() {
        let sub = &s[i - 1] * c;
        s[i] = &s[i] - &sub;
    }
}

/// Coefficients `d_j` of `T(N) / t_N = N * sum_j d_j N^-j`.
fn remainder_coefficients(
    upper: &[BigReal],
    lower: &[BigReal],
    excess: &BigReal,
    count: usize,
    digits: u32,
) -> Vec<BigReal> {
    let len = count + 2;
    let mut p: Series = vec![BigReal::zero(digits); len];
    p[0] = BigReal::one(digits);
    for a in upper {
        series_mul_linear(&mut p, a);
    }
    for b in lower {
        series_div_linear(&mut p, b);
    }
    // q[j][k] = coefficient of u^k in (1 - P(u) (1+u)^-j) / u
    let one = BigReal::one(digits);
    let mut q: Vec<Series> = Vec::with_capacity(count);
    let mut shifted = p;
    for _ in 0..count {
        q.push(shifted[1..].iter().map(|c| -c).collect());
        series_div_linear(&mut shifted, &one);
    }
    let mut d: Vec<BigReal> = Vec::with_capacity(count);
    for k in 0..count {
        let mut acc = if k == 0 {
            BigReal::one(digits)
        } else {
            BigReal::zero(digits)
        };
        for (j, dj) in d.iter().enumerate() {
            acc = acc - dj * &q[j][k - j];
        }
        // q[k][0] = s + k
        let lead = excess + k as i64;
        d.push(acc / lead);
    }
    d
}

fn remainder(coeffs: &[BigReal], term: &BigReal, n: usize, eps: &BigReal) -> BigReal {
    let d = term.digits();
    let inv = BigReal::from_int(n as i64, d).recip();
    let mut power = BigReal::one(d);
    let mut pieces = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        let piece = c * &power;
        let small = piece.abs() < *eps;
        pieces.push(piece);
        if small {
            break;
        }
        power = power * &inv;
    }
    // truncate the asymptotic series at its smallest term; isolated
    // near-zero coefficients do not count as the minimum
    let sizes: Vec<f64> = pieces.iter().map(|p| p.abs().log10_abs()).collect();
    let smoothed = |j: usize| sizes[j].max(sizes[j.saturating_sub(1)]).max(sizes[(j + 1).min(sizes.len() - 1)]);
    let cut = (0..sizes.len())
        .min_by(|&a, &b| smoothed(a).total_cmp(&smoothed(b)))
        .unwrap_or(0);
    let sum = pieces[..=cut]
        .iter()
        .fold(BigReal::zero(d), |acc, p| acc + p);
    sum * term * n as i64
}

fn unit_argument(
    spec: &HypSpec,
    excess: &BigReal,
    w: u32,
    terms: Option<usize>,
) -> Result<PfqResult> {
    let inner = w + 10;
    let upper: Vec<BigReal> = spec.upper.iter().map(|p| p.to_real(inner)).collect();
    let lower: Vec<BigReal> = spec.lower.iter().map(|p| p.to_real(inner)).collect();
    let one = BigReal::one(inner);
    let excess = excess.with_digits(inner);
    let n = terms.unwrap_or_else(|| (w as usize).max(40) + (4.0 * max_param(spec)).ceil() as usize);
    let coeffs = remainder_coefficients(&upper, &lower, &excess, inner as usize, inner);
    let eps = BigReal::pow10(-(inner as i32), inner);

    let mut term = BigReal::one(inner);
    let mut sum = BigReal::zero(inner);
    let mut first = None;
    for k in 0..2 * n {
        if k == n {
            let tail = remainder(&coeffs, &term, n, &eps);
            first = Some(&sum + &tail);
        }
        sum = sum + &term;
        term = term * ratio(&upper, &lower, &one, k as i64);
    }
    let tail = remainder(&coeffs, &term, 2 * n, &eps);
    let value = &sum + &tail;
    let error_estimate = (&value - &first.expect("first estimate")).abs();
    Ok(PfqResult {
        value: value.with_digits(w),
        terms: 2 * n,
        tail: Some(tail.with_digits(w)),
        error_estimate: error_estimate.with_digits(w),
    })
}

/// Gauss's sum `2F1(a, b; c; 1) = Γ(c) Γ(c-a-b) / (Γ(c-a) Γ(c-b))`.
pub fn gauss_2f1_unit(
    a: &BigReal,
    b: &BigReal,
    c: &BigReal,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    let w = ctx.working_digits();
    let (a, b, c) = (a.with_digits(w), b.with_digits(w), c.with_digits(w));
    let excess = &c - &a - &b;
    if !(excess > 0) {
        return Err(Error::Refused(
            "Gauss's sum needs c - a - b > 0".to_string(),
        ));
    }
    let num = gamma_at(&c, w)? * gamma_at(&excess, w)?;
    let den = gamma_at(&(&c - &a), w)? * gamma_at(&(&c - &b), w)?;
    Ok(num / den)
}

/// Dixon's sum of the well-poised `3F2(a, b, c; 1+a-b, 1+a-c; 1)`.
pub fn dixon_3f2(
    a: &BigReal,
    b: &BigReal,
    c: &BigReal,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    let w = ctx.working_digits();
    let (a, b, c) = (a.with_digits(w), b.with_digits(w), c.with_digits(w));
    let one = BigReal::one(w);
    let lower1 = &one + &a - &b;
    let lower2 = &one + &a - &c;
    for l in [&lower1, &lower2] {
        if Param::Real(l.clone()).nonpositive_integer().is_some() {
            return Err(domain("Dixon's sum: a lower parameter is a nonpositive integer"));
        }
    }
    let terminating = [&a, &b, &c]
        .iter()
        .any(|p| Param::Real((*p).clone()).nonpositive_integer().is_some());
    let half_a = a.mul_pow2(-1);
    if !terminating && !(&half_a - &b - &c > -1) {
        return Err(Error::Refused(
            "Dixon's sum needs Re(a/2 - b - c) > -1".to_string(),
        ));
    }
    // Γ(1 + a/2) / Γ(1 + a), with its limit when a is a nonpositive integer
    let lead = match Param::Real(a.clone()).nonpositive_integer() {
        Some(0) => BigReal::one(w),
        Some(m) if m % 2 == 1 => return Ok(BigReal::zero(w)),
        Some(m) => {
            let half = m / 2;
            // lim Γ(1 - half + d/2) / Γ(1 - m + d) = 2 (-1)^half (m-1)! / (half-1)!
            let ratio = Integer::from(Integer::factorial((m - 1) as u32))
                / Integer::from(Integer::factorial((half - 1) as u32));
            let signed = if half % 2 == 0 { ratio } else { -ratio };
            BigReal::from_integer(&(signed * 2), w)
        }
        None => gamma_at(&(&one + &half_a), w)? / gamma_at(&(&one + &a), w)?,
    };
    let num = gamma_at(&lower1, w)?
        * gamma_at(&lower2, w)?
        * gamma_at(&(&one + &half_a - &b - &c), w)?;
    let den = gamma_at(&(&one + &half_a - &b), w)?
        * gamma_at(&(&one + &half_a - &c), w)?
        * gamma_at(&(&one + &a - &b - &c), w)?;
    Ok(lead * num / den)
}

/// Closed form of the unit-cube integral with kernel `1 / (1 - x(1 - y(1 - z)))^h1`
/// (see [`crate::quad::integrate3d`]): a Gamma prefactor times a very-well-poised 7F6.
pub fn zudilin_7f6(h: &[Param; 6], ctx: &PrecisionContext) -> Result<BigReal> {
    let w = ctx.working_digits();
    let exact: Option<Vec<Rational>> = h.iter().map(|p| p.as_exact().cloned()).collect();
    let param = |q: Rational| Param::Exact(q);
    let (upper, lower, g) = match exact {
        Some(v) => {
            let one = Rational::from(1);
            let h0 = v[0].clone();
            let g: Vec<BigReal> = v.iter().map(|q| BigReal::from_rational(q, w)).collect();
            let mut upper = vec![param(h0.clone()), param(one.clone() + h0.clone() / 2)];
            upper.extend(v[1..].iter().cloned().map(param));
            let mut lower = vec![param(h0.clone() / 2)];
            lower.extend(v[1..].iter().map(|hj| param(one.clone() + &h0 - hj)));
            (upper, lower, g)
        }
        None => {
            let g: Vec<BigReal> = h.iter().map(|p| p.to_real(w)).collect();
            let one = BigReal::one(w);
            let real = |r: BigReal| Param::Real(r);
            let mut upper = vec![real(g[0].clone()), real(&one + &g[0].mul_pow2(-1))];
            upper.extend(g[1..].iter().cloned().map(real));
            let mut lower = vec![real(g[0].mul_pow2(-1))];
            lower.extend(g[1..].iter().map(|hj| real(&one + &g[0] - hj)));
            (upper, lower, g)
        }
    };
    let one = BigReal::one(w);
    let h0p1 = &g[0] + &one;
    let mut num = gamma_at(&h0p1, w)?;
    for j in 2..=4 {
        num = num * gamma_at(&g[j], w)?;
    }
    for j in 1..=4 {
        num = num * gamma_at(&(&h0p1 - &g[j] - &g[j + 1]), w)?;
    }
    let mut den = BigReal::one(w);
    for j in 1..=5 {
        den = den * gamma_at(&(&h0p1 - &g[j]), w)?;
    }
    let series = pfq(&HypSpec::new(upper, lower, Param::int(1)), ctx)?;
    Ok(num / den * series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::ell_k;
    use crate::mp::pi;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    fn close(a: &BigReal, b: &BigReal, digits: i32) -> bool {
        (a - b).abs() < BigReal::pow10(-digits, a.digits().min(b.digits()))
    }

    #[test]
    fn pochhammer_examples() {
        let c = ctx();
        let w = c.working_digits();
        let half = BigReal::from_ratio(1, 2, w);
        assert!(pochhammer(&half, 3, &c) == BigReal::from_ratio(15, 8, w));
        assert!(pochhammer(&BigReal::from_int(7, w), 0, &c) == 1);
        assert!(pochhammer(&BigReal::from_int(-2, w), 3, &c) == 0);
        assert_eq!(pochhammer_exact(&Rational::from((1, 2)), 3), Rational::from((15, 8)));
    }

    #[test]
    fn parse_and_display() {
        let s: HypSpec = "4F3(1/2,1/2,1,1;1,3/2,3/2;1)".parse().unwrap();
        assert_eq!(s.upper.len(), 4);
        assert_eq!(s.to_string(), "4F3(1/2,1/2,1,1;1,3/2,3/2;1)");
        let t: HypSpec = "1/2, 1/2; 1; 0.25".parse().unwrap();
        assert_eq!(t.z, Param::ratio(1, 4));
        assert!("1/2;1".parse::<HypSpec>().is_err());
    }

    #[test]
    fn gauss_hypergeometric_is_complete_elliptic_k() {
        let c = ctx();
        let w = c.working_digits();
        let spec = HypSpec::new(
            vec![Param::ratio(1, 2), Param::ratio(1, 2)],
            vec![Param::int(1)],
            Param::ratio(1, 4),
        );
        let expected = ell_k(&BigReal::from_ratio(1, 2, w), &c).unwrap() * 2 / pi(w);
        assert!(close(&pfq(&spec, &c).unwrap(), &expected, 45));
    }

    #[test]
    fn slowly_convergent_4f3_at_one() {
        let c = ctx();
        let w = c.working_digits();
        let spec = HypSpec::unit(&[(1, 2), (1, 2), (1, 1), (1, 1)], &[(1, 1), (3, 2), (3, 2)]);
        let r = pfq_detailed(&spec, &c, None).unwrap();
        let expected = pi(w).square() / 8;
        assert!(close(&r.value, &expected, 45));
        assert!(r.error_estimate < BigReal::pow10(-40, w));
    }

    #[test]
    fn doubling_the_term_budget_is_stable() {
        let c = ctx();
        let spec = HypSpec::unit(&[(1, 2), (1, 2), (1, 2), (1, 2)], &[(1, 1), (1, 1), (1, 1)]);
        let a = pfq_detailed(&spec, &c, Some(60)).unwrap().value;
        let b = pfq_detailed(&spec, &c, Some(120)).unwrap().value;
        assert!(close(&a, &b, 40));
    }

    #[test]
    fn terminating_series_is_exact() {
        let c = ctx();
        let w = c.working_digits();
        // 2F1(-3, 1/2; 2; 1/3) = 1 - 1/4 + 1/24 - 1/864... computed by hand as a rational
        let spec = HypSpec::new(
            vec![Param::int(-3), Param::ratio(1, 2)],
            vec![Param::int(2)],
            Param::ratio(1, 3),
        );
        let mut expected = Rational::from(0);
        let mut term = Rational::from(1);
        for k in 0..=3i64 {
            expected += &term;
            term = term * Rational::from(((-3 + k) * (2 * k + 1), 2 * (2 + k) * (k + 1))) / 3;
        }
        assert!(pfq(&spec, &c).unwrap() == BigReal::from_rational(&expected, w));
    }

    #[test]
    fn refusals() {
        let c = ctx();
        let divergent = HypSpec::unit(&[(1, 1), (1, 1)], &[(1, 1)]);
        assert!(matches!(pfq(&divergent, &c), Err(Error::Refused(_))));
        let too_many = HypSpec::new(
            vec![Param::int(1), Param::int(1), Param::int(1)],
            vec![Param::int(2)],
            Param::ratio(1, 2),
        );
        assert!(matches!(pfq(&too_many, &c), Err(Error::Refused(_))));
        let bad_lower = HypSpec::new(vec![Param::ratio(1, 2)], vec![Param::int(-2)], Param::ratio(1, 2));
        assert!(matches!(pfq(&bad_lower, &c), Err(Error::Domain(_))));
        // terminates at k = 1 before the zero denominator at k = 3
        let ok_lower = HypSpec::new(vec![Param::int(-1)], vec![Param::int(-2)], Param::ratio(1, 2));
        assert!(pfq(&ok_lower, &c).is_ok());
    }

    #[test]
    fn gauss_sum_examples() {
        let c = ctx();
        let w = c.working_digits();
        let r = |n, d| BigReal::from_ratio(n, d, w);
        let v = gauss_2f1_unit(&r(-1, 2), &r(1, 2), &r(2, 1), &c).unwrap();
        assert!(close(&v, &(BigReal::from_int(8, w) / (pi(w) * 3)), 45));
        let v = gauss_2f1_unit(&r(0, 1), &r(1, 2), &r(2, 1), &c).unwrap();
        assert!(close(&v, &BigReal::one(w), 45));
        let v = gauss_2f1_unit(&r(1, 2), &r(1, 2), &r(2, 1), &c).unwrap();
        assert!(close(&v, &(BigReal::from_int(4, w) / pi(w)), 45));
        assert!(gauss_2f1_unit(&r(1, 2), &r(1, 2), &r(1, 1), &c).is_err());

        let series = pfq(&HypSpec::unit(&[(1, 2), (1, 2)], &[(2, 1)]), &c).unwrap();
        assert!(close(&series, &(BigReal::from_int(4, w) / pi(w)), 40));
    }

    #[test]
    fn dixon_matches_series() {
        let c = ctx();
        let w = c.working_digits();
        let r = |n, d| BigReal::from_ratio(n, d, w);
        let closed = dixon_3f2(&r(1, 2), &r(1, 2), &r(1, 2), &c).unwrap();
        let series = pfq(&HypSpec::unit(&[(1, 2), (1, 2), (1, 2)], &[(1, 1), (1, 1)]), &c).unwrap();
        assert!(close(&closed, &series, 40));

        let closed = dixon_3f2(&r(1, 2), &r(1, 2), &r(-1, 2), &c).unwrap();
        let series = pfq(&HypSpec::unit(&[(1, 2), (1, 2), (-1, 2)], &[(1, 1), (2, 1)]), &c).unwrap();
        assert!(close(&closed, &series, 40));

        // a = -2: three explicit terms
        let (b, cc) = (Rational::from((1, 3)), Rational::from((1, 5)));
        let a = Rational::from(-2);
        let one = Rational::from(1);
        let l1 = one.clone() + &a - &b;
        let l2 = one + &a - &cc;
        let mut expected = Rational::from(0);
        for k in 0..=2u64 {
            let t = pochhammer_exact(&a, k) * pochhammer_exact(&b, k) * pochhammer_exact(&cc, k)
                / (pochhammer_exact(&l1, k)
                    * pochhammer_exact(&l2, k)
                    * Rational::from(Integer::from(Integer::factorial(k as u32))));
            expected += t;
        }
        let closed = dixon_3f2(&r(-2, 1), &r(1, 3), &r(1, 5), &c).unwrap();
        assert!(close(&closed, &BigReal::from_rational(&expected, w), 45));

        assert!(dixon_3f2(&r(1, 2), &r(2, 1), &r(2, 1), &c).is_err());
    }
}
