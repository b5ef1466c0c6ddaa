//! Moments `∫₀¹ xⁿ x'ᵐ K^a E^b K'^c E'^d dx`: closed forms, recurrences and an
//! exact engine for odd moments.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::elliptic::{complete_pair, CompletePair, EllipticKind};
use crate::error::{domain, Error, Result};
use crate::hyper::{dixon_3f2, gauss_2f1_unit, pfq, HypSpec, Param};
use crate::mp::{constant, gamma_at, pi, BigReal, ConstantName, PrecisionContext};
use crate::quad::{integrate3d, integrate_unit, QuadPoint, QuadResult};

/// Exponents of `K, E, K', E'` and the powers of `x` and `x'`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    pub a_k: u32,
    pub a_e: u32,
    pub a_kc: u32,
    pub a_ec: u32,
    pub n: Rational,
    pub m: Rational,
}

impl MomentSpec {
    pub fn new(a_k: u32, a_e: u32, a_kc: u32, a_ec: u32, n: i64) -> Self {
        Self {
            a_k,
            a_e,
            a_kc,
            a_ec,
            n: Rational::from(n),
            m: Rational::from(0),
        }
    }

    /// Parses a product such as `"K Kc"`, `"Kc^2"` or `"E^1 K^1"` at power `n`.
    pub fn parse_product(product: &str, n: Rational, m: Rational) -> Result<Self> {
        let mut spec = Self {
            a_k: 0,
            a_e: 0,
            a_kc: 0,
            a_ec: 0,
            n,
            m,
        };
        for factor in product.split(|c: char| c.is_whitespace() || c == '*') {
            if factor.is_empty() {
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((name, e)) => (
                    name,
                    e.parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?,
                ),
                None => (factor, 1),
            };
            let kind: EllipticKind = name
                .parse()
                .map_err(|_| Error::Parse(format!("unknown elliptic factor {name:?}")))?;
            match kind {
                EllipticKind::K => spec.a_k += exp,
                EllipticKind::E => spec.a_e += exp,
                EllipticKind::Kc => spec.a_kc += exp,
                EllipticKind::Ec => spec.a_ec += exp,
            }
        }
        let d = spec.degree();
        if !(1..=4).contains(&d) {
            return Err(Error::Parse(format!(
                "product {product:?} has elliptic degree {d}; expected 1 to 4"
            )));
        }
        Ok(spec)
    }

    pub fn degree(&self) -> u32 {
        self.a_k + self.a_e + self.a_kc + self.a_ec
    }

    /// Product label such as `"K Kc"` or `"Kc^2"`.
    pub fn product_label(&self) -> String {
        let mut parts = Vec::new();
        for (name, e) in [("K", self.a_k), ("E", self.a_e), ("Kc", self.a_kc), ("Ec", self.a_ec)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        parts.join(" ")
    }

    /// Refuses specs whose integral diverges at either endpoint. The
    /// elliptic factors are at most logarithmic and `x' ~ sqrt(2(1 - x))`,
    /// so `n > -1` and `m > -2`.
    pub fn check_convergent(&self) -> Result<()> {
        if self.n <= -1 {
            return Err(Error::Divergent(format!("{self}: x^{} is not integrable at 0", self.n)));
        }
        if self.m <= -2 {
            return Err(Error::Divergent(format!("{self}: x'^{} is not integrable at 1", self.m)));
        }
        Ok(())
    }

    fn exponents(&self) -> [u32; 4] {
        [self.a_k, self.a_e, self.a_kc, self.a_ec]
    }
}

impl fmt::Display for MomentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{} ", self.n)?;
        if self.m != 0 {
            write!(f, "x'^{} ", self.m)?;
        }
        write!(f, "{}", self.product_label())
    }
}

/// `a + b ζ(3)` with rational `a, b`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Zeta3Linear {
    pub a: Rational,
    pub b: Rational,
}

impl Zeta3Linear {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Self::new(a, Rational::new())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.a.clone() * c, self.b.clone() * c)
    }

    pub fn to_real(&self, ctx: &PrecisionContext) -> BigReal {
        let w = ctx.working_digits();
        let z3 = constant(ConstantName::Zeta3, ctx).with_digits(w);
        BigReal::from_rational(&self.a, w) + BigReal::from_rational(&self.b, w) * z3
    }
}

impl Add for Zeta3Linear {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Zeta3Linear {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Zeta3Linear {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul<&Rational> for Zeta3Linear {
    type Output = Self;
    fn mul(self, c: &Rational) -> Self {
        self.scale(c)
    }
}

impl fmt::Display for Zeta3Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*zeta3", self.a, self.b)
    }
}

/// An exactly known odd moment.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactMoment {
    Zeta3(Zeta3Linear),
    /// rational multiple of π³
    Pi3(Rational),
}

impl ExactMoment {
    pub fn to_real(&self, ctx: &PrecisionContext) -> BigReal {
        match self {
            ExactMoment::Zeta3(z) => z.to_real(ctx),
            ExactMoment::Pi3(q) => {
                let w = ctx.working_digits();
                BigReal::from_rational(q, w) * pi(w).powi(3)
            }
        }
    }

    /// `(a, b)` coefficients: `a + b ζ(3)` or `0 + b π³`.
    pub fn coefficients(&self) -> (Rational, Rational) {
        match self {
            ExactMoment::Zeta3(z) => (z.a.clone(), z.b.clone()),
            ExactMoment::Pi3(q) => (Rational::new(), q.clone()),
        }
    }
}

impl fmt::Display for ExactMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactMoment::Zeta3(z) => write!(f, "{z}"),
            ExactMoment::Pi3(q) => write!(f, "{q}*pi^3"),
        }
    }
}

/// Products whose odd moments the exact engine produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OddProduct {
    K2,
    E2,
    KE,
    Kc2,
    Ec2,
    KcEc,
    KKc,
}

impl OddProduct {
    pub const ZETA3_CLASS: [OddProduct; 6] = [
        OddProduct::K2,
        OddProduct::E2,
        OddProduct::KE,
        OddProduct::Kc2,
        OddProduct::Ec2,
        OddProduct::KcEc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OddProduct::K2 => "K^2",
            OddProduct::E2 => "E^2",
            OddProduct::KE => "K E",
            OddProduct::Kc2 => "Kc^2",
            OddProduct::Ec2 => "Ec^2",
            OddProduct::KcEc => "Kc Ec",
            OddProduct::KKc => "K Kc",
        }
    }

    pub fn spec(&self, n: i64) -> MomentSpec {
        let (a, b, c, d) = match self {
            OddProduct::K2 => (2, 0, 0, 0),
            OddProduct::E2 => (0, 2, 0, 0),
            OddProduct::KE => (1, 1, 0, 0),
            OddProduct::Kc2 => (0, 0, 2, 0),
            OddProduct::Ec2 => (0, 0, 0, 2),
            OddProduct::KcEc => (0, 0, 1, 1),
            OddProduct::KKc => (1, 0, 1, 0),
        };
        MomentSpec::new(a, b, c, d, n)
    }

    pub fn from_spec(spec: &MomentSpec) -> Option<Self> {
        if spec.m != 0 {
            return None;
        }
        Some(match spec.exponents() {
            [2, 0, 0, 0] => OddProduct::K2,
            [0, 2, 0, 0] => OddProduct::E2,
            [1, 1, 0, 0] => OddProduct::KE,
            [0, 0, 2, 0] => OddProduct::Kc2,
            [0, 0, 0, 2] => OddProduct::Ec2,
            [0, 0, 1, 1] => OddProduct::KcEc,
            [1, 0, 1, 0] => OddProduct::KKc,
            _ => return None,
        })
    }

    /// The recurrence over odd moments that this product satisfies.
    pub fn recurrence(&self) -> RecurrenceDef {
        match self {
            OddProduct::K2 => RecurrenceDef::k_squared(),
            OddProduct::E2 => RecurrenceDef::e_squared(),
            OddProduct::KE => RecurrenceDef::ke(),
            OddProduct::Kc2 => RecurrenceDef::kc_squared(),
            OddProduct::Ec2 => RecurrenceDef::ec_squared(),
            OddProduct::KcEc => RecurrenceDef::kc_ec(),
            OddProduct::KKc => RecurrenceDef::kkc_g(),
        }
    }
}

impl FromStr for OddProduct {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let spec = MomentSpec::parse_product(s, Rational::from(1), Rational::new())?;
        OddProduct::from_spec(&spec)
            .ok_or_else(|| Error::Refused(format!("no exact odd-moment engine for {s:?}")))
    }
}

fn poly(coeffs: &[i64]) -> Vec<Rational> {
    coeffs.iter().map(|&c| Rational::from(c)).collect()
}

fn eval_poly(p: &[Rational], n: i64) -> Rational {
    p.iter()
        .rev()
        .fold(Rational::new(), |acc, c| acc * Integer::from(n) + c)
}

/// `sum_off P_off(n) M(n + off) = rhs(n)` with polynomial coefficients.
#[derive(Clone, Debug)]
pub struct RecurrenceDef {
    pub name: &'static str,
    /// `(offset, coefficients in ascending powers of n)`
    pub terms: Vec<(i64, Vec<Rational>)>,
    pub rhs: Vec<Rational>,
    /// Hard-coded starting values, if the recurrence is used to propagate.
    pub ignition: Vec<(i64, Zeta3Linear)>,
    /// Smallest `n` at which the relation holds.
    pub first_n: i64,
}

impl RecurrenceDef {
    /// `(n+1)³K_{n+2} − 2n(n²+1)K_n + (n−1)³K_{n−2} = 2`.
    pub fn k_squared() -> Self {
        Self {
            name: "K^2",
            terms: vec![
                (2, poly(&[1, 3, 3, 1])),
                (0, poly(&[0, -2, 0, -2])),
                (-2, poly(&[-1, 3, -3, 1])),
            ],
            rhs: poly(&[2]),
            ignition: vec![
                (1, Zeta3Linear::new(Rational::new(), Rational::from((7, 4)))),
                (3, Zeta3Linear::new(Rational::from((1, 4)), Rational::from((7, 8)))),
            ],
            first_n: 1,
        }
    }

    pub fn kc_squared() -> Self {
        Self {
            name: "Kc^2",
            rhs: poly(&[0]),
            ignition: Vec::new(),
            first_n: 3,
            ..Self::k_squared()
        }
    }

    /// `(n+1)(n+3)(n+5)E_{n+2} − 2(n³+3n²+n+1)E_n + (n−1)³E_{n−2} = 8`.
    pub fn e_squared() -> Self {
        Self {
            name: "E^2",
            terms: vec![
                (2, poly(&[15, 23, 9, 1])),
                (0, poly(&[-2, -2, -6, -2])),
                (-2, poly(&[-1, 3, -3, 1])),
            ],
            rhs: poly(&[8]),
            ignition: Vec::new(),
            first_n: 1,
        }
    }

    /// The E² recurrence rewritten for `EK_n` through `E_n = (2 EK_n + 1)/(n+3)`.
    pub fn ke() -> Self {
        Self {
            name: "K E",
            terms: vec![
                (2, poly(&[9, 24, 22, 8, 1])),
                (0, poly(&[-2, -4, -8, -8, -2])),
                (-2, poly(&[-3, 8, -6, 0, 1])),
            ],
            rhs: poly(&[10, 2]),
            ignition: Vec::new(),
            first_n: 1,
        }
    }

    pub fn ec_squared() -> Self {
        Self {
            name: "Ec^2",
            terms: vec![
                (2, poly(&[15, 23, 9, 1])),
                (0, poly(&[-4, -18, -12, -2])),
                (-2, poly(&[-3, -1, 3, 1])),
            ],
            rhs: poly(&[0]),
            ignition: Vec::new(),
            first_n: 3,
        }
    }

    pub fn kc_ec() -> Self {
        Self {
            name: "Kc Ec",
            terms: vec![
                (2, poly(&[0, 9, 15, 7, 1])),
                (0, poly(&[-2, 0, -8, -8, -2])),
                (-2, poly(&[2, -1, -3, 1, 1])),
            ],
            rhs: poly(&[0]),
            ignition: Vec::new(),
            first_n: 3,
        }
    }

    /// `2n³g(n+1) − (2n−1)(2n²−2n+1)g(n) + 2(n−1)³g(n−1) = 0` for
    /// `g(n) = ∫ x^(2n−1) K K'`.
    pub fn kkc_g() -> Self {
        Self {
            name: "g",
            terms: vec![
                (1, poly(&[0, 0, 0, 2])),
                (0, poly(&[1, -4, 6, -4])),
                (-1, poly(&[-2, 6, -6, 2])),
            ],
            rhs: poly(&[0]),
            ignition: Vec::new(),
            first_n: 1,
        }
    }

    /// The g recurrence in terms of the integers `h(n)`.
    pub fn h_integer() -> Self {
        Self {
            name: "h",
            terms: vec![
                (0, poly(&[0, 0, 0, 2])),
                (-1, poly(&[16, -64, 96, -64])),
                (-2, poly(&[-512, 1536, -1536, 512])),
            ],
            rhs: poly(&[0]),
            ignition: Vec::new(),
            first_n: 2,
        }
    }

    pub fn expected_rhs(&self, n: i64) -> Rational {
        eval_poly(&self.rhs, n)
    }

    fn combine<V, F>(&self, values: &BTreeMap<i64, V>, n: i64, zero: V, mut step: F) -> Result<V>
    where
        F: FnMut(V, &Rational, &V) -> V,
    {
        let mut acc = zero;
        for (off, p) in &self.terms {
            let c = eval_poly(p, n);
            if c == 0 {
                continue;
            }
            let v = values.get(&(n + off)).ok_or_else(|| {
                Error::Refused(format!(
                    "{} recurrence at n = {n} needs the value at index {}",
                    self.name,
                    n + off
                ))
            })?;
            acc = step(acc, &c, v);
        }
        Ok(acc)
    }
}

/// Left-hand side of the recurrence at `n` from exact values.
pub fn recurrence_residual(
    def: &RecurrenceDef,
    values: &BTreeMap<i64, Zeta3Linear>,
    n: i64,
) -> Result<Zeta3Linear> {
    def.combine(values, n, Zeta3Linear::default(), |acc, c, v| acc + v.scale(c))
}

/// Left-hand side of the recurrence at `n` from numeric values.
pub fn recurrence_residual_real(
    def: &RecurrenceDef,
    values: &BTreeMap<i64, BigReal>,
    n: i64,
) -> Result<BigReal> {
    let digits = values
        .values()
        .map(BigReal::digits)
        .min()
        .unwrap_or(crate::mp::MIN_DIGITS);
    def.combine(values, n, BigReal::zero(digits), |acc, c, v| {
        acc + BigReal::from_rational(c, digits) * v
    })
}

/// Left-hand side of the recurrence at `n` from exact rationals.
pub fn recurrence_residual_rational(
    def: &RecurrenceDef,
    values: &BTreeMap<i64, Rational>,
    n: i64,
) -> Result<Rational> {
    def.combine(values, n, Rational::new(), |acc, c, v| acc + c.clone() * v)
}

fn binomial(n: u64, k: u64) -> Integer {
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

/// `h(n) = Σ_k C(2n−2k, n−k)² C(2k, k)²`.
pub fn h_seq(n: u64) -> Integer {
    (0..=n)
        .map(|k| {
            let a = binomial(2 * (n - k), n - k);
            let b = binomial(2 * k, k);
            Integer::from(&a * &a) * Integer::from(&b * &b)
        })
        .sum()
}

/// `h(n)` through the terminating 4F3 form of the binomial sum.
pub fn h_from_4f3(n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    let w = ctx.working_digits();
    let ni = n as i64;
    let spec = HypSpec::new(
        vec![Param::int(-ni), Param::int(-ni), Param::ratio(1, 2), Param::ratio(1, 2)],
        vec![Param::ratio(1 - 2 * ni, 2), Param::ratio(1 - 2 * ni, 2), Param::int(1)],
        Param::int(1),
    );
    let series = pfq(&spec, ctx)?;
    let half = BigReal::from_ratio(2 * ni + 1, 2, w);
    let g = gamma_at(&half, w)? / gamma_at(&BigReal::from_int(ni + 1, w), w)?;
    let pre = BigReal::from_int(16, w).powi(n as i32) * g.square() / pi(w);
    Ok(pre * series)
}

/// `g(n) = ∫ x^(2n−1) K K' dx = π³ h(n−1) / 16ⁿ`, as the rational factor of π³.
pub fn g_exact(n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Refused("g(0) = ∫ K K'/x diverges".into()));
    }
    Ok(Rational::from((h_seq(n - 1), Integer::from(Integer::u_pow_u(16, n as u32)))))
}

fn odd_index(n: i64) -> Result<usize> {
    if n < 1 || n % 2 == 0 {
        return Err(Error::Refused(format!(
            "exact moments are available for odd n >= 1, got {n}"
        )));
    }
    Ok(n as usize)
}

/// Tables of exact odd moments of K², E², KE up to a given odd order.
struct PlainTables {
    k2: BTreeMap<i64, Zeta3Linear>,
    e2: BTreeMap<i64, Zeta3Linear>,
    ke: BTreeMap<i64, Zeta3Linear>,
}

fn propagate(def: &RecurrenceDef, table: &mut BTreeMap<i64, Zeta3Linear>, from: i64, upto: i64) {
    // solve the recurrence at n = k for the value at k + 2
    let lead = &def.terms[0];
    debug_assert_eq!(lead.0, 2);
    let mut k = from;
    while k + 2 <= upto {
        let c = eval_poly(&lead.1, k);
        let mut rest = Zeta3Linear::rational(def.expected_rhs(k));
        for (off, p) in &def.terms[1..] {
            let coef = eval_poly(p, k);
            if coef != 0 {
                rest = rest - table[&(k + off)].scale(&coef);
            }
        }
        let inv = Rational::from(1) / c;
        table.insert(k + 2, rest.scale(&inv));
        k += 2;
    }
}

fn plain_tables(upto: i64) -> PlainTables {
    let rec = RecurrenceDef::k_squared();
    let mut k2: BTreeMap<i64, Zeta3Linear> = rec.ignition.iter().cloned().collect();
    propagate(&rec, &mut k2, 3, upto.max(5));

    // rec3 at n=1 gives EK_1 = K_3, rec1 at n=1 gives E_1 = (1 + 2 EK_1)/4
    let ek1 = k2[&3].clone();
    let e1 = (Zeta3Linear::rational(Rational::from(1)) + ek1.scale(&Rational::from(2)))
        .scale(&Rational::from((1, 4)));
    let mut e2 = BTreeMap::new();
    e2.insert(1, e1);
    let erec = RecurrenceDef::e_squared();
    propagate(&erec, &mut e2, 1, upto.max(3));

    // rec1: EK_j = ((j+3) E_j − 1)/2
    let ke: BTreeMap<i64, Zeta3Linear> = e2
        .iter()
        .map(|(&j, e)| {
            let v = (e.scale(&Rational::from(j + 3)) - Zeta3Linear::rational(Rational::from(1)))
                .scale(&Rational::from((1, 2)));
            (j, v)
        })
        .collect();
    PlainTables { k2, e2, ke }
}

/// `∫ x^(2n+1) P(x') dx = Σ_i C(n,i)(−1)^i ∫ x^(2i+1) P(x) dx`.
fn complementary(plain: &BTreeMap<i64, Zeta3Linear>, order: i64) -> Zeta3Linear {
    let n = ((order - 1) / 2) as u64;
    (0..=n).fold(Zeta3Linear::default(), |acc, i| {
        let c = Rational::from(binomial(n, i));
        let term = plain[&(2 * i as i64 + 1)].scale(&c);
        if i % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// Exact value of `∫ xⁿ P dx` for odd `n`.
pub fn odd_moment_exact(product: OddProduct, n: i64) -> Result<ExactMoment> {
    odd_index(n)?;
    if product == OddProduct::KKc {
        return g_exact(((n + 1) / 2) as u64).map(ExactMoment::Pi3);
    }
    let t = plain_tables(n);
    let v = match product {
        OddProduct::K2 => t.k2[&n].clone(),
        OddProduct::E2 => t.e2[&n].clone(),
        OddProduct::KE => t.ke[&n].clone(),
        OddProduct::Kc2 => complementary(&t.k2, n),
        OddProduct::Ec2 => complementary(&t.e2, n),
        OddProduct::KcEc => complementary(&t.ke, n),
        OddProduct::KKc => unreachable!(),
    };
    Ok(ExactMoment::Zeta3(v))
}

/// All odd moments `1, 3, …, upto` of a ζ(3)-class product.
pub fn odd_moment_table(product: OddProduct, upto: i64) -> Result<BTreeMap<i64, Zeta3Linear>> {
    odd_index(upto)?;
    if product == OddProduct::KKc {
        return Err(Error::Refused("K Kc odd moments are rational multiples of pi^3".into()));
    }
    let t = plain_tables(upto);
    let pick = |m: &BTreeMap<i64, Zeta3Linear>| -> BTreeMap<i64, Zeta3Linear> {
        m.range(..=upto).map(|(k, v)| (*k, v.clone())).collect()
    };
    Ok(match product {
        OddProduct::K2 => pick(&t.k2),
        OddProduct::E2 => pick(&t.e2),
        OddProduct::KE => pick(&t.ke),
        OddProduct::Kc2 | OddProduct::Ec2 | OddProduct::KcEc => {
            let base = match product {
                OddProduct::Kc2 => &t.k2,
                OddProduct::Ec2 => &t.e2,
                _ => &t.ke,
            };
            (1..=upto)
                .step_by(2)
                .map(|k| (k, complementary(base, k)))
                .collect()
        }
        OddProduct::KKc => unreachable!(),
    })
}

fn half(q: &Rational) -> Rational {
    q.clone() / 2
}

fn real(q: &Rational, w: u32) -> BigReal {
    BigReal::from_rational(q, w)
}

/// `∫₀¹ x'ⁿ xᵐ P(x) dx` for a single complete integral `P`.
pub fn moment_single(
    kind: EllipticKind,
    m: &Rational,
    n: &Rational,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    if !(*m > -1 && *n > -2) {
        return Err(Error::Refused(format!(
            "∫ x'^{n} x^{m} {kind} dx diverges (needs m > -1, n > -2)"
        )));
    }
    // x ↦ x' turns the complementary integrals into plain ones
    let (plain, m, n) = match kind {
        EllipticKind::K | EllipticKind::E => (kind, m.clone(), n.clone()),
        EllipticKind::Kc => (EllipticKind::K, n.clone() + 1, m.clone() - 1),
        EllipticKind::Ec => (EllipticKind::E, n.clone() + 1, m.clone() - 1),
    };
    let w = ctx.working_digits();
    let one = Rational::from(1);
    let um = half(&(m.clone() + 1));
    let lower = half(&(m.clone() + &n + 3));
    let pre = pi(w) / 4 * gamma_at(&real(&um, w), w)? * gamma_at(&real(&half(&(n.clone() + 2)), w), w)?
        / gamma_at(&real(&lower, w), w)?;
    let first = match plain {
        EllipticKind::K => Rational::from((1, 2)),
        _ => Rational::from((-1, 2)),
    };
    let series = if m == 1 {
        gauss_2f1_unit(&real(&first, w), &BigReal::from_ratio(1, 2, w), &real(&lower, w), ctx)?
    } else if plain == EllipticKind::K && Rational::from(2) * &m + &n + 1 == 0 {
        dixon_3f2(&BigReal::from_ratio(1, 2, w), &BigReal::from_ratio(1, 2, w), &real(&um, w), ctx)?
    } else if plain == EllipticKind::E && m == 0 && n == 1 {
        dixon_3f2(
            &BigReal::from_ratio(1, 2, w),
            &BigReal::from_ratio(1, 2, w),
            &BigReal::from_ratio(-1, 2, w),
            ctx,
        )?
    } else {
        let spec = HypSpec::new(
            vec![Param::Exact(first), Param::ratio(1, 2), Param::Exact(um)],
            vec![Param::Exact(one), Param::Exact(lower)],
            Param::int(1),
        );
        pfq(&spec, ctx)?
    };
    Ok(pre * series)
}

/// Products of one plain and one complementary integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MixedPair {
    KKc,
    EKc,
    KEc,
    EEc,
}

impl MixedPair {
    pub const ALL: [MixedPair; 4] = [MixedPair::KKc, MixedPair::EKc, MixedPair::KEc, MixedPair::EEc];

    pub fn spec(&self, n: i64) -> MomentSpec {
        match self {
            MixedPair::KKc => MomentSpec::new(1, 0, 1, 0, n),
            MixedPair::EKc => MomentSpec::new(0, 1, 1, 0, n),
            MixedPair::KEc => MomentSpec::new(1, 0, 0, 1, n),
            MixedPair::EEc => MomentSpec::new(0, 1, 0, 1, n),
        }
    }

    fn from_spec(spec: &MomentSpec) -> Option<Self> {
        if spec.m != 0 {
            return None;
        }
        MixedPair::ALL
            .into_iter()
            .find(|p| p.spec(0).exponents() == spec.exponents())
    }
}

/// `∫₀¹ xⁿ P(x) Q'(x) dx` as a Gamma prefactor times a 4F3 at 1.
pub fn moment_mixed(pair: MixedPair, n: &Rational, ctx: &PrecisionContext) -> Result<BigReal> {
    if !(*n > -1) {
        return Err(Error::Refused(format!("∫ x^{n} {pair:?} dx diverges (needs n > -1)")));
    }
    let w = ctx.working_digits();
    let a = half(&(n.clone() + 1));
    let b = half(&(n.clone() + 2));
    let g = gamma_at(&real(&a, w), w)? / gamma_at(&real(&b, w), w)?;
    let mut pre = pi(w).square() / 8 * g.square();
    let first = match pair {
        MixedPair::KKc | MixedPair::KEc => Param::ratio(1, 2),
        MixedPair::EKc | MixedPair::EEc => Param::ratio(-1, 2),
    };
    let (upper, lower) = match pair {
        MixedPair::KKc | MixedPair::EKc => (
            vec![first, Param::ratio(1, 2), Param::Exact(a.clone()), Param::Exact(a)],
            vec![Param::int(1), Param::Exact(b.clone()), Param::Exact(b)],
        ),
        MixedPair::KEc | MixedPair::EEc => {
            pre = pre * real(&(n.clone() + 1), w) / real(&(n.clone() + 2), w);
            (
                vec![first, Param::ratio(1, 2), Param::Exact(a), Param::Exact(half(&(n.clone() + 3)))],
                vec![Param::int(1), Param::Exact(b), Param::Exact(half(&(n.clone() + 4)))],
            )
        }
    };
    let series = pfq(&HypSpec::new(upper, lower, Param::int(1)), ctx)?;
    Ok(pre * series)
}

/// Exact `(π coefficient, π³ coefficient)` of the odd moments of `K K'`,
/// `E K'` and `K E'`.
pub fn mixed_odd_exact(pair: MixedPair, n: i64) -> Result<(Rational, Rational)> {
    odd_index(n)?;
    let k = ((n + 1) / 2) as u64;
    let g = g_exact(k)?;
    let g_next = g_exact(k + 1)?;
    let kq = Rational::from(k);
    // Legendre-derived relation: ∫ x^n K E' = π/(4(n+1)) + k (g(k) − g(k+1))
    let pi_coef = Rational::from((1, 4 * (n + 1)));
    match pair {
        MixedPair::KKc => Ok((Rational::new(), g)),
        MixedPair::KEc => Ok((pi_coef, kq * (g - g_next))),
        MixedPair::EKc => {
            let one = Rational::from(1);
            Ok((pi_coef, (one - &kq) * g + kq * g_next))
        }
        MixedPair::EEc => Err(Error::Refused(
            "no exact form for the odd moments of E Ec is propagated".into(),
        )),
    }
}

/// Products of two complementary integrals with very-well-poised 7F6 forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompPair {
    EcEc,
    EcKc,
    EcKcAlt,
    KcKc,
}

impl CompPair {
    pub const ALL: [CompPair; 4] = [CompPair::EcEc, CompPair::EcKc, CompPair::EcKcAlt, CompPair::KcKc];

    pub fn spec(&self, n: i64) -> MomentSpec {
        match self {
            CompPair::EcEc => MomentSpec::new(0, 0, 0, 2, n),
            CompPair::EcKc | CompPair::EcKcAlt => MomentSpec::new(0, 0, 1, 1, n),
            CompPair::KcKc => MomentSpec::new(0, 0, 2, 0, n),
        }
    }
}

/// `∫₀¹ xⁿ P'(x) Q'(x) dx` as `16ⁿ` times a rational prefactor, Gamma factor and 7F6 at 1.
pub fn moment_comp_pair(pair: CompPair, n: &Rational, ctx: &PrecisionContext) -> Result<BigReal> {
    if !(*n > -1) {
        return Err(Error::Refused(format!("∫ x^{n} {pair:?} dx diverges (needs n > -1)")));
    }
    let w = ctx.working_digits();
    let r = |q: Rational| real(&q, w);
    let n1 = n.clone() + Rational::from(1);
    let n2 = n.clone() + Rational::from(2);
    let n3 = n.clone() + Rational::from(3);
    let n4 = n.clone() + Rational::from(4);
    let quarter = |q: &Rational| Param::Exact(q.clone() / 4);
    let halfp = |q: &Rational| Param::Exact(half(q));
    let hp = Param::ratio(1, 2);
    let (rational, upper, lower) = match pair {
        CompPair::EcEc => (
            r(n1.clone()).powi(3) * r(n3.clone()).square() / (r(n2.clone()).powi(3) * r(n4.clone())),
            vec![
                Param::ratio(-1, 2),
                hp.clone(),
                hp.clone(),
                Param::ratio(3, 2),
                halfp(&n3),
                halfp(&n3),
                quarter(&(n.clone() + 7)),
            ],
            vec![
                Param::int(1),
                quarter(&n3),
                halfp(&n2),
                halfp(&n4),
                halfp(&n4),
                halfp(&(n.clone() + 6)),
            ],
        ),
        CompPair::EcKc => (
            r(n1.clone()).square() / r(n2.clone()),
            vec![
                Param::ratio(-1, 2),
                hp.clone(),
                hp.clone(),
                hp.clone(),
                halfp(&n1),
                halfp(&n1),
                quarter(&(n.clone() + 5)),
            ],
            vec![Param::int(1), quarter(&n1), halfp(&n2), halfp(&n2), halfp(&n2), halfp(&n4)],
        ),
        CompPair::EcKcAlt => (
            r(n1.clone()).powi(3) * r(n3.clone()) / r(n2.clone()).powi(3),
            vec![
                hp.clone(),
                hp.clone(),
                hp.clone(),
                Param::ratio(3, 2),
                halfp(&n3),
                halfp(&n3),
                quarter(&(n.clone() + 7)),
            ],
            vec![Param::int(1), quarter(&n3), halfp(&n2), halfp(&n4), halfp(&n4), halfp(&n4)],
        ),
        CompPair::KcKc => (
            r(n1.clone()),
            vec![
                hp.clone(),
                hp.clone(),
                hp.clone(),
                hp.clone(),
                halfp(&n1),
                halfp(&n1),
                quarter(&(n.clone() + 5)),
            ],
            vec![Param::int(1), quarter(&n1), halfp(&n2), halfp(&n2), halfp(&n2), halfp(&n2)],
        ),
    };
    let sixteen_n = BigReal::from_int(16, w).powf(&r(n.clone()));
    let g = gamma_at(&r(half(&n1)), w)?.powi(8) / gamma_at(&r(n1.clone()), w)?.powi(4);
    let series = pfq(&HypSpec::new(upper, lower, Param::int(1)), ctx)?;
    Ok(sixteen_n * rational / 16 * g * series)
}

/// `(x, x')` elliptic pairs at a quadrature point, with `x'` taken from the
/// distance to 1 so nothing cancels near either endpoint.
pub fn pairs_at(p: &QuadPoint, digits: u32) -> Result<(BigReal, CompletePair, CompletePair)> {
    let xp = (&p.from_hi * &(&p.x + 1i64)).sqrt();
    let plain = if p.from_hi.is_zero() {
        return Err(domain("K has a logarithmic singularity at x = 1"));
    } else {
        complete_pair(&p.x, &xp, digits)?
    };
    let comp = complete_pair(&xp, &p.x, digits)?;
    Ok((xp, plain, comp))
}

/// The moment by quadrature, independent of every closed form.
pub fn moment_quadrature(spec: &MomentSpec, ctx: &PrecisionContext) -> Result<QuadResult> {
    spec.check_convergent()?;
    let w = ctx.working_digits();
    let n = real(&spec.n, w);
    let m = real(&spec.m, w);
    let exps = spec.exponents();
    integrate_unit(
        |p| {
            let (xp, plain, comp) = pairs_at(p, w)?;
            let mut v = BigReal::one(w);
            if spec.n != 0 {
                v = v * p.x.powf(&n);
            }
            if spec.m != 0 {
                v = v * xp.powf(&m);
            }
            for (f, e) in [&plain.k, &plain.e, &comp.k, &comp.e].into_iter().zip(exps) {
                if e > 0 {
                    v = v * f.powi(e as i32);
                }
            }
            Ok(v)
        },
        ctx,
    )
}

/// Closed form at hand for a moment, if any.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub value: BigReal,
    pub exact: Option<ExactMoment>,
    pub method: &'static str,
}

/// Picks the closed form that applies to `spec`: exact odd-moment engine,
/// the single-integral 3F2, the mixed-pair 4F3 or the complementary 7F6.
pub fn closed_form(spec: &MomentSpec, ctx: &PrecisionContext) -> Result<Option<ClosedForm>> {
    spec.check_convergent()?;
    let integer_n = if *spec.n.denom() == 1 {
        spec.n.numer().to_i64()
    } else {
        None
    };
    if let (Some(product), Some(n)) = (OddProduct::from_spec(spec), integer_n) {
        if n >= 1 && n % 2 == 1 {
            let exact = odd_moment_exact(product, n)?;
            return Ok(Some(ClosedForm {
                value: exact.to_real(ctx),
                exact: Some(exact),
                method: "exact odd moment",
            }));
        }
    }
    if spec.degree() == 1 {
        let kind = match spec.exponents() {
            [1, 0, 0, 0] => EllipticKind::K,
            [0, 1, 0, 0] => EllipticKind::E,
            [0, 0, 1, 0] => EllipticKind::Kc,
            _ => EllipticKind::Ec,
        };
        return Ok(Some(ClosedForm {
            value: moment_single(kind, &spec.n, &spec.m, ctx)?,
            exact: None,
            method: "3F2",
        }));
    }
    if let Some(pair) = MixedPair::from_spec(spec) {
        return Ok(Some(ClosedForm {
            value: moment_mixed(pair, &spec.n, ctx)?,
            exact: None,
            method: "4F3",
        }));
    }
    if spec.m == 0 {
        let pair = CompPair::ALL
            .into_iter()
            .find(|p| p.spec(0).exponents() == spec.exponents());
        if let Some(pair) = pair {
            return Ok(Some(ClosedForm {
                value: moment_comp_pair(pair, &spec.n, ctx)?,
                exact: None,
                method: "7F6",
            }));
        }
    }
    Ok(None)
}

/// Both sides of the generating-function identities at `t`.
#[derive(Clone, Debug)]
pub struct GfCheck {
    /// `∫ x K K' / (1 − t²x²)` against `π/4 K(t)²`
    pub gf: (BigReal, BigReal),
    /// `∫ K' / (1 − t²x²)` against `π/2 K(t)`
    pub gf2_k: (BigReal, BigReal),
    /// `∫ E' / (1 − t²x²)` against `π/(2t²) (K(t) − E(t))`
    pub gf2_e: (BigReal, BigReal),
}

pub fn gf_check(t: &BigReal, ctx: &PrecisionContext) -> Result<GfCheck> {
    if !(*t > 0 && *t < 1) {
        return Err(domain("generating-function check needs 0 < t < 1"));
    }
    let w = ctx.working_digits();
    let t = t.with_digits(w);
    let t2 = t.square();
    let weight = |x: &BigReal| (BigReal::one(w) - &t2 * &x.square()).recip();
    let lhs = |which: u8| {
        integrate_unit(
            |p| {
                let (_, plain, comp) = pairs_at(p, w)?;
                Ok(match which {
                    0 => &p.x * &plain.k * &comp.k * weight(&p.x),
                    1 => &comp.k * &weight(&p.x),
                    _ => &comp.e * &weight(&p.x),
                })
            },
            ctx,
        )
        .map(|r| r.value)
    };
    let tc = (&(BigReal::one(w) - &t) * &(BigReal::one(w) + &t)).sqrt();
    let at_t = complete_pair(&t, &tc, w)?;
    let p = pi(w);
    Ok(GfCheck {
        gf: (lhs(0)?, &p / 4 * at_t.k.square()),
        gf2_k: (lhs(1)?, &p / 2 * &at_t.k),
        gf2_e: (lhs(2)?, &p / (t2.clone() * 2) * &at_t.k_minus_e),
    })
}

/// Export row for a computed moment.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MomentRow {
    pub product: String,
    pub n: String,
    /// rational part (or 0 for π³ multiples)
    pub a: Option<String>,
    /// ζ(3) or π³ coefficient
    pub b: Option<String>,
    pub value: String,
    pub digits: u32,
}

impl MomentRow {
    pub fn new(spec: &MomentSpec, exact: Option<&ExactMoment>, value: &BigReal, digits: u32) -> Self {
        let (a, b) = match exact.map(ExactMoment::coefficients) {
            Some((a, b)) => (Some(a.to_string()), Some(b.to_string())),
            None => (None, None),
        };
        Self {
            product: spec.product_label(),
            n: spec.n.to_string(),
            a,
            b,
            value: value.to_decimal(digits as usize),
            digits,
        }
    }

    pub const CSV_HEADER: &'static str = "product,n,a,b,value,digits";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.product,
            self.n,
            self.a.as_deref().unwrap_or(""),
            self.b.as_deref().unwrap_or(""),
            self.value,
            self.digits
        )
    }
}

/// Unit-cube kernels whose triple integral is `8 ∫₀¹ P'(x) Q'(x) dx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CubeKernel {
    KcKc,
    /// the kernel with a `sqrt(y)` factor
    EcKc,
    EcKcAlt,
    EcEc,
}

impl CubeKernel {
    pub const ALL: [CubeKernel; 4] = [CubeKernel::KcKc, CubeKernel::EcKc, CubeKernel::EcKcAlt, CubeKernel::EcEc];

    pub fn h(&self) -> [f64; 6] {
        match self {
            CubeKernel::KcKc => [0.5; 6],
            CubeKernel::EcKc => [1.5, 0.5, 0.5, 1.5, 0.5, 1.5],
            CubeKernel::EcKcAlt => [0.5, -0.5, 0.5, 0.5, 0.5, 0.5],
            CubeKernel::EcEc => [1.5, -0.5, 0.5, 1.5, 0.5, 1.5],
        }
    }

    pub fn pair(&self) -> CompPair {
        match self {
            CubeKernel::KcKc => CompPair::KcKc,
            CubeKernel::EcKc => CompPair::EcKc,
            CubeKernel::EcKcAlt => CompPair::EcKcAlt,
            CubeKernel::EcEc => CompPair::EcEc,
        }
    }
}

/// `∫₀¹ P'(x) Q'(x) dx` from the triple integral in double precision.
pub fn moment_from_cube(kernel: CubeKernel) -> Result<QuadResult> {
    let r = integrate3d(&kernel.h())?;
    Ok(QuadResult {
        value: r.value.mul_pow2(-3),
        error_estimate: r.error_estimate.mul_pow2(-3),
        ..r
    })
}

/// `Σ Γ(n+½)⁴/Γ(n+1)⁴ · 4F3(½,½,−n,−n; 1,½−n,½−n; 1)` summed from `n = 0`.
///
/// The summand equals `π² C(2n,n)² h(n) / 256ⁿ` and decays like
/// `log n / n²`, so the partial sums at `N = 100·2^j, j < 15`, are
/// extrapolated in the tail model `Σ_{i ≤ 7} (a_i log N + b_i) / N^i`.
pub fn conjecture2_sum(ctx: &PrecisionContext) -> Result<SeriesValue> {
    const BASE: usize = 100;
    const POINTS: usize = 15;
    let w = ctx.working_digits() + 40;
    let last = BASE << (POINTS - 1);
    let mut partial = Vec::with_capacity(POINTS);
    // u(n) = h(n)/16ⁿ from n³h(n) = 8(2n−1)(2n²−2n+1)h(n−1) − 256(n−1)³h(n−2)
    let (mut u_prev, mut u) = (BigReal::zero(w), BigReal::one(w));
    let mut c = BigReal::one(w);
    let mut sum = BigReal::zero(w);
    for n in 0..last {
        if n > 0 {
            let k = n as i64;
            let r = BigReal::from_ratio(2 * k - 1, 2 * k, w);
            c = c * r.square();
            let next = (&u * (2 * k - 1) * (2 * k * k - 2 * k + 1) / 2 - &u_prev * (k - 1).pow(3)) / (k * k * k);
            u_prev = std::mem::replace(&mut u, next);
        }
        sum = sum + &c * &u;
        if (n + 1) % BASE == 0 && ((n + 1) / BASE).is_power_of_two() {
            partial.push((n + 1, sum.clone()));
        }
    }
    let p2 = pi(w).square();
    // rows [1, log N/N, 1/N, log N/N², 1/N², log N/N³, 1/N³]
    let mut rows: Vec<Vec<BigReal>> = partial
        .iter()
        .map(|(n, s)| {
            let nn = BigReal::from_int(*n as i64, w);
            let ln = nn.ln();
            let mut row = vec![BigReal::one(w)];
            let mut p = BigReal::one(w);
            for _ in 1..=(POINTS - 1) / 2 {
                p = &p * &nn;
                row.push(&ln / &p);
                row.push(p.recip());
            }
            row.push(s * &p2);
            row
        })
        .collect();
    let x = solve(&mut rows);
    let raw = &partial[POINTS - 1].1 * &p2;
    Ok(SeriesValue {
        value: x[0].with_digits(ctx.working_digits()),
        terms: last,
        partial_sum: raw.with_digits(ctx.working_digits()),
    })
}

/// Extrapolated value of a slowly convergent series.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: BigReal,
    pub terms: usize,
    /// plain partial sum of `terms` terms
    pub partial_sum: BigReal,
}

/// Gaussian elimination with partial pivoting on an augmented square system.
fn solve(a: &mut [Vec<BigReal>]) -> Vec<BigReal> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        for r in col + 1..n {
            let f = &a[r][col] / &a[col][col];
            for k in col..=n {
                let t = &f * &a[col][k];
                a[r][k] = &a[r][k] - &t;
            }
        }
    }
    let mut x = vec![BigReal::zero(a[0][0].digits()); n];
    for r in (0..n).rev() {
        let mut s = a[r][n].clone();
        for k in r + 1..n {
            s = s - &a[r][k] * &x[k];
        }
        x[r] = s / &a[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn close(a: &BigReal, b: &BigReal, digits: i32) -> bool {
        (a - b).abs() < BigReal::pow10(-digits, a.digits().min(b.digits()))
    }

    #[test]
    fn parse_products() {
        let s = MomentSpec::parse_product("K^1 Kc^1", q(1, 1), q(0, 1)).unwrap();
        assert_eq!((s.a_k, s.a_kc), (1, 1));
        assert_eq!(s.product_label(), "K Kc");
        let s = MomentSpec::parse_product("Kc^2", q(1, 1), q(0, 1)).unwrap();
        assert_eq!(OddProduct::from_spec(&s), Some(OddProduct::Kc2));
        assert!(MomentSpec::parse_product("K^5", q(1, 1), q(0, 1)).is_err());
        assert!(MomentSpec::parse_product("Q", q(1, 1), q(0, 1)).is_err());
    }

    #[test]
    fn h_values() {
        let v: Vec<Integer> = (0..4).map(h_seq).collect();
        assert_eq!(v, [1, 8, 88, 1088].map(Integer::from));
        let def = RecurrenceDef::h_integer();
        let values: BTreeMap<i64, Rational> =
            (0..=30).map(|n| (n as i64, Rational::from(h_seq(n)))).collect();
        for n in 2..=30 {
            assert_eq!(recurrence_residual_rational(&def, &values, n).unwrap(), 0);
        }
    }

    #[test]
    fn exact_examples() {
        let z = |a, b| ExactMoment::Zeta3(Zeta3Linear::new(a, b));
        assert_eq!(odd_moment_exact(OddProduct::K2, 3).unwrap(), z(q(1, 4), q(7, 8)));
        assert_eq!(odd_moment_exact(OddProduct::Kc2, 1).unwrap(), z(q(0, 1), q(7, 4)));
        assert_eq!(odd_moment_exact(OddProduct::K2, 1).unwrap(), z(q(0, 1), q(7, 4)));
        assert_eq!(odd_moment_exact(OddProduct::KKc, 1).unwrap(), ExactMoment::Pi3(q(1, 16)));
        assert_eq!(odd_moment_exact(OddProduct::KKc, 3).unwrap(), ExactMoment::Pi3(q(1, 32)));
        assert!(odd_moment_exact(OddProduct::K2, 2).is_err());
    }

    #[test]
    fn ignition_is_consistent_with_recurrence() {
        let def = RecurrenceDef::k_squared();
        let values: BTreeMap<i64, Zeta3Linear> = def.ignition.iter().cloned().collect();
        let r = recurrence_residual(&def, &values, 1).unwrap();
        assert_eq!(r, Zeta3Linear::rational(q(2, 1)));
    }

    #[test]
    fn residuals_are_exact_constants() {
        for p in OddProduct::ZETA3_CLASS {
            let table = odd_moment_table(p, 15).unwrap();
            let def = p.recurrence();
            for n in (def.first_n..=13).step_by(2) {
                let r = recurrence_residual(&def, &table, n).unwrap();
                assert_eq!(r, Zeta3Linear::rational(def.expected_rhs(n)), "{p:?} n={n}");
            }
        }
        let missing = recurrence_residual(&RecurrenceDef::k_squared(), &BTreeMap::new(), 3);
        assert!(matches!(missing, Err(Error::Refused(_))));
    }

    #[test]
    fn single_moment_examples() {
        let c = ctx();
        let w = c.working_digits();
        let p = pi(w);
        let v = moment_single(EllipticKind::Kc, &q(0, 1), &q(0, 1), &c).unwrap();
        assert!(close(&v, &(p.square() / 4), 30));
        let v = moment_single(EllipticKind::Ec, &q(1, 1), &q(0, 1), &c).unwrap();
        assert!(close(&v, &BigReal::from_ratio(2, 3, w), 30));
        assert!(moment_single(EllipticKind::K, &q(-1, 1), &q(0, 1), &c).is_err());
    }

    #[test]
    fn mixed_examples() {
        let c = ctx();
        let w = c.working_digits();
        let p3 = pi(w).powi(3);
        let v = moment_mixed(MixedPair::KKc, &q(1, 1), &c).unwrap();
        assert!(close(&v, &(&p3 / 16), 30));
        let v = moment_mixed(MixedPair::KKc, &q(3, 1), &c).unwrap();
        assert!(close(&v, &(&p3 / 32), 30));
        let v = moment_mixed(MixedPair::EKc, &q(1, 1), &c).unwrap();
        assert!(close(&v, &(pi(w) / 8 + &p3 / 32), 30));
        for pair in [MixedPair::KKc, MixedPair::KEc, MixedPair::EKc] {
            let (a, b) = mixed_odd_exact(pair, 5).unwrap();
            let ex = BigReal::from_rational(&a, w) * pi(w) + BigReal::from_rational(&b, w) * &p3;
            let v = moment_mixed(pair, &q(5, 1), &c).unwrap();
            assert!(close(&v, &ex, 30), "{pair:?}");
        }
    }

    #[test]
    fn comp_pair_example() {
        let c = ctx();
        let v = moment_comp_pair(CompPair::KcKc, &q(1, 1), &c).unwrap();
        let z = odd_moment_exact(OddProduct::Kc2, 1).unwrap().to_real(&c);
        assert!(close(&v, &z, 30));
    }

    #[test]
    fn rows() {
        let c = ctx();
        let spec = OddProduct::K2.spec(3);
        let ex = odd_moment_exact(OddProduct::K2, 3).unwrap();
        let row = MomentRow::new(&spec, Some(&ex), &ex.to_real(&c), 20);
        assert_eq!(row.a.as_deref(), Some("1/4"));
        assert!(row.to_csv().starts_with("K^2,3,1/4,7/8,1.301"));
    }

    #[test]
    fn divergent_specs_refused() {
        let spec = MomentSpec::parse_product("K", q(-1, 1), q(0, 1)).unwrap();
        assert!(matches!(moment_quadrature(&spec, &ctx()), Err(Error::Divergent(_))));
        let spec = MomentSpec::parse_product("Kc", q(0, 1), q(-2, 1)).unwrap();
        assert!(matches!(closed_form(&spec, &ctx()), Err(Error::Divergent(_))));
        let spec = MomentSpec::parse_product("K", q(-1, 2), q(-3, 2)).unwrap();
        assert!(spec.check_convergent().is_ok());
    }

    #[test]
    fn conjecture2_sum_form() {
        let c = PrecisionContext::new(30).unwrap();
        let w = c.working_digits();
        let g = gamma_at(&BigReal::from_ratio(1, 4, w), w).unwrap();
        let target = g.powi(8) / (pi(w).powi(4) * 24);
        let s = conjecture2_sum(&c).unwrap();
        assert!((&s.value - &target).abs().log10_abs() < -25.0);
        assert!((&s.partial_sum - &target).abs().log10_abs() > -6.0);
    }
}
