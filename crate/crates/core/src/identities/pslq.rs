//! Integer relation search (PSLQ, Ferguson–Bailey).

use rug::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::mp::BigReal;

#[derive(Clone, Debug)]
pub struct RelationQuery {
    /// Each value must carry at least `2 * precision` digits; the extra
    /// digits are used to re-verify any relation found.
    pub values: Vec<BigReal>,
    pub max_coefficient_bits: u32,
    /// Digits used by the search itself.
    pub precision: u32,
}

impl RelationQuery {
    pub fn new(values: Vec<BigReal>, precision: u32) -> Self {
        Self {
            values,
            max_coefficient_bits: DEFAULT_BITS,
            precision,
        }
    }
}

pub const DEFAULT_BITS: u32 = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Relation {
    #[serde(serialize_with = "integers_as_strings")]
    pub coefficients: Vec<Integer>,
    /// `|Σ cᵢ xᵢ|` with the full-precision values, as a decimal string.
    pub residual: String,
    pub confidence: f64,
    pub precision: u32,
    pub verified_at: u32,
}

fn integers_as_strings<S: serde::Serializer>(v: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for i in v {
        seq.serialize_element(&i.to_string())?;
    }
    seq.end()
}

/// Smallest search precision for `len` values with coefficients below
/// `2^bits`.
pub fn required_precision(len: usize, bits: u32) -> u32 {
    20 + (5 * len as u32 * bits).div_ceil(3)
}

fn nint(v: &BigReal) -> BigReal {
    let d = v.digits();
    match v.round_to_integer() {
        Some(i) => BigReal::from_integer(&i, d),
        None => BigReal::zero(d),
    }
}

fn l2(c: &[Integer]) -> f64 {
    c.iter().map(|i| i.to_f64().powi(2)).sum::<f64>().sqrt()
}

/// Looks for integers `c` with `Σ cᵢ xᵢ = 0` and `|cᵢ| < 2^bits`.
///
/// A candidate found at `precision` digits is reported only when it still
/// holds with the values at `2 * precision` digits.
pub fn pslq(q: &RelationQuery) -> Result<Option<Relation>> {
    let n = q.values.len();
    if n < 2 {
        return Err(domain("pslq needs at least two values"));
    }
    let floor = required_precision(n, q.max_coefficient_bits);
    if q.precision < floor {
        return Err(Error::InsufficientPrecision { required: floor });
    }
    let full = q.values.iter().map(|v| v.digits()).min().unwrap_or(0);
    if full < 2 * q.precision {
        return Err(Error::InsufficientPrecision {
            required: 2 * q.precision,
        });
    }
    let Some(candidate) = search(q)? else {
        return Ok(None);
    };
    // re-verification with the full values
    let residual: BigReal = q
        .values
        .iter()
        .zip(&candidate)
        .map(|(v, c)| v * &BigReal::from_integer(c, full))
        .sum();
    let residual = residual.abs();
    let scale = q.values.iter().map(|v| v.abs().log10_abs()).fold(0.0f64, f64::max);
    let log_res = residual.log10_abs();
    let limit = -1.5 * f64::from(q.precision) + scale + l2(&candidate).log10();
    if log_res > limit {
        return Ok(None);
    }
    let log_res = if log_res.is_finite() { log_res } else { -f64::from(full) };
    let confidence = -log_res - l2(&candidate).log10();
    Ok(Some(Relation {
        coefficients: candidate,
        residual: residual.to_decimal(6),
        confidence: (confidence * 100.0).round() / 100.0,
        precision: q.precision,
        verified_at: full,
    }))
}

fn search(q: &RelationQuery) -> Result<Option<Vec<Integer>>> {
    let n = q.values.len();
    let d = q.precision + 10;
    let x: Vec<BigReal> = q.values.iter().map(|v| v.with_digits(d)).collect();
    // a zero entry is a relation by itself
    let eps_zero = BigReal::pow10(-(q.precision as i32), d);
    let norm = x.iter().map(|v| v.square()).sum::<BigReal>().sqrt();
    if norm.is_zero() {
        return Err(domain("pslq needs a nonzero vector"));
    }
    for (i, v) in x.iter().enumerate() {
        if v.abs() < &eps_zero * &norm {
            let mut c = vec![Integer::new(); n];
            c[i] = Integer::from(1);
            return Ok(Some(c));
        }
    }
    let x: Vec<BigReal> = x.iter().map(|v| v / &norm).collect();
    let zero = BigReal::zero(d);
    let one = BigReal::one(d);
    let gamma = BigReal::from_ratio(4, 3, d).sqrt();

    let mut s = vec![zero.clone(); n];
    for k in (0..n).rev() {
        let tail = if k + 1 < n { s[k + 1].square() } else { zero.clone() };
        s[k] = (tail + x[k].square()).sqrt();
    }
    let mut h = vec![vec![zero.clone(); n - 1]; n];
    for i in 0..n {
        for j in 0..(n - 1).min(i + 1) {
            h[i][j] = if i == j {
                &s[j + 1] / &s[j]
            } else {
                -(&x[i] * &x[j]) / (&s[j] * &s[j + 1])
            };
        }
    }
    let mut a: Vec<Vec<BigReal>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
        .collect();
    let mut b = a.clone();
    let mut y = x.clone();

    let reduce = |i: usize, j: usize, h: &mut Vec<Vec<BigReal>>, a: &mut Vec<Vec<BigReal>>, b: &mut Vec<Vec<BigReal>>, y: &mut Vec<BigReal>| {
        if h[j][j].is_zero() {
            return;
        }
        let t = nint(&(&h[i][j] / &h[j][j]));
        if t.is_zero() {
            return;
        }
        y[j] = &y[j] + &(&t * &y[i]);
        for k in 0..=j {
            h[i][k] = &h[i][k] - &(&t * &h[j][k]);
        }
        for k in 0..n {
            a[i][k] = &a[i][k] - &(&t * &a[j][k]);
            b[k][j] = &b[k][j] + &(&t * &b[k][i]);
        }
    };
    for i in 1..n {
        for j in (0..i.min(n - 1)).rev() {
            reduce(i, j, &mut h, &mut a, &mut b, &mut y);
        }
    }

    let detect = BigReal::pow10(-((q.precision as i32 * 3) / 4), d);
    let bound = BigReal::from_int(2, d).powi(q.max_coefficient_bits as i32);
    let max_iter = 2000 * n * q.max_coefficient_bits.max(1) as usize;
    for _ in 0..max_iter {
        let mut m = 0;
        let mut best = zero.clone();
        let mut g = gamma.clone();
        for i in 0..n - 1 {
            let v = &g * &h[i][i].abs();
            if v > best {
                best = v;
                m = i;
            }
            g = &g * &gamma;
        }
        y.swap(m, m + 1);
        a.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = (h[m][m].square() + h[m][m + 1].square()).sqrt();
            if !t0.is_zero() {
                let t1 = &h[m][m] / &t0;
                let t2 = &h[m][m + 1] / &t0;
                for row in h.iter_mut().skip(m) {
                    let (t3, t4) = (row[m].clone(), row[m + 1].clone());
                    row[m] = &t1 * &t3 + &t2 * &t4;
                    row[m + 1] = &t1 * &t4 - &t2 * &t3;
                }
            }
        }
        for i in m + 1..n {
            for j in (0..(i).min(m + 2).min(n - 1)).rev() {
                reduce(i, j, &mut h, &mut a, &mut b, &mut y);
            }
        }
        let (jmin, ymin) = y
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, y[0].abs()), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        if ymin < detect {
            let mut c: Vec<Integer> = (0..n)
                .map(|k| b[k][jmin].round_to_integer().unwrap_or_default())
                .collect();
            if c.iter().any(|v| v.to_f64().abs() >= bound.to_f64()) {
                return Ok(None);
            }
            if let Some(first) = c.iter().find(|v| **v != 0) {
                if *first < 0 {
                    for v in c.iter_mut() {
                        *v = -v.clone();
                    }
                }
            }
            return Ok(Some(c));
        }
        let hmax = h
            .iter()
            .enumerate()
            .take(n - 1)
            .map(|(j, row)| row[j].abs())
            .fold(zero.clone(), |acc, v| acc.max(v));
        if hmax.is_zero() || hmax.recip() > bound {
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden(d: u32) -> Vec<BigReal> {
        let phi = (BigReal::from_int(5, d).sqrt() + 1i64).mul_pow2(-1);
        vec![BigReal::one(d), phi.clone(), phi.square()]
    }

    #[test]
    fn golden_ratio() {
        let q = RelationQuery {
            values: golden(200),
            max_coefficient_bits: 10,
            precision: 80,
        };
        let r = pslq(&q).unwrap().unwrap();
        let c: Vec<i64> = r.coefficients.iter().map(|i| i.to_i64().unwrap()).collect();
        assert_eq!(c, vec![1, 1, -1]);
        assert!(r.confidence > 100.0);
    }

    #[test]
    fn refuses_low_precision() {
        let q = RelationQuery::new(golden(200), 30);
        match pslq(&q) {
            Err(Error::InsufficientPrecision { required }) => assert_eq!(required, 20 + 100),
            other => panic!("{other:?}"),
        }
        let q = RelationQuery {
            values: golden(60),
            max_coefficient_bits: 10,
            precision: 80,
        };
        assert!(matches!(pslq(&q), Err(Error::InsufficientPrecision { required: 160 })));
    }

    #[test]
    fn no_relation_for_independent_values() {
        let d = 200;
        let values = vec![
            BigReal::from_int(2, d).sqrt(),
            BigReal::from_int(3, d).sqrt(),
            BigReal::from_int(5, d).ln(),
        ];
        let q = RelationQuery {
            values,
            max_coefficient_bits: 8,
            precision: 80,
        };
        assert!(pslq(&q).unwrap().is_none());
    }
}
