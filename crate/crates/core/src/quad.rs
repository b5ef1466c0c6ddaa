//! Double-exponential (tanh-sinh) quadrature.
//!
//! Every abscissa is handed to the integrand together with its distances to
//! both endpoints, computed directly from the transform rather than by
//! subtraction. Integrands with `sqrt(1 - x)` or `log x` endpoint behaviour
//! use those distances to stay accurate at points within `10^-100` of an
//! endpoint.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mp::{pi, BigReal, PrecisionContext};

/// An abscissa of the rule on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct QuadPoint {
    pub x: BigReal,
    /// `x - lo`
    pub from_lo: BigReal,
    /// `hi - x`
    pub from_hi: BigReal,
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: BigReal,
    /// Difference between the last two refinement levels.
    pub error_estimate: BigReal,
    pub levels_used: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub max_level: usize,
    pub min_level: usize,
}

static DEFAULT_MAX_LEVEL: AtomicUsize = AtomicUsize::new(12);

/// Changes the refinement limit used by [`QuadOptions::default`].
pub fn set_default_max_level(level: usize) {
    DEFAULT_MAX_LEVEL.store(level.max(3), Ordering::Relaxed);
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            max_level: DEFAULT_MAX_LEVEL.load(Ordering::Relaxed),
            min_level: 3,
        }
    }
}

/// Node of the rule on `[0, 1]`; the weight excludes the step length.
struct Node {
    sigma: BigReal,
    sigma_c: BigReal,
    weight: BigReal,
}

type NodeTable = Arc<Vec<Node>>;

fn node_cache() -> &'static Mutex<HashMap<(u32, usize), NodeTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), NodeTable>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn tau_max(digits: u32) -> f64 {
    // beyond this the smaller endpoint distance is below 10^-(2 digits + 10)
    ((2.0 * digits as f64 + 10.0) * std::f64::consts::LN_10 / std::f64::consts::PI).asinh()
}

/// Nodes added at `level`: `tau = k h` for all `k` at level 0, odd `k` after.
fn nodes(digits: u32, level: usize) -> NodeTable {
    if let Some(t) = node_cache().lock().unwrap().get(&(digits, level)) {
        return Arc::clone(t);
    }
    let h = 0.5f64.powi(level as i32);
    let count = (tau_max(digits) / h).ceil() as i64;
    let half_pi = pi(digits).mul_pow2(-1);
    let quarter_pi = half_pi.mul_pow2(-1);
    let step = BigReal::from_ratio(1, 1i64 << level, digits);
    let mut table = Vec::new();
    for k in -count..=count {
        if level > 0 && k.rem_euclid(2) == 0 {
            continue;
        }
        let tau = &step * k;
        let u = &half_pi * &tau.sinh();
        let e = u.mul_pow2(1).exp();
        let one = BigReal::one(digits);
        let sigma_c = (&one + &e).recip();
        let sigma = (&one + &e.recip()).recip();
        let ch = u.cosh();
        let weight = &quarter_pi * &tau.cosh() / ch.square();
        table.push(Node {
            sigma,
            sigma_c,
            weight,
        });
    }
    let table = Arc::new(table);
    node_cache()
        .lock()
        .unwrap()
        .insert((digits, level), Arc::clone(&table));
    table
}

/// Integrates `f` over `[lo, hi]` to `ctx.digits()` digits.
pub fn integrate<F>(f: F, lo: &BigReal, hi: &BigReal, ctx: &PrecisionContext) -> Result<QuadResult>
where
    F: Fn(&QuadPoint) -> Result<BigReal> + Sync,
{
    integrate_with(f, lo, hi, ctx, QuadOptions::default())
}

/// Integrates over `[0, 1]`.
pub fn integrate_unit<F>(f: F, ctx: &PrecisionContext) -> Result<QuadResult>
where
    F: Fn(&QuadPoint) -> Result<BigReal> + Sync,
{
    let w = ctx.working_digits();
    integrate(f, &BigReal::zero(w), &BigReal::one(w), ctx)
}

pub fn integrate_with<F>(
    f: F,
    lo: &BigReal,
    hi: &BigReal,
    ctx: &PrecisionContext,
    opts: QuadOptions,
) -> Result<QuadResult>
where
    F: Fn(&QuadPoint) -> Result<BigReal> + Sync,
{
    let w = ctx.working_digits();
    let lo = lo.with_digits(w);
    let hi = hi.with_digits(w);
    if !(lo < hi) {
        return Err(Error::Domain("integration interval must satisfy lo < hi".into()));
    }
    let width = &hi - &lo;
    let tol = BigReal::pow10(-(ctx.digits() as i32), w);

    let mut raw_sum = BigReal::zero(w);
    let mut previous: Option<BigReal> = None;
    let mut evaluations = 0usize;
    for level in 0..=opts.max_level {
        let table = nodes(w, level);
        let values: Vec<BigReal> = table
            .par_iter()
            .map(|node| {
                let from_lo = &width * &node.sigma;
                let point = QuadPoint {
                    x: &lo + &from_lo,
                    from_lo,
                    from_hi: &width * &node.sigma_c,
                };
                let v = f(&point)?;
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "integrand is not finite at x = {}",
                        point.x.to_decimal(20)
                    )));
                }
                Ok(v * &node.weight)
            })
            .collect::<Result<_>>()?;
        evaluations += values.len();
        for v in values {
            raw_sum = raw_sum + v;
        }
        let estimate = &raw_sum * &width / (1i64 << level);
        if let Some(prev) = &previous {
            let diff = (&estimate - prev).abs();
            let scale = estimate.abs().max(BigReal::one(w));
            if level >= opts.min_level && diff <= &tol * &scale {
                return Ok(QuadResult {
                    value: estimate,
                    error_estimate: diff,
                    levels_used: level + 1,
                    evaluations,
                });
            }
            if level == opts.max_level {
                return Err(Error::NonConvergence {
                    levels: level + 1,
                    previous: prev.to_decimal(30),
                    last: estimate.to_decimal(30),
                });
            }
        }
        previous = Some(estimate);
    }
    unreachable!("loop returns at max_level")
}

/// Fixed-step tanh-sinh rule on `[0, 1]` in double precision: `(x, 1 - x, weight)`.
fn nodes_f64(h: f64) -> Vec<(f64, f64, f64)> {
    use std::f64::consts::PI;
    let count = (4.0 / h).ceil() as i64;
    (-count..=count)
        .map(|k| {
            let tau = k as f64 * h;
            let u = 0.5 * PI * tau.sinh();
            let e = (2.0 * u).exp();
            let weight = h * 0.25 * PI * tau.cosh() / u.cosh().powi(2);
            (1.0 / (1.0 + 1.0 / e), 1.0 / (1.0 + e), weight)
        })
        .filter(|&(_, _, w)| w > 0.0 && w.is_finite())
        .collect()
}

fn cube_sum(h: &[f64; 6], step: f64) -> f64 {
    let nodes = nodes_f64(step);
    let factor = |a: f64, b: f64| -> Vec<f64> {
        nodes
            .iter()
            .map(|&(x, xc, w)| w * x.powf(a) * xc.powf(b))
            .collect()
    };
    let wx = factor(h[2] - 1.0, h[0] - h[2] - h[3]);
    let wy = factor(h[3] - 1.0, h[0] - h[3] - h[4]);
    let wz = factor(h[4] - 1.0, h[0] - h[4] - h[5]);
    let h1 = h[1];
    let partial: Vec<f64> = nodes
        .par_iter()
        .zip(wx.par_iter())
        .map(|(&(x, xc, _), &wxi)| {
            let mut acc = 0.0;
            for (&(y, _, _), &wyj) in nodes.iter().zip(&wy) {
                let mut inner = 0.0;
                for (&(_, zc, _), &wzk) in nodes.iter().zip(&wz) {
                    // 1 - x (1 - y (1 - z)) without cancellation
                    let d = xc + x * y * zc;
                    inner += wzk * (-h1 * d.ln()).exp();
                }
                acc += wyj * inner;
            }
            wxi * acc
        })
        .collect();
    partial.iter().sum()
}

/// The unit-cube integral
/// `∫∫∫ x^(h2-1) y^(h3-1) z^(h4-1) (1-x)^(h0-h2-h3) (1-y)^(h0-h3-h4) (1-z)^(h0-h4-h5)
///  / (1 - x(1 - y(1 - z)))^h1`
/// by a nested double-precision rule, refined until two steps agree to ~1e-7.
pub fn integrate3d(h: &[f64; 6]) -> Result<QuadResult> {
    let mut step = 0.25;
    let mut previous = cube_sum(h, step);
    let mut evaluations = nodes_f64(step).len().pow(3);
    for level in 1..=4 {
        step *= 0.5;
        let value = cube_sum(h, step);
        evaluations += nodes_f64(step).len().pow(3);
        if !value.is_finite() {
            return Err(Error::Domain("triple integral is not finite".into()));
        }
        let diff = (value - previous).abs();
        if diff < 1e-8 * value.abs().max(1.0) {
            return Ok(QuadResult {
                value: BigReal::from_f64(value, 16),
                error_estimate: BigReal::from_f64(diff.max(f64::EPSILON * value.abs()), 16),
                levels_used: level + 1,
                evaluations,
            });
        }
        previous = value;
    }
    Err(Error::NonConvergence {
        levels: 5,
        previous: format!("{previous:e}"),
        last: format!("{:e}", cube_sum(h, step)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{complete_pair, ell_kc};
    use crate::mp::constant_by_name;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    #[test]
    fn beta_integral() {
        let c = ctx();
        let r = integrate_unit(|p| Ok((&p.from_lo * &p.from_hi).sqrt().recip()), &c).unwrap();
        let w = c.working_digits();
        assert!((&r.value - &pi(w)).abs() < BigReal::pow10(-30, w));
        assert!(r.error_estimate < BigReal::pow10(-30, w));
    }

    #[test]
    fn log_singular_kernel() {
        let c = ctx();
        let w = c.working_digits();
        // ∫ x Kc(x)^2 = 7/4 ζ(3)
        let r = integrate_unit(
            |p| {
                let v = ell_kc(&p.x, &c)?;
                Ok(&p.x * &v.square())
            },
            &c,
        )
        .unwrap();
        let expected = constant_by_name("zeta3", &c).unwrap().with_digits(w) * 7 / 4;
        assert!((&r.value - &expected).abs() < BigReal::pow10(-30, w));
    }

    #[test]
    fn endpoint_distances_feed_complement() {
        let c = ctx();
        let w = c.working_digits();
        // ∫ K(x)/(1+x) = π²/8, with x' taken from the distance to 1
        let r = integrate_unit(
            |p| {
                let xp = (&p.from_hi * &(&p.x + 1i64)).sqrt();
                let k = complete_pair(&p.x, &xp, w)?.k;
                Ok(k / (&p.x + 1i64))
            },
            &c,
        )
        .unwrap();
        let expected = pi(w).square() / 8;
        assert!((&r.value - &expected).abs() < BigReal::pow10(-30, w));
    }

    #[test]
    fn general_interval() {
        let c = ctx();
        let w = c.working_digits();
        let r = integrate(
            |p| Ok(p.x.cos()),
            &BigReal::zero(w),
            &pi(w).mul_pow2(-1),
            &c,
        )
        .unwrap();
        assert!((&r.value - &BigReal::one(w)).abs() < BigReal::pow10(-30, w));
        assert!(integrate(|p| Ok(p.x.clone()), &BigReal::one(w), &BigReal::zero(w), &c).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let c = ctx();
        let opts = QuadOptions {
            max_level: 4,
            min_level: 3,
        };
        let w = c.working_digits();
        // oscillates far too fast for five levels
        let r = integrate_with(
            |p| Ok((&p.x * 2000i64).sin()),
            &BigReal::zero(w),
            &BigReal::one(w),
            &c,
            opts,
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn cube_with_constant_integrand() {
        let r = integrate3d(&[2.0, 0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-10);
    }
}
