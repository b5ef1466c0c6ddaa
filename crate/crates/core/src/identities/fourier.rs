//! Sine series of K(sin t) and E(sin t) on (0, π).

use crate::elliptic::{complete_pair, EllipticKind};
use crate::error::{domain, Result};
use crate::mp::{gamma_at, pi, BigReal, PrecisionContext};
use crate::quad::integrate;

/// Coefficients of `sin((4n+1)t)` and `sin((4n+3)t)`.
#[derive(Clone, Debug)]
pub struct FourierCoeffs {
    pub kind: EllipticKind,
    pub n: u64,
    pub first: BigReal,
    pub second: BigReal,
}

fn check_kind(kind: EllipticKind) -> Result<()> {
    match kind {
        EllipticKind::K | EllipticKind::E => Ok(()),
        other => Err(domain(format!("sine series only for K and E, not {other}"))),
    }
}

/// Closed-form coefficients from Gamma ratios.
pub fn fourier_coeff(kind: EllipticKind, n: u64, ctx: &PrecisionContext) -> Result<FourierCoeffs> {
    check_kind(kind)?;
    let w = ctx.working_digits();
    let num = gamma_at(&(BigReal::from_int(n as i64, w) + BigReal::from_ratio(1, 2, w)), w)?;
    let den = gamma_at(&BigReal::from_int(n as i64 + 1, w), w)?;
    let ratio = (num / den).square();
    let (first, second) = match kind {
        EllipticKind::K => (ratio, BigReal::zero(w)),
        _ => {
            let second = &ratio * BigReal::from_ratio(2 * n as i64 + 1, 4 * (n as i64 + 1), w);
            (ratio.mul_pow2(-1), second)
        }
    };
    Ok(FourierCoeffs { kind, n, first, second })
}

/// `(2/π) ∫₀^π f(sin t) sin(m t) dt` by quadrature, folding (π/2, π) onto
/// (0, π/2).
pub fn fourier_integral(kind: EllipticKind, m: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    check_kind(kind)?;
    let w = ctx.working_digits();
    let p = pi(w);
    let mpi = &p * m as i64;
    let r = integrate(
        |q| {
            let s = q.from_lo.sin();
            let c = q.from_hi.sin();
            let pair = complete_pair(&s, &c, w)?;
            let f = if kind == EllipticKind::K { pair.k } else { pair.e };
            let mt = &q.x * m as i64;
            let folded = (&mpi - &mt).sin();
            Ok(f * (mt.sin() + folded))
        },
        &BigReal::zero(w),
        &p.mul_pow2(-1),
        ctx,
    )?;
    Ok(r.value * 2 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_values() {
        let c = PrecisionContext::new(30).unwrap();
        let w = c.working_digits();
        let p = pi(w);
        let k0 = fourier_coeff(EllipticKind::K, 0, &c).unwrap();
        assert!((&k0.first - &p).abs().log10_abs() < -40.0);
        let k1 = fourier_coeff(EllipticKind::K, 1, &c).unwrap();
        assert!((&k1.first - &(&p / 4)).abs().log10_abs() < -40.0);
        let e0 = fourier_coeff(EllipticKind::E, 0, &c).unwrap();
        assert!((&e0.first - &p.mul_pow2(-1)).abs().log10_abs() < -40.0);
        assert!((&e0.second - &p.mul_pow2(-2)).abs().log10_abs() < -40.0);
        assert!(fourier_coeff(EllipticKind::Kc, 0, &c).is_err());
    }

    #[test]
    fn matches_quadrature() {
        let c = PrecisionContext::new(30).unwrap();
        for kind in [EllipticKind::K, EllipticKind::E] {
            for n in 0..3 {
                let f = fourier_coeff(kind, n, &c).unwrap();
                let a = fourier_integral(kind, 4 * n + 1, &c).unwrap();
                let b = fourier_integral(kind, 4 * n + 3, &c).unwrap();
                assert!((&f.first - &a).abs().log10_abs() < -25.0, "{kind} {n}");
                assert!((&f.second - &b).abs().log10_abs() < -25.0, "{kind} {n}");
            }
            assert!(fourier_integral(kind, 2, &c).unwrap().abs().log10_abs() < -25.0);
        }
    }
}
