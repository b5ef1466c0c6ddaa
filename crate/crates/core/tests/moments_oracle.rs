use std::collections::BTreeMap;

use ellmom_core::elliptic::EllipticKind;
use ellmom_core::moments::*;
use ellmom_core::mp::{constant, ConstantName};
use ellmom_core::{BigReal, PrecisionContext};
use rug::{Integer, Rational};

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

fn diff(a: &BigReal, b: &BigReal) -> f64 {
    (a - b).abs().log10_abs()
}

fn pi(c: &PrecisionContext) -> BigReal {
    constant(ConstantName::Pi, c)
}

#[test]
fn mixed_pairs_match_quadrature() {
    let c = ctx(50);
    for pair in MixedPair::ALL {
        for n in 0..=6 {
            let closed = moment_mixed(pair, &Rational::from(n), &c).unwrap();
            let quad = moment_quadrature(&pair.spec(n), &c).unwrap().value;
            assert!(diff(&closed, &quad) < -40.0, "{pair:?} n={n}: {}", diff(&closed, &quad));
        }
    }
}

#[test]
fn comp_pairs_match_quadrature() {
    let c = ctx(30);
    for pair in CompPair::ALL {
        for n in 0..=3 {
            let closed = moment_comp_pair(pair, &Rational::from(n), &c).unwrap();
            let quad = moment_quadrature(&pair.spec(n), &c).unwrap().value;
            assert!(diff(&closed, &quad) < -20.0, "{pair:?} n={n}");
        }
    }
    for n in 0..=3 {
        let a = moment_comp_pair(CompPair::EcKc, &Rational::from(n), &c).unwrap();
        let b = moment_comp_pair(CompPair::EcKcAlt, &Rational::from(n), &c).unwrap();
        assert!(diff(&a, &b) < -25.0);
    }
}

#[test]
fn exact_odd_moments_match_quadrature() {
    let c = ctx(45);
    for p in OddProduct::ZETA3_CLASS {
        for n in (1..=21).step_by(4) {
            let exact = odd_moment_exact(p, n).unwrap().to_real(&c);
            let quad = moment_quadrature(&p.spec(n), &c).unwrap().value;
            assert!(diff(&exact, &quad) < -35.0, "{p:?} n={n}");
        }
    }
}

#[test]
fn exact_recurrence_residuals_up_to_21() {
    for p in OddProduct::ZETA3_CLASS {
        let table = odd_moment_table(p, 23).unwrap();
        let def = p.recurrence();
        for n in (def.first_n..=21).step_by(2) {
            let r = recurrence_residual(&def, &table, n).unwrap();
            assert_eq!(r, Zeta3Linear::rational(def.expected_rhs(n)), "{p:?} n={n}");
        }
    }
}

#[test]
fn quadrature_values_satisfy_g_recurrence() {
    let c = ctx(40);
    let def = RecurrenceDef::kkc_g();
    let values: BTreeMap<i64, BigReal> = (1..=3)
        .map(|k| {
            let v = moment_quadrature(&OddProduct::KKc.spec(2 * k - 1), &c).unwrap().value;
            (k, v)
        })
        .collect();
    let r = recurrence_residual_real(&def, &values, 2).unwrap();
    assert!(r.abs().log10_abs() < -30.0);
}

#[test]
fn h_forms_agree() {
    let c = ctx(40);
    let w = c.working_digits();
    let p3 = pi(&c).powi(3);
    for n in 0..=8u64 {
        let moment = moment_mixed(MixedPair::KKc, &Rational::from(2 * n + 1), &c).unwrap();
        let scaled = moment * BigReal::from_int(16, w).powi(n as i32 + 1) / &p3;
        let rounded = scaled.round_to_integer().unwrap();
        assert_eq!(rounded, h_seq(n));
        assert!(diff(&scaled, &BigReal::from_integer(&rounded, w)) < -10.0);
    }
    for n in 0..=10u64 {
        let v = h_from_4f3(n, &c).unwrap();
        assert!(diff(&v, &BigReal::from_integer(&h_seq(n), w)) < -30.0, "n={n}");
    }
}

#[test]
fn generating_functions() {
    let c = ctx(40);
    let w = c.working_digits();
    for (num, den) in [(1, 5), (1, 2), (4, 5), (3, 10)] {
        let g = gf_check(&BigReal::from_ratio(num, den, w), &c).unwrap();
        assert!(diff(&g.gf.0, &g.gf.1) < -35.0);
        assert!(diff(&g.gf2_k.0, &g.gf2_k.1) < -35.0);
        assert!(diff(&g.gf2_e.0, &g.gf2_e.1) < -35.0);
    }
    assert!(gf_check(&BigReal::one(w), &c).is_err());
}

#[test]
fn linear_pi_terms_of_mixed_odd_moments() {
    let c = ctx(50);
    let w = c.working_digits();
    let p = pi(&c);
    let p3 = p.clone().powi(3);
    for n in [1i64, 3, 5, 7] {
        for pair in [MixedPair::EKc, MixedPair::KEc] {
            let (_, b) = mixed_odd_exact(pair, n).unwrap();
            let v = moment_mixed(pair, &Rational::from(n), &c).unwrap();
            let linear = (v - BigReal::from_rational(&b, w) * &p3) / &p;
            let expected = BigReal::from_ratio(1, 4 * (n + 1), w);
            assert!(diff(&linear, &expected) < -40.0, "{pair:?} n={n}");
        }
    }
}

#[test]
fn single_moments() {
    let c = ctx(40);
    let half = Rational::from((1, 2));
    let cases: Vec<(EllipticKind, Rational, Rational)> = vec![
        (EllipticKind::K, Rational::from(0), Rational::from(-1)),
        (EllipticKind::E, Rational::from(0), Rational::from(1)),
        (EllipticKind::E, Rational::from(1), Rational::from(0)),
        (EllipticKind::K, half.clone(), Rational::from(0)),
        (EllipticKind::K, -half.clone(), Rational::from(0)),
        (EllipticKind::Ec, Rational::from(2), Rational::from(1)),
        (EllipticKind::Kc, Rational::from(3), Rational::from(0)),
        (EllipticKind::E, Rational::from(4), Rational::from(3)),
    ];
    for (kind, m, n) in cases {
        let closed = moment_single(kind, &m, &n, &c).unwrap();
        let spec = MomentSpec {
            a_k: (kind == EllipticKind::K) as u32,
            a_e: (kind == EllipticKind::E) as u32,
            a_kc: (kind == EllipticKind::Kc) as u32,
            a_ec: (kind == EllipticKind::Ec) as u32,
            n: m.clone(),
            m: n.clone(),
        };
        let quad = moment_quadrature(&spec, &c).unwrap().value;
        assert!(diff(&closed, &quad) < -35.0, "{kind} m={m} n={n}");
    }
    // ∫ K / x' is Γ(1/4)^4 / (16π)
    let v = moment_single(EllipticKind::K, &Rational::from(0), &Rational::from(-1), &c).unwrap();
    let g = constant(ConstantName::GammaQuarter, &c).powi(4) / (pi(&c) * 16);
    assert!(diff(&v, &g) < -40.0);
    let err = moment_single(EllipticKind::K, &Rational::from(0), &Rational::from(-2), &c);
    assert!(err.is_err());
}

#[test]
fn closed_form_dispatch() {
    let c = ctx(30);
    let spec = MomentSpec::parse_product("K Kc", Rational::from(1), Rational::new()).unwrap();
    let cf = closed_form(&spec, &c).unwrap().unwrap();
    assert_eq!(cf.exact, Some(ExactMoment::Pi3(Rational::from((1, 16)))));
    let spec = MomentSpec::parse_product("E^2", Rational::from(0), Rational::new()).unwrap();
    assert!(closed_form(&spec, &c).unwrap().is_none());
    let spec = MomentSpec::parse_product("Ec^2", Rational::from(2), Rational::new()).unwrap();
    assert_eq!(closed_form(&spec, &c).unwrap().unwrap().method, "7F6");
    let _ = Integer::from(0);
}
