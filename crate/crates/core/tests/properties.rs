use ellmom_core::elliptic::{ell, quad_transform, EllipticKind, QuadTransform};
use ellmom_core::hyper::{pfq, pfq_detailed, pfq_exact, pochhammer_exact, HypSpec, Param};
use ellmom_core::identities::expr::{evaluate, Expr};
use ellmom_core::mp::{constant, gamma, ConstantName};
use ellmom_core::quad::integrate_unit;
use ellmom_core::{BigReal, PrecisionContext};
use proptest::prelude::*;
use rug::Rational;

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

fn lg(a: &BigReal, b: &BigReal) -> f64 {
    (a - b).abs().log10_abs()
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (1i64..9, 1i64..5).prop_map(|(a, b)| Expr::Num(Rational::from((a, b)))),
        Just(Expr::Const(ConstantName::Pi)),
        Just(Expr::Const(ConstantName::Catalan)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 1i64..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), Box::new(Expr::num(k)))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.prop_map(|a| Expr::Func(ellmom_core::identities::expr::Func::Atan, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_functional_equation(num in 1i64..400, den in 1i64..20) {
        let c = ctx(40);
        let x = BigReal::from_ratio(num, den, c.working_digits());
        let lhs = gamma(&(&x + 1i64), &c).unwrap();
        let rhs = &x * &gamma(&x, &c).unwrap();
        prop_assert!(((&lhs - &rhs) / &lhs).abs().log10_abs() < -38.0);
    }

    #[test]
    fn legendre_relation(num in 1i64..10_000) {
        let c = ctx(40);
        let x = BigReal::from_ratio(num, 10_001, c.working_digits());
        let f = |k| ell(k, &x, &c).unwrap();
        let r = f(EllipticKind::E) * f(EllipticKind::Kc) + f(EllipticKind::Ec) * f(EllipticKind::K)
            - f(EllipticKind::K) * f(EllipticKind::Kc);
        prop_assert!(lg(&r, &(constant(ConstantName::Pi, &c) / 2)) < -38.0);
    }

    #[test]
    fn quadratic_transforms(num in 1i64..999, which in 0usize..4) {
        let c = ctx(40);
        let x = BigReal::from_ratio(num, 1000, c.working_digits());
        let t = [QuadTransform::K1, QuadTransform::K2, QuadTransform::E1, QuadTransform::E2][which];
        let (a, b) = quad_transform(t, &x, &c).unwrap();
        prop_assert!(lg(&a, &b) < -38.0);
    }

    #[test]
    fn quadrature_is_linear(a in -5i64..5, b in -5i64..5, p in 0i64..4) {
        let c = ctx(30);
        let w = c.working_digits();
        let f = |q: &ellmom_core::quad::QuadPoint| Ok(q.x.powi(p as i32));
        let g = |q: &ellmom_core::quad::QuadPoint| {
            Ok(ell(EllipticKind::K, &q.x, &c).unwrap_or_else(|_| BigReal::zero(w)))
        };
        let fi = integrate_unit(f, &c).unwrap().value;
        let gi = integrate_unit(g, &c).unwrap().value;
        let both = integrate_unit(
            |q| Ok(f(q)? * BigReal::from_int(a, w) + g(q)? * BigReal::from_int(b, w)),
            &c,
        )
        .unwrap()
        .value;
        let expected = fi * a + gi * b;
        prop_assert!(lg(&both, &expected) < -28.0);
    }

    #[test]
    fn quadrature_substitution(p in 0i64..5) {
        // ∫ x^p K(x) dx = ∫ 2u^(2p+1) K(u²) du
        let c = ctx(30);
        let e1: Expr = format!("int(x^{p}*K(x))").parse().unwrap();
        let e2: Expr = format!("int(2*x^{}*K(x^2))", 2 * p + 1).parse().unwrap();
        prop_assert!(lg(&evaluate(&e1, &c).unwrap(), &evaluate(&e2, &c).unwrap()) < -28.0);
    }

    #[test]
    fn pfq_term_doubling(a in 1i64..6, b in 1i64..6, c0 in 3i64..9) {
        // 3F2(a/2, b/2, 1/2; c/2, 1; 1) converges since c/2 + 1 - a/2 - b/2 - 1/2 > 0 when c > a + b - 1
        prop_assume!(c0 > a + b - 1);
        let c = ctx(30);
        let h = |x: i64| Param::ratio(x, 2);
        let spec = HypSpec::new(vec![h(a), h(b), h(1)], vec![h(c0), Param::int(1)], Param::int(1));
        let r1 = pfq_detailed(&spec, &c, Some(120)).unwrap();
        let r2 = pfq_detailed(&spec, &c, Some(240)).unwrap();
        prop_assert!(lg(&r1.value, &r2.value) < -25.0);
    }

    #[test]
    fn terminating_series_exact(m in 1u64..12, a in 1i64..7, b in 1i64..7) {
        let c = ctx(30);
        let spec = HypSpec::new(
            vec![Param::int(-(m as i64)), Param::ratio(a, 3)],
            vec![Param::ratio(b, 2)],
            Param::ratio(1, 3),
        );
        let direct: Rational = (0..=m)
            .map(|k| {
                let num = pochhammer_exact(&Rational::from(-(m as i64)), k) * pochhammer_exact(&Rational::from((a, 3)), k);
                let den = pochhammer_exact(&Rational::from((b, 2)), k) * pochhammer_exact(&Rational::from(1), k);
                num / den / Rational::from(rug::Integer::from(rug::Integer::u_pow_u(3, k as u32)))
            })
            .fold(Rational::new(), |s, t| s + t);
        prop_assert_eq!(pfq_exact(&spec), Some(direct.clone()));
        let v = pfq(&spec, &c).unwrap();
        prop_assert!(lg(&v, &BigReal::from_rational(&direct, v.digits())) < -40.0);
    }

    #[test]
    fn precision_is_monotone(p in 0i64..4) {
        let e: Expr = format!("int(x^{p}*K(x)^2)").parse().unwrap();
        let lo = evaluate(&e, &ctx(25)).unwrap();
        let hi = evaluate(&e, &ctx(50)).unwrap();
        prop_assert!(lg(&lo, &hi.with_digits(lo.digits())) < -24.0);
    }

    #[test]
    fn expr_display_round_trips(e in arb_expr()) {
        let printed = e.to_string();
        let again: Expr = printed.parse().unwrap();
        // parsing folds constant subtrees, so the text is stable after one pass
        let third: Expr = again.to_string().parse().unwrap();
        prop_assert_eq!(&third, &again);
        let c = ctx(20);
        match (evaluate(&e, &c), evaluate(&again, &c)) {
            (Ok(a), Ok(b)) => prop_assert!(a == b || lg(&a, &b) < -18.0 + a.abs().log10_abs().max(0.0)),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "evaluation disagrees for {printed}"),
        }
    }
}
