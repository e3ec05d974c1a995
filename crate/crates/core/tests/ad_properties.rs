#![allow(clippy::needless_range_loop)]

//! Property tests for the expression language and its jets: derivatives
//! against finite differences, Hessian symmetry, and the print/parse
//! round trip, all over a generator of globally well-defined expressions.

mod common;

use common::{fd_grad, fd_hess};
use ffc_core::Expression;
use proptest::prelude::*;

const VARS: [&str; 2] = ["x0", "x1"];

/// Expression strings that are smooth and bounded on [-1.5, 1.5]^2: every
/// operator appears, with domain-sensitive ones guarded (positive log/sqrt
/// arguments, bounded tan arguments, denominators away from zero). Powers
/// apply to leaves only: stacking them inflates high derivatives past what
/// fixed-step finite differences can certify at the stated tolerance.
fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (-12i32..=12).prop_map(|k| format!("{}", k as f64 * 0.1)),
        Just("x0".to_string()),
        Just("x1".to_string()),
    ];
    let pow_unit = prop_oneof![
        leaf.clone().prop_map(|a| format!("(({a})^2)")),
        leaf.clone().prop_map(|a| format!("(({a})^3)")),
        leaf.clone().prop_map(|a| format!("((1.5 + ({a})^2)^1.7)")),
    ];
    let base = prop_oneof![4 => leaf, 1 => pow_unit];
    base.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (2 + ({b})^2))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("(-{a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("log(1.5 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("tan(0.4*sin({a}))")),
            inner.clone().prop_map(|a| format!("sinh(sin({a}))")),
            inner.prop_map(|a| format!("cosh(sin({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jets_match_finite_differences(
        text in expr_strategy(),
        p0 in -1.5f64..1.5,
        p1 in -1.5f64..1.5,
    ) {
        let e = Expression::parse(&text, &VARS).unwrap();
        let point = [p0, p1];
        let jet = e.eval_jet2(&point, &[0, 1]);
        prop_assert!(jet.val().is_finite());

        let f = |x: &[f64]| e.eval(x);
        // Gradient: central differences, h = 1e-5.
        let g_fd = fd_grad(&f, &point, 1e-5);
        for i in 0..2 {
            let got = jet.grad_at(i);
            prop_assert!(
                (got - g_fd[i]).abs() <= 1e-6 * (1.0 + got.abs()),
                "grad[{}]: jet {} vs fd {} for {}",
                i, got, g_fd[i], text
            );
        }
        // Hessian: second-difference stencils carry an h^2 f'''' truncation
        // that random composites can inflate, so Richardson-extrapolate two
        // step sizes and fold the measured stencil defect into the bound.
        let h_coarse = fd_hess(&f, &point, 2e-3);
        let h_fine = fd_hess(&f, &point, 1e-3);
        for i in 0..2 {
            for j in 0..2 {
                let got = jet.hess_at(i, j);
                let extrap = (4.0 * h_fine[i][j] - h_coarse[i][j]) / 3.0;
                let fd_uncertainty = (h_coarse[i][j] - h_fine[i][j]).abs();
                prop_assert!(
                    (got - extrap).abs() <= 1e-6 * (1.0 + got.abs()) + 0.5 * fd_uncertainty,
                    "hess[{}][{}]: jet {} vs fd {} (defect {}) for {}",
                    i, j, got, extrap, fd_uncertainty, text
                );
            }
        }
    }

    #[test]
    fn hessian_is_exactly_symmetric(
        text in expr_strategy(),
        p0 in -1.5f64..1.5,
        p1 in -1.5f64..1.5,
    ) {
        let e = Expression::parse(&text, &VARS).unwrap();
        let jet = e.eval_jet2(&[p0, p1], &[0, 1]);
        prop_assert_eq!(jet.hess_at(0, 1).to_bits(), jet.hess_at(1, 0).to_bits());
    }

    #[test]
    fn print_parse_round_trip_evaluates_identically(
        text in expr_strategy(),
        p0 in -1.5f64..1.5,
        p1 in -1.5f64..1.5,
    ) {
        let e = Expression::parse(&text, &VARS).unwrap();
        let reparsed = Expression::parse(&e.to_string(), &VARS).unwrap();
        let a = e.eval(&[p0, p1]);
        let b = reparsed.eval(&[p0, p1]);
        prop_assert_eq!(a.to_bits(), b.to_bits(), "{} vs {}", e, reparsed);
    }
}

/// Deterministic corpus covering the operators the random generator guards
/// (abs away from its kink, plain powers, deep nesting), checked against
/// the same finite-difference oracles.
#[test]
fn fixed_corpus_matches_finite_differences() {
    let cases: &[(&str, [f64; 2])] = &[
        ("abs(x0)", [0.7, 0.0]),
        ("abs(x0)", [-1.3, 0.0]),
        ("abs(x0*x1 + 0.5)", [0.8, 0.9]),
        ("x0^2 - x1^2", [1.2, -0.4]),
        ("sqrt(x0^2 + x1^2)", [3.0, 4.0]),
        ("x0^5", [1.1, 0.0]),
        ("(2 + x0^2)^2.5", [0.6, 0.0]),
        ("exp(x0) * sin(x1) / (1 + x0^2)", [0.4, 1.2]),
        ("log(2 + sinh(x0)^2) + cosh(x1)", [0.9, -0.7]),
        ("tan(x0)", [0.5, 0.0]),
        ("1 / (1 + exp(-x0))", [0.3, 0.0]),
        ("sin(cos(exp(sin(x0 + x1))))", [0.2, 0.5]),
    ];
    for (text, point) in cases {
        let e = Expression::parse(text, &VARS).unwrap();
        let jet = e.eval_jet2(point, &[0, 1]);
        let f = |x: &[f64]| e.eval(x);
        let g_fd = fd_grad(&f, point, 1e-5);
        let h_fd = fd_hess(&f, point, 1e-4);
        for i in 0..2 {
            assert!(
                (jet.grad_at(i) - g_fd[i]).abs() <= 1e-6 * (1.0 + jet.grad_at(i).abs()),
                "{text}: grad[{i}]"
            );
            for j in 0..2 {
                assert!(
                    (jet.hess_at(i, j) - h_fd[i][j]).abs()
                        <= 1e-6 * (1.0 + jet.hess_at(i, j).abs()),
                    "{text}: hess[{i}][{j}]"
                );
            }
        }
    }
}
