//! Geodesic integration against closed-form and cross-frame oracles.

mod common;

use ffc_core::frame::{structure_coefficients, Chart};
use ffc_core::geodesic::{
    integrate, solve_second_class, GeodesicState, IntegrationConfig, Lambda0, LambdaI, Method,
};
use ffc_core::metric::FinslerMetric;
use ffc_core::Expression;
use std::f64::consts::FRAC_PI_2;

fn sphere2d() -> Chart {
    Chart::parse(&[vec!["1", "0"], vec!["0", "sin(x0)"]]).unwrap()
}

fn euclid2() -> FinslerMetric {
    FinslerMetric::parse(2, "sqrt(th0^2 + th1^2)").unwrap()
}

fn state(x: &[f64], theta: &[f64]) -> GeodesicState {
    GeodesicState {
        s: 0.0,
        x: x.to_vec(),
        theta: theta.to_vec(),
    }
}

/// Unit-sphere embedding of a chart point.
fn embed(x: &[f64]) -> [f64; 3] {
    let (th, ph) = (x[0], x[1]);
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

/// Closed-form great circle through `x` with unit frame velocity `theta`.
fn great_circle(x: &[f64], theta: &[f64], s: f64) -> [f64; 2] {
    let (th, ph) = (x[0], x[1]);
    let p = embed(x);
    // Orthonormal tangent basis at x: e_theta and e_phi.
    let e_th = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
    let e_ph = [-ph.sin(), ph.cos(), 0.0];
    let u: Vec<f64> = (0..3)
        .map(|i| theta[0] * e_th[i] + theta[1] * e_ph[i])
        .collect();
    let q: Vec<f64> = (0..3).map(|i| s.cos() * p[i] + s.sin() * u[i]).collect();
    [q[2].clamp(-1.0, 1.0).acos(), q[1].atan2(q[0])]
}

#[test]
fn quarter_great_circle_endpoint() {
    let chart = sphere2d();
    let metric = euclid2();
    let x0 = [FRAC_PI_2, 0.0];
    let theta0 = [0.6, 0.8]; // unit length, tilted off the equator
    let cfg = IntegrationConfig {
        method: Method::Rk45 {
            rtol: 1e-10,
            atol: 1e-12,
        },
        s_max: FRAC_PI_2,
        output_points: 201,
        ..Default::default()
    };
    let tr = integrate(&chart, &metric, &state(&x0, &theta0), &cfg).unwrap();
    for st in &tr.states {
        let want = great_circle(&x0, &theta0, st.s);
        assert!(
            (st.x[0] - want[0]).abs() < 1e-6 && (st.x[1] - want[1]).abs() < 1e-6,
            "s = {}: got {:?}, want {:?}",
            st.s,
            st.x,
            want
        );
    }
    assert!(tr.l_drift < 1e-8, "L drift {}", tr.l_drift);
    assert!(tr.max_el_residual < 1e-6, "EL residual {}", tr.max_el_residual);
}

/// Chord-length parameterization of a coordinate polyline, for comparing
/// curves as point sets.
fn arc_resample(states: &[GeodesicState], fractions: &[f64]) -> Vec<Vec<f64>> {
    let mut cum = vec![0.0];
    for w in states.windows(2) {
        let d: f64 = w[0]
            .x
            .iter()
            .zip(&w[1].x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    fractions
        .iter()
        .map(|&f| {
            let target = f * total;
            let k = cum.partition_point(|&c| c < target).min(states.len() - 1);
            let (k0, k1) = (k.saturating_sub(1), k);
            let seg = (cum[k1] - cum[k0]).max(f64::MIN_POSITIVE);
            let t = (target - cum[k0]) / seg;
            states[k0]
                .x
                .iter()
                .zip(&states[k1].x)
                .map(|(a, b)| a + t * (b - a))
                .collect()
        })
        .collect()
}

#[test]
fn reparameterization_gauge_leaves_the_point_set() {
    let chart = sphere2d();
    let metric = euclid2();
    let init = state(&[FRAC_PI_2, 0.0], &[0.4, 0.8]);
    let affine = IntegrationConfig {
        s_max: 1.2,
        output_points: 401,
        ..Default::default()
    };
    // lambda0 = 0.4 L rescales the parameter exponentially but must keep
    // the same curve in x-space. The gauged run covers more arc in the
    // same parameter span, so compare over the shorter arc length.
    let gauged = IntegrationConfig {
        s_max: 1.2,
        output_points: 401,
        lambda0: Lambda0::Expr(
            Expression::parse("0.4*sqrt(th0^2 + th1^2)", &["x0", "x1", "th0", "th1"]).unwrap(),
        ),
        ..Default::default()
    };
    let a = integrate(&chart, &metric, &init, &affine).unwrap();
    let b = integrate(&chart, &metric, &init, &gauged).unwrap();
    let arc = |states: &[GeodesicState]| -> f64 {
        states
            .windows(2)
            .map(|w| {
                w[0].x
                    .iter()
                    .zip(&w[1].x)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    };
    let (arc_a, arc_b) = (arc(&a.states), arc(&b.states));
    let common_arc = arc_a.min(arc_b);
    let fractions: Vec<f64> = (1..10).map(|i| 0.1 * i as f64 * common_arc / arc_a).collect();
    let fractions_b: Vec<f64> = (1..10).map(|i| 0.1 * i as f64 * common_arc / arc_b).collect();
    let pa = arc_resample(&a.states, &fractions);
    let pb = arc_resample(&b.states, &fractions_b);
    for (p, q) in pa.iter().zip(&pb) {
        for (u, v) in p.iter().zip(q) {
            assert!((u - v).abs() < 1e-6, "curves differ: {p:?} vs {q:?}");
        }
    }
}

#[test]
fn frame_independence_of_coordinate_trajectories() {
    // The same round metric in the standard orthonormal frame and in a
    // position-dependent rotation of it. Coordinate geodesics must agree.
    let chart_a = sphere2d();
    let chart_b = Chart::parse(&[
        vec!["cos(0.3*x0 + 0.7*x1)", "-sin(0.3*x0 + 0.7*x1)*sin(x0)"],
        vec!["sin(0.3*x0 + 0.7*x1)", "cos(0.3*x0 + 0.7*x1)*sin(x0)"],
    ])
    .unwrap();
    let metric = euclid2();
    let x0: [f64; 2] = [1.3, 0.4];
    let theta_a = [0.5, 0.9];
    // Rotate the initial frame velocity into the second frame.
    let alpha = 0.3 * x0[0] + 0.7 * x0[1];
    let theta_b = [
        alpha.cos() * theta_a[0] - alpha.sin() * theta_a[1],
        alpha.sin() * theta_a[0] + alpha.cos() * theta_a[1],
    ];
    let cfg = IntegrationConfig {
        s_max: 1.0,
        output_points: 51,
        ..Default::default()
    };
    let tra = integrate(&chart_a, &metric, &state(&x0, &theta_a), &cfg).unwrap();
    let trb = integrate(&chart_b, &metric, &state(&x0, &theta_b), &cfg).unwrap();
    for (sa, sb) in tra.states.iter().zip(&trb.states) {
        for i in 0..2 {
            assert!(
                (sa.x[i] - sb.x[i]).abs() < 1e-6,
                "frames disagree at s = {}: {:?} vs {:?}",
                sa.s,
                sa.x,
                sb.x
            );
        }
    }
}

#[test]
fn polar_frame_geodesics_are_straight_lines() {
    // theta^0 = x1 dx0, theta^1 = dx1 is the flat plane in polar
    // coordinates (radius x1, angle x0), so geodesics must be straight
    // lines after mapping to Cartesian coordinates.
    let chart = Chart::parse(&[vec!["x1", "0"], vec!["0", "1"]]).unwrap();
    let metric = euclid2();
    let init = state(&[0.3, 1.2], &[0.8, 0.4]);
    let cfg = IntegrationConfig {
        s_max: 1.5,
        output_points: 31,
        ..Default::default()
    };
    let tr = integrate(&chart, &metric, &init, &cfg).unwrap();
    let cartesian = |st: &GeodesicState| -> [f64; 2] {
        let (angle, r) = (st.x[0], st.x[1]);
        [r * angle.cos(), r * angle.sin()]
    };
    // Cartesian velocity from the initial state: d/ds (r cos a, r sin a)
    // with da/ds = theta0 / r, dr/ds = theta1.
    let (a0, r0) = (init.x[0], init.x[1]);
    let (da, dr) = (init.theta[0] / r0, init.theta[1]);
    let v = [
        dr * a0.cos() - r0 * a0.sin() * da,
        dr * a0.sin() + r0 * a0.cos() * da,
    ];
    let p0 = cartesian(&tr.states[0]);
    for st in &tr.states {
        let p = cartesian(st);
        for i in 0..2 {
            let want = p0[i] + st.s * v[i];
            assert!(
                (p[i] - want).abs() < 1e-8,
                "not a straight line at s = {}: {:?} vs {:?}",
                st.s,
                p,
                want
            );
        }
    }
    assert!(tr.l_drift < 1e-10);
}

#[test]
fn rk4_halving_shows_fourth_order() {
    // Flat space with a mild frame perturbation; reference from a tight
    // adaptive run.
    let chart = Chart::parse(&[vec!["1", "0"], vec!["0", "1 + 0.3*sin(x0)"]]).unwrap();
    let metric = euclid2();
    let init = state(&[0.2, 0.0], &[1.0, 0.7]);
    let reference = IntegrationConfig {
        method: Method::Rk45 {
            rtol: 1e-13,
            atol: 1e-14,
        },
        s_max: 1.0,
        output_points: 2,
        ..Default::default()
    };
    let want = integrate(&chart, &metric, &init, &reference).unwrap();
    let endpoint = |step: f64| -> Vec<f64> {
        let cfg = IntegrationConfig {
            method: Method::Rk4 { step },
            s_max: 1.0,
            output_points: 2,
            ..Default::default()
        };
        integrate(&chart, &metric, &init, &cfg)
            .unwrap()
            .states
            .last()
            .unwrap()
            .x
            .clone()
    };
    let err = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&want.states.last().unwrap().x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let e_coarse = err(&endpoint(0.05));
    let e_fine = err(&endpoint(0.025));
    let ratio = e_coarse / e_fine;
    assert!(
        (12.0..20.0).contains(&ratio),
        "expected ~16x error reduction, got {ratio} ({e_coarse} -> {e_fine})"
    );
}

#[test]
fn twisted_degenerate_reintegration_preserves_constraints() {
    // Degenerate metric, th2 invisible; the th1 row leaks into dx2 with an
    // x0-dependent twist. Start on the constraint surface (th1 = 0) and
    // integrate with solved multipliers: C_I must stay small.
    let chart = Chart::parse(&[
        vec!["1", "0", "0"],
        vec!["0", "1", "0.4*x0"],
        vec!["0", "0", "1"],
    ])
    .unwrap();
    let metric = FinslerMetric::parse(3, "sqrt(th0^2 - th1^2)").unwrap();
    let cfg = IntegrationConfig {
        s_max: 1.0,
        output_points: 51,
        lambda_i: LambdaI::Solve,
        ..Default::default()
    };
    let tr = integrate(&chart, &metric, &state(&[0.1, 0.2, 0.3], &[2.0, 0.0, 0.5]), &cfg).unwrap();
    assert!(
        tr.max_constraint <= 1e-6,
        "constraint drift {}",
        tr.max_constraint
    );
    assert!(tr.l_drift < 1e-8);
}

#[test]
fn second_class_solver_fixes_multipliers_when_the_system_is_invertible() {
    // Two null directions coupling through c^1_{23} with an x2-dependent
    // strength, so the constraints drift under the bare flow. The
    // consistency system is invertible: both multipliers are second class
    // and the solved values must flatten dC/ds.
    let chart = Chart::parse(&[
        vec!["1", "0", "0", "0"],
        vec!["0", "1", "0", "0.15*x2^2"],
        vec!["0", "0", "1", "0"],
        vec!["0", "0", "0", "1"],
    ])
    .unwrap();
    let metric = FinslerMetric::parse(4, "sqrt(th0^2 - th1^2)").unwrap();
    let st = state(&[0.4, -0.2, 0.7, 0.1], &[2.0, 0.5, 0.3, -0.4]);
    let cfg = IntegrationConfig::default();
    let sol = solve_second_class(&chart, &metric, &st, &cfg).unwrap();
    assert_eq!(sol.lambda.len(), 2);
    assert!(
        sol.first_class.iter().all(|f| !f),
        "expected second-class: {:?}",
        sol.first_class
    );

    // Measure dC/ds with the solved multipliers via a micro-step of the
    // flow, against the lambda = 0 baseline.
    let dc_ds = |lambda: &[f64]| -> f64 {
        let h = 1e-5;
        let cfg_l = IntegrationConfig {
            method: Method::Rk4 { step: h },
            s_max: h,
            output_points: 2,
            lambda_i: LambdaI::Fixed(lambda.to_vec()),
            ..Default::default()
        };
        let c_at = |x: &[f64], theta: &[f64]| -> Vec<f64> {
            let fp = chart.frame_point(x).unwrap();
            let coeffs = structure_coefficients(&fp);
            let mj = metric.metric_jet(theta).unwrap();
            let ma = metric.rank_analysis(&mj, theta).unwrap();
            ffc_core::connection::constraints(&ma, &coeffs)
        };
        let c0 = c_at(&st.x, &st.theta);
        let tr = integrate(&chart, &metric, &st, &cfg_l).unwrap();
        let last = tr.states.last().unwrap();
        let c1 = c_at(&last.x, &last.theta);
        c0.iter()
            .zip(&c1)
            .map(|(a, b)| ((b - a) / h).abs())
            .fold(0.0, f64::max)
    };
    let drift_solved = dc_ds(&sol.lambda);
    let drift_zero = dc_ds(&[0.0, 0.0]);
    assert!(
        drift_solved < 1e-4,
        "solved multipliers leave dC/ds = {drift_solved}"
    );
    assert!(
        drift_zero > 1e-3,
        "baseline should drift, got {drift_zero}"
    );
    assert!(sol.lambda.iter().any(|l| l.abs() > 1e-3), "{:?}", sol.lambda);
}
