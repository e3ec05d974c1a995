//! Builtin example problems.
//!
//! Six ready-to-run configs covering the interesting regimes: flat space,
//! constant-curvature surfaces (where the connection must reproduce the
//! spin connection), a frame that is singular somewhere (rindler2d), a
//! degenerate metric with an extra null direction, and a Randers-type
//! perturbation that is regular but not Riemannian. `ffc examples` writes
//! them to disk; the test suites run them directly.

use crate::config::{GeodesicSpec, ProblemConfig, Samples};

const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

fn base(dim: usize, vielbein: &[&[&str]], metric: &str) -> ProblemConfig {
    ProblemConfig {
        version: 1,
        dim,
        vielbein: vielbein
            .iter()
            .map(|row| row.iter().map(|s| s.to_string()).collect())
            .collect(),
        metric: metric.to_string(),
        tolerances: Default::default(),
        gauge: Default::default(),
        samples: Samples::default(),
        geodesic: None,
        output: None,
    }
}

fn geodesic(x0: &[f64], theta0: &[f64], s_max: f64) -> GeodesicSpec {
    GeodesicSpec {
        x0: x0.to_vec(),
        theta0: Some(theta0.to_vec()),
        dx0: None,
        s_max,
        method: "rk45".to_string(),
        rtol: 1e-10,
        atol: 1e-12,
        step: 1e-3,
        output_points: 201,
    }
}

/// Euclidean plane in the coordinate frame.
pub fn flat2d() -> ProblemConfig {
    let mut cfg = base(2, &[&["1", "0"], &["0", "1"]], "sqrt(th0^2 + th1^2)");
    cfg.samples.seed = 0xF1A7;
    cfg.geodesic = Some(geodesic(&[0.0, 0.0], &[1.0, 2.0], 1.0));
    cfg
}

/// Round unit sphere in the orthonormal frame `(dx0, sin(x0) dx1)`.
pub fn sphere2d() -> ProblemConfig {
    let mut cfg = base(2, &[&["1", "0"], &["0", "sin(x0)"]], "sqrt(th0^2 + th1^2)");
    cfg.samples.seed = 0x5B8E;
    cfg.samples.x_box = Some(vec![[0.4, 2.74], [0.0, 6.2]]);
    cfg.geodesic = Some(geodesic(&[FRAC_PI_2, 0.0], &[0.0, 1.0], FRAC_PI_2));
    cfg
}

/// Hyperbolic plane in the orthonormal frame `(dx0, sinh(x0) dx1)`.
pub fn hyperbolic2d() -> ProblemConfig {
    let mut cfg = base(2, &[&["1", "0"], &["0", "sinh(x0)"]], "sqrt(th0^2 + th1^2)");
    cfg.samples.seed = 0x4B01;
    cfg.samples.x_box = Some(vec![[0.3, 2.0], [-3.0, 3.0]]);
    cfg.geodesic = Some(geodesic(&[1.0, 0.0], &[0.6, 0.8], 1.0));
    cfg
}

/// Flat plane in the Rindler-type frame `(x1 dx0, dx1)` (polar in
/// disguise; the frame degenerates at x1 = 0, so sampling stays away).
pub fn rindler2d() -> ProblemConfig {
    let mut cfg = base(2, &[&["x1", "0"], &["0", "1"]], "sqrt(th0^2 + th1^2)");
    cfg.samples.seed = 0x41D1;
    cfg.samples.x_box = Some(vec![[-1.0, 1.0], [0.5, 3.0]]);
    cfg.geodesic = Some(geodesic(&[0.0, 1.0], &[1.0, 0.5], 1.0));
    cfg
}

/// Degenerate Lorentzian-type metric in three dimensions: `th2` never
/// enters, so the Hessian has one extra null direction (D = 1). Sampling
/// keeps `theta` inside the cone `th0^2 > th1^2`.
pub fn degenerate3d() -> ProblemConfig {
    let mut cfg = base(
        3,
        &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]],
        "sqrt(th0^2 - th1^2)",
    );
    cfg.samples.seed = 0xDE6E;
    cfg.samples.theta_box = Some(vec![[1.5, 2.5], [-1.0, 1.0], [-1.0, 1.0]]);
    cfg.geodesic = Some(geodesic(&[0.0, 0.0, 0.0], &[2.0, 0.5, 0.0], 1.0));
    cfg
}

/// Randers-type metric on the sphere frame: regular but genuinely Finsler.
pub fn randers_sphere() -> ProblemConfig {
    let mut cfg = base(
        2,
        &[&["1", "0"], &["0", "sin(x0)"]],
        "sqrt(th0^2 + th1^2) + 0.1*th0",
    );
    cfg.samples.seed = 0x8A2D;
    cfg.samples.x_box = Some(vec![[0.4, 2.74], [0.0, 6.2]]);
    cfg.geodesic = Some(geodesic(&[FRAC_PI_2, 0.0], &[0.3, 0.9], 1.0));
    cfg
}

/// All builtin examples with their stable file names.
pub fn all() -> Vec<(&'static str, ProblemConfig)> {
    vec![
        ("flat2d", flat2d()),
        ("sphere2d", sphere2d()),
        ("hyperbolic2d", hyperbolic2d()),
        ("rindler2d", rindler2d()),
        ("degenerate3d", degenerate3d()),
        ("randers-sphere", randers_sphere()),
    ]
}
