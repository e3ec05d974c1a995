//! Auto-parallel geodesic integration and Euler-Lagrange residuals.
//!
//! The extremal curves of the length functional satisfy, in frame
//! components,
//!
//! ```text
//! dx/ds     = E^{-1}(x) Theta,
//! dTheta/ds = -2 G(x, Theta) + lambda0 Theta / L,
//! ```
//!
//! where `lambda0` is a free gauge function expressing reparameterization
//! invariance (zero keeps `L` conserved and is the default) and the null
//! multipliers `lambda^I` enter through `G` in the degenerate case. The raw
//! Euler-Lagrange residual
//!
//! ```text
//! r_a(s) = d/ds L_a(Theta(s)) + L_b c^b_{ac}(x(s)) Theta^c
//! ```
//!
//! is evaluated along sampled trajectories by fourth-order finite
//! differences and is the module's independent notion of "this curve is a
//! geodesic".

use crate::connection::{berwald_general, constraints, Settings};
use crate::error::Error;
use crate::expr::Expression;
use crate::frame::{structure_coefficients, Chart};
use crate::linalg::{self, Mat};
use crate::metric::{FinslerMetric, MetricAnalysis};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// State of the geodesic flow at parameter `s`.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    /// Curve parameter.
    pub s: f64,
    /// Coordinates.
    pub x: Vec<f64>,
    /// Frame velocity components `theta^a(c')`.
    pub theta: Vec<f64>,
}

/// Stepper choice.
#[derive(Debug, Clone)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4 {
        /// Step size.
        step: f64,
    },
    /// Dormand-Prince 5(4) with an embedded error estimate.
    Rk45 {
        /// Relative tolerance.
        rtol: f64,
        /// Absolute tolerance.
        atol: f64,
    },
}

/// Gauge rule for the reparameterization multiplier `lambda0`.
#[derive(Debug, Clone)]
pub enum Lambda0 {
    /// `lambda0 = 0`: affine-like parameter, `L` conserved.
    Zero,
    /// A user expression over `x0..x{n}, th0..th{n}`.
    Expr(Expression),
}

/// Rule for the null-direction multipliers `lambda^I`.
#[derive(Debug, Clone)]
pub enum LambdaI {
    /// All zero (canonical gauge).
    Zero,
    /// Fixed values, one per null direction.
    Fixed(Vec<f64>),
    /// Solve for consistency with the constraints at every evaluation.
    Solve,
}

/// Integration parameters.
#[derive(Debug, Clone)]
pub struct IntegrationConfig {
    /// Stepper.
    pub method: Method,
    /// Final parameter value (the flow starts at the initial state's `s`).
    pub s_max: f64,
    /// Number of equally spaced output samples (including both ends).
    pub output_points: usize,
    /// Gauge rule for `lambda0`.
    pub lambda0: Lambda0,
    /// Rule for `lambda^I`.
    pub lambda_i: LambdaI,
    /// Constraint drift beyond this flags the trajectory (diagnostic only).
    pub constraint_threshold: f64,
    /// Tolerances for the connection assembly.
    pub settings: Settings,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            method: Method::Rk45 {
                rtol: 1e-10,
                atol: 1e-12,
            },
            s_max: 1.0,
            output_points: 201,
            lambda0: Lambda0::Zero,
            lambda_i: LambdaI::Zero,
            constraint_threshold: 1e-6,
            settings: Settings::default(),
        }
    }
}

/// Integration output: sampled states plus conservation diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// States on the uniform output grid.
    pub states: Vec<GeodesicState>,
    /// `L(Theta)` per sample.
    pub l_values: Vec<f64>,
    /// Max `|L - L(0)|` over the samples.
    pub l_drift: f64,
    /// Max `|C_I|` over the samples (zero when regular).
    pub max_constraint: f64,
    /// Whether `max_constraint` stayed under the configured threshold.
    pub constraints_ok: bool,
    /// Max Euler-Lagrange residual over the samples (NaN when the grid is
    /// too short to difference).
    pub max_el_residual: f64,
}

fn analysis_at(
    metric: &FinslerMetric,
    theta: &[f64],
    settings: &Settings,
) -> Result<MetricAnalysis, Error> {
    let mj = metric.metric_jet(theta)?;
    metric.rank_analysis_with_tol(&mj, theta, settings.rank_tol)
}

fn eval_lambda0(rule: &Lambda0, x: &[f64], theta: &[f64]) -> f64 {
    match rule {
        Lambda0::Zero => 0.0,
        Lambda0::Expr(e) => {
            let mut vars = Vec::with_capacity(x.len() + theta.len());
            vars.extend_from_slice(x);
            vars.extend_from_slice(theta);
            e.eval(&vars)
        }
    }
}

/// Right-hand side with explicit multiplier values.
fn rhs_with_lambda(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    theta: &[f64],
    lambda0: f64,
    lambda_i: &[f64],
    settings: &Settings,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let fp = chart.frame_point_with_tol(x, settings.frame_tol)?;
    let coeffs = structure_coefficients(&fp);
    let ma = analysis_at(metric, theta, settings)?;
    let g = berwald_general(&ma, &coeffs, lambda_i)?;
    let dx = fp.einv.mul_vec(theta);
    let dtheta: Vec<f64> = (0..theta.len())
        .map(|a| -2.0 * g[a] + lambda0 * theta[a] / ma.l)
        .collect();
    Ok((dx, dtheta))
}

/// The flow field at a state: `(dx/ds, dTheta/ds)`.
pub fn rhs(
    chart: &Chart,
    metric: &FinslerMetric,
    state: &GeodesicState,
    config: &IntegrationConfig,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let lambda0 = eval_lambda0(&config.lambda0, &state.x, &state.theta);
    let lambda_i = resolve_lambda_i(chart, metric, state, config)?;
    rhs_with_lambda(
        chart,
        metric,
        &state.x,
        &state.theta,
        lambda0,
        &lambda_i,
        &config.settings,
    )
}

fn resolve_lambda_i(
    chart: &Chart,
    metric: &FinslerMetric,
    state: &GeodesicState,
    config: &IntegrationConfig,
) -> Result<Vec<f64>, Error> {
    match &config.lambda_i {
        LambdaI::Zero => Ok(Vec::new()),
        LambdaI::Fixed(v) => Ok(v.clone()),
        LambdaI::Solve => Ok(solve_second_class(chart, metric, state, config)?.lambda),
    }
}

/// Outcome of the constraint-consistency solve.
#[derive(Debug, Clone)]
pub struct SecondClassSolution {
    /// Multiplier values (zero on first-class directions).
    pub lambda: Vec<f64>,
    /// Which directions were left free (rank-deficient rows of the system).
    pub first_class: Vec<bool>,
}

/// Fix `lambda^I` so the constraints are preserved along the flow.
///
/// The derivative `dC_I/ds` is measured by a forward difference along one
/// micro-step of the `lambda`-parameterized flow; since the dependence on
/// `lambda` is affine this yields a `D x D` linear system, solved by a
/// truncated singular value decomposition (relative cutoff `1e-8`).
/// Directions in the numerical null space are classified first-class and
/// keep `lambda = 0`.
pub fn solve_second_class(
    chart: &Chart,
    metric: &FinslerMetric,
    state: &GeodesicState,
    config: &IntegrationConfig,
) -> Result<SecondClassSolution, Error> {
    let settings = &config.settings;
    let ma = analysis_at(metric, &state.theta, settings)?;
    let d = ma.degeneracy();
    if d == 0 {
        return Ok(SecondClassSolution {
            lambda: Vec::new(),
            first_class: Vec::new(),
        });
    }
    let lambda0 = eval_lambda0(&config.lambda0, &state.x, &state.theta);
    let state_norm = crate::real::fp::sqrt(
        state.x.iter().chain(&state.theta).map(|v| v * v).sum::<f64>(),
    );
    let h = 1e-6 * (1.0 + state_norm);

    let c_of = |x: &[f64], theta: &[f64]| -> Result<Vec<f64>, Error> {
        let fp = chart.frame_point_with_tol(x, settings.frame_tol)?;
        let coeffs = structure_coefficients(&fp);
        let ma = analysis_at(metric, theta, settings)?;
        Ok(constraints(&ma, &coeffs))
    };
    let c0 = c_of(&state.x, &state.theta)?;

    // dC/ds after one RK4 micro-step of size h with the given lambda.
    let dc_ds = |lambda: &[f64]| -> Result<Vec<f64>, Error> {
        let f = |x: &[f64], th: &[f64]| {
            rhs_with_lambda(chart, metric, x, th, lambda0, lambda, settings)
        };
        let (x1, th1) = rk4_step(&state.x, &state.theta, h, f)?;
        let c1 = c_of(&x1, &th1)?;
        Ok(c0.iter().zip(&c1).map(|(a, b)| (b - a) / h).collect())
    };

    let b = dc_ds(&vec![0.0; d])?;
    let mut a = Mat::<f64>::zeros(d, d);
    for j in 0..d {
        let mut unit = vec![0.0; d];
        unit[j] = 1.0;
        let col = dc_ds(&unit)?;
        for i in 0..d {
            a[(i, j)] = col[i] - b[i];
        }
    }

    // Minimum-norm solution of A lambda = -b through the truncated SVD of
    // the symmetric eigen-decomposition of A^T A.
    let ata = a.transpose().mul_mat(&a);
    let (w, vmat) = linalg::sym_eigen(&ata);
    let sig: Vec<f64> = w.iter().map(|x| crate::real::fp::sqrt(x.max(0.0))).collect();
    let sig_max = sig.iter().fold(0.0_f64, |m, &s| m.max(s));
    let cutoff = 1e-8 * sig_max.max(f64::MIN_POSITIVE);
    let rhs_vec: Vec<f64> = b.iter().map(|v| -v).collect();
    let mut lambda = vec![0.0; d];
    for k in 0..d {
        if sig[k] <= cutoff {
            continue;
        }
        // u_k = A v_k / sigma_k; coefficient = (u_k . rhs) / sigma_k.
        let vk: Vec<f64> = (0..d).map(|i| vmat[(i, k)]).collect();
        let avk = a.mul_vec(&vk);
        let uk_dot: f64 = avk.iter().zip(&rhs_vec).map(|(u, r)| u * r).sum::<f64>() / sig[k];
        let coeff = uk_dot / sig[k];
        for i in 0..d {
            lambda[i] += coeff * vk[i];
        }
    }
    let first_class: Vec<bool> = (0..d)
        .map(|i| {
            let null_mass: f64 = (0..d)
                .filter(|&k| sig[k] <= cutoff)
                .map(|k| vmat[(i, k)] * vmat[(i, k)])
                .sum();
            null_mass > 0.5
        })
        .collect();
    Ok(SecondClassSolution {
        lambda,
        first_class,
    })
}

type Flow<'a> = &'a dyn Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>), Error>;

fn rk4_step(
    x: &[f64],
    th: &[f64],
    h: f64,
    f: impl Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>), Error>,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let (k1x, k1t) = f(x, th)?;
    let (k2x, k2t) = f(&add(x, &k1x, h / 2.0), &add(th, &k1t, h / 2.0))?;
    let (k3x, k3t) = f(&add(x, &k2x, h / 2.0), &add(th, &k2t, h / 2.0))?;
    let (k4x, k4t) = f(&add(x, &k3x, h), &add(th, &k3t, h))?;
    let comb = |a: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        a.iter()
            .enumerate()
            .map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    Ok((
        comb(x, &k1x, &k2x, &k3x, &k4x),
        comb(th, &k1t, &k2t, &k3t, &k4t),
    ))
}

/// Dormand-Prince 5(4) stage coefficients (the nodes are not needed: the
/// flow is autonomous).
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One adaptive Dormand-Prince segment from `s` to `s_end`.
#[allow(clippy::too_many_arguments)]
fn rk45_segment(
    y: &mut Vec<f64>,
    s: &mut f64,
    s_end: f64,
    h: &mut f64,
    rtol: f64,
    atol: f64,
    span: f64,
    f: Flow<'_>,
) -> Result<(), Error> {
    let n = y.len() / 2;
    let eval = |y: &[f64]| -> Result<Vec<f64>, Error> {
        let (dx, dt) = f(&y[..n], &y[n..])?;
        let mut out = dx;
        out.extend(dt);
        Ok(out)
    };
    let mut steps = 0usize;
    while *s < s_end {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::StepFailure { s: *s });
        }
        let mut hs = h.min(s_end - *s);
        if hs <= 1e-14 * span {
            return Err(Error::StepFailure { s: *s });
        }
        // Stage evaluations.
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(eval(y)?);
        let mut failed_eval = false;
        for i in 1..7 {
            let mut yi = y.clone();
            for (m, ym) in yi.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += DP_A[i][j] * kj[m];
                }
                *ym += hs * acc;
            }
            match eval(&yi) {
                Ok(ki) => k.push(ki),
                Err(_) => {
                    failed_eval = true;
                    break;
                }
            }
        }
        if failed_eval {
            // Evaluation left the admissible region; retry with a smaller step.
            *h = hs * 0.25;
            if *h <= 1e-14 * span {
                return Err(Error::StepFailure { s: *s });
            }
            continue;
        }
        let mut y5 = y.clone();
        let mut err: f64 = 0.0;
        for m in 0..y.len() {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                acc5 += DP_B5[j] * k[j][m];
                acc4 += DP_B4[j] * k[j][m];
            }
            let v5 = y[m] + hs * acc5;
            let v4 = y[m] + hs * acc4;
            y5[m] = v5;
            let sc = atol + rtol * y[m].abs().max(v5.abs());
            let e = (v5 - v4) / sc;
            err += e * e;
        }
        let err = crate::real::fp::sqrt(err / y.len() as f64);
        if err <= 1.0 {
            *s += hs;
            *y = y5;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * crate::real::fp::powf(1.0 / err, 1.0 / 5.0)).clamp(0.2, 5.0)
            };
            *h = hs * grow;
        } else {
            hs *= (0.9 * crate::real::fp::powf(1.0 / err, 1.0 / 5.0)).clamp(0.2, 1.0);
            *h = hs;
        }
    }
    Ok(())
}

/// Integrate the auto-parallel flow from `init` to `config.s_max`, sampling
/// on a uniform grid.
pub fn integrate(
    chart: &Chart,
    metric: &FinslerMetric,
    init: &GeodesicState,
    config: &IntegrationConfig,
) -> Result<Trajectory, Error> {
    let n = chart.dim();
    if init.x.len() != n || init.theta.len() != n {
        return Err(Error::Dimension {
            message: format!("initial state must have {n} coordinates and velocities"),
        });
    }
    if config.output_points < 2 {
        return Err(Error::Dimension {
            message: "output grid needs at least 2 points".into(),
        });
    }
    let span = (config.s_max - init.s).abs().max(f64::MIN_POSITIVE);

    // The multiplier rules are resolved per evaluation point.
    let flow = |x: &[f64], th: &[f64]| -> Result<(Vec<f64>, Vec<f64>), Error> {
        let state = GeodesicState {
            s: 0.0,
            x: x.to_vec(),
            theta: th.to_vec(),
        };
        let lambda0 = eval_lambda0(&config.lambda0, x, th);
        let lambda_i = resolve_lambda_i(chart, metric, &state, config)?;
        rhs_with_lambda(chart, metric, x, th, lambda0, &lambda_i, &config.settings)
    };

    let grid: Vec<f64> = (0..config.output_points)
        .map(|i| init.s + (config.s_max - init.s) * i as f64 / (config.output_points - 1) as f64)
        .collect();

    let mut states = Vec::with_capacity(config.output_points);
    states.push(init.clone());

    match config.method {
        Method::Rk4 { step } => {
            if step <= 0.0 {
                return Err(Error::Dimension {
                    message: "RK4 step must be positive".into(),
                });
            }
            let mut x = init.x.clone();
            let mut th = init.theta.clone();
            for w in grid.windows(2) {
                let (s0, s1) = (w[0], w[1]);
                let interval = s1 - s0;
                let nsub = crate::real::fp::ceil(interval / step).max(1.0) as usize;
                let hs = interval / nsub as f64;
                for _ in 0..nsub {
                    let (nx, nth) = rk4_step(&x, &th, hs, flow)?;
                    x = nx;
                    th = nth;
                }
                states.push(GeodesicState {
                    s: s1,
                    x: x.clone(),
                    theta: th.clone(),
                });
            }
        }
        Method::Rk45 { rtol, atol } => {
            let mut y: Vec<f64> = init.x.iter().chain(&init.theta).copied().collect();
            let mut s = init.s;
            let mut h = span / 100.0;
            for w in grid.windows(2) {
                rk45_segment(&mut y, &mut s, w[1], &mut h, rtol, atol, span, &flow)?;
                states.push(GeodesicState {
                    s: w[1],
                    x: y[..n].to_vec(),
                    theta: y[n..].to_vec(),
                });
            }
        }
    }

    // Diagnostics.
    let mut l_values = Vec::with_capacity(states.len());
    let mut max_constraint = 0.0_f64;
    for st in &states {
        let ma = analysis_at(metric, &st.theta, &config.settings)?;
        l_values.push(ma.l);
        let fp = chart.frame_point_with_tol(&st.x, config.settings.frame_tol)?;
        let coeffs = structure_coefficients(&fp);
        for c in constraints(&ma, &coeffs) {
            max_constraint = max_constraint.max(c.abs());
        }
    }
    let l0 = l_values[0];
    let l_drift = l_values
        .iter()
        .fold(0.0_f64, |m, &l| m.max((l - l0).abs()));
    let max_el_residual = if states.len() >= 5 {
        el_residual(chart, metric, &states)?
            .iter()
            .flatten()
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    } else {
        f64::NAN
    };

    Ok(Trajectory {
        states,
        l_values,
        l_drift,
        constraints_ok: max_constraint <= config.constraint_threshold,
        max_constraint,
        max_el_residual,
    })
}

/// Raw Euler-Lagrange residual along a uniformly sampled trajectory.
///
/// Returns one covector per sample. The `d/ds` of `L_a` uses fourth-order
/// central differences in the interior and one-sided fourth-order stencils
/// at the four boundary samples; at least 5 samples are required.
pub fn el_residual(
    chart: &Chart,
    metric: &FinslerMetric,
    states: &[GeodesicState],
) -> Result<Vec<Vec<f64>>, Error> {
    let len = states.len();
    if len < 5 {
        return Err(Error::TooFewSamples { got: len, need: 5 });
    }
    let n = chart.dim();
    let h = states[1].s - states[0].s;
    // L_a series.
    let mut la_series: Vec<Vec<f64>> = Vec::with_capacity(len);
    for st in states {
        let mj = metric.metric_jet(&st.theta)?;
        la_series.push(mj.l_a);
    }
    let deriv = |i: usize, a: usize| -> f64 {
        let f = |k: usize| la_series[k][a];
        if i >= 2 && i + 2 < len {
            (-f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2)) / (12.0 * h)
        } else if i < 2 {
            // forward one-sided, shifted for i = 1
            let j = i;
            (-25.0 * f(j) + 48.0 * f(j + 1) - 36.0 * f(j + 2) + 16.0 * f(j + 3)
                - 3.0 * f(j + 4))
                / (12.0 * h)
        } else {
            let j = i;
            (25.0 * f(j) - 48.0 * f(j - 1) + 36.0 * f(j - 2) - 16.0 * f(j - 3)
                + 3.0 * f(j - 4))
                / (12.0 * h)
        }
    };
    let mut out = Vec::with_capacity(len);
    for (i, st) in states.iter().enumerate() {
        let fp = chart.frame_point(&st.x)?;
        let coeffs = structure_coefficients(&fp);
        let mj = metric.metric_jet(&st.theta)?;
        let r: Vec<f64> = (0..n)
            .map(|a| {
                let mut bracket = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        bracket += mj.l_a[b] * coeffs.get(b, a, c) * st.theta[c];
                    }
                }
                deriv(i, a) + bracket
            })
            .collect();
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat2d() -> Chart {
        Chart::parse(&[vec!["1", "0"], vec!["0", "1"]]).unwrap()
    }

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

    #[test]
    fn flat_rhs_is_straight() {
        let cfg = IntegrationConfig::default();
        let (dx, dth) = rhs(&flat2d(), &euclid2(), &state(&[0.0, 0.0], &[1.0, 2.0]), &cfg).unwrap();
        assert_eq!(dx, vec![1.0, 2.0]);
        assert!(dth.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn equator_is_momentarily_geodesic() {
        let cfg = IntegrationConfig::default();
        let st = state(&[core::f64::consts::FRAC_PI_2, 0.0], &[0.0, 1.0]);
        let (dx, dth) = rhs(&sphere2d(), &euclid2(), &st, &cfg).unwrap();
        assert!((dx[1] - 1.0).abs() < 1e-14);
        assert!(dth.iter().all(|v| v.abs() < 1e-13), "{dth:?}");
    }

    #[test]
    fn lambda0_adds_exactly_the_gauge_term() {
        let chart = sphere2d();
        let metric = euclid2();
        let st = state(&[1.0, 0.5], &[0.7, -0.4]);
        let mut cfg = IntegrationConfig::default();
        let (_, base) = rhs(&chart, &metric, &st, &cfg).unwrap();
        // lambda0 = 0.3 * L (a degree-1 expression is allowed; the gauge
        // term is lambda0 * theta / L = 0.3 * theta).
        cfg.lambda0 = Lambda0::Expr(
            Expression::parse("0.3*sqrt(th0^2 + th1^2)", &["x0", "x1", "th0", "th1"]).unwrap(),
        );
        let (_, gauged) = rhs(&chart, &metric, &st, &cfg).unwrap();
        for a in 0..2 {
            assert!((gauged[a] - base[a] - 0.3 * st.theta[a]).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_integration_is_exact() {
        let cfg = IntegrationConfig {
            s_max: 1.0,
            output_points: 11,
            ..Default::default()
        };
        let tr = integrate(&flat2d(), &euclid2(), &state(&[0.0, 0.0], &[1.0, 2.0]), &cfg).unwrap();
        let last = tr.states.last().unwrap();
        assert!((last.x[0] - 1.0).abs() < 1e-12);
        assert!((last.x[1] - 2.0).abs() < 1e-12);
        assert!(tr.l_drift < 1e-12);
        assert!(tr.max_el_residual < 1e-9);
    }

    #[test]
    fn degenerate_flow_keeps_null_components_frozen() {
        let chart = Chart::parse(&[
            vec!["1", "0", "0"],
            vec!["0", "1", "0"],
            vec!["0", "0", "1"],
        ])
        .unwrap();
        let metric = FinslerMetric::parse(3, "sqrt(th0^2 - th1^2)").unwrap();
        let cfg = IntegrationConfig {
            s_max: 1.0,
            output_points: 21,
            ..Default::default()
        };
        let tr = integrate(&chart, &metric, &state(&[0.0; 3], &[2.0, 0.5, 0.0]), &cfg).unwrap();
        let last = tr.states.last().unwrap();
        // Straight line in (x0, x1); x2 stays put because theta2 = 0 and
        // lambda^I = 0.
        assert!((last.x[0] - 2.0).abs() < 1e-10);
        assert!((last.x[1] - 0.5).abs() < 1e-10);
        assert!(last.x[2].abs() < 1e-12);
        assert!(tr.max_constraint < 1e-12);
    }

    #[test]
    fn el_residual_detects_non_geodesics() {
        // The perturbation scales Theta by (1 + 0.1 s). Pure scaling leaves
        // the degree-0 covector L_a untouched, so only the bracket term can
        // see it: this check needs a non-holonomic frame, hence the sphere.
        let chart = sphere2d();
        let metric = euclid2();
        let cfg = IntegrationConfig {
            s_max: 1.0,
            output_points: 101,
            ..Default::default()
        };
        let init = state(&[core::f64::consts::FRAC_PI_2, 0.0], &[0.4, 0.9]);
        let tr = integrate(&chart, &metric, &init, &cfg).unwrap();
        let clean = el_residual(&chart, &metric, &tr.states).unwrap();
        let max_clean = clean.iter().flatten().fold(0.0_f64, |m, r| m.max(r.abs()));
        assert!(max_clean < 1e-6, "clean geodesic residual {max_clean}");

        let perturbed: Vec<GeodesicState> = tr
            .states
            .iter()
            .map(|st| GeodesicState {
                s: st.s,
                x: st.x.clone(),
                theta: st.theta.iter().map(|t| t * (1.0 + 0.1 * st.s)).collect(),
            })
            .collect();
        let bad = el_residual(&chart, &metric, &perturbed).unwrap();
        let max_bad = bad.iter().flatten().fold(0.0_f64, |m, r| m.max(r.abs()));
        assert!(max_bad > 1e-3, "perturbation went unnoticed: {max_bad}");
    }

    #[test]
    fn too_few_samples() {
        let chart = flat2d();
        let metric = euclid2();
        let states: Vec<GeodesicState> = (0..4)
            .map(|i| state(&[i as f64, 0.0], &[1.0, 0.0]))
            .collect();
        assert!(matches!(
            el_residual(&chart, &metric, &states).unwrap_err(),
            Error::TooFewSamples { got: 4, need: 5 }
        ));
    }

    #[test]
    fn second_class_solver_classifies_flat_constraints_as_first_class() {
        let chart = Chart::parse(&[
            vec!["1", "0", "0"],
            vec!["0", "1", "0"],
            vec!["0", "0", "1"],
        ])
        .unwrap();
        let metric = FinslerMetric::parse(3, "sqrt(th0^2 - th1^2)").unwrap();
        let cfg = IntegrationConfig::default();
        let sol = solve_second_class(&chart, &metric, &state(&[0.0; 3], &[2.0, 0.3, 0.4]), &cfg)
            .unwrap();
        assert_eq!(sol.lambda.len(), 1);
        assert!(sol.lambda[0].abs() < 1e-10);
        assert!(sol.first_class[0]);
    }

    #[test]
    fn second_class_solver_empty_for_regular() {
        let cfg = IntegrationConfig::default();
        let sol =
            solve_second_class(&sphere2d(), &euclid2(), &state(&[1.0, 0.2], &[0.6, 0.8]), &cfg)
                .unwrap();
        assert!(sol.lambda.is_empty());
    }

    #[test]
    fn rk4_and_rk45_agree() {
        let chart = sphere2d();
        let metric = euclid2();
        let init = state(&[core::f64::consts::FRAC_PI_2, 0.0], &[0.3, 0.9]);
        let fine = IntegrationConfig {
            method: Method::Rk4 { step: 1e-3 },
            s_max: 0.8,
            output_points: 9,
            ..Default::default()
        };
        let adaptive = IntegrationConfig {
            s_max: 0.8,
            output_points: 9,
            ..Default::default()
        };
        let a = integrate(&chart, &metric, &init, &fine).unwrap();
        let b = integrate(&chart, &metric, &init, &adaptive).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for i in 0..2 {
                assert!((sa.x[i] - sb.x[i]).abs() < 1e-8);
            }
        }
    }
}
