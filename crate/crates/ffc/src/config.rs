//! Problem configuration: the JSON file format and its validation.
//!
//! A config is a single JSON object with `"version": 1`. Coordinates are
//! named `x0..x{n}`, frame components `th0..th{n}`; the vielbein entries
//! are expression strings over the former, the metric over the latter.
//! Everything but `version`, `dim`, `vielbein` and `metric` has defaults.

use crate::error::CmdError;
use ffc_core::connection::Settings;
use ffc_core::frame::Chart;
use ffc_core::geodesic::{IntegrationConfig, Lambda0, LambdaI, Method};
use ffc_core::metric::FinslerMetric;
use ffc_core::Expression;
use serde::{Deserialize, Serialize};

/// Top-level problem definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Format version; must be 1.
    pub version: u32,
    /// Chart dimension `n + 1` (at least 2).
    pub dim: usize,
    /// Coframe entries `e^a_mu` as expression strings, row `a`, column `mu`.
    pub vielbein: Vec<Vec<String>>,
    /// Metric expression over `th0..th{n}`.
    pub metric: String,
    /// Numerical tolerances.
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Multiplier rules.
    #[serde(default)]
    pub gauge: Gauge,
    /// Sample specification for the point-cloud commands.
    #[serde(default)]
    pub samples: Samples,
    /// Geodesic specification (required by the geodesic command).
    #[serde(default)]
    pub geodesic: Option<GeodesicSpec>,
    /// Default output paths per command; the `--out` flag overrides.
    #[serde(default)]
    pub output: Option<OutputPaths>,
}

/// Per-command default output paths.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    /// JSON report of `check`.
    pub check: Option<String>,
    /// JSONL records of `connection`.
    pub connection: Option<String>,
    /// CSV table of `geodesic`.
    pub geodesic: Option<String>,
    /// JSON report of `oracle-compare`.
    pub oracle_compare: Option<String>,
}

/// Tolerances block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative Hessian rank cutoff.
    pub rank: f64,
    /// Residual pass/fail threshold for `check` and `oracle-compare`.
    pub residual: f64,
    /// Relative coframe singularity threshold.
    pub frame_singularity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            residual: 1e-8,
            frame_singularity: 1e-12,
        }
    }
}

/// Multiplier rules block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gauge {
    /// Reparameterization gauge `lambda0`: `null` means zero, otherwise an
    /// expression over `x0..x{n}, th0..th{n}`.
    pub lambda0: Option<String>,
    /// Null-direction multipliers.
    pub lambda_i: LambdaISpec,
}

/// How the null-direction multipliers are chosen.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum LambdaISpec {
    /// All zero.
    #[default]
    Zero,
    /// Fixed values, one per null direction.
    Fixed {
        /// The multiplier values.
        values: Vec<f64>,
    },
    /// Solve for constraint consistency at every evaluation.
    Solve,
}

/// Sample specification: either explicit points or a seeded box sampler.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    /// splitmix64 seed.
    pub seed: u64,
    /// Number of samples to draw.
    pub count: usize,
    /// Per-coordinate `[lo, hi]` for `x` (defaults to `[-1, 1]` each).
    pub x_box: Option<Vec<[f64; 2]>>,
    /// Per-component `[lo, hi]` for `theta` (defaults to `[-1, 1]` each).
    pub theta_box: Option<Vec<[f64; 2]>>,
    /// Reject draws with `|L(theta)| / ||theta||` below this.
    pub min_l: f64,
    /// Explicit points instead of random draws.
    pub points: Option<Vec<SamplePoint>>,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            seed: 0x5EED_F1E1D,
            count: 100,
            x_box: None,
            theta_box: None,
            min_l: 0.05,
            points: None,
        }
    }
}

/// One explicit sample point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePoint {
    /// Coordinates.
    pub x: Vec<f64>,
    /// Frame velocity components.
    pub theta: Vec<f64>,
}

/// Geodesic block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    /// Initial coordinates.
    pub x0: Vec<f64>,
    /// Initial frame velocity (exactly one of `theta0`/`dx0`).
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    /// Initial coordinate velocity (converted via the coframe).
    #[serde(default)]
    pub dx0: Option<Vec<f64>>,
    /// Final curve parameter.
    pub s_max: f64,
    /// `"rk45"` (default) or `"rk4"`.
    #[serde(default = "default_method")]
    pub method: String,
    /// Relative tolerance for rk45.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Absolute tolerance for rk45.
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Fixed step for rk4.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Uniform output grid size.
    #[serde(default = "default_output_points")]
    pub output_points: usize,
}

fn default_method() -> String {
    "rk45".to_string()
}
fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_step() -> f64 {
    1e-3
}
fn default_output_points() -> usize {
    201
}

/// A validated problem: parsed chart and metric plus the raw config.
#[derive(Debug)]
pub struct Problem {
    /// The chart.
    pub chart: Chart,
    /// The metric.
    pub metric: FinslerMetric,
    /// The config it came from.
    pub config: ProblemConfig,
}

impl ProblemConfig {
    /// Parse a config from JSON text.
    pub fn from_json(text: &str) -> Result<Self, CmdError> {
        serde_json::from_str(text).map_err(|e| CmdError::input(format!("config parse: {e}")))
    }

    /// Serialize to pretty JSON.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Validate shapes and parse all expressions.
    pub fn build(&self) -> Result<Problem, CmdError> {
        if self.version != 1 {
            return Err(CmdError::input(format!(
                "unsupported config version {} (expected 1)",
                self.version
            )));
        }
        if self.dim < 2 {
            return Err(CmdError::input(format!("dim must be >= 2, got {}", self.dim)));
        }
        if self.vielbein.len() != self.dim
            || self.vielbein.iter().any(|row| row.len() != self.dim)
        {
            return Err(CmdError::input(format!(
                "vielbein must be a {0} x {0} array of expressions",
                self.dim
            )));
        }
        let rows: Vec<Vec<&str>> = self
            .vielbein
            .iter()
            .map(|row| row.iter().map(|s| s.as_str()).collect())
            .collect();
        let chart = Chart::parse(&rows).map_err(CmdError::from_core)?;
        let metric =
            FinslerMetric::parse(self.dim, &self.metric).map_err(CmdError::from_core)?;
        for boxes in [&self.samples.x_box, &self.samples.theta_box]
            .into_iter()
            .flatten()
        {
            if boxes.len() != self.dim {
                return Err(CmdError::input(
                    "sample boxes must have one [lo, hi] pair per dimension".to_string(),
                ));
            }
            if boxes.iter().any(|[lo, hi]| hi <= lo || lo.is_nan() || hi.is_nan()) {
                return Err(CmdError::input("sample box bounds must satisfy lo < hi".into()));
            }
        }
        if let Some(points) = &self.samples.points {
            for p in points {
                if p.x.len() != self.dim || p.theta.len() != self.dim {
                    return Err(CmdError::input(
                        "explicit sample points must match the chart dimension".into(),
                    ));
                }
            }
        }
        Ok(Problem {
            chart,
            metric,
            config: self.clone(),
        })
    }
}

impl Problem {
    /// Connection-assembly tolerances, with an optional residual override
    /// applied elsewhere.
    pub fn settings(&self) -> Settings {
        Settings {
            rank_tol: self.config.tolerances.rank,
            frame_tol: self.config.tolerances.frame_singularity,
        }
    }

    /// Resolve the gauge block into integrator rules.
    pub fn lambda_rules(&self) -> Result<(Lambda0, LambdaI), CmdError> {
        let lambda0 = match &self.config.gauge.lambda0 {
            None => Lambda0::Zero,
            Some(text) => {
                let names: Vec<String> = (0..self.config.dim)
                    .map(|i| format!("x{i}"))
                    .chain((0..self.config.dim).map(|i| format!("th{i}")))
                    .collect();
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                Lambda0::Expr(
                    Expression::parse(text, &refs).map_err(CmdError::from_core)?,
                )
            }
        };
        let lambda_i = match &self.config.gauge.lambda_i {
            LambdaISpec::Zero => LambdaI::Zero,
            LambdaISpec::Fixed { values } => LambdaI::Fixed(values.clone()),
            LambdaISpec::Solve => LambdaI::Solve,
        };
        Ok((lambda0, lambda_i))
    }

    /// Fixed multiplier values for point-cloud commands (`solve` resolves
    /// per point there, so it is handled by the caller).
    pub fn fixed_lambda(&self) -> Vec<f64> {
        match &self.config.gauge.lambda_i {
            LambdaISpec::Fixed { values } => values.clone(),
            _ => Vec::new(),
        }
    }

    /// Build the integrator configuration from the geodesic block.
    pub fn integration_config(&self) -> Result<IntegrationConfig, CmdError> {
        let spec = self
            .config
            .geodesic
            .as_ref()
            .ok_or_else(|| CmdError::input("config has no geodesic block".into()))?;
        let method = match spec.method.as_str() {
            "rk45" => Method::Rk45 {
                rtol: spec.rtol,
                atol: spec.atol,
            },
            "rk4" => Method::Rk4 { step: spec.step },
            other => {
                return Err(CmdError::input(format!(
                    "unknown integrator `{other}` (expected rk45 or rk4)"
                )))
            }
        };
        let (lambda0, lambda_i) = self.lambda_rules()?;
        Ok(IntegrationConfig {
            method,
            s_max: spec.s_max,
            output_points: spec.output_points,
            lambda0,
            lambda_i,
            constraint_threshold: 1e-6,
            settings: self.settings(),
        })
    }

    /// Initial geodesic state from the geodesic block.
    pub fn initial_state(&self) -> Result<ffc_core::geodesic::GeodesicState, CmdError> {
        let spec = self
            .config
            .geodesic
            .as_ref()
            .ok_or_else(|| CmdError::input("config has no geodesic block".into()))?;
        if spec.x0.len() != self.config.dim {
            return Err(CmdError::input("geodesic.x0 has the wrong dimension".into()));
        }
        let theta = match (&spec.theta0, &spec.dx0) {
            (Some(theta), None) => {
                if theta.len() != self.config.dim {
                    return Err(CmdError::input(
                        "geodesic.theta0 has the wrong dimension".into(),
                    ));
                }
                theta.clone()
            }
            (None, Some(dx)) => {
                if dx.len() != self.config.dim {
                    return Err(CmdError::input("geodesic.dx0 has the wrong dimension".into()));
                }
                let fp = self
                    .chart
                    .frame_point_with_tol(&spec.x0, self.config.tolerances.frame_singularity)
                    .map_err(CmdError::from_core)?;
                ffc_core::frame::theta_of(&fp, dx)
            }
            _ => {
                return Err(CmdError::input(
                    "geodesic needs exactly one of theta0 or dx0".into(),
                ))
            }
        };
        Ok(ffc_core::geodesic::GeodesicState {
            s: 0.0,
            x: spec.x0.clone(),
            theta,
        })
    }
}
