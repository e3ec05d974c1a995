//! The subcommands as library functions returning typed reports.
//!
//! `main` only parses arguments, picks output destinations, and maps
//! [`CmdError`] onto exit codes; everything here is directly callable from
//! tests.

use crate::config::{LambdaISpec, Problem};
use crate::error::CmdError;
use crate::gfmt::g17;
use crate::sample::{self, Sample};
use ffc_core::connection::{self, Settings};
use ffc_core::frame::structure_coefficients;
use ffc_core::geodesic::{self, GeodesicState, IntegrationConfig, LambdaI};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Overrides shared by all point-cloud commands.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    /// Residual tolerance override (`--tol`).
    pub tol: Option<f64>,
    /// Seed override (`--seed`).
    pub seed: Option<u64>,
}

/// Report of `ffc check`.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    /// Samples examined.
    pub samples: usize,
    /// Max relative homogeneity residual over the samples.
    pub homogeneity_max: f64,
    /// Max Cartan residual.
    pub cartan_max: f64,
    /// Max metricity residual.
    pub metricity_max: f64,
    /// Histogram of `(rank, degeneracy)` over the samples.
    pub rank_profile: Vec<RankBucket>,
    /// Samples where the connection could not be assembled at all
    /// (ambiguous rank, singular block): any such sample fails the check.
    pub pipeline_errors: usize,
    /// Rejection bookkeeping of the draw (frame invertibility over the
    /// sample box shows up here).
    pub sampling: sample::DrawStats,
    /// Threshold the maxima were compared against.
    pub tolerance: f64,
    /// Whether every residual stayed within tolerance.
    pub pass: bool,
}

/// One rank-histogram bucket.
#[derive(Debug, Serialize)]
pub struct RankBucket {
    /// Hessian rank.
    pub rank: usize,
    /// Extra null directions.
    pub degeneracy: usize,
    /// Number of samples with this profile.
    pub count: usize,
}

/// Homogeneity scales checked by `ffc check`.
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 3.0];

/// Verify homogeneity and the Cartan/metricity conditions over the sample
/// cloud; `pass` iff all maxima stay within tolerance.
pub fn cmd_check(problem: &Problem, overrides: Overrides) -> Result<CheckReport, CmdError> {
    let (samples, sampling) = sample::draw(problem, overrides.seed, None, false)?;
    let settings = problem.settings();
    let tolerance = overrides.tol.unwrap_or(problem.config.tolerances.residual);
    let mut homogeneity_max = 0.0_f64;
    let mut cartan_max = 0.0_f64;
    let mut metricity_max = 0.0_f64;
    let mut pipeline_errors = 0usize;
    let mut profile: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for s in &samples {
        homogeneity_max = homogeneity_max.max(
            problem
                .metric
                .homogeneity_check(&s.theta, &HOMOGENEITY_SCALES),
        );
        match connection::verify(&problem.chart, &problem.metric, &s.x, &s.theta, &settings) {
            Ok(report) => {
                cartan_max = cartan_max.max(report.max_cartan());
                metricity_max = metricity_max.max(report.max_metricity());
            }
            Err(_) => {
                pipeline_errors += 1;
                continue;
            }
        }
        let mj = problem.metric.metric_jet(&s.theta).map_err(CmdError::from_core)?;
        let ma = problem
            .metric
            .rank_analysis_with_tol(&mj, &s.theta, settings.rank_tol)
            .map_err(CmdError::from_core)?;
        *profile.entry((ma.rank(), ma.degeneracy())).or_insert(0) += 1;
    }
    let pass = homogeneity_max <= tolerance
        && cartan_max <= tolerance
        && metricity_max <= tolerance
        && pipeline_errors == 0;
    Ok(CheckReport {
        samples: samples.len(),
        homogeneity_max,
        cartan_max,
        metricity_max,
        rank_profile: profile
            .into_iter()
            .map(|((rank, degeneracy), count)| RankBucket {
                rank,
                degeneracy,
                count,
            })
            .collect(),
        pipeline_errors,
        sampling,
        tolerance,
        pass,
    })
}

/// One JSONL record of `ffc connection`.
#[derive(Debug, Serialize)]
pub struct ConnectionRecord {
    /// Sample coordinates.
    pub x: Vec<f64>,
    /// Sample frame velocity.
    pub theta: Vec<f64>,
    /// Metric value.
    pub l: f64,
    /// Hessian rank.
    pub rank: usize,
    /// Extra null directions.
    pub degeneracy: usize,
    /// Berwald functions.
    pub g: Vec<f64>,
    /// Connection coefficients, row-major `N^a_c`.
    pub n: Vec<Vec<f64>>,
    /// Constraint values (empty when regular).
    pub constraints: Vec<f64>,
    /// Multipliers used.
    pub lambda_i: Vec<f64>,
    /// Residual maxima.
    pub residuals: Residuals,
}

/// Residual maxima attached to a record.
#[derive(Debug, Serialize)]
pub struct Residuals {
    /// Max Cartan residual.
    pub cartan: f64,
    /// Max metricity residual.
    pub metricity: f64,
}

/// Compute connection data on the sample cloud.
pub fn cmd_connection(
    problem: &Problem,
    overrides: Overrides,
) -> Result<Vec<ConnectionRecord>, CmdError> {
    let (samples, _) = sample::draw(problem, overrides.seed, None, true)?;
    let settings = problem.settings();
    samples
        .iter()
        .map(|s| connection_record(problem, s, &settings))
        .collect()
}

fn connection_record(
    problem: &Problem,
    s: &Sample,
    settings: &Settings,
) -> Result<ConnectionRecord, CmdError> {
    let lambda = resolve_point_lambda(problem, s)?;
    let data = connection::connection_data(
        &problem.chart,
        &problem.metric,
        &s.x,
        &s.theta,
        &lambda,
        settings,
    )
    .map_err(CmdError::from_core)?;
    let mj = problem.metric.metric_jet(&s.theta).map_err(CmdError::from_core)?;
    let ma = problem
        .metric
        .rank_analysis_with_tol(&mj, &s.theta, settings.rank_tol)
        .map_err(CmdError::from_core)?;
    let dim = problem.config.dim;
    Ok(ConnectionRecord {
        x: s.x.clone(),
        theta: s.theta.clone(),
        l: ma.l,
        rank: ma.rank(),
        degeneracy: ma.degeneracy(),
        g: data.g.clone(),
        n: (0..dim)
            .map(|a| (0..dim).map(|c| data.n[(a, c)]).collect())
            .collect(),
        constraints: data.constraints.clone(),
        lambda_i: data.lambda_i.clone(),
        residuals: Residuals {
            cartan: data.max_cartan(),
            metricity: data.max_metricity(),
        },
    })
}

/// Multipliers for a single point record, honoring the gauge rule.
fn resolve_point_lambda(problem: &Problem, s: &Sample) -> Result<Vec<f64>, CmdError> {
    match &problem.config.gauge.lambda_i {
        LambdaISpec::Zero => Ok(Vec::new()),
        LambdaISpec::Fixed { values } => Ok(values.clone()),
        LambdaISpec::Solve => {
            let state = GeodesicState {
                s: 0.0,
                x: s.x.clone(),
                theta: s.theta.clone(),
            };
            let cfg = IntegrationConfig {
                lambda_i: LambdaI::Zero,
                settings: problem.settings(),
                ..Default::default()
            };
            let sol = geodesic::solve_second_class(&problem.chart, &problem.metric, &state, &cfg)
                .map_err(CmdError::from_core)?;
            Ok(sol.lambda)
        }
    }
}

/// Serialize records as JSON Lines.
pub fn records_to_jsonl(records: &[ConnectionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Result of `ffc geodesic`: the trajectory with per-row diagnostics.
#[derive(Debug)]
pub struct GeodesicTable {
    /// Chart dimension (for the header).
    pub dim: usize,
    /// Rows `(s, x.., theta.., l, max_c, max_el)`.
    pub rows: Vec<GeodesicRow>,
    /// Trajectory-level diagnostics.
    pub l_drift: f64,
    /// Max `|C_I|` over the trajectory.
    pub max_constraint: f64,
}

/// One CSV row.
#[derive(Debug)]
pub struct GeodesicRow {
    /// Curve parameter.
    pub s: f64,
    /// Coordinates.
    pub x: Vec<f64>,
    /// Frame velocity.
    pub theta: Vec<f64>,
    /// Metric value.
    pub l: f64,
    /// Max constraint magnitude at this sample.
    pub max_c: f64,
    /// Max Euler-Lagrange residual component at this sample.
    pub max_el: f64,
}

/// Integrate the configured geodesic and tabulate per-sample diagnostics.
pub fn cmd_geodesic(problem: &Problem) -> Result<GeodesicTable, CmdError> {
    let cfg = problem.integration_config()?;
    let init = problem.initial_state()?;
    let trajectory = geodesic::integrate(&problem.chart, &problem.metric, &init, &cfg)
        .map_err(CmdError::from_core)?;
    let settings = problem.settings();
    let el = if trajectory.states.len() >= 5 {
        geodesic::el_residual(&problem.chart, &problem.metric, &trajectory.states)
            .map_err(CmdError::from_core)?
    } else {
        vec![Vec::new(); trajectory.states.len()]
    };
    let mut rows = Vec::with_capacity(trajectory.states.len());
    for (i, st) in trajectory.states.iter().enumerate() {
        let mj = problem.metric.metric_jet(&st.theta).map_err(CmdError::from_core)?;
        let ma = problem
            .metric
            .rank_analysis_with_tol(&mj, &st.theta, settings.rank_tol)
            .map_err(CmdError::from_core)?;
        let fp = problem
            .chart
            .frame_point_with_tol(&st.x, settings.frame_tol)
            .map_err(CmdError::from_core)?;
        let coeffs = structure_coefficients(&fp);
        let max_c = connection::constraints(&ma, &coeffs)
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()));
        let max_el = el[i].iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        rows.push(GeodesicRow {
            s: st.s,
            x: st.x.clone(),
            theta: st.theta.clone(),
            l: mj.l,
            max_c,
            max_el,
        });
    }
    Ok(GeodesicTable {
        dim: problem.config.dim,
        rows,
        l_drift: trajectory.l_drift,
        max_constraint: trajectory.max_constraint,
    })
}

impl GeodesicTable {
    /// Render as CSV with a header row and `%.17g` numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for i in 0..self.dim {
            out.push_str(&format!(",x{i}"));
        }
        for i in 0..self.dim {
            out.push_str(&format!(",th{i}"));
        }
        out.push_str(",L,max_C,max_el_residual\n");
        for row in &self.rows {
            out.push_str(&g17(row.s));
            for v in &row.x {
                out.push(',');
                out.push_str(&g17(*v));
            }
            for v in &row.theta {
                out.push(',');
                out.push_str(&g17(*v));
            }
            out.push(',');
            out.push_str(&g17(row.l));
            out.push(',');
            out.push_str(&g17(row.max_c));
            out.push(',');
            out.push_str(&g17(row.max_el));
            out.push('\n');
        }
        out
    }
}

/// Report of `ffc oracle-compare`.
#[derive(Debug, Serialize)]
pub struct OracleReport {
    /// Samples compared.
    pub samples: usize,
    /// Max absolute difference between the frame-formula `G^a` and the
    /// frame-converted holonomic `G^a`.
    pub max_difference: f64,
    /// Threshold used.
    pub tolerance: f64,
    /// Whether the routes agree within tolerance.
    pub pass: bool,
}

/// Cross-check the frame route against the holonomic route (regular
/// metrics only; degenerate input is an input error by contract).
pub fn cmd_oracle_compare(
    problem: &Problem,
    overrides: Overrides,
) -> Result<OracleReport, CmdError> {
    let (samples, _) = sample::draw(problem, overrides.seed, None, true)?;
    let settings = problem.settings();
    let tolerance = overrides.tol.unwrap_or(problem.config.tolerances.residual);
    let mut max_difference = 0.0_f64;
    for s in &samples {
        let fp = problem
            .chart
            .frame_point_with_tol(&s.x, settings.frame_tol)
            .map_err(CmdError::from_core)?;
        let dx = fp.einv.mul_vec(&s.theta);
        let oracle = match connection::holonomic_oracle(
            &problem.chart,
            &problem.metric,
            &s.x,
            &dx,
            &settings,
        ) {
            Ok(o) => o,
            Err(e @ ffc_core::Error::NotRegular { .. }) => {
                return Err(CmdError::input(format!(
                    "{e}; the holonomic comparison is defined for regular metrics only"
                )))
            }
            Err(e) => return Err(CmdError::from_core(e)),
        };
        let coeffs = structure_coefficients(&fp);
        let mj = problem.metric.metric_jet(&s.theta).map_err(CmdError::from_core)?;
        let ma = problem
            .metric
            .rank_analysis_with_tol(&mj, &s.theta, settings.rank_tol)
            .map_err(CmdError::from_core)?;
        let g = connection::berwald_general(&ma, &coeffs, &[]).map_err(CmdError::from_core)?;
        for (a, b) in g.iter().zip(&oracle.g_frame) {
            max_difference = max_difference.max((a - b).abs());
        }
    }
    Ok(OracleReport {
        samples: samples.len(),
        max_difference,
        tolerance,
        pass: max_difference <= tolerance,
    })
}

/// Write the builtin example configs into `dir`; returns the paths.
pub fn cmd_examples(dir: &Path) -> Result<Vec<PathBuf>, CmdError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CmdError::input(format!("cannot create {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for (name, cfg) in crate::builtin::all() {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, cfg.to_json())
            .map_err(|e| CmdError::input(format!("cannot write {}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}
