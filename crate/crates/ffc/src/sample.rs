//! Drawing admissible `(x, theta)` sample pairs from a problem config.

use crate::config::Problem;
use crate::error::CmdError;
use crate::rng::SplitMix64;

/// One admissible sample: frame invertible, metric away from the null
/// cone, rank analysis stable.
#[derive(Debug, Clone)]
pub struct Sample {
    /// Coordinates.
    pub x: Vec<f64>,
    /// Frame velocity components.
    pub theta: Vec<f64>,
}

/// Rejection bookkeeping of one draw, reported by `check` so that frame
/// singularities or null-cone crossings inside the boxes stay visible.
#[derive(Debug, Default, Clone, serde::Serialize)]
pub struct DrawStats {
    /// Total candidate draws.
    pub attempts: usize,
    /// Rejections from a singular coframe.
    pub frame_rejections: usize,
    /// Rejections from metric evaluation (null direction, domain, `min_l`).
    pub metric_rejections: usize,
    /// Rejections from an ambiguous Hessian rank.
    pub rank_rejections: usize,
}

/// Draw the config's samples, with optional seed/count overrides.
///
/// Explicit `samples.points` are taken verbatim (and must be admissible);
/// otherwise points are drawn uniformly from the boxes by splitmix64 and
/// rejected until admissible. Rejection keeps the draw reproducible: the
/// stream position depends only on the seed.
///
/// `require_stable_rank` additionally rejects points whose Hessian rank is
/// ambiguous; commands that assemble connections need it, while `check`
/// leaves it off so that it can *report* pathologies instead of starving.
pub fn draw(
    problem: &Problem,
    seed_override: Option<u64>,
    count_override: Option<usize>,
    require_stable_rank: bool,
) -> Result<(Vec<Sample>, DrawStats), CmdError> {
    let dim = problem.config.dim;
    let spec = &problem.config.samples;
    let settings = problem.settings();

    enum Verdict {
        Ok,
        Frame,
        Metric,
        Rank,
    }
    let judge = |x: &[f64], theta: &[f64]| -> Verdict {
        if problem
            .chart
            .frame_point_with_tol(x, settings.frame_tol)
            .is_err()
        {
            return Verdict::Frame;
        }
        let Ok(mj) = problem.metric.metric_jet(theta) else {
            return Verdict::Metric;
        };
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 || mj.l.abs() < spec.min_l * norm {
            return Verdict::Metric;
        }
        if require_stable_rank
            && problem
                .metric
                .rank_analysis_with_tol(&mj, theta, settings.rank_tol)
                .is_err()
        {
            return Verdict::Rank;
        }
        Verdict::Ok
    };

    if let Some(points) = &spec.points {
        for (i, p) in points.iter().enumerate() {
            if !matches!(judge(&p.x, &p.theta), Verdict::Ok) {
                return Err(CmdError::input(format!(
                    "explicit sample {i} is not admissible (singular frame, null direction or unstable rank)"
                )));
            }
        }
        let stats = DrawStats {
            attempts: points.len(),
            ..Default::default()
        };
        return Ok((
            points
                .iter()
                .map(|p| Sample {
                    x: p.x.clone(),
                    theta: p.theta.clone(),
                })
                .collect(),
            stats,
        ));
    }

    let unit = vec![[-1.0, 1.0]; dim];
    let x_box = spec.x_box.as_deref().unwrap_or(&unit);
    let theta_box = spec.theta_box.as_deref().unwrap_or(&unit);
    let count = count_override.unwrap_or(spec.count);
    let mut rng = SplitMix64::new(seed_override.unwrap_or(spec.seed));
    let mut out = Vec::with_capacity(count);
    let mut stats = DrawStats::default();
    while out.len() < count {
        stats.attempts += 1;
        if stats.attempts > 200 * count.max(1) {
            return Err(CmdError::input(format!(
                "could not draw {count} admissible samples in {} attempts; widen the boxes or raise min_l",
                stats.attempts
            )));
        }
        let x: Vec<f64> = x_box.iter().map(|[lo, hi]| rng.uniform(*lo, *hi)).collect();
        let theta: Vec<f64> = theta_box
            .iter()
            .map(|[lo, hi]| rng.uniform(*lo, *hi))
            .collect();
        match judge(&x, &theta) {
            Verdict::Ok => out.push(Sample { x, theta }),
            Verdict::Frame => stats.frame_rejections += 1,
            Verdict::Metric => stats.metric_rejections += 1,
            Verdict::Rank => stats.rank_rejections += 1,
        }
    }
    Ok((out, stats))
}
