//! Berwald functions, nonlinear connection coefficients and their checks.
//!
//! Everything is driven by the metric data at one frame vector plus the
//! frame structure coefficients at one chart point. The Berwald functions
//! are assembled from the rank-split basis of [`crate::metric`]:
//!
//! ```text
//! G^a = sum_{b,c in B} ell_b^a L^{bc} M_c + lambda^I v_I^a,
//! M_gamma = -1/2 L_f theta^f([e_g, e_gamma]) theta^g,
//! ```
//!
//! and the connection coefficients follow by differentiating in `theta`:
//!
//! ```text
//! N^a_c = dG^a/dtheta^c - 1/2 theta^a([e_b, e_c]) theta^b.
//! ```
//!
//! The derivative runs the whole assembly — block inversion, null vectors
//! and all — in jet arithmetic with the index split frozen at the base
//! point, so no symbolic differentiation is ever needed. [`verify`] then
//! measures how well the Cartan symmetry and the metricity contraction
//! `L_a N^a_c = 0` hold, and [`holonomic_oracle`] recomputes `G` along a
//! completely separate route in holonomic coordinates for regular metrics.
//!
//! For metrics whose conjugate momenta vanish on the degenerate directions
//! (`L_I = 0` with a clean Hessian block), [`berwald_simple`] evaluates the
//! shortcut formula built from the bordered inverse `Ltilde` and must agree
//! with [`berwald_general`] wherever it applies.

use crate::error::Error;
use crate::frame::{structure_coefficients, Chart, Coeffs3, FramePoint};
use crate::jet::Jet2;
use crate::linalg::{self, Mat};
use crate::metric::{basis_parts, sub_matrix, BasisParts, FinslerMetric, MetricAnalysis, Partition};
use crate::real::Real;
use alloc::format;
use alloc::vec::Vec;

/// Tolerances used when assembling a connection.
#[derive(Debug, Clone)]
pub struct Settings {
    /// Relative cutoff for Hessian rank decisions.
    pub rank_tol: f64,
    /// Relative coframe singularity threshold.
    pub frame_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rank_tol: crate::metric::DEFAULT_RANK_TOL,
            frame_tol: crate::frame::DEFAULT_SINGULARITY_TOL,
        }
    }
}

/// Absolute threshold for the block-form detection of [`berwald_simple`].
pub const BLOCK_FORM_TOL: f64 = 1e-10;

/// Connection data at one `(x, theta)` pair.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    /// Frame vector.
    pub theta: Vec<f64>,
    /// Berwald functions `G^a`.
    pub g: Vec<f64>,
    /// Connection coefficients `N^a_c`.
    pub n: Mat<f64>,
    /// Constraint values `C_I` (empty for regular metrics).
    pub constraints: Vec<f64>,
    /// Multipliers used for the null directions.
    pub lambda_i: Vec<f64>,
    /// Cartan residual `dN^a_c/dth^b - dN^a_b/dth^c + c^a_{bc}`.
    pub cartan_residual: Coeffs3,
    /// Metricity residual `L_a N^a_c`.
    pub metricity_residual: Vec<f64>,
}

impl ConnectionData {
    /// Largest absolute Cartan residual entry.
    pub fn max_cartan(&self) -> f64 {
        self.cartan_residual.max_abs()
    }

    /// Largest absolute metricity residual entry.
    pub fn max_metricity(&self) -> f64 {
        self.metricity_residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `A_gamma = L_f theta^f([e_g, e_gamma]) theta^g`, for every index.
fn bracket_contraction<S: Real>(l_a: &[S], theta: &[S], c: &Coeffs3) -> Vec<S> {
    let dim = l_a.len();
    (0..dim)
        .map(|gamma| {
            let mut acc = S::zero();
            for f in 0..dim {
                for g in 0..dim {
                    let coeff = c.get(f, g, gamma);
                    if coeff != 0.0 {
                        acc = acc + l_a[f].clone() * S::from_f64(coeff) * theta[g].clone();
                    }
                }
            }
            acc
        })
        .collect()
}

/// The general Berwald assembly over any scalar.
fn berwald_from_parts<S: Real>(
    l_a: &[S],
    theta: &[S],
    parts: &BasisParts<S>,
    partition: &Partition,
    c: &Coeffs3,
    lambda_i: &[f64],
) -> Vec<S> {
    let dim = l_a.len();
    let a_vec = bracket_contraction(l_a, theta, c);
    // M_gamma = -A_gamma / 2
    let m_bold: Vec<S> = partition
        .bold
        .iter()
        .map(|&b| S::from_f64(-0.5) * a_vec[b].clone())
        .collect();
    // q_i = sum_j L^{ij} M_j (bold-local)
    let q: Vec<S> = (0..partition.bold.len())
        .map(|i| {
            let mut acc = S::zero();
            for j in 0..partition.bold.len() {
                acc = acc + parts.l_inv_bb[(i, j)].clone() * m_bold[j].clone();
            }
            acc
        })
        .collect();
    (0..dim)
        .map(|a| {
            let mut acc = S::zero();
            for i in 0..partition.bold.len() {
                acc = acc + parts.ell[i][a].clone() * q[i].clone();
            }
            for (k, v) in parts.v.iter().enumerate() {
                let l = lambda_i.get(k).copied().unwrap_or(0.0);
                if l != 0.0 {
                    acc = acc + S::from_f64(l) * v[a].clone();
                }
            }
            acc
        })
        .collect()
}

fn check_lambda(lambda_i: &[f64], d: usize) -> Result<(), Error> {
    if !lambda_i.is_empty() && lambda_i.len() != d {
        return Err(Error::Dimension {
            message: format!(
                "got {} multipliers for {} null directions",
                lambda_i.len(),
                d
            ),
        });
    }
    Ok(())
}

/// Berwald functions from the general rank-split formula.
///
/// `lambda_i` supplies the free multipliers of the null directions; an
/// empty slice means all zero (the canonical gauge).
pub fn berwald_general(
    ma: &MetricAnalysis,
    c: &Coeffs3,
    lambda_i: &[f64],
) -> Result<Vec<f64>, Error> {
    check_lambda(lambda_i, ma.degeneracy())?;
    let parts = BasisParts {
        l_inv_bb: ma.l_inv_bb.clone(),
        v: ma.v.clone(),
        ell: ma.ell.clone(),
    };
    Ok(berwald_from_parts(
        &ma.l_a,
        &ma.theta,
        &parts,
        &ma.partition,
        c,
        lambda_i,
    ))
}

/// Constraint values `C_I` of the degenerate directions.
///
/// `C_I = L_f theta^f([e_g, e_I]) theta^g
///        - L_{Ib} L^{bc} L_f theta^f([e_g, e_c]) theta^g`, `b, c` bold.
pub fn constraints(ma: &MetricAnalysis, c: &Coeffs3) -> Vec<f64> {
    let a_vec = bracket_contraction(&ma.l_a, &ma.theta, c);
    let r = ma.partition.bold.len();
    // t_i = sum_j L^{ij} A_{bold_j}
    let t: Vec<f64> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| ma.l_inv_bb[(i, j)] * a_vec[ma.partition.bold[j]])
                .sum()
        })
        .collect();
    ma.partition
        .null
        .iter()
        .map(|&big_i| {
            let cross: f64 = (0..r)
                .map(|i| ma.l_ab[(big_i, ma.partition.bold[i])] * t[i])
                .sum();
            a_vec[big_i] - cross
        })
        .collect()
}

/// Berwald functions from the simplified block-form formula.
///
/// Requires `L_I = 0` and vanishing Hessian cross blocks on the null
/// indices (within [`BLOCK_FORM_TOL`]); fails with [`Error::NotBlockForm`]
/// otherwise. Supplied as an independent algebraic route to the same `G^a`
/// as [`berwald_general`].
pub fn berwald_simple(
    ma: &MetricAnalysis,
    c: &Coeffs3,
    lambda_i: &[f64],
) -> Result<Vec<f64>, Error> {
    check_lambda(lambda_i, ma.degeneracy())?;
    let dim = ma.theta.len();
    let mut worst = 0.0_f64;
    for &i in &ma.partition.null {
        worst = worst.max(ma.l_a[i].abs());
        for a in 0..dim {
            worst = worst.max(ma.l_ab[(a, i)].abs());
        }
    }
    if worst > BLOCK_FORM_TOL {
        return Err(Error::NotBlockForm { worst });
    }

    let r = ma.partition.bold.len();
    let l = ma.l;
    // q_i = sum_j L^{ij} L_{bold_j},  big_q = q_i L_{bold_i}
    let q: Vec<f64> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| ma.l_inv_bb[(i, j)] * ma.l_a[ma.partition.bold[j]])
                .sum()
        })
        .collect();
    let big_q: f64 = (0..r).map(|i| q[i] * ma.l_a[ma.partition.bold[i]]).sum();

    // Bordered inverse on the alpha block (zero index + bold indices).
    let z = ma.partition.zero;
    let th = &ma.theta;
    let mut ltilde = Mat::<f64>::zeros(dim, dim);
    ltilde[(z, z)] = (th[z] / l) * (th[z] / l) * big_q;
    for i in 0..r {
        let bi = ma.partition.bold[i];
        let off = -(th[z] / l) * (q[i] - big_q * th[bi] / l);
        ltilde[(z, bi)] = off;
        ltilde[(bi, z)] = off;
        for j in 0..r {
            let bj = ma.partition.bold[j];
            ltilde[(bi, bj)] = ma.l_inv_bb[(i, j)] - q[i] * th[bj] / l - q[j] * th[bi] / l
                + big_q * th[bi] * th[bj] / (l * l);
        }
    }

    let a_vec = bracket_contraction(&ma.l_a, th, c);
    let mut g: Vec<f64> = (0..dim)
        .map(|alpha| {
            (0..dim)
                .map(|gamma| ltilde[(alpha, gamma)] * (-0.5 * a_vec[gamma]))
                .sum()
        })
        .collect();
    for (k, &big_i) in ma.partition.null.iter().enumerate() {
        g[big_i] = lambda_i.get(k).copied().unwrap_or(0.0);
    }
    Ok(g)
}

/// Everything the jet pipeline produces at one `(x, theta)`.
pub(crate) struct Assembly {
    /// Base-point analysis with the frozen partition.
    pub analysis: MetricAnalysis,
    /// Structure coefficients at `x`.
    pub coeffs: Coeffs3,
    /// `G^a` as jets in `theta`.
    pub g_jets: Vec<Jet2>,
}

impl Assembly {
    /// `N^a_c = dG^a/dth^c - 1/2 c^a_{bc} th^b`.
    pub fn connection(&self) -> Mat<f64> {
        let dim = self.analysis.theta.len();
        Mat::from_fn(dim, dim, |a, c| {
            let mut half_cth = 0.0;
            for b in 0..dim {
                half_cth += 0.5 * self.coeffs.get(a, b, c) * self.analysis.theta[b];
            }
            self.g_jets[a].grad_at(c) - half_cth
        })
    }

    /// Cartan residual, exercising the jet Hessian of `G`.
    pub fn cartan_residual(&self) -> Coeffs3 {
        let dim = self.analysis.theta.len();
        Coeffs3::from_fn(dim, |a, b, c| {
            let dn_cb = self.g_jets[a].hess_at(b, c) - 0.5 * self.coeffs.get(a, b, c);
            let dn_bc = self.g_jets[a].hess_at(c, b) - 0.5 * self.coeffs.get(a, c, b);
            dn_cb - dn_bc + self.coeffs.get(a, b, c)
        })
    }

    /// Metricity residual `L_a N^a_c`.
    pub fn metricity_residual(&self, n: &Mat<f64>) -> Vec<f64> {
        let dim = self.analysis.theta.len();
        (0..dim)
            .map(|c| (0..dim).map(|a| self.analysis.l_a[a] * n[(a, c)]).sum())
            .collect()
    }
}

/// Run the Berwald assembly in jet arithmetic with the partition frozen at
/// the base point.
pub(crate) fn assemble(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    theta: &[f64],
    lambda_i: &[f64],
    settings: &Settings,
) -> Result<Assembly, Error> {
    if chart.dim() != metric.dim() {
        return Err(Error::Dimension {
            message: format!(
                "chart dimension {} differs from metric dimension {}",
                chart.dim(),
                metric.dim()
            ),
        });
    }
    let fp = chart.frame_point_with_tol(x, settings.frame_tol)?;
    let coeffs = structure_coefficients(&fp);
    let mj = metric.metric_jet(theta)?;
    let analysis = metric.rank_analysis_with_tol(&mj, theta, settings.rank_tol)?;
    check_lambda(lambda_i, analysis.degeneracy())?;
    let sj = metric.scalars_jet(theta)?;
    let parts = basis_parts(&sj.l, &sj.l_a, &sj.l_ab, &sj.theta, &analysis.partition)?;
    let g_jets = berwald_from_parts(
        &sj.l_a,
        &sj.theta,
        &parts,
        &analysis.partition,
        &coeffs,
        lambda_i,
    );
    Ok(Assembly {
        analysis,
        coeffs,
        g_jets,
    })
}

/// Connection coefficients `N^a_c` at `(x, theta)`.
pub fn nonlinear_connection(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    theta: &[f64],
    lambda_i: &[f64],
    settings: &Settings,
) -> Result<Mat<f64>, Error> {
    Ok(assemble(chart, metric, x, theta, lambda_i, settings)?.connection())
}

/// Residuals of the Cartan and metricity conditions.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// `dN^a_c/dth^b - dN^a_b/dth^c + c^a_{bc}` entrywise.
    pub cartan: Coeffs3,
    /// `L_a N^a_c` entrywise.
    pub metricity: Vec<f64>,
}

impl VerifyReport {
    /// Largest absolute Cartan residual.
    pub fn max_cartan(&self) -> f64 {
        self.cartan.max_abs()
    }

    /// Largest absolute metricity residual.
    pub fn max_metricity(&self) -> f64 {
        self.metricity.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Verify the defining conditions of the connection at `(x, theta)` in the
/// canonical gauge (`lambda^I = 0`).
pub fn verify(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    theta: &[f64],
    settings: &Settings,
) -> Result<VerifyReport, Error> {
    let asm = assemble(chart, metric, x, theta, &[], settings)?;
    let n = asm.connection();
    Ok(VerifyReport {
        metricity: asm.metricity_residual(&n),
        cartan: asm.cartan_residual(),
    })
}

/// Full connection record at `(x, theta)`.
pub fn connection_data(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    theta: &[f64],
    lambda_i: &[f64],
    settings: &Settings,
) -> Result<ConnectionData, Error> {
    let asm = assemble(chart, metric, x, theta, lambda_i, settings)?;
    let n = asm.connection();
    let d = asm.analysis.degeneracy();
    let mut lam = lambda_i.to_vec();
    lam.resize(d, 0.0);
    Ok(ConnectionData {
        theta: theta.to_vec(),
        g: asm.g_jets.iter().map(|j| *j.val()).collect(),
        constraints: constraints(&asm.analysis, &asm.coeffs),
        metricity_residual: asm.metricity_residual(&n),
        cartan_residual: asm.cartan_residual(),
        n,
        lambda_i: lam,
    })
}

/// Result of the holonomic-coordinate route.
#[derive(Debug, Clone)]
pub struct HolonomicOracle {
    /// `G^mu` in holonomic coordinates.
    pub g_coord: Vec<f64>,
    /// The same functions converted to the frame: must match
    /// [`berwald_general`] for regular metrics.
    pub g_frame: Vec<f64>,
}

/// Compute the Berwald functions in holonomic coordinates and convert them
/// to the frame.
///
/// This never touches the frame formulas: it composes `L(x, dx) =
/// L(E(x) dx)`, differentiates the composite in both `x` and `dx`, and
/// evaluates
///
/// ```text
/// G^mu = 1/2 (dx^rho dL/dx^rho) dx^mu / L + sum_{a,b} ell_a^mu L^{ab} M_b,
/// M_mu = 1/2 (-dL/dx^mu + dx^rho d2L/d dx^mu dx^rho),
/// ```
///
/// then maps `G^a = e^a_mu (G^mu + 1/2 theta^b dx^rho d_rho e_b^mu)`.
/// Restricted to regular metrics: a degenerate holonomic Hessian fails with
/// [`Error::NotRegular`].
pub fn holonomic_oracle(
    chart: &Chart,
    metric: &FinslerMetric,
    x: &[f64],
    dx: &[f64],
    settings: &Settings,
) -> Result<HolonomicOracle, Error> {
    let dim = chart.dim();
    if x.len() != dim || dx.len() != dim {
        return Err(Error::Dimension {
            message: "x and dx must match the chart dimension".into(),
        });
    }
    let m = 2 * dim;
    let x_jets: Vec<Jet2> = (0..dim).map(|mu| Jet2::variable(x[mu], m, mu)).collect();
    let (e_jets, e_domain) = chart.coframe_scalar(&x_jets);
    if e_domain {
        return Err(Error::Domain {
            context: "vielbein evaluation".into(),
        });
    }
    let dx_jets: Vec<Jet2> = (0..dim)
        .map(|mu| Jet2::variable(dx[mu], m, dim + mu))
        .collect();
    let theta_jets: Vec<Jet2> = (0..dim)
        .map(|a| {
            let mut acc = <Jet2 as Real>::zero();
            for mu in 0..dim {
                acc = acc + e_jets[(a, mu)].clone() * dx_jets[mu].clone();
            }
            acc
        })
        .collect();
    let (f, domain) = metric.expr().eval_scalar_checked(&theta_jets);
    if domain || !f.value().is_finite() {
        return Err(Error::Domain {
            context: "metric evaluation".into(),
        });
    }
    let l = *f.val();
    let theta_norm = crate::real::fp::sqrt(
        theta_jets.iter().map(|t| t.value() * t.value()).sum::<f64>(),
    );
    if l.abs() <= crate::metric::NULL_DIRECTION_TOL * theta_norm {
        return Err(Error::NullDirection {
            l: l.abs(),
            threshold: crate::metric::NULL_DIRECTION_TOL * theta_norm,
        });
    }

    let l_x: Vec<f64> = (0..dim).map(|rho| f.grad_at(rho)).collect();
    let l_dx: Vec<f64> = (0..dim).map(|mu| f.grad_at(dim + mu)).collect();
    let hess_dxdx = Mat::from_fn(dim, dim, |mu, nu| f.hess_at(dim + mu, dim + nu));
    let m_vec: Vec<f64> = (0..dim)
        .map(|mu| {
            let mixed: f64 = (0..dim).map(|rho| dx[rho] * f.hess_at(dim + mu, rho)).sum();
            0.5 * (-l_x[mu] + mixed)
        })
        .collect();

    // Regularity: the dx-Hessian must have full rank n (dx itself is null).
    let svals = linalg::sym_singular_values(&hess_dxdx);
    let smax = svals[0].max(f64::MIN_POSITIVE);
    let rank = svals.iter().filter(|&&s| s > settings.rank_tol * smax).count();
    if rank != dim - 1 {
        return Err(Error::NotRegular {
            rank,
            expected: dim - 1,
        });
    }

    let bold = crate::metric::select_block(&hess_dxdx, dim - 1, &svals)?;
    let block = sub_matrix(&hess_dxdx, &bold, &bold);
    let lu = block.lu().ok_or(Error::BlockSingular {
        size: dim - 1,
        best_det: 0.0,
    })?;
    let m_bold: Vec<f64> = bold.iter().map(|&b| m_vec[b]).collect();
    let q = lu.solve(&m_bold);

    let dx_lx: f64 = (0..dim).map(|rho| dx[rho] * l_x[rho]).sum();
    let g_coord: Vec<f64> = (0..dim)
        .map(|mu| {
            let mut acc = 0.5 * dx_lx * dx[mu] / l;
            for (i, &a) in bold.iter().enumerate() {
                let ell = if mu == a { 1.0 } else { 0.0 } - dx[mu] * l_dx[a] / l;
                acc += ell * q[i];
            }
            acc
        })
        .collect();

    // Frame conversion.
    let fp: FramePoint = chart.frame_point_with_tol(x, settings.frame_tol)?;
    let dframe = fp.dframe();
    let theta: Vec<f64> = fp.e.mul_vec(dx);
    let g_frame: Vec<f64> = (0..dim)
        .map(|a| {
            let mut acc = 0.0;
            for mu in 0..dim {
                let mut corr = 0.0;
                for b in 0..dim {
                    for rho in 0..dim {
                        corr += 0.5 * theta[b] * dx[rho] * dframe[rho][(mu, b)];
                    }
                }
                acc += fp.e[(a, mu)] * (g_coord[mu] + corr);
            }
            acc
        })
        .collect();

    Ok(HolonomicOracle { g_coord, g_frame })
}
