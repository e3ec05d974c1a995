//! Finsler metrics `L(theta)` and the rank analysis of their Hessian.
//!
//! The metric is a positively 1-homogeneous expression in the frame
//! components `th0..th{n}` only; coordinate dependence is rejected at parse
//! time. From one jet evaluation we obtain `L`, the gradient `L_a` and the
//! Hessian `L_ab`. Homogeneity makes `theta` itself a null vector of
//! `L_ab`, so the Hessian rank is at most `n` for an `(n+1)`-dimensional
//! chart; a metric of rank `n` is *regular*, anything lower is *degenerate*
//! with `D = n - rank` extra null directions.
//!
//! [`FinslerMetric::rank_analysis`] certifies the rank from singular values,
//! picks an invertible index block `B` of the Hessian by determinant
//! pivoting, and constructs the basis the connection formulas need:
//! `theta/L`, the tangential projectors `ell_b`, and `D` null vectors `v_I`
//! orthogonal to `L_a`. The same construction runs unchanged in jet
//! arithmetic (generic over [`Real`]) so that everything downstream can be
//! differentiated with the index split frozen.

use crate::error::Error;
use crate::expr::Expression;
use crate::jet::Jet2;
use crate::linalg::{self, Mat};
use crate::real::Real;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Default relative cutoff for the Hessian rank decision.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Relative threshold under which `|L|` counts as a null direction.
pub const NULL_DIRECTION_TOL: f64 = 1e-12;

/// A Finsler metric in frame form.
#[derive(Debug, Clone)]
pub struct FinslerMetric {
    expr: Expression,
    dim: usize,
}

/// Value, gradient and Hessian of the metric at one frame vector.
#[derive(Debug, Clone)]
pub struct MetricJet {
    /// `L(theta)`.
    pub l: f64,
    /// `L_a = dL/dtheta^a`.
    pub l_a: Vec<f64>,
    /// `L_ab = d^2 L / dtheta^a dtheta^b`.
    pub l_ab: Mat<f64>,
}

/// The frozen index split of the Hessian.
///
/// `bold` indexes the invertible block, `null` the degenerate directions,
/// and `zero` is the leftover index absorbed by the `theta` direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Indices of the invertible Hessian block (size = rank).
    pub bold: Vec<usize>,
    /// Indices of the extra null directions (size = D).
    pub null: Vec<usize>,
    /// The distinguished leftover index.
    pub zero: usize,
}

/// Basis data the connection formulas consume, generic over the scalar.
#[derive(Debug, Clone)]
pub(crate) struct BasisParts<S> {
    /// Inverse of the bold Hessian block, in bold-local indexing.
    pub l_inv_bb: Mat<S>,
    /// Null vectors `v_I`, orthogonal to `L_a`, orthonormalized.
    pub v: Vec<Vec<S>>,
    /// Vectors `ell_b^a = delta^a_b - theta^a L_b / L` for `b` in bold.
    pub ell: Vec<Vec<S>>,
}

/// Full rank analysis at one frame vector.
#[derive(Debug, Clone)]
pub struct MetricAnalysis {
    /// The frame vector analyzed.
    pub theta: Vec<f64>,
    /// `L(theta)`.
    pub l: f64,
    /// Gradient `L_a`.
    pub l_a: Vec<f64>,
    /// Hessian `L_ab`.
    pub l_ab: Mat<f64>,
    /// Frozen index split.
    pub partition: Partition,
    /// Inverse of the bold block `L_BB` (bold-local indexing).
    pub l_inv_bb: Mat<f64>,
    /// Null vectors `v_I` (full-length, one per `partition.null` entry).
    pub v: Vec<Vec<f64>>,
    /// `ell_b` vectors (full-length, one per `partition.bold` entry).
    pub ell: Vec<Vec<f64>>,
    /// Hessian singular values, descending.
    pub singular_values: Vec<f64>,
    /// Rank cutoff used (relative to the largest singular value).
    pub tol: f64,
}

impl MetricAnalysis {
    /// Hessian rank `n - D`.
    pub fn rank(&self) -> usize {
        self.partition.bold.len()
    }

    /// Number of extra null directions `D`.
    pub fn degeneracy(&self) -> usize {
        self.partition.null.len()
    }
}

impl FinslerMetric {
    /// Parse a metric over the variables `th0..th{dim-1}`.
    ///
    /// Any other identifier (in particular the coordinates `x*`) is a parse
    /// error, which is what pins the metric to frame-only dependence.
    pub fn parse(dim: usize, text: &str) -> Result<Self, Error> {
        if dim < 2 {
            return Err(Error::Dimension {
                message: format!("metric dimension must be at least 2, got {dim}"),
            });
        }
        let names: Vec<String> = (0..dim).map(|i| format!("th{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let expr = Expression::parse(text, &refs)?;
        Ok(FinslerMetric { expr, dim })
    }

    /// Dimension `n + 1` of the frame index range.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The underlying expression.
    pub fn expr(&self) -> &Expression {
        &self.expr
    }

    /// Plain evaluation of `L`.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.expr.eval(theta)
    }

    /// `L`, `L_a`, `L_ab` at `theta`.
    ///
    /// Fails with [`Error::NullDirection`] when `|L|` is below
    /// `NULL_DIRECTION_TOL * ||theta||` (the connection formulas divide by
    /// `L`), and with [`Error::Domain`] when the evaluation leaves the
    /// domain of an elementary function.
    pub fn metric_jet(&self, theta: &[f64]) -> Result<MetricJet, Error> {
        let sc = self.scalars_value(theta)?;
        Ok(MetricJet {
            l: sc.l,
            l_a: sc.l_a,
            l_ab: sc.l_ab,
        })
    }

    /// Max relative homogeneity residual `|L(s theta) - s L(theta)| / |s L|`
    /// over the scale factors `s`.
    pub fn homogeneity_check(&self, theta: &[f64], scales: &[f64]) -> f64 {
        let l = self.eval(theta);
        let mut worst = 0.0_f64;
        for &s in scales {
            debug_assert!(s > 0.0, "homogeneity scales must be positive");
            let scaled: Vec<f64> = theta.iter().map(|t| s * t).collect();
            let ls = self.eval(&scaled);
            let denom = (s * l).abs().max(f64::MIN_POSITIVE);
            worst = worst.max((ls - s * l).abs() / denom);
        }
        worst
    }

    /// Rank analysis with the default cutoff.
    pub fn rank_analysis(&self, mj: &MetricJet, theta: &[f64]) -> Result<MetricAnalysis, Error> {
        self.rank_analysis_with_tol(mj, theta, DEFAULT_RANK_TOL)
    }

    /// Rank analysis of the Hessian at `theta`.
    ///
    /// The rank is the number of singular values above `tol * sigma_max`;
    /// the split is rejected as [`Error::RankUnstable`] when the kept and
    /// dropped singular values are within a factor 10 of each other. The
    /// bold block is the index subset whose determinant is largest in
    /// magnitude.
    pub fn rank_analysis_with_tol(
        &self,
        mj: &MetricJet,
        theta: &[f64],
        tol: f64,
    ) -> Result<MetricAnalysis, Error> {
        let dim = self.dim;
        let svals = linalg::sym_singular_values(&mj.l_ab);
        let smax = svals[0];
        let cutoff = tol * smax;
        let rank = if smax == 0.0 {
            0
        } else {
            svals.iter().filter(|&&s| s > cutoff).count()
        };
        if rank > 0 && rank < dim {
            let above = svals[rank - 1];
            let below = svals[rank];
            if below > 0.0 && above / below < 10.0 {
                return Err(Error::RankUnstable {
                    above,
                    below,
                    cutoff,
                });
            }
        }
        if rank == dim {
            // Homogeneity forces theta into the kernel; a numerically full
            // rank means the rank decision cannot be trusted.
            return Err(Error::RankUnstable {
                above: svals[dim - 1],
                below: 0.0,
                cutoff,
            });
        }
        let bold = select_block(&mj.l_ab, rank, &svals)?;
        let complement: Vec<usize> = (0..dim).filter(|i| !bold.contains(i)).collect();

        // Kernel vectors indexed by the complement: free unit component on
        // the complement index, bold components solved against the block.
        let lu = if rank > 0 {
            Some(
                sub_matrix(&mj.l_ab, &bold, &bold)
                    .lu()
                    .ok_or(Error::BlockSingular {
                        size: rank,
                        best_det: 0.0,
                    })?,
            )
        } else {
            None
        };
        let mut best = (complement[0], f64::NEG_INFINITY);
        for &j in &complement {
            let u = kernel_vector(&mj.l_ab, &bold, lu.as_ref(), j, dim);
            let c_j: f64 = u
                .iter()
                .zip(&mj.l_a)
                .map(|(ui, la)| ui * la)
                .sum::<f64>()
                / mj.l;
            let weight = (c_j * theta[j]).abs();
            if weight > best.1 {
                best = (j, weight);
            }
        }
        let zero = best.0;
        let null: Vec<usize> = complement.into_iter().filter(|&j| j != zero).collect();
        let partition = Partition { bold, null, zero };

        let theta_s: Vec<f64> = theta.to_vec();
        let parts = basis_parts(&mj.l, &mj.l_a, &mj.l_ab, &theta_s, &partition)?;
        Ok(MetricAnalysis {
            theta: theta.to_vec(),
            l: mj.l,
            l_a: mj.l_a.clone(),
            l_ab: mj.l_ab.clone(),
            partition,
            l_inv_bb: parts.l_inv_bb,
            v: parts.v,
            ell: parts.ell,
            singular_values: svals,
            tol,
        })
    }

    /// Value-level metric scalars.
    pub(crate) fn scalars_value(&self, theta: &[f64]) -> Result<MetricScalars<f64>, Error> {
        if theta.len() != self.dim {
            return Err(Error::Dimension {
                message: format!(
                    "frame vector has {} components, metric has {}",
                    theta.len(),
                    self.dim
                ),
            });
        }
        let seeds: Vec<usize> = (0..self.dim).collect();
        let (jet, domain) = self.expr.eval_jet2_checked(theta, &seeds);
        if domain || !jet.val().is_finite() {
            return Err(Error::Domain {
                context: "metric evaluation".into(),
            });
        }
        let l = *jet.val();
        check_null(l, theta)?;
        Ok(MetricScalars {
            l,
            l_a: (0..self.dim).map(|a| jet.grad_at(a)).collect(),
            l_ab: Mat::from_fn(self.dim, self.dim, |a, b| jet.hess_at(a, b)),
            theta: theta.to_vec(),
        })
    }

    /// Jet-level metric scalars: `L`, `L_a`, `L_ab` each carried as a
    /// second-order jet in `theta`, obtained from one nested evaluation.
    pub(crate) fn scalars_jet(&self, theta: &[f64]) -> Result<MetricScalars<Jet2>, Error> {
        if theta.len() != self.dim {
            return Err(Error::Dimension {
                message: format!(
                    "frame vector has {} components, metric has {}",
                    theta.len(),
                    self.dim
                ),
            });
        }
        let m = self.dim;
        let inputs: Vec<Jet2<Jet2>> = (0..m)
            .map(|a| Jet2::variable(Jet2::variable(theta[a], m, a), m, a))
            .collect();
        let (f, domain) = self.expr.eval_scalar_checked(&inputs);
        if domain || !f.value().is_finite() {
            return Err(Error::Domain {
                context: "metric evaluation".into(),
            });
        }
        check_null(f.value(), theta)?;
        let l = f.val().clone();
        let l_a: Vec<Jet2> = (0..m).map(|a| f.grad_at(a)).collect();
        let l_ab = Mat::from_fn(m, m, |a, b| f.hess_at(a, b));
        let theta_jets: Vec<Jet2> = (0..m).map(|a| Jet2::variable(theta[a], m, a)).collect();
        Ok(MetricScalars {
            l,
            l_a,
            l_ab,
            theta: theta_jets,
        })
    }
}

fn check_null(l: f64, theta: &[f64]) -> Result<(), Error> {
    let norm = crate::real::fp::sqrt(theta.iter().map(|t| t * t).sum::<f64>());
    let threshold = NULL_DIRECTION_TOL * norm;
    if l.abs() <= threshold {
        return Err(Error::NullDirection {
            l: l.abs(),
            threshold,
        });
    }
    Ok(())
}

/// Metric scalars over any scalar type.
#[derive(Debug, Clone)]
pub(crate) struct MetricScalars<S> {
    pub l: S,
    pub l_a: Vec<S>,
    pub l_ab: Mat<S>,
    pub theta: Vec<S>,
}

/// Extract the submatrix with the given row/column index lists.
pub(crate) fn sub_matrix<S: Real>(m: &Mat<S>, rows: &[usize], cols: &[usize]) -> Mat<S> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])].clone())
}

/// One kernel vector of the Hessian: unit on the complement index `j`,
/// bold components solved from the invertible block.
fn kernel_vector(
    l_ab: &Mat<f64>,
    bold: &[usize],
    lu: Option<&linalg::Lu<f64>>,
    j: usize,
    dim: usize,
) -> Vec<f64> {
    let mut u = vec![0.0; dim];
    u[j] = 1.0;
    if let Some(lu) = lu {
        let rhs: Vec<f64> = bold.iter().map(|&b| -l_ab[(b, j)]).collect();
        let sol = lu.solve(&rhs);
        for (i, &b) in bold.iter().enumerate() {
            u[b] = sol[i];
        }
    }
    u
}

/// Pick the size-`rank` index subset with the largest `|det|` of the
/// corresponding principal block of a symmetric matrix.
///
/// Exhaustive for the dimensions this crate targets; beyond a subset
/// budget it falls back to greedily growing the block one index at a
/// time, which is the usual pivoting compromise.
pub(crate) fn select_block(m: &Mat<f64>, rank: usize, svals: &[f64]) -> Result<Vec<usize>, Error> {
    let dim = m.rows();
    if rank == 0 {
        return Ok(Vec::new());
    }
    let mut n_subsets = 1_f64;
    for k in 0..rank {
        n_subsets *= (dim - k) as f64 / (k + 1) as f64;
    }
    let (best, best_det) = if n_subsets <= 1e5 {
        let mut best_det = 0.0_f64;
        let mut best: Option<Vec<usize>> = None;
        for subset in linalg::subsets(dim, rank) {
            let d = sub_matrix(m, &subset, &subset).det().abs();
            if d > best_det {
                best_det = d;
                best = Some(subset);
            }
        }
        (best, best_det)
    } else {
        let mut chosen: Vec<usize> = Vec::with_capacity(rank);
        let mut det = 0.0;
        for _ in 0..rank {
            let mut round: Option<(usize, f64)> = None;
            for j in 0..dim {
                if chosen.contains(&j) {
                    continue;
                }
                let mut trial = chosen.clone();
                trial.push(j);
                let d = sub_matrix(m, &trial, &trial).det().abs();
                if round.map_or(true, |(_, cur)| d > cur) {
                    round = Some((j, d));
                }
            }
            let (j, d) = round.expect("candidate index exists");
            chosen.push(j);
            det = d;
        }
        chosen.sort_unstable();
        (Some(chosen), det)
    };
    // A rank-r matrix has some r x r minor of size ~ the product of its kept
    // singular values; fall far short of that and the block is untrustworthy.
    let kept_product: f64 = svals.iter().take(rank).product();
    match best {
        Some(b) if best_det > 1e-8 * kept_product => Ok(b),
        _ => Err(Error::BlockSingular {
            size: rank,
            best_det,
        }),
    }
}

/// Construct the inverse block, null vectors and `ell` vectors for a frozen
/// partition, generically over the scalar type.
///
/// The null vectors come from solving against the bold block (smooth in
/// `theta` once the partition is frozen), are projected off the `theta`
/// direction using the covector `L_a`, and are then Gram-Schmidt
/// orthonormalized in the Euclidean sense — a gauge choice; the formulas
/// only ever use their span.
pub(crate) fn basis_parts<S: Real>(
    l: &S,
    l_a: &[S],
    l_ab: &Mat<S>,
    theta: &[S],
    partition: &Partition,
) -> Result<BasisParts<S>, Error> {
    let dim = l_a.len();
    let rank = partition.bold.len();
    let bb = sub_matrix(l_ab, &partition.bold, &partition.bold);
    let lu = if rank > 0 {
        Some(bb.lu().ok_or(Error::BlockSingular {
            size: rank,
            best_det: bb.det().value().abs(),
        })?)
    } else {
        None
    };
    let l_inv_bb = if rank > 0 {
        bb.inverse().ok_or(Error::BlockSingular {
            size: rank,
            best_det: 0.0,
        })?
    } else {
        Mat::zeros(0, 0)
    };

    let mut v: Vec<Vec<S>> = Vec::with_capacity(partition.null.len());
    for &j in &partition.null {
        // Kernel vector with unit complement component.
        let mut u = vec![S::zero(); dim];
        u[j] = S::one();
        if let Some(lu) = &lu {
            let rhs: Vec<S> = partition
                .bold
                .iter()
                .map(|&b| -l_ab[(b, j)].clone())
                .collect();
            let sol = lu.solve(&rhs);
            for (i, &b) in partition.bold.iter().enumerate() {
                u[b] = sol[i].clone();
            }
        }
        // Project off the theta direction: w = u - (L_a u^a / L) theta.
        let mut coeff = S::zero();
        for a in 0..dim {
            coeff = coeff + l_a[a].clone() * u[a].clone();
        }
        coeff = coeff / l.clone();
        let mut w: Vec<S> = (0..dim)
            .map(|a| u[a].clone() - coeff.clone() * theta[a].clone())
            .collect();
        // Gram-Schmidt against the previous null vectors.
        for prev in &v {
            let mut dot = S::zero();
            for a in 0..dim {
                dot = dot + prev[a].clone() * w[a].clone();
            }
            for a in 0..dim {
                w[a] = w[a].clone() - dot.clone() * prev[a].clone();
            }
        }
        let mut norm2 = S::zero();
        for a in 0..dim {
            norm2 = norm2 + w[a].clone() * w[a].clone();
        }
        if norm2.value() <= 0.0 {
            return Err(Error::RankUnstable {
                above: 0.0,
                below: 0.0,
                cutoff: norm2.value(),
            });
        }
        let inv_norm = S::one() / norm2.sqrt();
        for a in 0..dim {
            w[a] = w[a].clone() * inv_norm.clone();
        }
        v.push(w);
    }

    let ell = partition
        .bold
        .iter()
        .map(|&b| {
            (0..dim)
                .map(|a| {
                    let delta = if a == b { S::one() } else { S::zero() };
                    delta - theta[a].clone() * l_a[b].clone() / l.clone()
                })
                .collect()
        })
        .collect();

    Ok(BasisParts { l_inv_bb, v, ell })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(dim: usize) -> FinslerMetric {
        let terms: Vec<String> = (0..dim).map(|i| format!("th{i}^2")).collect();
        FinslerMetric::parse(dim, &format!("sqrt({})", terms.join("+"))).unwrap()
    }

    #[test]
    fn metric_jet_euclidean() {
        let m = euclid(2);
        let mj = m.metric_jet(&[3.0, 4.0]).unwrap();
        assert!((mj.l - 5.0).abs() < 1e-15);
        assert!((mj.l_a[0] - 0.6).abs() < 1e-15);
        assert!((mj.l_a[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn metric_jet_on_the_cone() {
        let m = FinslerMetric::parse(2, "sqrt(th0^2 - th1^2)").unwrap();
        let err = m.metric_jet(&[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NullDirection { .. } | Error::Domain { .. }));
    }

    #[test]
    fn metric_jet_linear_metric() {
        let m = FinslerMetric::parse(2, "th0").unwrap();
        let mj = m.metric_jet(&[2.0, 5.0]).unwrap();
        assert_eq!(mj.l, 2.0);
        assert_eq!(mj.l_a, vec![1.0, 0.0]);
        assert_eq!(mj.l_ab[(0, 0)], 0.0);
        assert_eq!(mj.l_ab[(1, 1)], 0.0);
    }

    #[test]
    fn rejects_coordinate_dependence() {
        assert!(matches!(
            FinslerMetric::parse(2, "x0 * th0").unwrap_err(),
            Error::UnknownIdentifier { .. }
        ));
    }

    #[test]
    fn homogeneity_residuals() {
        let m = euclid(2);
        assert!(m.homogeneity_check(&[3.0, 4.0], &[0.5, 2.0, 3.0]) < 1e-14);

        let bad = FinslerMetric::parse(2, "th0^2").unwrap();
        let r = bad.homogeneity_check(&[1.0, 0.0], &[2.0]);
        assert!((r - 1.0).abs() < 1e-14, "got {r}");
    }

    #[test]
    fn rank_analysis_riemannian() {
        let m = euclid(3);
        let theta = [1.0, 0.4, -0.7];
        let mj = m.metric_jet(&theta).unwrap();
        let ma = m.rank_analysis(&mj, &theta).unwrap();
        assert_eq!(ma.rank(), 2);
        assert_eq!(ma.degeneracy(), 0);
        assert!(ma.v.is_empty());
    }

    #[test]
    fn rank_analysis_lorentzian_degenerate() {
        // th2 absent: one extra null direction, v = +-e2.
        let m = FinslerMetric::parse(3, "sqrt(th0^2 - th1^2)").unwrap();
        let theta = [2.0, 1.0, 0.3];
        let mj = m.metric_jet(&theta).unwrap();
        let ma = m.rank_analysis(&mj, &theta).unwrap();
        assert_eq!(ma.rank(), 1);
        assert_eq!(ma.degeneracy(), 1);
        let v = &ma.v[0];
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((v[2].abs() - 1.0).abs() < 1e-12);
        // Null vector conditions.
        let hv = ma.l_ab.mul_vec(v);
        assert!(hv.iter().all(|x| x.abs() < 1e-12));
        let lav: f64 = ma.l_a.iter().zip(v).map(|(a, b)| a * b).sum();
        assert!(lav.abs() < 1e-12);
    }

    #[test]
    fn rank_analysis_totally_degenerate() {
        let m = FinslerMetric::parse(3, "th0").unwrap();
        let theta = [2.0, 5.0, 1.0];
        let mj = m.metric_jet(&theta).unwrap();
        let ma = m.rank_analysis(&mj, &theta).unwrap();
        assert_eq!(ma.rank(), 0);
        assert_eq!(ma.degeneracy(), 2);
        assert_eq!(ma.partition.zero, 0);
        // v_I spans the th1, th2 directions.
        for v in &ma.v {
            assert!(v[0].abs() < 1e-12);
            let lav: f64 = ma.l_a.iter().zip(v).map(|(a, b)| a * b).sum();
            assert!(lav.abs() < 1e-12);
        }
    }

    #[test]
    fn euler_identities() {
        let m = euclid(3);
        let theta = [0.9, -0.2, 0.5];
        let mj = m.metric_jet(&theta).unwrap();
        // L_a theta^a = L (degree 1), L_ab theta^b = 0 (degree 0 gradient).
        let lt: f64 = mj.l_a.iter().zip(&theta).map(|(a, t)| a * t).sum();
        assert!((lt - mj.l).abs() < 1e-12);
        let ht = mj.l_ab.mul_vec(&theta);
        assert!(ht.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn basis_identities_remark_properties() {
        // L_a theta^a / L = 1, L_a ell_b^a = 0, L_a v_I^a = 0.
        for text in ["sqrt(th0^2 + th1^2 + th2^2)", "sqrt(th0^2 - th1^2)", "th0"] {
            let m = FinslerMetric::parse(3, text).unwrap();
            let theta = [1.7, 0.6, -0.4];
            let mj = m.metric_jet(&theta).unwrap();
            let ma = m.rank_analysis(&mj, &theta).unwrap();
            let lt: f64 = ma.l_a.iter().zip(&theta).map(|(a, t)| a * t).sum();
            assert!((lt / ma.l - 1.0).abs() < 1e-10);
            for ell in &ma.ell {
                let d: f64 = ma.l_a.iter().zip(ell).map(|(a, e)| a * e).sum();
                assert!(d.abs() < 1e-10, "{text}: L_a ell^a = {d}");
            }
            for v in &ma.v {
                let d: f64 = ma.l_a.iter().zip(v).map(|(a, e)| a * e).sum();
                assert!(d.abs() < 1e-10, "{text}: L_a v^a = {d}");
            }
        }
    }

    #[test]
    fn basis_is_functionally_independent() {
        for text in ["sqrt(th0^2 + th1^2 + th2^2)", "sqrt(th0^2 - th1^2)", "th0"] {
            let m = FinslerMetric::parse(3, text).unwrap();
            let theta = [1.7, 0.6, -0.4];
            let mj = m.metric_jet(&theta).unwrap();
            let ma = m.rank_analysis(&mj, &theta).unwrap();
            let dim = 3;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            rows.push(theta.iter().map(|t| t / ma.l).collect());
            rows.extend(ma.ell.iter().cloned());
            rows.extend(ma.v.iter().cloned());
            assert_eq!(rows.len(), dim);
            let basis = Mat::from_fn(dim, dim, |i, j| rows[i][j]);
            let s = linalg::singular_values(&basis);
            assert!(
                s[dim - 1] > 1e-8 * s[0],
                "{text}: basis nearly dependent {s:?}"
            );
        }
    }

    #[test]
    fn gradient_and_hessian_homogeneity_degrees() {
        let m = euclid(2);
        let theta = [1.1, -0.8];
        let mj = m.metric_jet(&theta).unwrap();
        for s in [0.5, 2.0] {
            let scaled: Vec<f64> = theta.iter().map(|t| s * t).collect();
            let mjs = m.metric_jet(&scaled).unwrap();
            for a in 0..2 {
                assert!((mjs.l_a[a] - mj.l_a[a]).abs() < 1e-10, "L_a degree 0");
                for b in 0..2 {
                    assert!(
                        (mjs.l_ab[(a, b)] - mj.l_ab[(a, b)] / s).abs() < 1e-10,
                        "L_ab degree -1"
                    );
                }
            }
        }
    }

    #[test]
    fn jet_scalars_match_value_scalars() {
        let m = FinslerMetric::parse(2, "sqrt(th0^2 + th1^2) + 0.1*th0").unwrap();
        let theta = [0.8, 0.5];
        let val = m.scalars_value(&theta).unwrap();
        let jet = m.scalars_jet(&theta).unwrap();
        assert!((jet.l.value() - val.l).abs() < 1e-15);
        for a in 0..2 {
            assert!((jet.l_a[a].value() - val.l_a[a]).abs() < 1e-15);
            // Jet gradient of L equals L_a.
            assert!((jet.l.grad_at(a) - val.l_a[a]).abs() < 1e-15);
            for b in 0..2 {
                assert!((jet.l_ab[(a, b)].value() - val.l_ab[(a, b)]).abs() < 1e-14);
                // Jet gradient of L_a equals L_ab.
                assert!((jet.l_a[a].grad_at(b) - val.l_ab[(a, b)]).abs() < 1e-14);
            }
        }
    }
}
