//! Charts, vielbeins and frame structure coefficients.
//!
//! A [`Chart`] holds the coframe matrix `e^a_mu(x)` as expressions in the
//! coordinates `x0..x{n}`. A [`FramePoint`] is its evaluation at one point:
//! the coframe `E`, the frame `E^{-1}`, and the coordinate derivatives of
//! `E` obtained from jet evaluation. The non-holonomy of the frame is
//! measured by the structure coefficients
//! `c^a_{bc} = theta^a([e_b, e_c])`, antisymmetric in the lower pair.

use crate::error::Error;
use crate::expr::Expression;
use crate::jet::Jet2;
use crate::linalg::Mat;
use crate::real::Real;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Default relative threshold under which the coframe counts as singular.
pub const DEFAULT_SINGULARITY_TOL: f64 = 1e-12;

/// A coordinate chart with its vielbein.
#[derive(Debug, Clone)]
pub struct Chart {
    dim: usize,
    coord_names: Vec<String>,
    vielbein: Vec<Vec<Expression>>,
}

impl Chart {
    /// Build a chart from parsed vielbein entries (`vielbein[a][mu] = e^a_mu`).
    pub fn new(vielbein: Vec<Vec<Expression>>) -> Result<Self, Error> {
        let dim = vielbein.len();
        if dim < 2 {
            return Err(Error::Dimension {
                message: format!("chart dimension must be at least 2, got {dim}"),
            });
        }
        if vielbein.iter().any(|row| row.len() != dim) {
            return Err(Error::Dimension {
                message: "vielbein matrix must be square".into(),
            });
        }
        let coord_names = (0..dim).map(|i| format!("x{i}")).collect();
        Ok(Chart {
            dim,
            coord_names,
            vielbein,
        })
    }

    /// Parse a chart from entry strings over the variables `x0..x{dim-1}`.
    pub fn parse(entries: &[Vec<&str>]) -> Result<Self, Error> {
        let dim = entries.len();
        let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let vielbein = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|text| Expression::parse(text, &name_refs))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Chart::new(vielbein)
    }

    /// Chart dimension (`n + 1`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate names, `x0..x{n}`.
    pub fn coord_names(&self) -> impl Iterator<Item = &str> {
        self.coord_names.iter().map(|s| s.as_str())
    }

    /// The vielbein entry `e^a_mu` as an expression.
    pub fn entry(&self, a: usize, mu: usize) -> &Expression {
        &self.vielbein[a][mu]
    }

    /// Evaluate the coframe matrix over any scalar assignment of `x`.
    ///
    /// Returns the domain flag alongside; callers decide how to surface it.
    pub fn coframe_scalar<S: Real>(&self, x: &[S]) -> (Mat<S>, bool) {
        let mut domain = false;
        let m = Mat::from_fn(self.dim, self.dim, |a, mu| {
            let (v, flag) = self.vielbein[a][mu].eval_scalar_checked(x);
            domain |= flag;
            v
        });
        (m, domain)
    }

    /// Evaluate coframe, frame and coframe derivatives at `x` with the
    /// default singularity threshold.
    pub fn frame_point(&self, x: &[f64]) -> Result<FramePoint, Error> {
        self.frame_point_with_tol(x, DEFAULT_SINGULARITY_TOL)
    }

    /// [`Chart::frame_point`] with an explicit singularity threshold: the
    /// frame is rejected when `|det E| < tol * ||E||_F^dim`.
    pub fn frame_point_with_tol(&self, x: &[f64], tol: f64) -> Result<FramePoint, Error> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                message: format!("point has {} coordinates, chart has {}", x.len(), self.dim),
            });
        }
        let seeds: Vec<usize> = (0..self.dim).collect();
        let mut domain = false;
        let mut jets: Vec<Vec<Jet2>> = Vec::with_capacity(self.dim);
        for row in &self.vielbein {
            let mut jr = Vec::with_capacity(self.dim);
            for entry in row {
                let (j, flag) = entry.eval_jet2_checked(x, &seeds);
                domain |= flag;
                jr.push(j);
            }
            jets.push(jr);
        }
        if domain {
            return Err(Error::Domain {
                context: "vielbein evaluation".into(),
            });
        }
        let e = Mat::from_fn(self.dim, self.dim, |a, mu| *jets[a][mu].val());
        let de: Vec<Mat<f64>> = (0..self.dim)
            .map(|nu| Mat::from_fn(self.dim, self.dim, |a, mu| jets[a][mu].grad_at(nu)))
            .collect();
        let det = e.det().abs();
        let norm = e.norm();
        let threshold = tol * crate::real::fp::powi(norm, self.dim as i32);
        if det < threshold || det == 0.0 {
            return Err(Error::SingularFrame { det, threshold });
        }
        let einv = e.inverse().ok_or(Error::SingularFrame {
            det,
            threshold,
        })?;
        let cond = norm * einv.norm();
        Ok(FramePoint {
            x: x.to_vec(),
            e,
            einv,
            de,
            cond,
        })
    }
}

/// A chart evaluated at one point.
#[derive(Debug, Clone)]
pub struct FramePoint {
    /// The base point.
    pub x: Vec<f64>,
    /// Coframe matrix, `e[(a, mu)] = e^a_mu`.
    pub e: Mat<f64>,
    /// Frame matrix, `einv[(mu, a)] = e_a^mu`.
    pub einv: Mat<f64>,
    /// Coordinate derivatives of the coframe: `de[nu][(a, mu)] = d e^a_mu / d x^nu`.
    pub de: Vec<Mat<f64>>,
    /// Frobenius condition estimate `||E|| ||E^-1||`.
    pub cond: f64,
}

impl FramePoint {
    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Derivatives of the frame matrix, from `d(E^-1) = -E^-1 (dE) E^-1`.
    pub fn dframe(&self) -> Vec<Mat<f64>> {
        self.de
            .iter()
            .map(|d| {
                let t = self.einv.mul_mat(d).mul_mat(&self.einv);
                Mat::from_fn(self.dim(), self.dim(), |i, j| -t[(i, j)])
            })
            .collect()
    }
}

/// Frame components of a coordinate velocity: `theta = E dx`.
pub fn theta_of(fp: &FramePoint, dx: &[f64]) -> Vec<f64> {
    fp.e.mul_vec(dx)
}

/// Rank-3 coefficient array with antisymmetry in the last index pair.
#[derive(Debug, Clone)]
pub struct Coeffs3 {
    dim: usize,
    /// Row-major `[a][b][c]`.
    data: Vec<f64>,
}

impl Coeffs3 {
    /// Zero array.
    pub fn zeros(dim: usize) -> Self {
        Coeffs3 {
            dim,
            data: alloc::vec![0.0; dim * dim * dim],
        }
    }

    /// Build from a function of the index triple.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    out.set(a, b, c, f(a, b, c));
                }
            }
        }
        out
    }

    /// Dimension of each index.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `c^a_{bc}`.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Structure coefficients `c^a_{bc} = theta^a([e_b, e_c])` of the frame.
///
/// Computed from `c^a_{bc} = e^a_rho (e_b^nu d_nu e_c^rho - e_c^nu d_nu e_b^rho)`
/// with the frame derivatives taken analytically from the coframe jets.
/// Antisymmetry in `(b, c)` holds exactly because only the `b < c` entries
/// are computed and mirrored.
pub fn structure_coefficients(fp: &FramePoint) -> Coeffs3 {
    let n = fp.dim();
    let dinv = fp.dframe();
    let mut c = Coeffs3::zeros(n);
    for b in 0..n {
        for cc in b + 1..n {
            // bracket^rho = e_b^nu d_nu e_c^rho - e_c^nu d_nu e_b^rho
            let bracket: Vec<f64> = (0..n)
                .map(|rho| {
                    let mut acc = 0.0;
                    for nu in 0..n {
                        acc += fp.einv[(nu, b)] * dinv[nu][(rho, cc)]
                            - fp.einv[(nu, cc)] * dinv[nu][(rho, b)];
                    }
                    acc
                })
                .collect();
            for a in 0..n {
                let mut v = 0.0;
                for rho in 0..n {
                    v += fp.e[(a, rho)] * bracket[rho];
                }
                c.set(a, b, cc, v);
                c.set(a, cc, b, -v);
            }
        }
    }
    c
}
