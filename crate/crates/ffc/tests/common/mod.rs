//! Independent oracles for the acceptance suite.
//!
//! Nothing here touches the jet pipeline: derivatives come from finite
//! differences of plain evaluation, connections from hand-coded
//! Levi-Civita data, geodesics from the closed-form great circle.

#![allow(dead_code)]

use ffc_core::frame::Chart;

/// Central-difference gradient.
pub fn fd_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Central second-difference Hessian.
pub fn fd_hess(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    let f0 = f(x);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        out[i][i] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
        for j in i + 1..n {
            let mut xpp = x.to_vec();
            let mut xpm = x.to_vec();
            let mut xmp = x.to_vec();
            let mut xmm = x.to_vec();
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            let v = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Constant-curvature surface data for the spin-connection oracle: the
/// orthonormal frame is `(dx0, f(x0) dx1)` with `f = sin` (sphere) or
/// `f = sinh` (hyperbolic plane).
pub struct SurfaceOracle {
    /// Warp factor `f(x0)`.
    pub f: fn(f64) -> f64,
    /// Its derivative.
    pub df: fn(f64) -> f64,
}

impl SurfaceOracle {
    /// Levi-Civita Christoffel symbols of `g = dx0^2 + f(x0)^2 dx1^2`:
    /// `Gamma^0_{11} = -f f'`, `Gamma^1_{01} = Gamma^1_{10} = f'/f`.
    fn christoffel(&self, x: &[f64], mu: usize, nu: usize, rho: usize) -> f64 {
        let f = (self.f)(x[0]);
        let df = (self.df)(x[0]);
        match (mu, nu, rho) {
            (0, 1, 1) => -f * df,
            (1, 0, 1) | (1, 1, 0) => df / f,
            _ => 0.0,
        }
    }

    /// Spin connection contracted with the transported velocity:
    /// `N^a_c = theta^b e^a_mu (e_c^nu d_nu e_b^mu + e_c^nu Gamma^mu_{nu rho} e_b^rho)`,
    /// with the frame derivative analytic: only `d_0 (1/f) = -f'/f^2`.
    pub fn spin_connection(&self, x: &[f64], theta: &[f64]) -> Vec<Vec<f64>> {
        let f = (self.f)(x[0]);
        let df = (self.df)(x[0]);
        let e = [[1.0, 0.0], [0.0, f]];
        let einv = [[1.0, 0.0], [0.0, 1.0 / f]];
        // deinv[nu][mu][b] = d_nu e_b^mu
        let mut deinv = [[[0.0_f64; 2]; 2]; 2];
        deinv[0][1][1] = -df / (f * f);
        let mut n = vec![vec![0.0; 2]; 2];
        for a in 0..2 {
            for c in 0..2 {
                let mut acc = 0.0;
                for b in 0..2 {
                    for mu in 0..2 {
                        for nu in 0..2 {
                            let mut covariant = deinv[nu][mu][b];
                            for rho in 0..2 {
                                covariant += self.christoffel(x, mu, nu, rho) * einv[rho][b];
                            }
                            acc += theta[b] * e[a][mu] * einv[nu][c] * covariant;
                        }
                    }
                }
                n[a][c] = acc;
            }
        }
        n
    }
}

/// Sphere point -> ambient unit vector.
fn embed(x: &[f64]) -> [f64; 3] {
    let (th, ph) = (x[0], x[1]);
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

/// Closed-form great circle through `x` with unit frame velocity `theta`.
pub fn great_circle(x: &[f64], theta: &[f64], s: f64) -> [f64; 2] {
    let (th, ph) = (x[0], x[1]);
    let p = embed(x);
    let e_th = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
    let e_ph = [-ph.sin(), ph.cos(), 0.0];
    let u: Vec<f64> = (0..3)
        .map(|i| theta[0] * e_th[i] + theta[1] * e_ph[i])
        .collect();
    let q: Vec<f64> = (0..3).map(|i| s.cos() * p[i] + s.sin() * u[i]).collect();
    [q[2].clamp(-1.0, 1.0).acos(), q[1].atan2(q[0])]
}

/// The twisted degenerate chart used by the constraint criteria: the th1
/// row leaks into dx2 with an x0-dependent coefficient.
pub fn twisted_chart() -> Chart {
    Chart::parse(&[
        vec!["1", "0", "0"],
        vec!["0", "1", "0.4*x0"],
        vec!["0", "0", "1"],
    ])
    .unwrap()
}
