//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value, a gradient and a symmetric Hessian with
//! respect to `m` seeded variables, and propagates all three through
//! arithmetic by the chain rule. The Hessian is stored as a packed lower
//! triangle, so symmetry holds by construction.
//!
//! `Jet2` is generic over its component scalar. `Jet2<f64>` is the ordinary
//! second-order jet; `Jet2<Jet2<f64>>` nests the construction and yields
//! third and fourth derivatives, which is how derivatives *of* the metric
//! Hessian are obtained without symbolic differentiation.

use crate::real::Real;
use alloc::vec;
use alloc::vec::Vec;

/// Value, gradient and symmetric Hessian at a point.
///
/// A jet with an empty gradient is a *constant*: it broadcasts against jets
/// of any seed count. This is what [`Real::from_f64`] produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<S = f64> {
    value: S,
    grad: Vec<S>,
    /// Packed lower triangle, entry `(i, j)` with `i >= j` at `i(i+1)/2 + j`.
    hess: Vec<S>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

impl<S: Real> Jet2<S> {
    /// A constant with `m` seeded variables: zero gradient and Hessian.
    pub fn constant(value: S, m: usize) -> Self {
        Jet2 {
            value,
            grad: vec![S::zero(); m],
            hess: vec![S::zero(); m * (m + 1) / 2],
        }
    }

    /// The jet of the `slot`-th seeded variable: unit gradient entry, zero Hessian.
    pub fn variable(value: S, m: usize, slot: usize) -> Self {
        assert!(slot < m, "seed slot {slot} out of range for {m} variables");
        let mut j = Self::constant(value, m);
        j.grad[slot] = S::one();
        j
    }

    /// Number of seeded variables (zero for broadcastable constants).
    pub fn seed_count(&self) -> usize {
        self.grad.len()
    }

    /// The value component.
    pub fn val(&self) -> &S {
        &self.value
    }

    /// Gradient entry `i` (zero for a broadcast constant).
    pub fn grad_at(&self, i: usize) -> S {
        self.grad.get(i).cloned().unwrap_or_else(S::zero)
    }

    /// Gradient as a slice (empty for a broadcast constant).
    pub fn grad(&self) -> &[S] {
        &self.grad
    }

    /// Hessian entry `(i, j)`; symmetric by storage.
    pub fn hess_at(&self, i: usize, j: usize) -> S {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.hess.get(tri(hi, lo)).cloned().unwrap_or_else(S::zero)
    }

    /// Full `m x m` Hessian, materialized row-major.
    pub fn hess_full(&self) -> Vec<Vec<S>> {
        let m = self.seed_count();
        (0..m)
            .map(|i| (0..m).map(|j| self.hess_at(i, j)).collect())
            .collect()
    }

    fn m_of(a: &Self, b: &Self) -> usize {
        let (ma, mb) = (a.grad.len(), b.grad.len());
        debug_assert!(
            ma == mb || ma == 0 || mb == 0,
            "jet seed counts differ: {ma} vs {mb}"
        );
        core::cmp::max(ma, mb)
    }

    /// Chain rule for a unary map with value `f0 = f(u)`, first derivative
    /// `f1 = f'(u)` and second derivative `f2 = f''(u)`.
    fn unary(&self, f0: S, f1: S, f2: S) -> Self {
        let m = self.grad.len();
        let grad = self.grad.iter().map(|ui| f1.clone() * ui.clone()).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in 0..=i {
                hess.push(
                    f1.clone() * self.hess[tri(i, j)].clone()
                        + f2.clone() * self.grad[i].clone() * self.grad[j].clone(),
                );
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }
}

impl<S: Real> core::ops::Add for Jet2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let m = Self::m_of(&self, &rhs);
        let grad = (0..m).map(|i| self.grad_at(i) + rhs.grad_at(i)).collect();
        let mut hess = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                hess.push(self.hess_at(i, j) + rhs.hess_at(i, j));
            }
        }
        Jet2 {
            value: self.value + rhs.value,
            grad,
            hess,
        }
    }
}

impl<S: Real> core::ops::Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let m = Self::m_of(&self, &rhs);
        let grad = (0..m).map(|i| self.grad_at(i) - rhs.grad_at(i)).collect();
        let mut hess = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                hess.push(self.hess_at(i, j) - rhs.hess_at(i, j));
            }
        }
        Jet2 {
            value: self.value - rhs.value,
            grad,
            hess,
        }
    }
}

impl<S: Real> core::ops::Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let m = Self::m_of(&self, &rhs);
        let grad = (0..m)
            .map(|i| {
                self.grad_at(i) * rhs.value.clone() + self.value.clone() * rhs.grad_at(i)
            })
            .collect();
        let mut hess = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                hess.push(
                    self.hess_at(i, j) * rhs.value.clone()
                        + self.grad_at(i) * rhs.grad_at(j)
                        + self.grad_at(j) * rhs.grad_at(i)
                        + self.value.clone() * rhs.hess_at(i, j),
                );
            }
        }
        Jet2 {
            value: self.value * rhs.value,
            grad,
            hess,
        }
    }
}

impl<S: Real> core::ops::Div for Jet2<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // From u = w v: w_i = (u_i - w v_i)/v, then
        // w_ij = (u_ij - w_i v_j - w_j v_i - w v_ij)/v.
        let m = Self::m_of(&self, &rhs);
        let w = self.value.clone() / rhs.value.clone();
        let grad: Vec<S> = (0..m)
            .map(|i| (self.grad_at(i) - w.clone() * rhs.grad_at(i)) / rhs.value.clone())
            .collect();
        let mut hess = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                hess.push(
                    (self.hess_at(i, j)
                        - grad[i].clone() * rhs.grad_at(j)
                        - grad[j].clone() * rhs.grad_at(i)
                        - w.clone() * rhs.hess_at(i, j))
                        / rhs.value.clone(),
                );
            }
        }
        Jet2 {
            value: w,
            grad,
            hess,
        }
    }
}

impl<S: Real> core::ops::Neg for Jet2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet2 {
            value: -self.value,
            grad: self.grad.into_iter().map(|g| -g).collect(),
            hess: self.hess.into_iter().map(|h| -h).collect(),
        }
    }
}

impl<S: Real> Real for Jet2<S> {
    fn from_f64(c: f64) -> Self {
        // Broadcastable constant; aligns with any seed count on use.
        Jet2 {
            value: S::from_f64(c),
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn sin(&self) -> Self {
        self.unary(self.value.sin(), self.value.cos(), -self.value.sin())
    }

    fn cos(&self) -> Self {
        self.unary(self.value.cos(), -self.value.sin(), -self.value.cos())
    }

    fn tan(&self) -> Self {
        let t = self.value.tan();
        let sec2 = S::one() + t.clone() * t.clone();
        let two_t_sec2 = S::from_f64(2.0) * t.clone() * sec2.clone();
        self.unary(t, sec2, two_t_sec2)
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.unary(e.clone(), e.clone(), e)
    }

    fn ln(&self) -> Self {
        let inv = S::one() / self.value.clone();
        let minv2 = -(inv.clone() * inv.clone());
        self.unary(self.value.ln(), inv, minv2)
    }

    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let half_inv = S::from_f64(0.5) / s.clone();
        // f'' = -1/(4 v^{3/2})
        let f2 = -(S::from_f64(0.25) / (self.value.clone() * s.clone()));
        self.unary(s, half_inv, f2)
    }

    fn abs(&self) -> Self {
        // One-sided derivative at the kink: sign(0) = +1.
        let sign = if self.value.value() >= 0.0 { 1.0 } else { -1.0 };
        self.unary(self.value.abs(), S::from_f64(sign), S::zero())
    }

    fn sinh(&self) -> Self {
        self.unary(self.value.sinh(), self.value.cosh(), self.value.sinh())
    }

    fn cosh(&self) -> Self {
        self.unary(self.value.cosh(), self.value.sinh(), self.value.cosh())
    }

    fn tanh(&self) -> Self {
        let t = self.value.tanh();
        let sech2 = S::one() - t.clone() * t.clone();
        let f2 = S::from_f64(-2.0) * t.clone() * sech2.clone();
        self.unary(t, sech2, f2)
    }

    fn powi(&self, n: i32) -> Self {
        match n {
            0 => Self::constant(S::one(), self.seed_count()),
            1 => self.clone(),
            _ => {
                let f0 = self.value.powi(n);
                let f1 = S::from_f64(f64::from(n)) * self.value.powi(n - 1);
                let f2 = S::from_f64(f64::from(n) * f64::from(n - 1)) * self.value.powi(n - 2);
                self.unary(f0, f1, f2)
            }
        }
    }
}
