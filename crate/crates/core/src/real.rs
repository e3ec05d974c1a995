//! Scalar abstraction shared by plain values and jets.
//!
//! Every formula in this crate is written once, generically over [`Real`].
//! Instantiating it at `f64` yields point values; instantiating it at
//! [`crate::jet::Jet2`] yields the same values together with first and
//! second derivatives with respect to the seeded variables.

use core::ops::{Add, Div, Mul, Neg, Sub};

/// Float functions routed through `std` or `libm` depending on features.
pub(crate) mod fp {
    macro_rules! shim {
        ($($name:ident),*) => {
            $(
                #[cfg(feature = "std")]
                #[inline]
                pub fn $name(x: f64) -> f64 { f64::$name(x) }
                #[cfg(not(feature = "std"))]
                #[inline]
                pub fn $name(x: f64) -> f64 { libm::$name(x) }
            )*
        };
    }
    shim!(sin, cos, tan, exp, sqrt, sinh, cosh, tanh);

    #[cfg(feature = "std")]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        f64::ln(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[cfg(feature = "std")]
    #[inline]
    pub fn powf(x: f64, e: f64) -> f64 {
        f64::powf(x, e)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn powf(x: f64, e: f64) -> f64 {
        libm::pow(x, e)
    }

    #[cfg(feature = "std")]
    #[inline]
    pub fn fract(x: f64) -> f64 {
        f64::fract(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn fract(x: f64) -> f64 {
        x - libm::trunc(x)
    }

    #[cfg(feature = "std")]
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        f64::ceil(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }

    /// Integer power by binary exponentiation (avoids `std`-only `f64::powi`).
    pub fn powi(x: f64, n: i32) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut base = if n < 0 { 1.0 / x } else { x };
        let mut k = n.unsigned_abs();
        let mut acc = 1.0;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

/// A real-like scalar: arithmetic plus the elementary functions used by the
/// expression language.
///
/// Implementations carry whatever derivative payload they like; `value`
/// exposes the underlying point value, which is what all branching decisions
/// (pivoting, sign tests, domain checks) are made on.
pub trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lift a constant.
    fn from_f64(c: f64) -> Self;

    /// The point value underneath any derivative payload.
    fn value(&self) -> f64;

    /// Sine.
    fn sin(&self) -> Self;
    /// Cosine.
    fn cos(&self) -> Self;
    /// Tangent.
    fn tan(&self) -> Self;
    /// Exponential.
    fn exp(&self) -> Self;
    /// Natural logarithm.
    fn ln(&self) -> Self;
    /// Square root.
    fn sqrt(&self) -> Self;
    /// Absolute value; the derivative uses `sign(0) = +1`.
    fn abs(&self) -> Self;
    /// Hyperbolic sine.
    fn sinh(&self) -> Self;
    /// Hyperbolic cosine.
    fn cosh(&self) -> Self;
    /// Hyperbolic tangent.
    fn tanh(&self) -> Self;
    /// Integer power; valid for negative bases, with `x^0 = 1`.
    fn powi(&self, n: i32) -> Self;

    /// General power `self^e` via `exp(e ln self)`; requires a positive base.
    fn powf(&self, e: &Self) -> Self {
        (e.clone() * self.ln()).exp()
    }

    /// Additive identity.
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    /// Multiplicative identity.
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(&self) -> Self {
        fp::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        fp::cos(*self)
    }
    #[inline]
    fn tan(&self) -> Self {
        fp::tan(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        fp::exp(*self)
    }
    #[inline]
    fn ln(&self) -> Self {
        fp::ln(*self)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        fp::sqrt(*self)
    }
    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    #[inline]
    fn sinh(&self) -> Self {
        fp::sinh(*self)
    }
    #[inline]
    fn cosh(&self) -> Self {
        fp::cosh(*self)
    }
    #[inline]
    fn tanh(&self) -> Self {
        fp::tanh(*self)
    }
    #[inline]
    fn powi(&self, n: i32) -> Self {
        fp::powi(*self, n)
    }
}
