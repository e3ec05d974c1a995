//! Nonlinear Finsler connections in moving-frame form.
//!
//! This crate computes the nonlinear connection of a Finsler metric that is
//! given through a moving frame (vielbein): the metric is a positively
//! 1-homogeneous function `L = L(theta)` of the frame components
//! `theta^a = e^a_mu(x) dx^mu`, with no explicit coordinate dependence.
//!
//! The pipeline is:
//!
//! 1. [`expr`] — parse metric and vielbein entries from a small expression
//!    language and evaluate them with plain values or with second-order
//!    forward-mode jets ([`jet::Jet2`]).
//! 2. [`frame`] — evaluate the coframe matrix `e^a_mu`, its inverse and its
//!    coordinate derivatives at a point, and form the frame structure
//!    coefficients `c^a_{bc} = theta^a([e_b, e_c])`.
//! 3. [`metric`] — evaluate `L`, its gradient `L_a` and Hessian `L_ab`,
//!    check homogeneity, and split the index range by the (possibly
//!    deficient) rank of the Hessian.
//! 4. [`connection`] — assemble the Berwald functions `G^a`, the connection
//!    coefficients `N^a_c`, the constraints `C_I` of the degenerate case,
//!    and verify the Cartan and metricity conditions numerically. A fully
//!    independent holonomic-coordinate computation is provided as an oracle
//!    for the regular case.
//! 5. [`geodesic`] — integrate the auto-parallel form of the Euler-Lagrange
//!    equations and evaluate the raw Euler-Lagrange residual along curves.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of `std` for float math on bare targets.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]
// Index contractions are written as explicit loops mirroring the tensor
// expressions they implement.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ffc-core needs either the `std` feature or the `libm` feature");

pub mod connection;
pub mod error;
pub mod expr;
pub mod frame;
pub mod geodesic;
pub mod jet;
pub mod linalg;
pub mod metric;
mod real;

pub use error::Error;
pub use expr::Expression;
pub use jet::Jet2;
pub use real::Real;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
