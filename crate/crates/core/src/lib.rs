//! Laplace-Beltrami solvers on surfaces known only through point clouds.
//!
//! A flat reference mesh near the samples is lifted triangle by triangle onto
//! local polynomial fits of the cloud. The resulting patches need not match
//! across edges, so the PDE is discretized with a symmetric interior-penalty
//! discontinuous Galerkin method.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod cli;
pub mod dgcore;
pub mod error;
pub mod geometry;
pub mod meshgen;
pub mod solve;

pub use error::{Error, Result};
