//! Desk-scale laboratory for one-dimensional long-range (Dyson) Ising ferromagnets.
//!
//! The crate is `no_std` with `alloc`. It covers:
//!
//! * [`model`]: coupling families with certified tail sums, spin windows, interaction
//!   masks (full, half-line, intermediate), Hamiltonians, oscillations and the
//!   coupling-matrix conditions used by the log-Sobolev bound.
//! * [`gibbs`]: finite-volume Gibbs measures by exhaustive enumeration, correlations,
//!   entropy and Dirichlet functionals, flip densities and intermediate-measure densities.
//! * [`transfer`]: depth-truncated transfer operator, pressure and principal eigen-data.
//! * [`sampler`]: heat-bath single-spin-flip chains with batch-means error bars.
//! * [`concentration`]: explicit log-Sobolev / Gaussian concentration constants and the
//!   verification suites built on exact measures.
//!
//! Enable `std` for `std::error::Error` impls and `parallel` for rayon-backed
//! enumeration and matrix-vector products. Results are bit-identical with and
//! without `parallel`.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod concentration;
pub mod error;
pub mod gibbs;
pub mod math;
pub mod model;
mod par;
pub mod sampler;
pub mod transfer;

pub use error::{Error, Result};
