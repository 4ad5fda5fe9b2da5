//! Limiting-distribution analysis for phase estimation.
//!
//! The crate maps input-state designs to their limiting distributions
//! |F(f)|² for wave functions f on [-1, 1], finds minimum-variance and
//! minimum-tail-probability designs (boundary-zero sine modes, smooth bumps,
//! prolate spheroidal wave functions), verifies the asymptotic claims with a
//! finite-n measurement simulator, and performs interval estimation on the
//! torus.
//!
//! Modules follow the analysis pipeline:
//!
//! - [`numerics`]: quadrature grids, oscillatory Fourier integrals, dense
//!   symmetric eigensolver, root finding.
//! - [`wavefn`]: wave functions, limiting distributions, window
//!   probabilities, the two variance functionals.
//! - [`spectral`]: the Dirichlet minimum-variance problem and the band
//!   concentration eigenproblem (prolate spheroidal wave functions, λ(R)).
//! - [`tails`]: tail curves, decay-rate fits, the convolution tail bound.
//! - [`protocol`]: finite-n input states, covariant-measurement sampling,
//!   convergence diagnostics, Fisher information.
//! - [`interval`]: R(β) designs and Monte Carlo coverage on the torus.
//! - [`verify`]: the named check suites run by the CLI and the acceptance
//!   tests.
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (density profiles, tail ladders, sampling, coverage counting) run on
//! rayon; disabling the feature swaps in sequential fallbacks with identical
//! results.

// `!(x > 0.0)`-style guards are deliberate: they reject NaN along with the
// out-of-range values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interval;
pub mod numerics;
pub mod protocol;
pub mod spectral;
pub mod tails;
pub mod verify;
pub mod wavefn;

pub use error::{Error, Result};
