//! Confidence-interval estimation on the torus: the R(β) design built from
//! the prolate wave function, centered intervals of half-width 2R(β)/n, and
//! Monte Carlo coverage verification.
//!
//! Unit convention: the rescaled outcome is z = n(θ̂-θ)/2, so |z| ≤ R is the
//! event |θ̂-θ| ≤ 2R/n. The stored `half_width` is 2R/n in θ-units and the
//! full interval width is 4R/n (equivalently 2R in z-units).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{default_grid, find_root, Grid};
use crate::protocol::{wrap_two_pi, InputState};
use crate::spectral::lambda_of_r;
use crate::wavefn::{Builtin, WaveFunction};

const R_MAX: f64 = 15.0;

/// Inverse of β = λ(R): the smallest half-width whose concentration
/// eigenvalue reaches the confidence coefficient β, to |λ(R) - β| ≤ tol.
pub fn r_of_beta(beta: f64, tol: f64) -> Result<f64> {
    if !(beta > 0.05 && beta < 1.0 - 1e-8) {
        return Err(Error::InvalidArgument(format!(
            "confidence coefficient {beta} outside (0.05, 1 - 1e-8)"
        )));
    }
    let mut lo = 0.05;
    if lambda_of_r(lo)? >= beta {
        return Err(Error::OutOfRange(format!(
            "lambda({lo}) already exceeds beta = {beta}"
        )));
    }
    let mut hi = 1.0;
    loop {
        let l = lambda_of_r(hi)?;
        if l >= beta {
            break;
        }
        lo = hi;
        hi *= 1.7;
        if hi > R_MAX {
            return Err(Error::OutOfRange(format!(
                "beta = {beta} not achievable below R = {R_MAX}"
            )));
        }
    }
    find_root(lambda_of_r, beta, (lo, hi), tol)
}

/// Interval-estimation design: prolate input state at R(β) with centered
/// intervals of half-width 2R(β)/n.
#[derive(Clone, Debug, Serialize)]
pub struct IntervalDesign {
    pub beta: f64,
    #[serde(rename = "R_beta")]
    pub r_beta: f64,
    pub n: usize,
    pub half_width: f64,
    pub state: InputState,
}

impl IntervalDesign {
    /// Builds the design with the default tolerance |λ(R) - β| ≤ 1e-6.
    pub fn new(beta: f64, n: usize) -> Result<Self> {
        Self::with_tolerance(beta, n, 1e-6)
    }

    pub fn with_tolerance(beta: f64, n: usize, tol: f64) -> Result<Self> {
        let r_beta = r_of_beta(beta, tol)?;
        Self::from_r(beta, r_beta, n, &default_grid())
    }

    fn from_r(beta: f64, r_beta: f64, n: usize, grid: &Arc<Grid>) -> Result<Self> {
        if (n as f64) < 8.0 * r_beta {
            return Err(Error::InvalidArgument(format!(
                "n = {n} too small to resolve the design; need n >= {:.0}",
                (8.0 * r_beta).ceil()
            )));
        }
        let psi = WaveFunction::builtin(Builtin::Prolate(r_beta), grid)?;
        let state = InputState::from_wavefn(&psi, n)?;
        Ok(IntervalDesign {
            beta,
            r_beta,
            n,
            half_width: 2.0 * r_beta / n as f64,
            state,
        })
    }

    /// Same design with the interval half-width scaled by `factor`; used to
    /// probe the width-coverage trade-off.
    pub fn with_scaled_width(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        let mut scaled = self.clone();
        scaled.half_width = self.half_width * factor;
        Ok(scaled)
    }

    /// A design that keeps this design's interval half-width but samples with
    /// a different input state; used for optimality comparisons.
    pub fn with_state(&self, state: InputState) -> Result<Self> {
        if state.n() != self.n {
            return Err(Error::InvalidArgument(format!(
                "replacement state has n = {}, design has n = {}",
                state.n(),
                self.n
            )));
        }
        let mut swapped = self.clone();
        swapped.state = state;
        Ok(swapped)
    }
}

/// Arc [L, U] on the torus R/2πZ with wrap-around width.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TorusInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TorusInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..2.0 * PI).contains(&lo) || !(0.0..2.0 * PI).contains(&hi) {
            return Err(Error::InvalidArgument(
                "interval endpoints must lie in [0, 2π)".into(),
            ));
        }
        Ok(TorusInterval { lo, hi })
    }

    /// U-L when L < U, else U+2π-L; in (0, 2π].
    pub fn width(&self) -> f64 {
        if self.lo < self.hi {
            self.hi - self.lo
        } else {
            self.hi + 2.0 * PI - self.lo
        }
    }

    /// Closed-interval membership, wrapped mod 2π.
    pub fn contains(&self, theta: f64) -> bool {
        let rel = wrap_two_pi(theta - self.lo);
        rel <= self.width() + 1e-15
    }
}

/// Centered confidence interval [θ̂ - h, θ̂ + h] wrapped onto the torus.
pub fn confidence_interval(design: &IntervalDesign, theta_hat: f64) -> Result<TorusInterval> {
    let h = design.half_width;
    if 2.0 * h >= 2.0 * PI {
        return Err(Error::DegenerateInterval(format!(
            "width {} covers the whole torus",
            2.0 * h
        )));
    }
    TorusInterval::new(wrap_two_pi(theta_hat - h), wrap_two_pi(theta_hat + h))
}

/// Monte Carlo coverage estimate.
#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub beta: f64,
    pub n: usize,
    pub trials: usize,
    pub coverage: f64,
    pub stderr: f64,
}

impl CoverageReport {
    pub fn csv_header() -> &'static str {
        "beta,n,trials,coverage,stderr"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.beta, self.n, self.trials, self.coverage, self.stderr
        )
    }
}

/// Fraction of sampled estimates whose confidence interval contains θ. By
/// covariance the value is θ-independent up to Monte Carlo noise.
pub fn coverage_mc(
    design: &IntervalDesign,
    theta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if trials < 10_000 {
        return Err(Error::InvalidArgument(
            "coverage estimation needs at least 10^4 trials".into(),
        ));
    }
    let sample = design.state.sample_outcomes(theta, trials, seed)?;
    let hit = |&theta_hat: &f64| -> Result<u64> {
        Ok(confidence_interval(design, theta_hat)?.contains(theta) as u64)
    };
    #[cfg(feature = "parallel")]
    let hits: u64 = sample
        .estimates()
        .par_iter()
        .map(hit)
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    #[cfg(not(feature = "parallel"))]
    let hits: u64 = sample
        .estimates()
        .iter()
        .map(hit)
        .sum::<Result<u64>>()?;
    let coverage = hits as f64 / trials as f64;
    Ok(CoverageReport {
        beta: design.beta,
        n: design.n,
        trials,
        coverage,
        stderr: (coverage * (1.0 - coverage) / trials as f64).sqrt(),
    })
}
