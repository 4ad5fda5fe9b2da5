//! The two eigenproblems behind the variance and tail optimizations: the
//! boundary-zero second-derivative (Dirichlet) problem, and the band
//! concentration operator with sinc kernel whose top eigenfunction is the
//! prolate spheroidal wave function ψ_R.
//!
//! The kernel eigenproblem is discretized by the Nystrom method; the prolate
//! differential equation is used only as an independent residual check, with
//! its eigenvalue ξ(R) recovered from ψ_R by a Rayleigh quotient.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    default_grid, eigh_bottom, eigh_top, legendre, linear_fit, Grid, SymmetricOperator,
};
use crate::wavefn::{prolate_label, WaveFunction};

/// Above this band half-width the top eigenvalue is so close to 1 that
/// 1-λ(R) is computed as the smallest eigenvalue of I-A instead.
const COMPLEMENT_ROUTE_THRESHOLD: f64 = 9.0;

/// Solution of the concentration eigenproblem at band half-width R.
#[derive(Clone, Debug)]
pub struct ProlateSolution {
    band_halfwidth: f64,
    lambda: f64,
    one_minus_lambda: f64,
    xi: f64,
    psi: WaveFunction,
    ode_residual: f64,
    grid_size: usize,
}

impl ProlateSolution {
    pub fn band_halfwidth(&self) -> f64 {
        self.band_halfwidth
    }

    /// Top eigenvalue λ(R) of the concentration operator, in (0, 1).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// 1 - λ(R), kept at full relative accuracy.
    pub fn lambda_deficit(&self) -> f64 {
        self.one_minus_lambda
    }

    /// Eigenvalue of the prolate differential equation, recovered as the
    /// Rayleigh quotient of the Sturm-Liouville operator on ψ_R.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn psi(&self) -> &WaveFunction {
        &self.psi
    }

    pub fn into_psi(self) -> WaveFunction {
        self.psi
    }

    /// Relative residual of d/dx (1-x²) dψ/dx + (ξ - R²x²) ψ = 0 on the
    /// inner 90% of the grid.
    pub fn ode_residual(&self) -> f64 {
        self.ode_residual
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }
}

#[derive(Serialize, Deserialize)]
struct ProlateSolutionData {
    #[serde(rename = "R")]
    r: f64,
    lambda: f64,
    xi: f64,
    ode_residual: f64,
    psi: WaveFunction,
}

impl Serialize for ProlateSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProlateSolutionData {
            r: self.band_halfwidth,
            lambda: self.lambda,
            xi: self.xi,
            ode_residual: self.ode_residual,
            psi: self.psi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProlateSolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = ProlateSolutionData::deserialize(d)?;
        let grid_size = data.psi.grid().len();
        Ok(ProlateSolution {
            band_halfwidth: data.r,
            lambda: data.lambda,
            one_minus_lambda: 1.0 - data.lambda,
            xi: data.xi,
            psi: data.psi,
            ode_residual: data.ode_residual,
            grid_size,
        })
    }
}

/// Nystrom discretization A = D^{1/2} K D^{1/2} of the band concentration
/// operator with kernel K_R(x,x') = sin(R(x-x'))/(π(x-x')), K_R(x,x) = R/π.
pub fn concentration_operator(r: f64, grid: &Grid) -> Result<SymmetricOperator> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "band half-width R must be positive".into(),
        ));
    }
    let nodes = grid.nodes().to_vec();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    Ok(SymmetricOperator::from_fn(grid.len(), |i, j| {
        let k = if i == j {
            r / PI
        } else {
            let u = nodes[i] - nodes[j];
            (r * u).sin() / (PI * u)
        };
        sqrt_w[i] * k * sqrt_w[j]
    }))
}

/// (λ, 1-λ, weighted eigenvector) for the top concentration eigenpair,
/// switching to the I-A complement for large R to keep 1-λ accurate.
fn top_concentration_pair(r: f64, grid: &Grid, tol: f64) -> Result<(f64, f64, Vec<f64>)> {
    grid.check_frequency(r)?;
    let a = concentration_operator(r, grid)?;
    if r > COMPLEMENT_ROUTE_THRESHOLD {
        let b = a.complement_from_identity();
        let mut pairs = eigh_bottom(&b, 1, tol)?;
        let (mu, v) = pairs.remove(0);
        Ok((1.0 - mu, mu, v))
    } else {
        let mut pairs = eigh_top(&a, 1, tol)?;
        let (lambda, v) = pairs.remove(0);
        Ok((lambda, 1.0 - lambda, v))
    }
}

/// Applies the Sturm-Liouville operator -d/dx (1-x²) d/dx + R²x² in Legendre
/// coefficient space, where the derivative term is diagonal: k(k+1).
fn sturm_liouville_apply(coeffs: &[Complex64], r: f64) -> Vec<Complex64> {
    let x1 = legendre::multiply_by_x(coeffs);
    let x2 = legendre::multiply_by_x(&x1);
    let mut out = vec![Complex64::new(0.0, 0.0); x2.len()];
    for (k, c) in coeffs.iter().enumerate() {
        out[k] += c * (k * (k + 1)) as f64;
    }
    for (k, c) in x2.iter().enumerate() {
        out[k] += c * (r * r);
    }
    out
}

/// Solves the concentration eigenproblem at half-width R on `grid`.
///
/// The eigenvector is mapped back through the √w unweighting, normalized,
/// and sign-fixed so that ψ is positive at the node nearest 0; ξ(R) and the
/// differential-equation residual are evaluated from the Legendre series.
pub fn solve_prolate(r: f64, grid: &Arc<Grid>, tol: f64) -> Result<ProlateSolution> {
    let (lambda, deficit, v) = top_concentration_pair(r, grid, tol.max(1e-12))?;
    let mut raw: Vec<Complex64> = v
        .iter()
        .zip(grid.weights())
        .map(|(vi, w)| Complex64::new(vi / w.sqrt(), 0.0))
        .collect();
    // Phase fixing: real positive at the node nearest 0.
    let mid = grid
        .nodes()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if raw[mid].re < 0.0 {
        for x in &mut raw {
            *x = -*x;
        }
    }
    let psi = WaveFunction::normalize(raw, grid.clone(), prolate_label(r))?;

    let coeffs = psi.coeffs().to_vec();
    let applied = sturm_liouville_apply(&coeffs, r);
    // Rayleigh quotient in coefficient space via Legendre orthogonality.
    let mut xi = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        xi += (c.conj() * applied[k]).re * 2.0 / (2 * k + 1) as f64;
    }

    // Residual on the inner 90% of nodes; the operator degenerates at the
    // endpoints.
    let n = grid.len();
    let lo = (0.05 * n as f64).ceil() as usize;
    let hi = (0.95 * n as f64).floor() as usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in lo..hi {
        let x = grid.nodes()[i];
        let w = grid.weights()[i];
        let lpsi = legendre::eval_series(&applied, x);
        let xpsi = xi * psi.values()[i];
        num += w * (lpsi - xpsi).norm_sqr();
        den += w * xpsi.norm_sqr();
    }
    let ode_residual = (num / den).sqrt();
    if ode_residual > 1e-3 {
        return Err(Error::NumericalConsistency(format!(
            "prolate solution rejected: ODE residual {ode_residual:.3e} at R = {r}"
        )));
    }
    Ok(ProlateSolution {
        band_halfwidth: r,
        lambda,
        one_minus_lambda: deficit,
        xi,
        psi,
        ode_residual,
        grid_size: n,
    })
}

fn lambda_cache() -> &'static Mutex<HashMap<u64, (f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, (f64, f64)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn lambda_pair_of_r(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "band half-width R must be positive".into(),
        ));
    }
    let key = r.to_bits();
    if let Some(hit) = lambda_cache().lock().unwrap().get(&key) {
        return Ok(*hit);
    }
    let grid = default_grid();
    let (lambda, deficit, _) = top_concentration_pair(r, &grid, 1e-10)?;
    lambda_cache().lock().unwrap().insert(key, (lambda, deficit));
    Ok((lambda, deficit))
}

/// Top concentration eigenvalue λ(R) on the default grid, memoized behind a
/// mutex so concurrent lookups are safe.
pub fn lambda_of_r(r: f64) -> Result<f64> {
    lambda_pair_of_r(r).map(|(l, _)| l)
}

/// 1 - λ(R) on the default grid, at full relative accuracy (I-A route for
/// large R). This is the minimum achievable tail probability outside [-R, R].
pub fn lambda_deficit_of_r(r: f64) -> Result<f64> {
    lambda_pair_of_r(r).map(|(_, d)| d)
}

/// Large-R asymptotic form λ(R) ≈ 1 - 4√(πR) e^{-2R} (1 - 3/(32R)).
pub fn lambda_asymptotic(r: f64) -> f64 {
    1.0 - lambda_asymptotic_deficit(r)
}

/// 4√(πR) e^{-2R} (1 - 3/(32R)), the asymptotic form of 1 - λ(R).
pub fn lambda_asymptotic_deficit(r: f64) -> f64 {
    4.0 * (PI * r).sqrt() * (-2.0 * r).exp() * (1.0 - 3.0 / (32.0 * r))
}

/// Least-squares fit of -log(1-λ(R)) against R.
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Fits the exponential decay rate of the minimum tail probability 1-λ(R)
/// over the given half-widths. Points with 1-λ below the 1e-12 precision
/// floor are excluded.
pub fn min_tail_exponential_rate(r_values: &[f64]) -> Result<RateFit> {
    if r_values.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 half-widths, got {}",
            r_values.len()
        )));
    }
    for pair in r_values.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument(
                "half-widths must be strictly increasing".into(),
            ));
        }
    }
    if r_values[0] < 3.0 || r_values[r_values.len() - 1] > 12.0 {
        return Err(Error::InvalidArgument(
            "half-widths must lie in [3, 12]".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for &r in r_values {
        let deficit = lambda_deficit_of_r(r)?;
        if deficit < 1e-12 {
            excluded += 1;
            continue;
        }
        xs.push(r);
        ys.push(-deficit.ln());
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} usable points above the precision floor",
            xs.len()
        )));
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        used: xs.len(),
        excluded,
    })
}

/// Eigenvalues of the finite-difference second-derivative operator on
/// [-1, 1] with zero boundary values, by Sturm-sequence bisection on the
/// symmetric tridiagonal matrix. The m-th value converges to (πm/2)².
pub fn dirichlet_fd_eigenvalues(m_max: usize, n_interior: usize) -> Vec<f64> {
    let h = 2.0 / (n_interior + 1) as f64;
    let diag = 2.0 / (h * h);
    let off = -1.0 / (h * h);
    // Number of eigenvalues strictly below x, by the Sturm sequence of T - xI.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = diag - x;
        if d < 0.0 {
            count += 1;
        }
        for _ in 1..n_interior {
            if d == 0.0 {
                d = 1e-300;
            }
            d = (diag - x) - off * off / d;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    (1..=m_max)
        .map(|m| {
            let mut lo = 0.0;
            let mut hi = 4.0 / (h * h);
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) >= m {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Minimum limiting-distribution variance over all wave functions, with its
/// minimizer. The closed form π²/4 and the discretized second-derivative
/// route must agree to 1e-6 relative.
pub fn dirichlet_minimum(grid: &Arc<Grid>) -> Result<(f64, WaveFunction)> {
    let closed = PI * PI / 4.0;
    let fd = dirichlet_fd_eigenvalues(1, 6000)[0];
    let rel = (fd - closed).abs() / closed;
    if rel > 1e-6 {
        return Err(Error::NumericalConsistency(format!(
            "Dirichlet minimum routes disagree: closed {closed} vs discretized {fd}"
        )));
    }
    let argmin = WaveFunction::builtin(crate::wavefn::Builtin::Dirichlet(1), grid)?;
    Ok((fd, argmin))
}

/// λ(R) evaluated on an explicit grid (no memoization); used by the CLI when
/// a non-default grid is requested.
pub fn lambda_on_grid(r: f64, grid: &Arc<Grid>) -> Result<f64> {
    top_concentration_pair(r, grid, 1e-10).map(|(l, _, _)| l)
}

/// 1-λ(R) on an explicit grid.
pub fn lambda_deficit_on_grid(r: f64, grid: &Arc<Grid>) -> Result<f64> {
    top_concentration_pair(r, grid, 1e-10).map(|(_, d, _)| d)
}
