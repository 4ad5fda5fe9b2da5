//! Wave functions f ∈ L²([-1,1]) and their limiting distributions |F(f)|².
//!
//! Every constructor normalizes, so ∫|f|² = 1 is an invariant. A Legendre
//! series of the sampled values is kept alongside the grid samples; it powers
//! off-grid evaluation, endpoint checks, and spectral differentiation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{legendre, Grid, QuadratureRule};
use crate::{spectral, tails};

/// Relative endpoint threshold below which a wave function counts as
/// satisfying the Dirichlet boundary condition. Grid functions never hit an
/// exact zero; 1e-6 separates true boundary zeros from O(1) endpoint values.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Windows that contain [-W, W] with W at or beyond this threshold are
/// treated as the whole line, i.e. total probability 1.
pub const EFFECTIVELY_INFINITE_WINDOW: f64 = 1e5;

/// Built-in wave-function families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// f = √(1/2), the uniform-coefficient input state.
    Constant,
    /// sin(πm(x+1)/2), the m-th eigenfunction of the boundary-zero
    /// second-derivative problem.
    Dirichlet(u32),
    /// Normalized g₁g₂ bump: smooth, compactly supported, rapidly
    /// decreasing transform.
    BumpG3,
    /// Top eigenfunction of the band concentration operator at half-width R.
    Prolate(f64),
}

impl Builtin {
    pub fn label(&self) -> String {
        match self {
            Builtin::Constant => "constant".into(),
            Builtin::Dirichlet(m) => format!("dirichlet_{m}"),
            Builtin::BumpG3 => "bump_g3".into(),
            Builtin::Prolate(r) => prolate_label(*r),
        }
    }
}

pub(crate) fn prolate_label(r: f64) -> String {
    if r.fract() == 0.0 && r.abs() < 1e6 {
        format!("prolate_{}", r as i64)
    } else {
        format!("prolate_{r}")
    }
}

/// Grid-sampled wave function with unit L² norm.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    label: String,
    coeffs: Vec<Complex64>,
}

impl WaveFunction {
    /// Scales `raw_values` to unit L² norm.
    pub fn normalize(
        raw_values: Vec<Complex64>,
        grid: Arc<Grid>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if raw_values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                raw_values.len()
            )));
        }
        let norm_sq: f64 = grid
            .weights()
            .iter()
            .zip(&raw_values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum();
        if norm_sq <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateInput(
                "cannot normalize an all-zero wave function".into(),
            ));
        }
        let scale = norm_sq.sqrt().recip();
        let values: Vec<Complex64> = raw_values.into_iter().map(|v| v * scale).collect();
        let mut coeffs = legendre::values_to_coeffs(&grid, &values, grid.len());
        legendre::trim(&mut coeffs, 1e-14);
        Ok(WaveFunction {
            grid,
            values,
            label: label.into(),
            coeffs,
        })
    }

    /// Constructs one of the named families on the given grid.
    pub fn builtin(kind: Builtin, grid: &Arc<Grid>) -> Result<Self> {
        match kind {
            Builtin::Constant => {
                let vals = vec![Complex64::new(1.0, 0.0); grid.len()];
                Self::normalize(vals, grid.clone(), kind.label())
            }
            Builtin::Dirichlet(m) => {
                if m < 1 {
                    return Err(Error::InvalidArgument(
                        "dirichlet order m must be >= 1".into(),
                    ));
                }
                let vals = grid
                    .nodes()
                    .iter()
                    .map(|&x| Complex64::new((PI * m as f64 * (x + 1.0) / 2.0).sin(), 0.0))
                    .collect();
                Self::normalize(vals, grid.clone(), kind.label())
            }
            Builtin::BumpG3 => {
                let vals: Vec<Complex64> = grid
                    .nodes()
                    .iter()
                    .map(|&x| Complex64::new(tails::g3_unnormalized(x), 0.0))
                    .collect();
                Self::normalize(vals, grid.clone(), kind.label())
            }
            Builtin::Prolate(r) => {
                if !(r > 0.0) {
                    return Err(Error::InvalidArgument(
                        "prolate band half-width R must be positive".into(),
                    ));
                }
                Ok(spectral::solve_prolate(r, grid, 1e-10)?.into_psi())
            }
        }
    }

    /// e^{icx}·f, which shifts the limiting distribution by -c.
    pub fn modulate(&self, c: f64) -> Result<Self> {
        self.grid.check_frequency(c)?;
        let values: Vec<Complex64> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, v)| {
                let (s, co) = (c * x).sin_cos();
                v * Complex64::new(co, s)
            })
            .collect();
        let mut coeffs = legendre::values_to_coeffs(&self.grid, &values, self.grid.len());
        legendre::trim(&mut coeffs, 1e-14);
        Ok(WaveFunction {
            grid: self.grid.clone(),
            values,
            label: format!("modulated_{c}_{}", self.label),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// ∫|f|² by quadrature (1 up to roundoff).
    pub fn norm_sq(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum()
    }

    /// Off-grid evaluation through the Legendre series.
    pub fn eval(&self, x: f64) -> Complex64 {
        legendre::eval_series(&self.coeffs, x)
    }

    /// True when |f(±1)| ≤ BOUNDARY_TOL · max|f|.
    pub fn boundary_vanishes(&self) -> bool {
        let max = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max);
        let endpoint = self.eval(-1.0).norm().max(self.eval(1.0).norm());
        endpoint <= BOUNDARY_TOL * max
    }

    pub fn limiting_distribution(&self) -> LimitingDistribution {
        LimitingDistribution {
            source: self.clone(),
        }
    }

    /// P^f([r1, r2]) through the band-projection quadratic form
    /// ∬ conj(f(x)) K(x,x') f(x') dx dx' with
    /// K(x,x') = e^{ic(x'-x)} sin(ρ(x-x'))/(π(x-x')), ρ=(r2-r1)/2, c=(r1+r2)/2.
    pub fn window_probability(&self, r1: f64, r2: f64) -> Result<f64> {
        if !(r1 < r2) {
            return Err(Error::InvalidArgument(format!(
                "window requires r1 < r2, got [{r1}, {r2}]"
            )));
        }
        if r1 <= -EFFECTIVELY_INFINITE_WINDOW && r2 >= EFFECTIVELY_INFINITE_WINDOW {
            // Whole-line proxy: total probability.
            return Ok(1.0);
        }
        self.grid.check_frequency(r1.abs().max(r2.abs()))?;
        let rho = 0.5 * (r2 - r1);
        let c = 0.5 * (r1 + r2);
        // K factorizes through h = e^{icx} f, leaving the pure sinc kernel.
        let h: Vec<Complex64> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, v)| {
                let (s, co) = (c * x).sin_cos();
                v * Complex64::new(co, s)
            })
            .collect();
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let row = |i: usize| -> Complex64 {
            let xi = nodes[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nodes.len() {
                let u = xi - nodes[j];
                let k = if u == 0.0 {
                    rho / PI
                } else {
                    (rho * u).sin() / (PI * u)
                };
                acc += k * weights[j] * h[j];
            }
            weights[i] * h[i].conj() * acc
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<Complex64> = (0..nodes.len()).into_par_iter().map(row).collect();
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Complex64> = (0..nodes.len()).map(row).collect();
        let total: Complex64 = rows.into_iter().sum();
        if total.im.abs() > 1e-9 {
            return Err(Error::NumericalConsistency(format!(
                "window probability has imaginary part {:.3e}",
                total.im
            )));
        }
        let p = total.re;
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            return Err(Error::NumericalConsistency(format!(
                "window probability {p} outside [0, 1]"
            )));
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Variance of the limiting distribution, ∫|f'|² dx when f vanishes at
    /// both endpoints and +∞ otherwise.
    pub fn variance(&self) -> f64 {
        if !self.boundary_vanishes() {
            return f64::INFINITY;
        }
        let d = legendre::derivative_coeffs(&self.coeffs);
        legendre::norm_sq(&d)
    }

    /// ∫x²|f|² − (∫x|f|²)², the position variance; always in (0, 1].
    pub fn q_variance(&self) -> f64 {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for ((w, &x), v) in self
            .grid
            .weights()
            .iter()
            .zip(self.grid.nodes())
            .zip(&self.values)
        {
            let p = w * v.norm_sqr();
            m1 += p * x;
            m2 += p * x * x;
        }
        m2 - m1 * m1
    }
}

/// Evaluable density y ↦ |F(f)(y)|² of the limiting distribution P^f.
#[derive(Clone, Debug)]
pub struct LimitingDistribution {
    source: WaveFunction,
}

impl LimitingDistribution {
    pub fn source(&self) -> &WaveFunction {
        &self.source
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        let ft = self
            .source
            .grid
            .oscillatory_ft(&self.source.values, y)?;
        Ok(ft.norm_sqr())
    }

    /// Density at many points; parallel when the `parallel` feature is on.
    pub fn densities(&self, ys: &[f64]) -> Result<Vec<f64>> {
        #[cfg(feature = "parallel")]
        {
            ys.par_iter().map(|&y| self.density(y)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.densities_seq(ys)
        }
    }

    /// Sequential reference path for the same computation as [`Self::densities`].
    pub fn densities_seq(&self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.iter().map(|&y| self.density(y)).collect()
    }

    pub fn probability(&self, r1: f64, r2: f64) -> Result<f64> {
        self.source.window_probability(r1, r2)
    }

    /// ∫_{|y|≤y_cap} y²·density(y) dy by panel quadrature.
    pub fn second_moment_truncated(&self, y_cap: f64) -> Result<f64> {
        self.source.grid.check_frequency(y_cap)?;
        let n_panels = (2.0 * y_cap).ceil() as usize;
        let edges: Vec<(f64, f64)> = (0..n_panels)
            .map(|i| {
                let a = -y_cap + 2.0 * y_cap * i as f64 / n_panels as f64;
                let b = -y_cap + 2.0 * y_cap * (i + 1) as f64 / n_panels as f64;
                (a, b)
            })
            .collect();
        let panel = |&(a, b): &(f64, f64)| -> Result<f64> {
            let gl = panel_rule();
            let mut acc = 0.0;
            for (t, w) in gl {
                let y = 0.5 * (a + b) + 0.5 * (b - a) * t;
                acc += w * y * y * self.density(y)?;
            }
            Ok(acc * 0.5 * (b - a))
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<f64> = edges.par_iter().map(panel).collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<f64> = edges.iter().map(panel).collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    }

    /// Truncated second moment plus an O(y⁻⁴)-model estimate of the remainder
    /// beyond the cap: the mean of density·y⁴ over [0.7·y_cap, y_cap] divided
    /// by the half-line factor y_cap/2.
    pub fn second_moment_with_tail_estimate(&self, y_cap: f64) -> Result<f64> {
        let truncated = self.second_moment_truncated(y_cap)?;
        let lo = 0.7 * y_cap;
        let m = 512;
        let ys: Vec<f64> = (0..m)
            .map(|i| lo + (y_cap - lo) * (i as f64 + 0.5) / m as f64)
            .collect();
        let dens = self.densities(&ys)?;
        let k_hat = ys
            .iter()
            .zip(&dens)
            .map(|(y, d)| d * y.powi(4))
            .sum::<f64>()
            / m as f64;
        Ok(truncated + 2.0 * k_hat / y_cap)
    }

    /// Cumulative-distribution table on [-y_abs, y_abs] with the stated
    /// number of sample points per unit length. Mass outside the table is
    /// split evenly between the two tails.
    pub fn cdf_table(&self, y_abs: f64, points_per_unit: usize) -> Result<CdfTable> {
        self.source.grid.check_frequency(y_abs)?;
        let n = ((2.0 * y_abs * points_per_unit as f64).ceil() as usize).max(8) + 1;
        let step = 2.0 * y_abs / (n - 1) as f64;
        let ys: Vec<f64> = (0..n).map(|i| -y_abs + step * i as f64).collect();
        let dens = self.densities(&ys)?;
        let mut cum = vec![0.0; n];
        for i in 1..n {
            cum[i] = cum[i - 1] + 0.5 * (dens[i - 1] + dens[i]) * step;
        }
        let total = cum[n - 1];
        let offset = ((1.0 - total) * 0.5).max(0.0);
        Ok(CdfTable {
            y_min: -y_abs,
            step,
            cum,
            offset,
        })
    }
}

fn panel_rule() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let g = Grid::gauss_legendre(12).expect("12-point rule");
        g.nodes().iter().copied().zip(g.weights().iter().copied()).collect()
    })
}

/// Piecewise-linear CDF interpolant of a limiting distribution.
#[derive(Clone, Debug)]
pub struct CdfTable {
    y_min: f64,
    step: f64,
    cum: Vec<f64>,
    offset: f64,
}

impl CdfTable {
    pub fn eval(&self, z: f64) -> f64 {
        let t = (z - self.y_min) / self.step;
        let v = if t <= 0.0 {
            0.0
        } else if t >= (self.cum.len() - 1) as f64 {
            self.cum[self.cum.len() - 1]
        } else {
            let i = t.floor() as usize;
            let frac = t - i as f64;
            self.cum[i] * (1.0 - frac) + self.cum[i + 1] * frac
        };
        (self.offset + v).clamp(0.0, 1.0)
    }
}

/// Flat serialization form: {label, rule, nodes[], weights[], re[], im[]}.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct WaveFunctionData {
    pub label: String,
    pub rule: QuadratureRule,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&WaveFunction> for WaveFunctionData {
    fn from(f: &WaveFunction) -> Self {
        WaveFunctionData {
            label: f.label.clone(),
            rule: f.grid.rule(),
            nodes: f.grid.nodes().to_vec(),
            weights: f.grid.weights().to_vec(),
            re: f.values.iter().map(|v| v.re).collect(),
            im: f.values.iter().map(|v| v.im).collect(),
        }
    }
}

impl TryFrom<WaveFunctionData> for WaveFunction {
    type Error = Error;
    fn try_from(d: WaveFunctionData) -> Result<Self> {
        let grid = Arc::new(Grid::from_parts(d.rule, d.nodes, d.weights)?);
        if d.re.len() != grid.len() || d.im.len() != grid.len() {
            return Err(Error::InvalidArgument(
                "re/im length does not match the grid".into(),
            ));
        }
        let values: Vec<Complex64> = d
            .re
            .iter()
            .zip(&d.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let norm_sq: f64 = grid
            .weights()
            .iter()
            .zip(&values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalConsistency(format!(
                "deserialized wave function has norm² = {norm_sq}, expected 1"
            )));
        }
        let mut coeffs = legendre::values_to_coeffs(&grid, &values, grid.len());
        legendre::trim(&mut coeffs, 1e-14);
        Ok(WaveFunction {
            grid,
            values,
            label: d.label,
            coeffs,
        })
    }
}

impl Serialize for WaveFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WaveFunctionData::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WaveFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = WaveFunctionData::deserialize(d)?;
        WaveFunction::try_from(data).map_err(serde::de::Error::custom)
    }
}
