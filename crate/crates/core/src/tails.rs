//! Tail-probability analysis: the g-family of rapidly decreasing functions,
//! tail curves with precision-floor flagging, decay-rate fits, and the
//! numeric reproduction of the convolution tail bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{linear_fit, Grid, FT_PREFACTOR};
use crate::wavefn::WaveFunction;

/// Tail probabilities below this are dominated by quadrature roundoff and
/// are flagged rather than reported as exact.
pub const TAIL_PRECISION_FLOOR: f64 = 1e-13;

/// g₀(x) = 2·exp(-1/x)/√x for x > 0, and 0 otherwise.
pub fn g0(x: f64) -> f64 {
    if x > 0.0 {
        2.0 * (-1.0 / x).exp() / x.sqrt()
    } else {
        0.0
    }
}

/// g₁(x) = g₀(x + 1): smooth ramp-up from the left endpoint.
pub fn g1(x: f64) -> f64 {
    g0(x + 1.0)
}

/// g₂(x) = g₀(1 - x): mirror of g₁ about 0.
pub fn g2(x: f64) -> f64 {
    g0(1.0 - x)
}

/// g₁·g₂ before normalization; supported on [-1, 1].
pub fn g3_unnormalized(x: f64) -> f64 {
    g1(x) * g2(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GKind {
    G0,
    G1,
    G2,
    G3Unnormalized,
}

pub fn g_family(which: GKind, x: f64) -> f64 {
    match which {
        GKind::G0 => g0(x),
        GKind::G1 => g1(x),
        GKind::G2 => g2(x),
        GKind::G3Unnormalized => g3_unnormalized(x),
    }
}

/// The printed closed form of F(g₀):
/// (1/√2)·exp(-√(2|y|))/√|y| · exp(sgn(y)·i·(√(2|y|) + π/4)).
pub fn g0_ft_closed(y: f64) -> Result<Complex64> {
    if y == 0.0 {
        return Err(Error::SingularPoint(
            "closed form of F(g0) is singular at y = 0".into(),
        ));
    }
    let a = (2.0 * y.abs()).sqrt();
    let modulus = (-a).exp() / (2.0 * y.abs()).sqrt();
    let phase = y.signum() * (a + PI / 4.0);
    Ok(Complex64::from_polar(modulus, phase))
}

/// P^f([-R, R]^c) = 1 - window probability; negatives within the numerical
/// fuzz report as 0.
pub fn tail_probability(f: &WaveFunction, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("tail radius must be positive".into()));
    }
    let w = f.window_probability(-r, r)?;
    Ok((1.0 - w).max(0.0))
}

/// Tail probabilities of one wave function along an increasing y-ladder.
#[derive(Clone, Debug, Serialize)]
pub struct TailCurve {
    f_label: String,
    y_values: Vec<f64>,
    tail_probs: Vec<f64>,
    log_tail: Vec<f64>,
    flagged: Vec<bool>,
}

impl TailCurve {
    pub fn compute(f: &WaveFunction, ys: &[f64]) -> Result<Self> {
        Self::validate_ladder(ys)?;
        #[cfg(feature = "parallel")]
        let tails: Vec<f64> = ys
            .par_iter()
            .map(|&y| tail_probability(f, y))
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let tails: Vec<f64> = ys
            .iter()
            .map(|&y| tail_probability(f, y))
            .collect::<Result<_>>()?;
        Ok(Self::assemble(f.label().to_string(), ys.to_vec(), tails))
    }

    /// Sequential reference path for the same computation as [`Self::compute`].
    pub fn compute_seq(f: &WaveFunction, ys: &[f64]) -> Result<Self> {
        Self::validate_ladder(ys)?;
        let tails: Vec<f64> = ys
            .iter()
            .map(|&y| tail_probability(f, y))
            .collect::<Result<_>>()?;
        Ok(Self::assemble(f.label().to_string(), ys.to_vec(), tails))
    }

    /// Builds a curve from already-computed tail values (used for the
    /// minimum-tail curve 1-λ(y)).
    pub fn from_values(label: impl Into<String>, ys: Vec<f64>, tails: Vec<f64>) -> Result<Self> {
        Self::validate_ladder(&ys)?;
        if ys.len() != tails.len() {
            return Err(Error::InvalidArgument("ladder/value length mismatch".into()));
        }
        Ok(Self::assemble(label.into(), ys, tails))
    }

    fn validate_ladder(ys: &[f64]) -> Result<()> {
        if ys.is_empty() {
            return Err(Error::InvalidArgument("empty y ladder".into()));
        }
        for pair in ys.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidArgument(
                    "y ladder must be strictly increasing".into(),
                ));
            }
        }
        if ys[0] <= 0.0 {
            return Err(Error::InvalidArgument("y ladder must be positive".into()));
        }
        Ok(())
    }

    fn assemble(f_label: String, y_values: Vec<f64>, tail_probs: Vec<f64>) -> Self {
        let flagged: Vec<bool> = tail_probs.iter().map(|&t| t < TAIL_PRECISION_FLOOR).collect();
        let log_tail: Vec<f64> = tail_probs.iter().map(|&t| t.max(1e-300).ln()).collect();
        TailCurve {
            f_label,
            y_values,
            tail_probs,
            log_tail,
            flagged,
        }
    }

    pub fn f_label(&self) -> &str {
        &self.f_label
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y_values
    }

    pub fn tail_probs(&self) -> &[f64] {
        &self.tail_probs
    }

    pub fn log_tail(&self) -> &[f64] {
        &self.log_tail
    }

    pub fn flagged(&self) -> &[bool] {
        &self.flagged
    }

    pub fn len(&self) -> usize {
        self.y_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_values.is_empty()
    }

    /// CSV export with the fixed schema (y, tail, log_tail, flagged).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,tail,log_tail,flagged\n");
        for i in 0..self.len() {
            use std::fmt::Write;
            writeln!(
                s,
                "{},{},{},{}",
                self.y_values[i], self.tail_probs[i], self.log_tail[i], self.flagged[i]
            )
            .unwrap();
        }
        s
    }
}

/// Abscissa for the decay-rate fit: -log(tail) against R or √R.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Abscissa {
    R,
    SqrtR,
}

/// Least-squares decay rate of a tail curve; returns (slope, r²). Flagged
/// points are excluded, and at least 4 unflagged points are required.
pub fn fit_tail_rate(curve: &TailCurve, abscissa: Abscissa) -> Result<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..curve.len() {
        if curve.flagged[i] || curve.tail_probs[i] <= 0.0 {
            continue;
        }
        let x = match abscissa {
            Abscissa::R => curve.y_values[i],
            Abscissa::SqrtR => curve.y_values[i].sqrt(),
        };
        xs.push(x);
        ys.push(-curve.tail_probs[i].ln());
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "tail-rate fit needs at least 4 unflagged points, got {}",
            xs.len()
        )));
    }
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok((slope, r2))
}

/// Oscillatory Fourier transform over an arbitrary interval [a, b].
struct IntervalFt {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
    max_freq: f64,
}

impl IntervalFt {
    fn new(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let gl = Grid::gauss_legendre(n).expect("interval rule");
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let nodes: Vec<f64> = gl.nodes().iter().map(|&t| mid + half * t).collect();
        let weighted: Vec<f64> = gl
            .weights()
            .iter()
            .zip(&nodes)
            .map(|(w, &x)| w * half * f(x))
            .collect();
        // Eight nodes per oscillation period across a length (b-a) interval.
        let max_freq = PI * n as f64 / (4.0 * (b - a).max(f64::MIN_POSITIVE));
        IntervalFt {
            nodes,
            weighted,
            max_freq,
        }
    }

    fn ft(&self, y: f64) -> Result<Complex64> {
        if y.abs() > self.max_freq {
            return Err(Error::ResolutionExceeded {
                requested: y.abs(),
                limit: self.max_freq,
                nodes: self.nodes.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, wv) in self.nodes.iter().zip(&self.weighted) {
            let (s, c) = (x * y).sin_cos();
            acc += *wv * Complex64::new(c, s);
        }
        Ok(FT_PREFACTOR * acc)
    }
}

/// C∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// One tested point of the convolution bound reproduction.
#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionCheckRow {
    pub y: f64,
    /// |∫ F(g₁)(y') F(g₂)(y - y') dy'| by direct quadrature.
    pub convolution_magnitude: f64,
    /// |√(2π)·F(g₁·g₂)(y)|, the convolution-theorem route.
    pub direct_magnitude: f64,
    pub relative_mismatch: f64,
    /// Segment-maxima pieces plus the two half-line remainder integrals.
    pub assembled_bound: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub rows: Vec<ConvolutionCheckRow>,
    pub segments: usize,
    pub truncation: f64,
    /// C = ‖g₁g₂‖₂, the normalizer promoting g₁g₂ to g₃.
    pub normalizer: f64,
    /// -log((√(2π)/C)·|convolution|)²/√y at the largest tested y.
    pub final_exponent: f64,
    /// 2√2·√(1 - 1/N)·(1 - fit tolerance).
    pub exponent_threshold: f64,
    /// Same exponent evaluated on the assembled bound instead.
    pub bound_exponent: f64,
}

const EXPONENT_FIT_TOLERANCE: f64 = 0.15;

/// Reproduces the convolution tail-bound decomposition numerically.
///
/// g₁ and g₂ are not square integrable, so they enter through smoothly
/// truncated copies u = g₁·s and v = g₂·s̃ that equal g₁, g₂ on [-1, 1] and
/// vanish beyond ±`truncation`; the product u·v = g₁g₂ is exact, which makes
/// the convolution-theorem cross-check an identity up to quadrature error.
/// For each y the N segment-maxima pieces and the two half-line remainder
/// integrals are assembled into a pointwise upper bound.
pub fn convolution_bound_check(
    y_values: &[f64],
    truncation: f64,
    segments: usize,
) -> Result<ConvolutionReport> {
    if segments < 2 {
        return Err(Error::InvalidArgument("need at least 2 segments".into()));
    }
    if truncation < 1.5 {
        return Err(Error::InvalidArgument(
            "truncation must leave room for the smooth cutoff (T >= 1.5)".into(),
        ));
    }
    if y_values.is_empty() {
        return Err(Error::InvalidArgument("no y values to test".into()));
    }
    let mut sorted = y_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] <= 0.0 {
        return Err(Error::InvalidArgument("y values must be positive".into()));
    }
    let y_max = sorted[sorted.len() - 1];
    let margin = 240.0;
    let needed_freq = y_max + margin;
    let t = truncation;

    // Node count for the eight-nodes-per-period rule on the longer interval.
    let len = t + 1.0;
    let n_interval = (((needed_freq * 4.0 * len / PI).ceil() as usize) + 64).next_multiple_of(64);
    if n_interval > 16384 {
        return Err(Error::ResolutionExceeded {
            requested: needed_freq,
            limit: PI * 16384.0 / (4.0 * len),
            nodes: 16384,
        });
    }
    let fu = IntervalFt::new(-1.0, t, n_interval, |x| {
        g1(x) * smooth_step((t - x) / (t - 1.0))
    });
    let fv = IntervalFt::new(-t, 1.0, n_interval, |x| {
        g2(x) * smooth_step((x + t) / (t - 1.0))
    });

    // Direct route on [-1, 1]; the product is unaffected by the cutoffs.
    let grid = Grid::gauss_legendre(2048)?;
    let product: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&x| Complex64::new(g3_unnormalized(x), 0.0))
        .collect();
    let normalizer = {
        let norm_sq: f64 = grid
            .weights()
            .iter()
            .zip(&product)
            .map(|(w, p)| w * p.norm_sqr())
            .sum();
        norm_sq.sqrt()
    };

    let gl24 = Grid::gauss_legendre(24)?;
    let conv_at = |y: f64| -> Result<Complex64> {
        let lo = -margin;
        let hi = y + margin;
        let n_panels = ((hi - lo) / 2.0).ceil() as usize;
        let panel = |p: usize| -> Result<Complex64> {
            let a = lo + (hi - lo) * p as f64 / n_panels as f64;
            let b = lo + (hi - lo) * (p + 1) as f64 / n_panels as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (tq, wq) in gl24.nodes().iter().zip(gl24.weights()) {
                let yp = 0.5 * (a + b) + 0.5 * (b - a) * tq;
                acc += *wq * fu.ft(yp)? * fv.ft(y - yp)?;
            }
            Ok(acc * (0.5 * (b - a)))
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<Complex64> = (0..n_panels)
            .into_par_iter()
            .map(panel)
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Complex64> = (0..n_panels).map(panel).collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    };

    // Positive-integrand remainder over [a, b] of |Fu(y')|·|Fv(y - y')|.
    let remainder = |a: f64, b: f64, y: f64| -> Result<f64> {
        let n_panels = ((b - a) / 1.0).ceil() as usize;
        let panel = |p: usize| -> Result<f64> {
            let pa = a + (b - a) * p as f64 / n_panels as f64;
            let pb = a + (b - a) * (p + 1) as f64 / n_panels as f64;
            let mut acc = 0.0;
            for (tq, wq) in gl24.nodes().iter().zip(gl24.weights()) {
                let yp = 0.5 * (pa + pb) + 0.5 * (pb - pa) * tq;
                acc += wq * fu.ft(yp)?.norm() * fv.ft(y - yp)?.norm();
            }
            Ok(acc * 0.5 * (pb - pa))
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<f64> = (0..n_panels)
            .into_par_iter()
            .map(panel)
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<f64> = (0..n_panels).map(panel).collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    };

    let mut rows = Vec::with_capacity(sorted.len());
    for &y in &sorted {
        let conv = conv_at(y)?.norm();
        let direct = ((2.0 * PI).sqrt() * grid.oscillatory_ft(&product, y)?).norm();
        let relative_mismatch = if direct.max(conv) > TAIL_PRECISION_FLOOR {
            (conv - direct).abs() / direct
        } else {
            0.0
        };
        // Segment-maxima pieces over [0, y].
        let mut pieces = 0.0;
        for k in 1..=segments {
            let a = y * (k - 1) as f64 / segments as f64;
            let b = y * k as f64 / segments as f64;
            let mut seg_max = 0.0_f64;
            let samples = 128;
            for s in 0..=samples {
                let yp = a + (b - a) * s as f64 / samples as f64;
                let v = fu.ft(yp)?.norm() * fv.ft(y - yp)?.norm();
                seg_max = seg_max.max(v);
            }
            pieces += seg_max * y / segments as f64;
        }
        let rem_left = remainder(-margin, 0.0, y)?;
        let rem_right = remainder(y, y + margin, y)?;
        let assembled_bound = pieces + rem_left + rem_right;
        let bound_holds = conv <= assembled_bound * (1.0 + 1e-9);
        if !bound_holds {
            return Err(Error::NumericalConsistency(format!(
                "convolution magnitude {conv:.6e} exceeds assembled bound \
                 {assembled_bound:.6e} at y = {y}"
            )));
        }
        rows.push(ConvolutionCheckRow {
            y,
            convolution_magnitude: conv,
            direct_magnitude: direct,
            relative_mismatch,
            assembled_bound,
            bound_holds,
        });
    }

    let scale = (2.0 * PI).sqrt() / normalizer;
    let last = rows.last().expect("nonempty rows");
    let z = scale * last.convolution_magnitude;
    let final_exponent = -(z * z).ln() / last.y.sqrt();
    let zb = scale * last.assembled_bound;
    let bound_exponent = -(zb * zb).ln() / last.y.sqrt();
    let exponent_threshold = 2.0
        * 2.0_f64.sqrt()
        * (1.0 - 1.0 / segments as f64).sqrt()
        * (1.0 - EXPONENT_FIT_TOLERANCE);
    if final_exponent < exponent_threshold {
        return Err(Error::NumericalConsistency(format!(
            "tail exponent {final_exponent:.4} below threshold {exponent_threshold:.4}"
        )));
    }
    Ok(ConvolutionReport {
        rows,
        segments,
        truncation,
        normalizer,
        final_exponent,
        exponent_threshold,
        bound_exponent,
    })
}
