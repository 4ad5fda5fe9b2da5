//! The finite-n estimation protocol: input-state coefficient vectors, the
//! covariant-measurement outcome distribution, seeded sampling, convergence
//! of rescaled outcomes to the limiting distribution, required-applications
//! accounting, multiplicity collapse, and SLD Fisher information.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{derive_seed, find_root};
use crate::wavefn::{WaveFunction, EFFECTIVELY_INFINITE_WINDOW};

/// Draws are generated in fixed-size batches with independently derived
/// seeds, so parallel and sequential sampling produce identical output.
const SAMPLE_BATCH: usize = 4096;

/// Coefficient vector (a₀, …, a_n) of an n-application input state,
/// normalized so Σ|a_k|² = 1.
#[derive(Clone, Debug)]
pub struct InputState {
    coeffs: Vec<Complex64>,
}

impl InputState {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument(
                "input state needs n >= 1, i.e. at least two coefficients".into(),
            ));
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateInput("all-zero coefficient vector".into()));
        }
        let scale = norm_sq.sqrt().recip();
        Ok(InputState {
            coeffs: coeffs.into_iter().map(|c| c * scale).collect(),
        })
    }

    /// Number of applications n (one less than the coefficient count).
    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Discretizes a wave function: a_k = conj(f(x_k)) at x_k = (2k-n)/(n+1),
    /// renormalized exactly.
    pub fn from_wavefn(f: &WaveFunction, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let coeffs: Vec<Complex64> = (0..=n)
            .map(|k| {
                let x = (2.0 * k as f64 - n as f64) / (n as f64 + 1.0);
                f.eval(x).conj()
            })
            .collect();
        InputState::new(coeffs).map_err(|e| match e {
            Error::DegenerateInput(_) => {
                Error::DegenerateInput("wave function vanishes at every sample node".into())
            }
            other => other,
        })
    }

    /// Outcome density (1/2π)|Σ_k conj(a_k) e^{i(k-n/2)(θ̂-θ)}|²; depends on
    /// θ̂-θ mod 2π only.
    pub fn outcome_density(&self, theta: f64, theta_hat: f64) -> f64 {
        let delta = theta_hat - theta;
        let z = Complex64::new(delta.cos(), delta.sin());
        // Global phase e^{-i n δ/2} drops out of the modulus.
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c.conj();
        }
        acc.norm_sqr() / (2.0 * PI)
    }

    /// J_{0,n} = 4(Σk²|a_k|² − (Σk|a_k|²)²), the SLD Fisher information.
    pub fn sld_fisher(&self) -> f64 {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let p = c.norm_sqr();
            m1 += k as f64 * p;
            m2 += (k * k) as f64 * p;
        }
        4.0 * (m2 - m1 * m1)
    }

    /// J_{0,n}/(n+1)², the rescaling under which the Fisher information of
    /// discretized states converges to the position variance q_variance(f).
    pub fn rescaled_fisher(&self) -> f64 {
        let np1 = (self.n() + 1) as f64;
        self.sld_fisher() / (np1 * np1)
    }

    /// Draws `count` i.i.d. estimates from the outcome density by inverse-CDF
    /// sampling on a dense grid (64·(n+1) cells, linear interpolation).
    /// Deterministic in `seed` and identical across thread counts.
    pub fn sample_outcomes(
        &self,
        theta: f64,
        count: usize,
        seed: u64,
    ) -> Result<OutcomeSample> {
        let cdf = self.outcome_cdf(theta);
        let batches = batch_plan(count);
        #[cfg(feature = "parallel")]
        let chunks: Vec<Vec<f64>> = batches
            .par_iter()
            .map(|&(index, size)| draw_batch(&cdf, derive_seed(seed, index), size))
            .collect();
        #[cfg(not(feature = "parallel"))]
        let chunks: Vec<Vec<f64>> = batches
            .iter()
            .map(|&(index, size)| draw_batch(&cdf, derive_seed(seed, index), size))
            .collect();
        Ok(OutcomeSample {
            theta_true: wrap_two_pi(theta),
            estimates: chunks.concat(),
            n: self.n(),
            seed,
        })
    }

    /// Sequential reference path for the same draws as [`Self::sample_outcomes`].
    pub fn sample_outcomes_seq(
        &self,
        theta: f64,
        count: usize,
        seed: u64,
    ) -> Result<OutcomeSample> {
        let cdf = self.outcome_cdf(theta);
        let chunks: Vec<Vec<f64>> = batch_plan(count)
            .iter()
            .map(|&(index, size)| draw_batch(&cdf, derive_seed(seed, index), size))
            .collect();
        Ok(OutcomeSample {
            theta_true: wrap_two_pi(theta),
            estimates: chunks.concat(),
            n: self.n(),
            seed,
        })
    }

    fn outcome_cdf(&self, theta: f64) -> OutcomeCdf {
        let cells = 64 * (self.n() + 1);
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let step = 2.0 * PI / cells as f64;
        let mut prev = self.outcome_density(theta, theta);
        let mut acc = 0.0;
        for i in 1..=cells {
            let theta_hat = theta + step * i as f64;
            let d = self.outcome_density(theta, theta_hat);
            acc += 0.5 * (prev + d) * step;
            cum.push(acc);
            prev = d;
        }
        // The density is a trigonometric polynomial of degree n, so the
        // trapezoid total is exact up to roundoff; rescale to land on 1.
        let total = *cum.last().unwrap();
        for c in &mut cum {
            *c /= total;
        }
        OutcomeCdf {
            theta,
            step,
            cum,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct InputStateData {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for InputState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InputStateData {
            n: self.n(),
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for InputState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = InputStateData::deserialize(d)?;
        if data.re.len() != data.n + 1 || data.im.len() != data.n + 1 {
            return Err(serde::de::Error::custom("coefficient length mismatch"));
        }
        let coeffs = data
            .re
            .iter()
            .zip(&data.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        InputState::new(coeffs).map_err(serde::de::Error::custom)
    }
}

struct OutcomeCdf {
    theta: f64,
    step: f64,
    cum: Vec<f64>,
}

fn batch_plan(count: usize) -> Vec<(u64, usize)> {
    let mut plan = Vec::new();
    let mut remaining = count;
    let mut index = 0u64;
    while remaining > 0 {
        let size = remaining.min(SAMPLE_BATCH);
        plan.push((index, size));
        remaining -= size;
        index += 1;
    }
    plan
}

fn draw_batch(cdf: &OutcomeCdf, seed: u64, size: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let u: f64 = rng.gen();
            let idx = cdf.cum.partition_point(|&c| c <= u).min(cdf.cum.len() - 1);
            let lo = cdf.cum[idx - 1];
            let hi = cdf.cum[idx];
            let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
            let delta = cdf.step * ((idx - 1) as f64 + frac);
            wrap_two_pi(cdf.theta + delta)
        })
        .collect()
}

pub(crate) fn wrap_two_pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w == 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Representative of θ in (-π, π].
pub(crate) fn wrap_pm_pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Estimates drawn from one protocol run.
#[derive(Clone, Debug)]
pub struct OutcomeSample {
    theta_true: f64,
    estimates: Vec<f64>,
    n: usize,
    seed: u64,
}

impl OutcomeSample {
    pub fn theta_true(&self) -> f64 {
        self.theta_true
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// CSV export with the fixed schema (index, theta_hat).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,theta_hat\n");
        for (i, th) in self.estimates.iter().enumerate() {
            use std::fmt::Write;
            writeln!(s, "{i},{th}").unwrap();
        }
        s
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of the
/// rescaled outcomes z = n·(θ̂-θ)/2 (angle difference wrapped to (-π, π])
/// and the limiting distribution of `f`.
pub fn rescaled_ks_distance(sample: &OutcomeSample, f: &WaveFunction) -> Result<f64> {
    let n = sample.n as f64;
    let mut zs: Vec<f64> = sample
        .estimates
        .iter()
        .map(|&th| n * wrap_pm_pi(th - sample.theta_true) / 2.0)
        .collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // CDF table out to the grid bandwidth; the estimates can reach n·π/2 but
    // the limiting density carries negligible mass there.
    let y_cap = (n * PI / 2.0).min(f.grid().max_frequency() * 0.995);
    let table = f.limiting_distribution().cdf_table(y_cap, 50)?;
    let count = zs.len() as f64;
    let mut ks = 0.0_f64;
    for (i, &z) in zs.iter().enumerate() {
        let c = table.eval(z);
        let upper = (i as f64 + 1.0) / count - c;
        let lower = c - i as f64 / count;
        ks = ks.max(upper.max(lower));
    }
    Ok(ks)
}

/// Number of applications needed for error width `width` at error
/// probability `err_prob`: the smallest a with P^f([-a, a]) ≥ 1-ε, divided
/// by the width and rounded up to an integer count.
pub fn required_applications(f: &WaveFunction, width: f64, err_prob: f64) -> Result<u64> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    if !(0.0 < err_prob && err_prob < 1.0) {
        return Err(Error::InvalidArgument(
            "error probability must lie in (0, 1)".into(),
        ));
    }
    let a_max = (f.grid().max_frequency() * 0.999).min(EFFECTIVELY_INFINITE_WINDOW);
    let target = 1.0 - err_prob;
    let reach = f.window_probability(-a_max, a_max)?;
    if reach < target {
        return Err(Error::UnreachableAccuracy(format!(
            "window probability reaches only {reach:.12} at a = {a_max:.1}, \
             below 1-ε = {target:.12}"
        )));
    }
    let window = |a: f64| f.window_probability(-a, a);
    let a = find_root(window, target, (1e-9, a_max), 1e-12)?;
    // Guard the exact-boundary case against upward root-solve fuzz.
    let ratio: f64 = a / width;
    Ok((ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as u64)
}

/// Input with per-eigenvalue multiplicity blocks; block k holds C(n,k)
/// coefficients.
#[derive(Clone, Debug)]
pub struct MultiplicityState {
    n: usize,
    blocks: Vec<Vec<Complex64>>,
}

fn binomial(n: usize, k: usize) -> Result<usize> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::InvalidArgument("binomial overflow".into()))?
            / (i as u128 + 1);
    }
    usize::try_from(acc).map_err(|_| Error::InvalidArgument("binomial overflow".into()))
}

impl MultiplicityState {
    pub fn new(blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidArgument(
                "multiplicity state needs n >= 1".into(),
            ));
        }
        let n = blocks.len() - 1;
        let mut norm_sq = 0.0;
        for (k, block) in blocks.iter().enumerate() {
            let expected = binomial(n, k)?;
            if block.len() != expected {
                return Err(Error::InvalidArgument(format!(
                    "block {k} has {} entries, expected C({n},{k}) = {expected}",
                    block.len()
                )));
            }
            norm_sq += block.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "multiplicity state norm² = {norm_sq}, expected 1"
            )));
        }
        Ok(MultiplicityState { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }
}

/// Collapses multiplicity blocks to the single coefficient vector
/// a_k = √(Σ_j |a_{k,j}|²); outcome statistics under the reduced model are
/// unchanged.
pub fn collapse_multiplicity(ms: &MultiplicityState) -> Result<InputState> {
    let coeffs: Vec<Complex64> = ms
        .blocks
        .iter()
        .map(|block| {
            let s: f64 = block.iter().map(|c| c.norm_sqr()).sum();
            Complex64::new(s.sqrt(), 0.0)
        })
        .collect();
    if coeffs.iter().all(|c| c.norm_sqr() <= f64::MIN_POSITIVE) {
        return Err(Error::DegenerateInput(
            "multiplicity state carries no weight".into(),
        ));
    }
    InputState::new(coeffs)
}

/// Variance, position variance, and their uncertainty product for one wave
/// function.
#[derive(Clone, Debug, Serialize)]
pub struct CramerRaoReport {
    pub variance: f64,
    pub q_variance: f64,
    pub product: f64,
    pub gap: f64,
}

/// Evaluates the uncertainty product variance·q_variance, which must exceed
/// 1/4 strictly for support confined to [-1, 1]. Infinite variance reports
/// an infinite product.
pub fn cramer_rao_report(f: &WaveFunction) -> Result<CramerRaoReport> {
    let variance = f.variance();
    let q_variance = f.q_variance();
    let product = variance * q_variance;
    if product < 0.25 {
        return Err(Error::NumericalConsistency(format!(
            "uncertainty product {product} below 1/4 for {}",
            f.label()
        )));
    }
    Ok(CramerRaoReport {
        variance,
        q_variance,
        product,
        gap: product - 0.25,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::default_grid;
    use crate::wavefn::Builtin;
    use approx::assert_abs_diff_eq;

    fn uniform_state(n: usize) -> InputState {
        InputState::new(vec![Complex64::new(1.0, 0.0); n + 1]).unwrap()
    }

    fn single_peak(n: usize, k: usize) -> InputState {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[k] = Complex64::new(1.0, 0.0);
        InputState::new(c).unwrap()
    }

    #[test]
    fn coefficients_from_constant_are_uniform() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Constant, &grid).unwrap();
        for n in [1usize, 5, 40] {
            let state = InputState::from_wavefn(&f, n).unwrap();
            let expect = ((n + 1) as f64).sqrt().recip();
            for c in state.coeffs() {
                assert_abs_diff_eq!(c.re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn coefficients_from_dirichlet_match_direct_evaluation() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Dirichlet(1), &grid).unwrap();
        let n = 3;
        let state = InputState::from_wavefn(&f, n).unwrap();
        let raw: Vec<f64> = (0..=n)
            .map(|k| {
                let x = (2.0 * k as f64 - n as f64) / (n as f64 + 1.0);
                (PI * (x + 1.0) / 2.0).sin()
            })
            .collect();
        let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (c, r) in state.coeffs().iter().zip(&raw) {
            assert_abs_diff_eq!(c.re, r / norm, epsilon = 1e-10);
            assert!(c.re >= 0.0);
        }
    }

    #[test]
    fn outcome_density_peak_and_normalization() {
        let n = 16;
        let state = uniform_state(n);
        assert_abs_diff_eq!(
            state.outcome_density(0.3, 0.3),
            (n as f64 + 1.0) / (2.0 * PI),
            epsilon = 1e-12
        );
        // Single peak carries no phase information.
        let peak = single_peak(8, 3);
        for th in [0.0, 1.0, 4.5] {
            assert_abs_diff_eq!(
                peak.outcome_density(0.0, th),
                1.0 / (2.0 * PI),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn outcome_density_integrates_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = 3 + (rng.gen::<u64>() % 20) as usize;
            let coeffs: Vec<Complex64> = (0..=n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let state = InputState::new(coeffs).unwrap();
            let m = 64 * (n + 1);
            let step = 2.0 * PI / m as f64;
            let total: f64 = (0..m)
                .map(|i| state.outcome_density(0.0, step * i as f64) * step)
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn outcome_density_is_covariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let coeffs: Vec<Complex64> = (0..=12)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let state = InputState::new(coeffs).unwrap();
        for _ in 0..25 {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            let theta_hat = rng.gen::<f64>() * 2.0 * PI;
            let delta = rng.gen::<f64>() * 2.0 * PI;
            let a = state.outcome_density(theta, theta_hat);
            let b = state.outcome_density(theta + delta, theta_hat + delta);
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn phase_stripping_equivalence() {
        // Measuring with |t> = sum e^{i xi_k}|k> after twisting the state by
        // e^{-i xi_k} matches the plain covariant density.
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let n = 9;
        let coeffs: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let state = InputState::new(coeffs.clone()).unwrap();
        let xis: Vec<f64> = (0..=n).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        let twisted = InputState::new(
            coeffs
                .iter()
                .zip(&xis)
                .map(|(c, &xi)| c * Complex64::new(0.0, -xi).exp())
                .collect(),
        )
        .unwrap();
        for _ in 0..10 {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            let theta_hat = rng.gen::<f64>() * 2.0 * PI;
            // |t>-measurement density from the covariant display.
            let delta = theta_hat - theta;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in state.coeffs().iter().enumerate() {
                let phase = xis[k] + (k as f64 - n as f64 / 2.0) * delta;
                acc += c.conj() * Complex64::new(phase.cos(), phase.sin());
            }
            let t_density = acc.norm_sqr() / (2.0 * PI);
            let stripped = twisted.outcome_density(theta, theta_hat);
            assert_abs_diff_eq!(t_density, stripped, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_batch_stable() {
        let state = uniform_state(24);
        let a = state.sample_outcomes(1.0, 10_000, 99).unwrap();
        let b = state.sample_outcomes(1.0, 10_000, 99).unwrap();
        assert_eq!(a.estimates(), b.estimates());
        let c = state.sample_outcomes_seq(1.0, 10_000, 99).unwrap();
        assert_eq!(a.estimates(), c.estimates());
        // Prefix stability: a longer run starts with the shorter one.
        let d = state.sample_outcomes(1.0, 12_000, 99).unwrap();
        assert_eq!(&d.estimates()[..10_000], a.estimates());
    }

    #[test]
    fn flat_state_samples_uniformly() {
        let state = single_peak(12, 5);
        let count = 100_000;
        let sample = state.sample_outcomes(0.0, count, 4).unwrap();
        let mut sorted = sample.estimates().to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0_f64;
        for (i, &th) in sorted.iter().enumerate() {
            let c = th / (2.0 * PI);
            ks = ks.max(((i as f64 + 1.0) / count as f64 - c).abs());
            ks = ks.max((c - i as f64 / count as f64).abs());
        }
        assert!(
            ks < 1.63 / (count as f64).sqrt(),
            "KS vs uniform = {ks} too large"
        );
    }

    #[test]
    fn concentrated_state_estimates_cluster() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Constant, &grid).unwrap();
        let n = 100;
        let state = InputState::from_wavefn(&f, n).unwrap();
        let theta = 2.0;
        let sample = state.sample_outcomes(theta, 100_000, 5).unwrap();
        let mut devs: Vec<f64> = sample
            .estimates()
            .iter()
            .map(|&th| wrap_pm_pi(th - theta).abs())
            .collect();
        devs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = devs[devs.len() / 2];
        assert!(
            median * n as f64 > 0.5 && median * (n as f64) < 6.0,
            "median |dev|·n = {}",
            median * n as f64
        );
    }

    #[test]
    fn ks_distance_shrinks_with_n() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Dirichlet(1), &grid).unwrap();
        let count = 100_000;
        let ks25 = {
            let s = InputState::from_wavefn(&f, 25).unwrap();
            rescaled_ks_distance(&s.sample_outcomes(0.7, count, 31).unwrap(), &f).unwrap()
        };
        let ks400 = {
            let s = InputState::from_wavefn(&f, 400).unwrap();
            rescaled_ks_distance(&s.sample_outcomes(0.7, count, 31).unwrap(), &f).unwrap()
        };
        assert!(ks400 < ks25, "KS(400) = {ks400} not below KS(25) = {ks25}");
        assert!(ks400 < 0.02, "KS(400) = {ks400}");
    }

    #[test]
    fn constant_state_tail_fraction_matches_density() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Constant, &grid).unwrap();
        let n = 400;
        let count = 100_000;
        let state = InputState::from_wavefn(&f, n).unwrap();
        let sample = state.sample_outcomes(0.0, count, 13).unwrap();
        let beyond = sample
            .estimates()
            .iter()
            .filter(|&&th| (n as f64 * wrap_pm_pi(th).abs() / 2.0) > PI)
            .count() as f64
            / count as f64;
        let expect = 1.0 - f.window_probability(-PI, PI).unwrap();
        let se = (expect * (1.0 - expect) / count as f64).sqrt();
        assert!(
            (beyond - expect).abs() < 3.0 * se + 0.003,
            "beyond = {beyond}, expect = {expect}"
        );
    }

    #[test]
    fn required_applications_for_prolate() {
        let grid = default_grid();
        let r = 4.0;
        let f = WaveFunction::builtin(Builtin::Prolate(r), &grid).unwrap();
        let eps = crate::spectral::lambda_deficit_of_r(r).unwrap();
        let b = 0.5;
        let count = required_applications(&f, b, eps).unwrap();
        assert_eq!(count, (r / b).ceil() as u64);
        // Halving the width doubles the count.
        let count_half = required_applications(&f, b / 2.0, eps).unwrap();
        assert_eq!(count_half, 2 * count);
        // Shrinking eps never decreases the count.
        let tighter = required_applications(&f, b, eps * 0.2).unwrap();
        assert!(tighter >= count);
    }

    #[test]
    fn required_applications_unreachable() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Dirichlet(1), &grid).unwrap();
        // Far below the polynomial-tail floor at the resolvable range.
        assert!(matches!(
            required_applications(&f, 0.1, 1e-12),
            Err(Error::UnreachableAccuracy(_))
        ));
    }

    #[test]
    fn sld_fisher_examples() {
        assert_abs_diff_eq!(single_peak(9, 4).sld_fisher(), 0.0, epsilon = 1e-12);
        let n = 3;
        assert_abs_diff_eq!(uniform_state(n).sld_fisher(), 5.0, epsilon = 1e-12);
        for n in [5usize, 17] {
            let expect = ((n * n + 2 * n) as f64) / 3.0;
            assert_abs_diff_eq!(uniform_state(n).sld_fisher(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn sld_fisher_phase_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let coeffs: Vec<Complex64> = (0..=10)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let state = InputState::new(coeffs.clone()).unwrap();
        let twisted = InputState::new(
            coeffs
                .iter()
                .map(|c| c * Complex64::new(0.0, rng.gen::<f64>()).exp())
                .collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(state.sld_fisher(), twisted.sld_fisher(), epsilon = 1e-10);
    }

    #[test]
    fn rescaled_fisher_converges_to_q_variance() {
        let grid = default_grid();
        let f = WaveFunction::builtin(Builtin::Dirichlet(1), &grid).unwrap();
        let state = InputState::from_wavefn(&f, 200).unwrap();
        let ratio = state.rescaled_fisher();
        let q = f.q_variance();
        assert!(
            (ratio - q).abs() / q < 0.02,
            "ratio {ratio} vs q_variance {q}"
        );
        // Riemann-sum consistency of the discretized weights.
        let state_big = InputState::from_wavefn(&f, 800).unwrap();
        let ratio_big = state_big.rescaled_fisher();
        assert!((ratio_big - q).abs() < (ratio - q).abs());
    }

    #[test]
    fn cramer_rao_products() {
        let grid = default_grid();
        let d1 = WaveFunction::builtin(Builtin::Dirichlet(1), &grid).unwrap();
        let report = cramer_rao_report(&d1).unwrap();
        let expect = PI * PI / 12.0 - 0.5;
        assert_abs_diff_eq!(report.product, expect, epsilon = 1e-8);
        assert!(report.gap > 0.05);

        let c = WaveFunction::builtin(Builtin::Constant, &grid).unwrap();
        let report = cramer_rao_report(&c).unwrap();
        assert!(report.product.is_infinite());

        let p4 = WaveFunction::builtin(Builtin::Prolate(4.0), &grid).unwrap();
        let report = cramer_rao_report(&p4).unwrap();
        assert!(report.product > 0.25);
    }

    #[test]
    fn uncertainty_product_for_finite_variance_states() {
        let grid = default_grid();
        // Random boundary-vanishing combinations of the first few modes.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..10 {
            let max_m = 4usize;
            let parts: Vec<Vec<Complex64>> = (1..=max_m)
                .map(|m| {
                    WaveFunction::builtin(Builtin::Dirichlet(m as u32), &grid)
                        .unwrap()
                        .values()
                        .to_vec()
                })
                .collect();
            let w: Vec<f64> = (0..max_m).map(|_| rng.gen::<f64>() - 0.3).collect();
            let mixed: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    parts
                        .iter()
                        .zip(&w)
                        .map(|(p, &wm)| p[i] * wm)
                        .sum::<Complex64>()
                })
                .collect();
            let f = WaveFunction::normalize(mixed, grid.clone(), "mixed").unwrap();
            let product = f.variance() * f.q_variance();
            assert!(product >= 0.25, "product {product} below 1/4");
        }
    }

    #[test]
    fn multiplicity_collapse_examples() {
        // All weight on (k=1, j=1) for n=2.
        let ms = MultiplicityState::new(vec![
            vec![Complex64::new(0.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        let state = collapse_multiplicity(&ms).unwrap();
        assert_abs_diff_eq!(state.coeffs()[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(state.coeffs()[1].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(state.coeffs()[2].re, 0.0, epsilon = 1e-15);

        // Uniform over all entries: a = (1/2, sqrt(2)/2, 1/2).
        let u = Complex64::new(0.5, 0.0);
        let ms = MultiplicityState::new(vec![vec![u], vec![u, u], vec![u]]).unwrap();
        let state = collapse_multiplicity(&ms).unwrap();
        assert_abs_diff_eq!(state.coeffs()[0].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(state.coeffs()[1].re, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(state.coeffs()[2].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn multiplicity_collapse_ignores_block_phases() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let base = [0.5, 0.5, 0.5, 0.5];
        let blocks_of = |phases: &[f64]| {
            vec![
                vec![Complex64::from_polar(base[0], phases[0])],
                vec![
                    Complex64::from_polar(base[1], phases[1]),
                    Complex64::from_polar(base[2], phases[2]),
                ],
                vec![Complex64::from_polar(base[3], phases[3])],
            ]
        };
        let zero = collapse_multiplicity(
            &MultiplicityState::new(blocks_of(&[0.0; 4])).unwrap(),
        )
        .unwrap();
        let phases: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        let twisted = collapse_multiplicity(
            &MultiplicityState::new(blocks_of(&phases)).unwrap(),
        )
        .unwrap();
        for (a, b) in zero.coeffs().iter().zip(twisted.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn multiplicity_state_validates_block_sizes() {
        let u = Complex64::new(0.5, 0.0);
        assert!(matches!(
            MultiplicityState::new(vec![vec![u], vec![u], vec![u]]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn outcome_sample_csv_schema() {
        let sample = uniform_state(4).sample_outcomes(0.5, 3, 1).unwrap();
        let csv = sample.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "index,theta_hat");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn input_state_serialization_round_trip() {
        let state = uniform_state(7);
        let json = serde_json::to_string(&state).unwrap();
        let back: InputState = serde_json::from_str(&json).unwrap();
        assert_eq!(back.n(), 7);
        for (a, b) in state.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
