//! Named verification suites: each numbered criterion measures a quantity,
//! compares it against a pinned expectation, and reports pass/fail together
//! with its runtime budget. The CLI `verify` subcommand and the acceptance
//! test target both run these.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{coverage_mc, IntervalDesign};
use crate::numerics::{default_grid, find_root, Grid};
use crate::protocol::{
    collapse_multiplicity, cramer_rao_report, rescaled_ks_distance, InputState, MultiplicityState,
};
use crate::spectral::{
    dirichlet_fd_eigenvalues, dirichlet_minimum, lambda_asymptotic_deficit, lambda_deficit_of_r,
    lambda_of_r, min_tail_exponential_rate,
};
use crate::tails::{convolution_bound_check, fit_tail_rate, tail_probability, Abscissa, TailCurve};
use crate::wavefn::{Builtin, WaveFunction};

/// One verification check: a measured quantity against its expectation.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub measured: String,
    pub expected: String,
    pub pass: bool,
}

impl CheckResult {
    fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        measured: impl Into<String>,
        expected: impl Into<String>,
        pass: bool,
    ) -> Self {
        CheckResult {
            id: id.into(),
            description: description.into(),
            measured: measured.into(),
            expected: expected.into(),
            pass,
        }
    }

    /// One human-readable line, as printed by the CLI and the acceptance run.
    pub fn line(&self) -> String {
        format!(
            "{} {:<10} {} (measured {}, expected {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.description,
            self.measured,
            self.expected
        )
    }
}

pub const CRITERIA_COUNT: usize = 11;

/// The named check suites exposed by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Variance,
    Tails,
    Prolate,
    Fisher,
    AppendixA1,
    Convergence,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Variance => "variance",
            Suite::Tails => "tails",
            Suite::Prolate => "prolate",
            Suite::Fisher => "fisher",
            Suite::AppendixA1 => "appendix_a1",
            Suite::Convergence => "convergence",
            Suite::All => "all",
        }
    }

    pub fn criteria(self) -> Vec<usize> {
        match self {
            Suite::Variance => vec![1, 2],
            Suite::Tails => vec![3, 7],
            Suite::Prolate => vec![4, 5],
            Suite::Fisher => vec![9],
            Suite::AppendixA1 => vec![6],
            Suite::Convergence => vec![8, 10, 11],
            Suite::All => (1..=CRITERIA_COUNT).collect(),
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(Suite::Variance),
            "tails" => Ok(Suite::Tails),
            "prolate" => Ok(Suite::Prolate),
            "fisher" => Ok(Suite::Fisher),
            "appendix_a1" => Ok(Suite::AppendixA1),
            "convergence" => Ok(Suite::Convergence),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown verify suite `{other}` (expected variance, tails, prolate, \
                 fisher, appendix_a1, convergence, or all)"
            ))),
        }
    }
}

/// Runs every criterion of the suite; failures are enumerated, never skipped.
pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    suite.criteria().into_iter().flat_map(criterion).collect()
}

/// Runs one numbered criterion (1-11). Internal errors surface as failed
/// checks rather than panics.
pub fn criterion(index: usize) -> Vec<CheckResult> {
    let start = Instant::now();
    let body = match index {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        other => Err(Error::InvalidArgument(format!(
            "criterion index {other} outside 1..={CRITERIA_COUNT}"
        ))),
    };
    let budget = runtime_budget(index);
    let mut rows = match body {
        Ok(rows) => rows,
        Err(e) => vec![CheckResult::new(
            format!("{index}"),
            "criterion execution",
            format!("error: {e}"),
            "clean run",
            false,
        )],
    };
    let elapsed = start.elapsed().as_secs_f64();
    rows.push(CheckResult::new(
        format!("{index}.t"),
        "runtime",
        format!("{elapsed:.2} s"),
        format!("< {budget:.0} s"),
        elapsed < budget,
    ));
    rows
}

fn runtime_budget(index: usize) -> f64 {
    match index {
        1 | 2 => 5.0,
        3 | 9 => 10.0,
        4 | 6 | 7 => 60.0,
        5 | 8 => 120.0,
        10 => 180.0,
        11 => 1.0,
        _ => 60.0,
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Criterion 1: minimum variance π²/4 and the (πm/2)² eigenvalue ladder.
fn criterion_1() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let (value, argmin) = dirichlet_minimum(&grid)?;
    let closed = PI * PI / 4.0;
    let mut rows = vec![CheckResult::new(
        "1.1",
        "minimum limiting-distribution variance",
        format!("{value:.9}"),
        format!("{closed:.9} rel 1e-6"),
        rel_err(value, closed) <= 1e-6,
    )];
    rows.push(CheckResult::new(
        "1.2",
        "argmin is the first boundary-zero sine mode",
        argmin.label().to_string(),
        "dirichlet_1",
        argmin.label() == "dirichlet_1",
    ));
    let ladder = dirichlet_fd_eigenvalues(5, 6000);
    let worst = ladder
        .iter()
        .enumerate()
        .map(|(i, &e)| rel_err(e, (PI * (i as f64 + 1.0) / 2.0).powi(2)))
        .fold(0.0_f64, f64::max);
    rows.push(CheckResult::new(
        "1.3",
        "discretized eigenvalue ladder (πm/2)², m ≤ 5",
        format!("max rel err {worst:.2e}"),
        "<= 1e-6",
        worst <= 1e-6,
    ));
    Ok(rows)
}

/// Criterion 2: the constant state has divergent variance; its truncated
/// second moment keeps growing.
fn criterion_2() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let constant = WaveFunction::builtin(Builtin::Constant, &grid)?;
    let v = constant.variance();
    let mut rows = vec![CheckResult::new(
        "2.1",
        "variance of the constant state",
        format!("{v}"),
        "+inf (boundary rule)",
        v.is_infinite(),
    )];
    // The moment route needs bandwidth beyond the default grid.
    let wide = std::sync::Arc::new(Grid::gauss_legendre(2048)?);
    let constant_wide = WaveFunction::builtin(Builtin::Constant, &wide)?;
    let dist = constant_wide.limiting_distribution();
    let m100 = dist.second_moment_truncated(100.0)?;
    let m400 = dist.second_moment_truncated(400.0)?;
    rows.push(CheckResult::new(
        "2.2",
        "truncated second moment grows Y=100 to Y=400",
        format!("{m100:.3} to {m400:.3} ({:+.1}%)", (m400 / m100 - 1.0) * 100.0),
        "> +10%",
        m400 > 1.1 * m100,
    ));
    Ok(rows)
}

/// Criterion 3: density·y⁴ of the first sine mode stays in a factor-3 band,
/// sampled on the oscillation peaks y = 2πk across [50, 200].
fn criterion_3() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let f = WaveFunction::builtin(Builtin::Dirichlet(1), &grid)?;
    let dist = f.limiting_distribution();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for k in 8..=31 {
        let y = 2.0 * PI * k as f64;
        let v = dist.density(y)? * y.powi(4);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(vec![CheckResult::new(
        "3.1",
        "density·y⁴ envelope band over y in [50, 200]",
        format!("[{lo:.4}, {hi:.4}] ratio {:.3}", hi / lo),
        "bounded, non-vanishing, ratio < 3",
        lo > 0.0 && hi / lo < 3.0,
    )])
}

/// Criterion 4: λ(R) matches the large-R asymptotic form.
fn criterion_4() -> Result<Vec<CheckResult>> {
    let mut rows = Vec::new();
    for (i, r) in [8.0, 10.0].into_iter().enumerate() {
        let num = lambda_deficit_of_r(r)?;
        let asym = lambda_asymptotic_deficit(r);
        let rel = rel_err(num, asym);
        rows.push(CheckResult::new(
            format!("4.{}", i + 1),
            format!("1-λ({r}) against the asymptotic form"),
            format!("{num:.4e} vs {asym:.4e} (rel {rel:.3})"),
            "rel <= 0.15",
            rel <= 0.15,
        ));
    }
    let d10 = lambda_deficit_of_r(10.0)?;
    rows.push(CheckResult::new(
        "4.3",
        "1-λ(10) via the I-A route",
        format!("{d10:.3e}"),
        "in [3e-8, 7e-8]",
        (3e-8..=7e-8).contains(&d10),
    ));
    Ok(rows)
}

/// Criterion 5: -log(1-λ(R)) grows at rate 2 over R in {4, 6, 8, 10}.
fn criterion_5() -> Result<Vec<CheckResult>> {
    let fit = min_tail_exponential_rate(&[4.0, 6.0, 8.0, 10.0])?;
    Ok(vec![CheckResult::new(
        "5.1",
        "exponential rate of the minimum tail probability",
        format!("slope {:.4} (r² {:.6})", fit.slope, fit.r_squared),
        "slope in [1.8, 2.2]",
        fit.slope >= 1.8 && fit.slope <= 2.2,
    )])
}

/// Criterion 6: the smooth bump has a super-exponential tail in √y, the
/// convolution bound holds pointwise, and the convolution-theorem
/// cross-check agrees to 1e-6 relative.
fn criterion_6() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let g3 = WaveFunction::builtin(Builtin::BumpG3, &grid)?;
    let ys: Vec<f64> = (0..=10).map(|i| 10.0 + 5.0 * i as f64).collect();
    let curve = TailCurve::compute(&g3, &ys)?;
    let (slope, r2) = fit_tail_rate(&curve, Abscissa::SqrtR)?;
    let mut rows = vec![CheckResult::new(
        "6.1",
        "bump tail rate in sqrt(y) over [10, 60]",
        format!("slope {slope:.4} (r² {r2:.6})"),
        ">= 2.0",
        slope >= 2.0,
    )];
    let report = convolution_bound_check(&[10.0, 25.0, 40.0, 55.0], 3.0, 8)?;
    let bound_ok = report.rows.iter().all(|r| r.bound_holds);
    rows.push(CheckResult::new(
        "6.2",
        "convolution magnitude below the assembled bound at every tested y",
        format!("{} points", report.rows.len()),
        "pointwise bound holds",
        bound_ok,
    ));
    let worst = report
        .rows
        .iter()
        .map(|r| r.relative_mismatch)
        .fold(0.0_f64, f64::max);
    rows.push(CheckResult::new(
        "6.3",
        "convolution-theorem cross-check",
        format!("max rel mismatch {worst:.2e}"),
        "<= 1e-6",
        worst <= 1e-6,
    ));
    rows.push(CheckResult::new(
        "6.4",
        "tail exponent at the largest tested y",
        format!("{:.4}", report.final_exponent),
        format!(">= {:.4}", report.exponent_threshold),
        report.final_exponent >= report.exponent_threshold,
    ));
    Ok(rows)
}

/// Criterion 7: minimizing variance is not minimizing tails, plus the
/// design-point cross checks of the tail-curve comparison.
fn criterion_7() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let d1 = WaveFunction::builtin(Builtin::Dirichlet(1), &grid)?;
    let g3 = WaveFunction::builtin(Builtin::BumpG3, &grid)?;
    let psi2 = WaveFunction::builtin(Builtin::Prolate(2.0), &grid)?;
    let psi10 = WaveFunction::builtin(Builtin::Prolate(10.0), &grid)?;

    let v_g3 = g3.variance();
    let v_d1 = d1.variance();
    let t_g3 = tail_probability(&g3, 10.0)?;
    let t_d1 = tail_probability(&d1, 10.0)?;
    let mut rows = vec![CheckResult::new(
        "7.1",
        "criterion conflict: variances",
        format!("V(bump) {v_g3:.4} vs V(sine) {v_d1:.4}"),
        "bump strictly larger",
        v_g3 > v_d1,
    )];
    rows.push(CheckResult::new(
        "7.2",
        "criterion conflict: tails at y = 10",
        format!("bump {t_g3:.3e} vs sine {t_d1:.3e}"),
        "bump strictly smaller",
        t_g3 < t_d1,
    ));

    let d2 = lambda_deficit_of_r(2.0)?;
    let d10 = lambda_deficit_of_r(10.0)?;
    let t22 = tail_probability(&psi2, 2.0)?;
    let t1010 = tail_probability(&psi10, 10.0)?;
    let t210 = tail_probability(&psi2, 10.0)?;
    rows.push(CheckResult::new(
        "7.3",
        "prolate(2) attains the minimum tail at y = 2",
        format!("|{t22:.6e} - {d2:.6e}| = {:.1e}", (t22 - d2).abs()),
        "<= 1e-8",
        (t22 - d2).abs() <= 1e-8,
    ));
    rows.push(CheckResult::new(
        "7.4",
        "prolate(10) attains the minimum tail at y = 10",
        format!("|{t1010:.3e} - {d10:.3e}| = {:.1e}", (t1010 - d10).abs()),
        "<= 1e-8",
        (t1010 - d10).abs() <= 1e-8,
    ));
    rows.push(CheckResult::new(
        "7.5",
        "prolate(2) is suboptimal at y = 10",
        format!("{t210:.3e} vs minimum {d10:.3e}"),
        "strictly above the minimum",
        t210 > d10,
    ));
    Ok(rows)
}

/// Criterion 8: rescaled outcomes converge to the limiting distribution.
fn criterion_8() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let count = 100_000;
    let seed = 20_240_817;
    let mut rows = Vec::new();
    for (i, kind) in [Builtin::Dirichlet(1), Builtin::Prolate(4.0)]
        .into_iter()
        .enumerate()
    {
        let f = WaveFunction::builtin(kind, &grid)?;
        let ks = |n: usize| -> Result<f64> {
            let state = InputState::from_wavefn(&f, n)?;
            let sample = state.sample_outcomes(0.9, count, seed)?;
            rescaled_ks_distance(&sample, &f)
        };
        let ks25 = ks(25)?;
        let ks400 = ks(400)?;
        rows.push(CheckResult::new(
            format!("8.{}", i + 1),
            format!("KS distance of rescaled outcomes, {}", f.label()),
            format!("n=400: {ks400:.4}, n=25: {ks25:.4}"),
            "KS(400) < 0.02 and below KS(25)",
            ks400 < 0.02 && ks400 < ks25,
        ));
    }
    Ok(rows)
}

/// Criterion 9: the rescaled Fisher information reaches the position
/// variance, and the uncertainty product for the first sine mode.
fn criterion_9() -> Result<Vec<CheckResult>> {
    let grid = default_grid();
    let d1 = WaveFunction::builtin(Builtin::Dirichlet(1), &grid)?;
    let state = InputState::from_wavefn(&d1, 200)?;
    let ratio = state.rescaled_fisher();
    let q = d1.q_variance();
    let rel = rel_err(ratio, q);
    let mut rows = vec![CheckResult::new(
        "9.1",
        "rescaled Fisher information at n = 200 vs q-variance",
        format!("{ratio:.6} vs {q:.6} (rel {rel:.4})"),
        "rel <= 0.02",
        rel <= 0.02,
    )];
    let report = cramer_rao_report(&d1)?;
    let expect = PI * PI / 12.0 - 0.5;
    rows.push(CheckResult::new(
        "9.2",
        "uncertainty product for the first sine mode",
        format!("{:.6}", report.product),
        format!("{expect:.6} within 1e-4"),
        (report.product - expect).abs() <= 1e-4,
    ));
    rows.push(CheckResult::new(
        "9.3",
        "product strictly above 1/4",
        format!("gap {:.4}", report.gap),
        "> 0",
        report.gap > 0.0,
    ));
    Ok(rows)
}

/// Criterion 10: the β = 0.9 design covers at rate ≥ 0.88, inverts λ to
/// 1e-6, and loses coverage when its width is halved.
fn criterion_10() -> Result<Vec<CheckResult>> {
    let design = IntervalDesign::with_tolerance(0.9, 200, 1e-6)?;
    let inv = (lambda_of_r(design.r_beta)? - design.beta).abs();
    let mut rows = vec![CheckResult::new(
        "10.1",
        "inverse consistency of R(β)",
        format!("|λ(R) - β| = {inv:.2e}"),
        "<= 1e-6",
        inv <= 1e-6,
    )];
    let report = coverage_mc(&design, 1.0, 100_000, 424_242)?;
    rows.push(CheckResult::new(
        "10.2",
        "Monte Carlo coverage of the β = 0.9 design at n = 200",
        format!("{:.4} ± {:.4}", report.coverage, report.stderr),
        ">= 0.88",
        report.coverage >= 0.88,
    ));
    let halved = design.with_scaled_width(0.5)?;
    let broken = coverage_mc(&halved, 1.0, 100_000, 424_243)?;
    rows.push(CheckResult::new(
        "10.3",
        "halving the width breaks coverage",
        format!("{:.4}", broken.coverage),
        "< 0.9",
        broken.coverage < 0.9,
    ));
    Ok(rows)
}

/// Criterion 11: multiplicity collapse, exactly and through the outcome
/// density.
fn criterion_11() -> Result<Vec<CheckResult>> {
    let u = Complex64::new(0.5, 0.0);
    let ms = MultiplicityState::new(vec![vec![u], vec![u, u], vec![u]])?;
    let state = collapse_multiplicity(&ms)?;
    let expect = [0.5, 0.5_f64.sqrt(), 0.5];
    let worst = state
        .coeffs()
        .iter()
        .zip(&expect)
        .map(|(c, &e)| (c - Complex64::new(e, 0.0)).norm())
        .fold(0.0_f64, f64::max);
    let mut rows = vec![CheckResult::new(
        "11.1",
        "uniform n = 2 collapse coefficients (1/2, √2/2, 1/2)",
        format!("max dev {worst:.2e}"),
        "<= 1e-12",
        worst <= 1e-12,
    )];

    // Aligned blocks: per-block phases on otherwise fixed moduli. The full
    // reduced model sums each block onto its normalized block vector, so the
    // outcome density must match the collapsed state's.
    let phases = [0.3, 1.1, 2.7, 5.2];
    let moduli = [0.4, 0.5, 0.3, (1.0_f64 - 0.16 - 0.25 - 0.09).sqrt()];
    let blocks = vec![
        vec![Complex64::from_polar(moduli[0], phases[0])],
        vec![
            Complex64::from_polar(moduli[1], phases[1]),
            Complex64::from_polar(moduli[2], phases[2]),
        ],
        vec![Complex64::from_polar(moduli[3], phases[3])],
    ];
    let ms = MultiplicityState::new(blocks.clone())?;
    let collapsed = collapse_multiplicity(&ms)?;
    let n = ms.n() as f64;
    let mut worst_density = 0.0_f64;
    for i in 0..256 {
        let delta = 2.0 * PI * i as f64 / 256.0;
        // Full-model density with the block-aligned covariant seed:
        // each block contributes its root-sum-square weight.
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, block) in blocks.iter().enumerate() {
            let a_k: f64 = block.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let phase = (k as f64 - n / 2.0) * delta;
            acc += a_k * Complex64::new(phase.cos(), phase.sin());
        }
        let full = acc.norm_sqr() / (2.0 * PI);
        let reduced = collapsed.outcome_density(0.0, delta);
        worst_density = worst_density.max((full - reduced).abs());
    }
    rows.push(CheckResult::new(
        "11.2",
        "aligned-block outcome density matches the collapse",
        format!("max dev {worst_density:.2e}"),
        "<= 1e-10",
        worst_density <= 1e-10,
    ));
    Ok(rows)
}

/// Deterministic check of the interval-optimality comparison used by the
/// acceptance suite: with the β = 0.9 design width, the first sine mode
/// either covers strictly less or needs a wider interval.
pub fn sine_mode_interval_suboptimality() -> Result<bool> {
    let design = IntervalDesign::with_tolerance(0.9, 200, 1e-6)?;
    let grid = default_grid();
    let d1 = WaveFunction::builtin(Builtin::Dirichlet(1), &grid)?;
    let swapped = design.with_state(InputState::from_wavefn(&d1, design.n)?)?;
    let trials = 100_000;
    let cov_prolate = coverage_mc(&design, 0.4, trials, 99_001)?;
    let cov_sine = coverage_mc(&swapped, 0.4, trials, 99_002)?;
    let se = (cov_prolate.stderr.powi(2) + cov_sine.stderr.powi(2)).sqrt();
    let coverage_worse = cov_sine.coverage < cov_prolate.coverage - 3.0 * se;
    // Required half-width route: the radius where the sine mode reaches 0.9.
    let needed = find_root(
        |a| d1.window_probability(-a, a),
        0.9,
        (0.1, 12.0),
        1e-9,
    )?;
    let width_worse = needed > design.r_beta;
    Ok(coverage_worse || width_worse)
}
