//! Command-line front end: densities, tail curves, interval designs, and the
//! verification suites, with CSV/JSON output.
//!
//! Exit codes: 0 success, 1 internal or verification failure, 2 invalid
//! input or resolution exceeded.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use phaselim_core::error::{Error, Result};
use phaselim_core::interval::{coverage_mc, CoverageReport, IntervalDesign};
use phaselim_core::numerics::Grid;
use phaselim_core::spectral::lambda_deficit_on_grid;
use phaselim_core::tails::TailCurve;
use phaselim_core::verify::{run_suite, Suite};
use phaselim_core::wavefn::{Builtin, WaveFunction};

#[derive(Parser)]
#[command(
    name = "phaselim",
    version,
    about = "Limiting-distribution analysis for phase estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Quadrature nodes of the analysis grid on [-1, 1].
    #[arg(long, global = true, default_value_t = 512)]
    grid_points: usize,

    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance overrides as key=value. Recognized: root_tol.
    #[arg(long = "tol", global = true)]
    tolerances: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Density of the limiting distribution on a uniform y grid.
    Density {
        /// Wave function: constant, dirichlet, bump_g3, or prolate.
        #[arg(long)]
        f: String,
        /// Mode index for dirichlet.
        #[arg(long)]
        m: Option<u32>,
        /// Band half-width for prolate.
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long, default_value_t = 12.0)]
        y_max: f64,
        /// Number of grid intervals on [-y_max, y_max] (steps+1 rows).
        #[arg(long, default_value_t = 240)]
        steps: usize,
    },
    /// Tail probabilities P^f([-y, y]^c) along a y ladder, one curve per -f.
    Tails {
        /// Wave functions (repeatable): constant, dirichlet:M, bump_g3,
        /// prolate:R, or min for the minimum-tail curve 1-lambda(y).
        /// Defaults to dirichlet:1, bump_g3, prolate:2, prolate:10, min.
        #[arg(long = "f")]
        fs: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        y_min: f64,
        #[arg(long, default_value_t = 12.0)]
        y_max: f64,
        /// Number of ladder intervals (y_steps+1 points).
        #[arg(long, default_value_t = 23)]
        y_steps: usize,
    },
    /// Interval-estimation design for a confidence coefficient, plus a
    /// Monte Carlo coverage estimate. JSON output.
    DesignInterval {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Run a named verification suite: variance, tails, prolate, fisher,
    /// appendix_a1, convergence, or all.
    Verify { suite: String },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let tols = parse_tolerances(&cli.tolerances)?;
    let grid = Arc::new(Grid::gauss_legendre(cli.grid_points)?);
    match cli.command {
        Command::Density {
            ref f,
            m,
            r,
            y_max,
            steps,
        } => {
            let kind = parse_f_spec(f, m, r)?;
            if steps == 0 {
                return Err(Error::InvalidArgument("steps must be positive".into()));
            }
            let wf = WaveFunction::builtin(kind, &grid)?;
            let dist = wf.limiting_distribution();
            let ys: Vec<f64> = (0..=steps)
                .map(|j| -y_max + 2.0 * y_max * j as f64 / steps as f64)
                .collect();
            let densities = dist.densities(&ys)?;
            let content = match cli.format {
                Format::Csv => {
                    let mut s = String::from("y,density\n");
                    for (y, d) in ys.iter().zip(&densities) {
                        writeln!(s, "{y},{d}").unwrap();
                    }
                    s
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        y: f64,
                        density: f64,
                    }
                    let rows: Vec<Row> = ys
                        .iter()
                        .zip(&densities)
                        .map(|(&y, &density)| Row { y, density })
                        .collect();
                    to_json(&rows)?
                }
            };
            emit(&cli.out, &content)?;
            Ok(0)
        }
        Command::Tails {
            ref fs,
            y_min,
            y_max,
            y_steps,
        } => {
            let specs: Vec<String> = if fs.is_empty() {
                ["dirichlet:1", "bump_g3", "prolate:2", "prolate:10", "min"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect()
            } else {
                fs.clone()
            };
            // Reject bad names before any computation.
            let parsed: Vec<(String, Option<Builtin>)> = specs
                .iter()
                .map(|s| parse_curve_spec(s))
                .collect::<Result<_>>()?;
            if y_steps == 0 {
                return Err(Error::InvalidArgument("y_steps must be positive".into()));
            }
            let ys: Vec<f64> = (0..=y_steps)
                .map(|j| y_min + (y_max - y_min) * j as f64 / y_steps as f64)
                .collect();
            let mut curves = Vec::new();
            for (label, kind) in parsed {
                let curve = match kind {
                    Some(builtin) => {
                        let wf = WaveFunction::builtin(builtin, &grid)?;
                        TailCurve::compute(&wf, &ys)?
                    }
                    None => {
                        let tails: Vec<f64> = ys
                            .iter()
                            .map(|&y| lambda_deficit_on_grid(y, &grid))
                            .collect::<Result<_>>()?;
                        TailCurve::from_values(label, ys.clone(), tails)?
                    }
                };
                curves.push(curve);
            }
            let content = match cli.format {
                Format::Csv => {
                    let mut s = String::from("f_label,y,tail,log_tail,flagged\n");
                    for c in &curves {
                        for i in 0..c.len() {
                            writeln!(
                                s,
                                "{},{},{},{},{}",
                                c.f_label(),
                                c.y_values()[i],
                                c.tail_probs()[i],
                                c.log_tail()[i],
                                c.flagged()[i]
                            )
                            .unwrap();
                        }
                    }
                    s
                }
                Format::Json => to_json(&curves)?,
            };
            emit(&cli.out, &content)?;
            Ok(0)
        }
        Command::DesignInterval { beta, n, trials } => {
            let root_tol = tols.get("root_tol").copied().unwrap_or(1e-6);
            let design = IntervalDesign::with_tolerance(beta, n, root_tol)?;
            let coverage = coverage_mc(&design, 1.0, trials.max(10_000), cli.seed)?;
            #[derive(Serialize)]
            struct DesignReport {
                design: IntervalDesign,
                coverage: CoverageReport,
            }
            let content = to_json(&DesignReport { design, coverage })?;
            emit(&cli.out, &content)?;
            Ok(0)
        }
        Command::Verify { ref suite } => {
            let suite: Suite = suite.parse()?;
            let results = run_suite(suite);
            let all_pass = results.iter().all(|r| r.pass);
            match cli.format {
                Format::Csv => {
                    let mut s = String::new();
                    for r in &results {
                        writeln!(s, "{}", r.line()).unwrap();
                    }
                    writeln!(
                        s,
                        "suite {}: {}",
                        suite.name(),
                        if all_pass { "PASS" } else { "FAIL" }
                    )
                    .unwrap();
                    emit(&cli.out, &s)?;
                }
                Format::Json => {
                    for r in &results {
                        println!("{}", r.line());
                    }
                    emit(&cli.out, &to_json(&results)?)?;
                }
            }
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn parse_tolerances(raw: &[String]) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    for entry in raw {
        let (key, value) = entry.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("tolerance `{entry}` is not key=value"))
        })?;
        if key != "root_tol" {
            return Err(Error::InvalidArgument(format!(
                "unknown tolerance key `{key}` (recognized: root_tol)"
            )));
        }
        let parsed: f64 = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad tolerance value `{value}`")))?;
        if !(parsed > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        map.insert(key.to_string(), parsed);
    }
    Ok(map)
}

/// Parses `--f NAME` together with the `--m`/`--R` parameter flags.
fn parse_f_spec(name: &str, m: Option<u32>, r: Option<f64>) -> Result<Builtin> {
    match name {
        "constant" => Ok(Builtin::Constant),
        "dirichlet" => Ok(Builtin::Dirichlet(m.ok_or_else(|| {
            Error::InvalidArgument("dirichlet needs --m".into())
        })?)),
        "bump_g3" | "bump-g3" | "g3" => Ok(Builtin::BumpG3),
        "prolate" => Ok(Builtin::Prolate(r.ok_or_else(|| {
            Error::InvalidArgument("prolate needs --R".into())
        })?)),
        other => {
            // Inline colon form, e.g. dirichlet:2 or prolate:4.
            if let Some((base, param)) = other.split_once(':') {
                return parse_inline(base, param);
            }
            Err(Error::InvalidArgument(format!(
                "unknown wave function `{other}` (expected constant, dirichlet, \
                 bump_g3, or prolate)"
            )))
        }
    }
}

fn parse_inline(base: &str, param: &str) -> Result<Builtin> {
    match base {
        "dirichlet" => param
            .parse::<u32>()
            .map(Builtin::Dirichlet)
            .map_err(|_| Error::InvalidArgument(format!("bad dirichlet order `{param}`"))),
        "prolate" => param
            .parse::<f64>()
            .map(Builtin::Prolate)
            .map_err(|_| Error::InvalidArgument(format!("bad prolate half-width `{param}`"))),
        other => Err(Error::InvalidArgument(format!(
            "unknown wave function `{other}`"
        ))),
    }
}

/// Curve spec for `tails`: a builtin or the minimum-tail curve.
fn parse_curve_spec(spec: &str) -> Result<(String, Option<Builtin>)> {
    if spec == "min" {
        return Ok(("min_tail".into(), None));
    }
    let builtin = parse_f_spec(spec, None, None)?;
    Ok((builtin.label(), Some(builtin)))
}
