//! Command line front end.
//!
//! Exit codes: `0` success, `1` configuration or input error, `2` a
//! verification check failed.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use maxscore_core::estimators::srm::{srm_select, InnerSolver};
use maxscore_core::estimators::EstimateResult;
use maxscore_core::score::empirical_score;
use maxscore_core::{BinaryDataset, ScoreValue, SeedSpec, UnitVector};

use crate::config::{EstimatorConfig, ExperimentConfig, Regime, StudyMethod};
use crate::dataset_csv::load_dataset;
use crate::emit::{emit_csv, emit_density_svg, format_float, GroupKey};
use crate::experiments::{fit_method, run_study_with_workers, selected_support};
use crate::verify::{run_all, run_check, write_report, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "maxscore", version, about = "Maximum score estimation, simulation studies and verification checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation study from a TOML configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit one estimator to a CSV dataset (`x1,...,xp,y`).
    Estimate(EstimateArgs),
    /// Structural risk minimization over sparsity classes.
    Srm(SrmArgs),
    /// Run verification checks and print the report table.
    Verify {
        #[arg(long, conflicts_with = "all")]
        check: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = VerifyOptions::default().mc_samples)]
        mc: usize,
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// exact-2d, grid, smoothed, logistic, svm, l1-logistic, l1-svm, srm or
    /// fixed (scores the direction given by --beta).
    #[arg(long)]
    pub method: String,
    /// Comma-separated direction for `fixed`; normalized before scoring.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub cost: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SrmArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long = "Cn", default_value_t = 1.0)]
    pub c_n: f64,
    #[arg(long)]
    pub max_sparsity: Option<usize>,
    #[arg(long)]
    pub budget: Option<u64>,
    /// Use greedy forward selection even when enumeration fits the budget.
    #[arg(long)]
    pub greedy: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INPUT, message: e.to_string() }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// `numerator/denominator` in lowest terms.
pub fn score_fraction(s: &ScoreValue) -> String {
    let g = gcd(s.numerator.unsigned_abs(), s.denominator).max(1);
    format!("{}/{}", s.numerator / g as i64, s.denominator / g)
}

fn coords(beta: &UnitVector) -> String {
    beta.coords().iter().map(|&v| format_float(v)).collect::<Vec<_>>().join(",")
}

fn print_fit<W: Write>(out: &mut W, method: &str, score: &ScoreValue, beta: &UnitVector, extra: &[(&str, String)]) -> std::io::Result<()> {
    writeln!(out, "method: {method}")?;
    writeln!(out, "score: {} ({})", score_fraction(score), format_float(score.value))?;
    writeln!(out, "beta: {}", coords(beta))?;
    for (k, v) in extra {
        writeln!(out, "{k}: {v}")?;
    }
    Ok(())
}

fn fit_extras(fit: &EstimateResult) -> Vec<(&'static str, String)> {
    let support: Vec<String> = selected_support(fit).iter().map(|j| (j + 1).to_string()).collect();
    vec![
        ("support", support.join(",")),
        ("evaluations", fit.evaluations.to_string()),
        ("converged", fit.converged.to_string()),
        ("degenerate", fit.degenerate.to_string()),
        ("exact_search", fit.exact_search.to_string()),
    ]
}

fn estimate<W: Write>(args: &EstimateArgs, out: &mut W) -> Result<i32, Failure> {
    let data = load_dataset(&args.data).map_err(|e| input_error(format!("{}: {e}", args.data.display())))?;
    if args.method == "fixed" {
        let raw = args.beta.clone().ok_or_else(|| input_error("method `fixed` needs --beta"))?;
        let beta = UnitVector::normalize(raw).map_err(|e| input_error(format!("--beta: {e}")))?;
        let score = empirical_score(&data, &beta).map_err(|e| input_error(format!("--beta: {e}")))?;
        print_fit(out, "fixed", &score, &beta, &[]).map_err(input_error)?;
        return Ok(EXIT_OK);
    }
    let method: StudyMethod = args.method.parse().map_err(|e| input_error(format!("--method: {e}")))?;
    let mut est = EstimatorConfig::default();
    if let Some(g) = args.grid_points {
        est.grid_points = g;
    }
    if let Some(c) = args.cost {
        est.svm_cost = c;
    }
    let fit = fit_method(method, &data, &est, SeedSpec::new(args.seed, 0)).map_err(|e| input_error(format!("{method}: {e}")))?;
    print_fit(out, method.name(), &fit.achieved_score, &fit.beta_hat, &fit_extras(&fit)).map_err(input_error)?;
    Ok(EXIT_OK)
}

fn srm<W: Write>(args: &SrmArgs, out: &mut W) -> Result<i32, Failure> {
    let data: BinaryDataset = load_dataset(&args.data).map_err(|e| input_error(format!("{}: {e}", args.data.display())))?;
    let mut cfg = EstimatorConfig::default().srm;
    cfg.k = args.k;
    cfg.c_n = args.c_n;
    cfg.max_sparsity = args.max_sparsity;
    if let Some(b) = args.budget {
        cfg.enumeration_budget = b;
    }
    if args.greedy {
        cfg.inner_solver = InnerSolver::GreedyForwardSwap;
    }
    cfg.seed = SeedSpec::new(args.seed, 0);
    let outcome = srm_select(&data, &cfg).map_err(input_error)?;
    let w = |e: std::io::Error| input_error(e);
    writeln!(out, "m,score,penalty,objective,exact,support").map_err(w)?;
    for r in &outcome.table {
        let support: Vec<String> = r.support.iter().map(|j| (j + 1).to_string()).collect();
        writeln!(out, "{},{},{},{},{},{}", r.m, format_float(r.score), format_float(r.penalty), format_float(r.objective), r.exact, support.join(" "))
            .map_err(w)?;
    }
    writeln!(out, "m_hat: {}", outcome.m_hat).map_err(w)?;
    print_fit(out, "srm", &outcome.result.achieved_score, &outcome.result.beta_hat, &fit_extras(&outcome.result)).map_err(w)?;
    Ok(EXIT_OK)
}

fn simulate<W: Write>(config: &PathBuf, workers: Option<usize>, out: &mut W) -> Result<i32, Failure> {
    let cfg = ExperimentConfig::load(config).map_err(|e| input_error(format!("{}: {e}", config.display())))?;
    let workers = match workers {
        Some(0) => return Err(input_error("--workers: at least one worker is required")),
        Some(w) => w,
        None => cfg.effective_workers().map_err(input_error)?,
    };
    let result = run_study_with_workers(&cfg, workers).map_err(|e| Failure { code: EXIT_INPUT, message: e.to_string() })?;
    emit_csv(&result, &cfg.output.csv).map_err(input_error)?;
    if let Some(svg) = &cfg.output.svg {
        let key = if cfg.regime == Regime::Sparse { GroupKey::MethodS0 } else { GroupKey::MethodN };
        emit_density_svg(&result, key, svg).map_err(input_error)?;
    }
    let w = |e: std::io::Error| input_error(e);
    writeln!(out, "rows: {}", result.rows.len()).map_err(w)?;
    writeln!(out, "csv: {}", cfg.output.csv.display()).map_err(w)?;
    writeln!(out, "method,n,median_scaled_error").map_err(w)?;
    for (m, n, med) in result.median_scaled_error() {
        writeln!(out, "{m},{n},{}", format_float(med)).map_err(w)?;
    }
    Ok(EXIT_OK)
}

fn verify<W: Write>(check: Option<&str>, all: bool, opts: &VerifyOptions, out: &mut W) -> Result<i32, Failure> {
    let rows = match (check, all) {
        (Some(name), _) => run_check(name, opts),
        (None, true) => run_all(opts),
        (None, false) => return Err(input_error("verify needs --check <name> or --all")),
    }
    .map_err(input_error)?;
    write_report(&rows, &mut *out).map_err(input_error)?;
    Ok(if rows.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Executes a parsed command, writing normal output to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<i32, Failure> {
    match &cli.command {
        Command::Simulate { config, workers } => simulate(config, *workers, out),
        Command::Estimate(args) => estimate(args, out),
        Command::Srm(args) => srm(args, out),
        Command::Verify { check, all, mc, seed } => {
            verify(check.as_deref(), *all, &VerifyOptions { mc_samples: *mc, seed: *seed }, out)
        }
    }
}
