//! Monte Carlo studies of estimation error and variable selection.
//!
//! Every `(n, s0, replicate)` cell owns a seed derived from the master seed,
//! and all methods are fitted to the same training sample of that cell. The
//! true parameter depends only on the master seed and the dimensions, so it
//! stays fixed across replicates. Rows are sorted by
//! `(method, n, s0, replicate)` after the parallel map, which makes the output
//! independent of the worker count.

use std::time::Instant;

use maxscore_core::estimators::cv::cv_fit;
use maxscore_core::estimators::metrics::{misclassification_rate, scaled_error, support_metrics, support_of};
use maxscore_core::estimators::smoothed::smoothed_from_logistic;
use maxscore_core::estimators::srm::srm_select;
use maxscore_core::estimators::{
    default_lambda_grid, exact_max_score_2d, grid_estimator, logistic_fit, svm_fit, ConvexMethod, EstimateResult,
};
use maxscore_core::model::{dense_beta0, sparse_beta0};
use maxscore_core::rng::tags;
use maxscore_core::{
    generate_binary_dataset, generate_multinomial_dataset, BinaryDataset, CovariateLaw, DgpSpec, ErrorLaw,
    MultinomialDataset, SeedSpec, UnitVector,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ErrorKind, EstimatorConfig, ExperimentConfig, Regime, StudyMethod};

/// Coordinates at or below this magnitude count as unselected.
const SUPPORT_THRESHOLD: f64 = 1e-10;

const BETA0_TAG: u64 = 0xB0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: StudyMethod,
    pub n: usize,
    pub p: usize,
    pub s0: usize,
    pub replicate: usize,
    /// `(n/p)^{1/3} * norm_diff`.
    pub scaled_error: f64,
    pub norm_diff: f64,
    pub misclass_rate: f64,
    /// Selected coordinates outside the true support.
    pub type1: usize,
    /// True coordinates not selected.
    pub type2: usize,
    /// Seconds; zero unless timing is enabled.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// Median scaled error per `(method, n)`, in sorted key order.
    pub fn median_scaled_error(&self) -> Vec<(StudyMethod, usize, f64)> {
        let mut groups: std::collections::BTreeMap<(StudyMethod, usize), Vec<f64>> = Default::default();
        for r in &self.rows {
            groups.entry((r.method, r.n)).or_default().push(r.scaled_error);
        }
        groups
            .into_iter()
            .map(|((m, n), mut v)| {
                v.sort_by(f64::total_cmp);
                (m, n, crate::emit::quantile(&v, 0.5))
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{method} at n = {n}, s0 = {s0}, replicate {replicate}: {source}")]
    Fit { method: StudyMethod, n: usize, s0: usize, replicate: usize, source: maxscore_core::Error },
    #[error(transparent)]
    Model(#[from] maxscore_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    n: usize,
    p: usize,
    s0: Option<usize>,
    replicate: usize,
}

impl Cell {
    fn seed(&self, master: u64) -> SeedSpec {
        SeedSpec::new(master, 0)
            .derive(self.n as u64)
            .derive(self.s0.unwrap_or(0) as u64)
            .derive(self.replicate as u64)
    }
}

/// The true parameter of a study cell: dense `Unif(1, 2)` entries, or
/// `s0` active `Unif(2, 3)` entries.
pub fn study_beta0(master_seed: u64, p: usize, s0: Option<usize>) -> maxscore_core::Result<UnitVector> {
    let seed = SeedSpec::new(master_seed, BETA0_TAG).derive(p as u64).derive(s0.unwrap_or(0) as u64);
    match s0 {
        None => dense_beta0(p, seed),
        Some(s) => sparse_beta0(p, s, seed),
    }
}

/// Data-generating process of a study at dimension `p`.
pub fn study_spec(cfg: &ExperimentConfig, p: usize, s0: Option<usize>) -> maxscore_core::Result<DgpSpec> {
    let beta0 = study_beta0(cfg.master_seed, p, s0)?;
    let covariates =
        if cfg.dgp.rho == 0.0 { CovariateLaw::IsotropicGaussian } else { CovariateLaw::Ar1Gaussian { rho: cfg.dgp.rho } };
    let errors = match cfg.dgp.errors {
        ErrorKind::Heteroscedastic => ErrorLaw::HeteroscedasticGaussian,
        ErrorKind::Gaussian => ErrorLaw::Gaussian { sigma: cfg.dgp.sigma },
    };
    let spec = DgpSpec::new(beta0, covariates, errors);
    spec.validate()?;
    Ok(spec)
}

/// Fits one method and returns the full estimator output.
pub fn fit_method(
    method: StudyMethod,
    data: &BinaryDataset,
    est: &EstimatorConfig,
    seed: SeedSpec,
) -> maxscore_core::Result<EstimateResult> {
    let inner = seed.derive(tags::INNER);
    match method {
        StudyMethod::Exact2d => exact_max_score_2d(data),
        StudyMethod::Grid => grid_estimator(data, est.grid_points, inner),
        StudyMethod::Logistic => logistic_fit(data, 0.0, &est.convex),
        StudyMethod::Svm => svm_fit(data, 0.0, est.svm_cost, &est.convex),
        StudyMethod::Smoothed => smoothed_from_logistic(data, &est.smoothed),
        StudyMethod::L1Logistic | StudyMethod::L1Svm => {
            let kind = if method == StudyMethod::L1Logistic {
                ConvexMethod::Logistic
            } else {
                ConvexMethod::Svm { cost: est.svm_cost }
            };
            let grid = default_lambda_grid(est.lambda_count);
            Ok(cv_fit(data, kind, &grid, est.cv_folds, inner, &est.convex)?.0)
        }
        StudyMethod::Srm => {
            let mut srm = est.srm.clone();
            srm.seed = inner;
            Ok(srm_select(data, &srm)?.result)
        }
    }
}

/// Selected coordinates of a fit.
pub fn selected_support(fit: &EstimateResult) -> Vec<usize> {
    fit.support.clone().unwrap_or_else(|| support_of(fit.beta_hat.coords(), SUPPORT_THRESHOLD))
}

/// Binary comparisons implied by multinomial choices: for every individual
/// and every unchosen alternative `k`, the row `x_a - x_b` over the pair
/// `a < b` of `{chosen, k}`, labelled `+1` when `a` was chosen.
pub fn pairwise_differences(data: &MultinomialDataset) -> maxscore_core::Result<BinaryDataset> {
    let (m, p) = (data.m(), data.p());
    let mut x = Vec::with_capacity(data.n() * (m - 1) * p);
    let mut y = Vec::with_capacity(data.n() * (m - 1));
    for i in 0..data.n() {
        let c = data.choice(i);
        for k in (0..m).filter(|&k| k != c) {
            let (a, b) = (c.min(k), c.max(k));
            x.extend(data.alternative(i, a).iter().zip(data.alternative(i, b)).map(|(u, v)| u - v));
            y.push(if a == c { 1 } else { -1 });
        }
    }
    BinaryDataset::new(p, x, y)
}

/// Share of individuals whose highest-utility alternative under `beta`
/// (ties to the lowest index) differs from their choice.
pub fn multinomial_misclassification(data: &MultinomialDataset, beta: &UnitVector) -> f64 {
    let wrong = (0..data.n())
        .filter(|&i| {
            let mut best = (0, f64::NEG_INFINITY);
            for j in 0..data.m() {
                let u: f64 = data.alternative(i, j).iter().zip(beta.coords()).map(|(a, b)| a * b).sum();
                if u > best.1 {
                    best = (j, u);
                }
            }
            best.0 != data.choice(i)
        })
        .count();
    wrong as f64 / data.n() as f64
}

enum Sample {
    Binary { train: BinaryDataset, test: BinaryDataset },
    Multinomial { train: BinaryDataset, test: MultinomialDataset },
}

fn draw_sample(cfg: &ExperimentConfig, spec: &DgpSpec, cell: &Cell, seed: SeedSpec) -> maxscore_core::Result<Sample> {
    let test_seed = seed.derive(tags::TEST_SAMPLE);
    Ok(match cfg.regime {
        Regime::Multinomial => Sample::Multinomial {
            train: pairwise_differences(&generate_multinomial_dataset(spec, cell.n, cfg.dgp.m, seed)?)?,
            test: generate_multinomial_dataset(spec, cfg.test_size, cfg.dgp.m, test_seed)?,
        },
        _ => Sample::Binary {
            train: generate_binary_dataset(spec, cell.n, seed)?,
            test: generate_binary_dataset(spec, cfg.test_size, test_seed)?,
        },
    })
}

fn run_cell(cfg: &ExperimentConfig, spec: &DgpSpec, cell: Cell) -> Result<Vec<ResultRow>, ExperimentError> {
    let seed = cell.seed(cfg.master_seed);
    let sample = draw_sample(cfg, spec, &cell, seed)?;
    let train = match &sample {
        Sample::Binary { train, .. } | Sample::Multinomial { train, .. } => train,
    };
    let truth = spec.beta0.support(0.0);
    let s0 = truth.len();
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = Instant::now();
        let fit = fit_method(method, train, &cfg.estimators, seed).map_err(|source| ExperimentError::Fit {
            method,
            n: cell.n,
            s0,
            replicate: cell.replicate,
            source,
        })?;
        let elapsed = start.elapsed().as_secs_f64();
        let beta = &fit.beta_hat;
        let norm_diff = beta.distance(&spec.beta0);
        let misclass_rate = match &sample {
            Sample::Binary { test, .. } => misclassification_rate(test, beta)?,
            Sample::Multinomial { test, .. } => multinomial_misclassification(test, beta),
        };
        let sm = support_metrics(&truth, &selected_support(&fit));
        rows.push(ResultRow {
            method,
            n: cell.n,
            p: cell.p,
            s0,
            replicate: cell.replicate,
            scaled_error: scaled_error(cell.n, cell.p, norm_diff),
            norm_diff,
            misclass_rate,
            type1: sm.type1,
            type2: sm.type2,
            wall_time: if cfg.record_wall_time { elapsed } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Runs the study described by `cfg` on `workers` threads.
pub fn run_study_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &n in &cfg.n_list {
        let p = cfg.p_rule.dimension(n);
        for s0 in cfg.sparsity_levels() {
            let spec = study_spec(cfg, p, s0)?;
            for replicate in 0..cfg.replicates {
                jobs.push((spec.clone(), Cell { n, p, s0, replicate }));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let chunks: Vec<Vec<ResultRow>> =
        pool.install(|| jobs.par_iter().map(|(spec, cell)| run_cell(cfg, spec, *cell)).collect::<Result<_, _>>())?;
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.method, a.n, a.s0, a.replicate).cmp(&(b.method, b.n, b.s0, b.replicate)));
    Ok(ExperimentResult { rows })
}

/// Runs the study with the configured (and environment-capped) worker count.
pub fn run_study(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    run_study_with_workers(cfg, cfg.effective_workers()?)
}

fn expect_regime(cfg: &ExperimentConfig, regime: Regime) -> Result<(), ExperimentError> {
    if cfg.regime != regime {
        return Err(ConfigError::Invalid { key: "regime".into(), reason: format!("expected {regime:?}, got {:?}", cfg.regime) }.into());
    }
    Ok(())
}

/// Scaled estimation error with `p` growing in `n`.
pub fn run_moderate_growth_study(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    expect_regime(cfg, Regime::Moderate)?;
    run_study(cfg)
}

/// Selection and estimation with a sparse true parameter.
pub fn run_sparse_study(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    expect_regime(cfg, Regime::Sparse)?;
    run_study(cfg)
}

/// Multinomial choice data, fitted through pairwise differences.
pub fn run_multinomial_study(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    expect_regime(cfg, Regime::Multinomial)?;
    run_study(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use maxscore_core::score::multinomial_score;
    use maxscore_core::score::empirical_score;

    fn config(text_extra: &str, regime: &str, methods: &str) -> ExperimentConfig {
        let text = format!(
            "schema_version = 1\nregime = \"{regime}\"\nn_list = [60, 120]\np_rule = \"fixed(4)\"\nmethods = {methods}\n\
             replicates = 3\nmaster_seed = 11\ntest_size = 200\n{text_extra}\n[output]\ncsv = \"x.csv\"\n"
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn one_row_per_method_and_replicate() {
        let cfg = config("", "moderate", r#"["svm", "logistic", "grid"]"#);
        let res = run_study_with_workers(&cfg, 1).unwrap();
        assert_eq!(res.rows.len(), 3 * 2 * 3);
        let keys: Vec<_> = res.rows.iter().map(|r| (r.method, r.n, r.s0, r.replicate)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for r in &res.rows {
            assert_eq!(r.scaled_error, scaled_error(r.n, r.p, r.norm_diff));
            assert!((0.0..=1.0).contains(&r.misclass_rate));
            assert_eq!(r.wall_time, 0.0);
        }
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let cfg = config("", "moderate", r#"["smoothed", "svm"]"#);
        assert_eq!(run_study_with_workers(&cfg, 1).unwrap(), run_study_with_workers(&cfg, 3).unwrap());
    }

    #[test]
    fn beta0_fixed_across_replicates_and_seeded() {
        let a = study_beta0(5, 10, None).unwrap();
        assert_eq!(a, study_beta0(5, 10, None).unwrap());
        assert_ne!(a, study_beta0(6, 10, None).unwrap());
        assert!(a.coords().iter().all(|&v| v > 0.0));
        let s = study_beta0(5, 30, Some(4)).unwrap();
        assert_eq!(s.support(0.0).len(), 4);
    }

    #[test]
    fn sparse_rows_carry_selection_metrics() {
        let cfg = config("s0_list = [1, 2]", "sparse", r#"["l1-logistic"]"#);
        let res = run_study_with_workers(&cfg, 2).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 3);
        for r in &res.rows {
            assert!(r.s0 == 1 || r.s0 == 2);
            assert!(r.type2 <= r.s0 && r.type1 <= r.p - r.s0);
        }
    }

    #[test]
    fn multinomial_regime_runs() {
        let cfg = config("[dgp]\nerrors = \"gaussian\"\nrho = 0.0", "multinomial", r#"["smoothed", "grid"]"#);
        let res = run_multinomial_study(&cfg).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 3);
        assert!(run_sparse_study(&cfg).is_err());
    }

    #[test]
    fn pairwise_differences_match_multinomial_score() {
        let beta0 = UnitVector::normalize(vec![1.0, -0.5, 0.25]).unwrap();
        let spec = DgpSpec::reference(beta0);
        let data = generate_multinomial_dataset(&spec, 50, 2, SeedSpec::new(4, 0)).unwrap();
        let diff = pairwise_differences(&data).unwrap();
        assert_eq!(diff, BinaryDataset::from_two_alternatives(&data).unwrap());
        let b = UnitVector::normalize(vec![0.3, 1.0, -1.0]).unwrap();
        let ms = multinomial_score(&data, &b).unwrap();
        let bs = empirical_score(&diff, &b).unwrap();
        assert_eq!(2 * ms.numerator, bs.numerator + bs.denominator as i64);
    }

    #[test]
    fn misclassification_of_true_direction_is_low_without_noise() {
        let beta0 = UnitVector::normalize(vec![1.0, 2.0]).unwrap();
        let spec = DgpSpec::new(beta0.clone(), CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma: 0.0 });
        let data = generate_multinomial_dataset(&spec, 100, 3, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(multinomial_misclassification(&data, &beta0), 0.0);
    }
}
