//! TOML experiment configuration.
//!
//! ```toml
//! schema_version = 1
//! regime = "moderate"          # moderate | sparse | multinomial
//! n_list = [1000, 2000, 4000]
//! p_rule = "n^1/2"             # n^1/4 | n^1/2 | n^3/4 | fixed(P)
//! methods = ["smoothed", "svm"]
//! replicates = 100
//! master_seed = 20240601
//!
//! [output]
//! csv = "results/moderate.csv"
//! svg = "results/moderate.svg"
//! ```
//!
//! Optional tables: `[dgp]`, `[estimators]` (with nested `convex`,
//! `smoothed` and `srm` tables). Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use maxscore_core::estimators::{ConvexConfig, SmoothedConfig, SrmConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "MAXSCORE_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Moderate,
    Sparse,
    Multinomial,
}

/// Dimension as a function of the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PRule {
    QuarterPower,
    SquareRoot,
    ThreeQuarterPower,
    Fixed(usize),
}

impl PRule {
    /// `floor(n^a)`, computed without trusting `powf` at exact powers.
    pub fn dimension(self, n: usize) -> usize {
        let (num, den) = match self {
            PRule::Fixed(p) => return p,
            PRule::QuarterPower => (1, 4),
            PRule::SquareRoot => (1, 2),
            PRule::ThreeQuarterPower => (3, 4),
        };
        let target = (n as u128).pow(num);
        let mut p = ((n as f64).powf(f64::from(num) / f64::from(den)).floor() as u128).saturating_sub(1);
        while (p + 1).pow(den) <= target {
            p += 1;
        }
        while p > 0 && p.pow(den) > target {
            p -= 1;
        }
        p as usize
    }
}

impl FromStr for PRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "n^1/4" => Ok(PRule::QuarterPower),
            "n^1/2" => Ok(PRule::SquareRoot),
            "n^3/4" => Ok(PRule::ThreeQuarterPower),
            _ => t
                .strip_prefix("fixed(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|v| v.parse().ok())
                .map(PRule::Fixed)
                .ok_or_else(|| format!("`{s}` is not one of n^1/4, n^1/2, n^3/4, fixed(P)")),
        }
    }
}

impl TryFrom<String> for PRule {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PRule> for String {
    fn from(r: PRule) -> String {
        r.to_string()
    }
}

impl fmt::Display for PRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PRule::QuarterPower => f.write_str("n^1/4"),
            PRule::SquareRoot => f.write_str("n^1/2"),
            PRule::ThreeQuarterPower => f.write_str("n^3/4"),
            PRule::Fixed(p) => write!(f, "fixed({p})"),
        }
    }
}

/// Estimators available to a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMethod {
    #[serde(rename = "exact-2d")]
    Exact2d,
    Grid,
    L1Logistic,
    L1Svm,
    Logistic,
    Smoothed,
    Srm,
    Svm,
}

impl StudyMethod {
    pub const ALL: [StudyMethod; 8] = [
        StudyMethod::Exact2d,
        StudyMethod::Grid,
        StudyMethod::L1Logistic,
        StudyMethod::L1Svm,
        StudyMethod::Logistic,
        StudyMethod::Smoothed,
        StudyMethod::Srm,
        StudyMethod::Svm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyMethod::Exact2d => "exact-2d",
            StudyMethod::Grid => "grid",
            StudyMethod::L1Logistic => "l1-logistic",
            StudyMethod::L1Svm => "l1-svm",
            StudyMethod::Logistic => "logistic",
            StudyMethod::Smoothed => "smoothed",
            StudyMethod::Srm => "srm",
            StudyMethod::Svm => "svm",
        }
    }
}

impl fmt::Display for StudyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StudyMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    /// `eps | X ~ N(0, max(1, |X'beta0|))`.
    Heteroscedastic,
    /// `eps ~ N(0, sigma^2)`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpConfig {
    /// AR(1) correlation of the covariates; zero gives isotropic covariates.
    pub rho: f64,
    pub errors: ErrorKind,
    /// Error scale for `errors = "gaussian"`.
    pub sigma: f64,
    /// Alternatives per individual in the multinomial regime.
    pub m: usize,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self { rho: 0.5, errors: ErrorKind::Heteroscedastic, sigma: 1.0, m: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Margin cost of the SVM hinge term.
    pub svm_cost: f64,
    /// Size of the log-spaced penalty grid used by the l1 methods.
    pub lambda_count: usize,
    pub cv_folds: usize,
    pub grid_points: usize,
    pub convex: ConvexConfig,
    pub smoothed: SmoothedConfig,
    pub srm: SrmConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            svm_cost: 1.0,
            lambda_count: 10,
            cv_folds: 2,
            grid_points: 2000,
            convex: ConvexConfig::default(),
            smoothed: SmoothedConfig::default(),
            srm: SrmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub regime: Regime,
    pub n_list: Vec<usize>,
    pub p_rule: PRule,
    /// Sparsity levels of the sparse regime; ignored otherwise.
    #[serde(default)]
    pub s0_list: Vec<usize>,
    pub methods: Vec<StudyMethod>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Size of the independent sample used for misclassification rates.
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Record elapsed fit times; off by default so output stays deterministic.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub dgp: DgpConfig,
    #[serde(default)]
    pub estimators: EstimatorConfig,
    pub output: OutputConfig,
}

fn default_test_size() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Sparsity levels studied: `s0_list` in the sparse regime, otherwise
    /// the dense parameter (reported as `s0 = p`).
    pub fn sparsity_levels(&self) -> Vec<Option<usize>> {
        match self.regime {
            Regime::Sparse => self.s0_list.iter().map(|&s| Some(s)).collect(),
            _ => vec![None],
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("{} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n_list", "at least one sample size is required"));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 10) {
            return Err(invalid("n_list", format!("sample size {n} is below 10")));
        }
        for &n in &self.n_list {
            let p = self.p_rule.dimension(n);
            if p < 2 {
                return Err(invalid("p_rule", format!("{} gives p = {p} < 2 at n = {n}", self.p_rule)));
            }
            if self.methods.contains(&StudyMethod::Exact2d) && p != 2 {
                return Err(invalid("methods", format!("exact-2d needs p = 2, but {} gives p = {p} at n = {n}", self.p_rule)));
            }
            for s in self.s0_list.iter().filter(|_| self.regime == Regime::Sparse) {
                if *s == 0 || *s > p {
                    return Err(invalid("s0_list", format!("s0 = {s} is not in 1..={p} at n = {n}")));
                }
            }
        }
        if self.regime == Regime::Sparse && self.s0_list.is_empty() {
            return Err(invalid("s0_list", "the sparse regime needs at least one sparsity level"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "at least one method is required"));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("methods", "methods must be distinct"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates", "at least one replicate is required"));
        }
        if self.test_size == 0 {
            return Err(invalid("test_size", "the test sample must be nonempty"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers", "at least one worker is required"));
        }
        self.validate_dgp()?;
        self.validate_estimators()
    }

    fn validate_dgp(&self) -> Result<(), ConfigError> {
        let d = &self.dgp;
        if !(d.rho.abs() < 1.0) {
            return Err(invalid("dgp.rho", format!("{} is not in (-1, 1)", d.rho)));
        }
        if !(d.sigma >= 0.0 && d.sigma.is_finite()) {
            return Err(invalid("dgp.sigma", format!("{} is not a finite nonnegative scale", d.sigma)));
        }
        if self.regime == Regime::Multinomial {
            if d.errors != ErrorKind::Gaussian {
                return Err(invalid("dgp.errors", "the multinomial regime needs gaussian errors"));
            }
            if d.m < 2 {
                return Err(invalid("dgp.m", "at least two alternatives are required"));
            }
        }
        Ok(())
    }

    fn validate_estimators(&self) -> Result<(), ConfigError> {
        let e = &self.estimators;
        if !(e.svm_cost > 0.0 && e.svm_cost.is_finite()) {
            return Err(invalid("estimators.svm_cost", format!("{} is not a positive cost", e.svm_cost)));
        }
        if e.lambda_count == 0 {
            return Err(invalid("estimators.lambda_count", "the penalty grid must be nonempty"));
        }
        if e.cv_folds < 2 {
            return Err(invalid("estimators.cv_folds", "at least two folds are required"));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < e.cv_folds) {
            return Err(invalid("estimators.cv_folds", format!("{} folds exceed n = {n}", e.cv_folds)));
        }
        if e.grid_points == 0 {
            return Err(invalid("estimators.grid_points", "at least one grid point is required"));
        }
        if e.smoothed.schedule.is_empty() || e.smoothed.schedule.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(invalid("estimators.smoothed.schedule", "temperatures must be positive and finite"));
        }
        if !(e.convex.tol > 0.0) || e.convex.max_iter == 0 || e.convex.svm_iter == 0 || !(e.convex.ridge >= 0.0) {
            return Err(invalid("estimators.convex", "iteration caps must be positive, tol positive and ridge nonnegative"));
        }
        e.srm.validate().map_err(|err| invalid("estimators.srm", err.to_string()))
    }

    /// Workers to use: the configured count (or all cores), capped by the
    /// environment variable when it is set.
    pub fn effective_workers(&self) -> Result<usize, ConfigError> {
        let base = self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        match std::env::var(WORKERS_ENV) {
            Ok(v) => {
                let cap: usize = v
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&c| c > 0)
                    .ok_or_else(|| invalid(WORKERS_ENV, format!("`{v}` is not a positive integer")))?;
                Ok(base.min(cap))
            }
            Err(_) => Ok(base),
        }
    }
}
