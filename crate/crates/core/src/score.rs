//! Empirical and population score functionals.

use alloc::format;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{dot, normal_cdf, normal_pdf, simpson, PI};
use crate::model::{sign, BinaryDataset, CovariateLaw, DgpSpec, ErrorLaw, MultinomialDataset, UnitVector};
use crate::rng::{tags, SeedSpec};

/// A score together with the exact integer ratio it was computed from.
///
/// Binary: `numerator = agreements - disagreements`, `denominator = n`.
/// Multinomial: `numerator` counts strict pairwise wins of the chosen
/// alternative, `denominator = n m (m - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreValue {
    pub value: f64,
    pub numerator: i64,
    pub denominator: u64,
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    pub(crate) fn from_sums(sum: f64, sum_sq: f64, samples: usize) -> Self {
        let n = samples as f64;
        let mean = sum / n;
        let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        Self { mean, std_error: (var / n).sqrt(), samples }
    }

    /// True when `|mean - target| <= k * std_error` (with a tiny absolute
    /// floor for zero-variance estimates).
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-12
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Number of points with `y_i != sgn(x_i'beta)`. Accepts any finite vector.
pub fn disagreements(data: &BinaryDataset, beta: &[f64]) -> Result<usize> {
    check_dim(data.p(), beta.len())?;
    Ok(data.rows().filter(|(x, y)| sign(dot(x, beta)) != *y).count())
}

fn binary_from_disagreements(d: usize, n: usize) -> ScoreValue {
    ScoreValue {
        value: 1.0 - 2.0 * (d as f64 / n as f64),
        numerator: n as i64 - 2 * d as i64,
        denominator: n as u64,
    }
}

/// `S_n(beta) = (1/n) sum y_i sgn(x_i'beta)`.
pub fn empirical_score(data: &BinaryDataset, beta: &UnitVector) -> Result<ScoreValue> {
    score_of(data, beta.coords())
}

/// [`empirical_score`] for an arbitrary (not necessarily unit) direction.
pub fn score_of(data: &BinaryDataset, beta: &[f64]) -> Result<ScoreValue> {
    let d = disagreements(data, beta)?;
    Ok(binary_from_disagreements(d, data.n()))
}

/// Fraction of misclassified points; `score = 1 - 2 risk` bit for bit.
pub fn empirical_risk(data: &BinaryDataset, beta: &UnitVector) -> Result<f64> {
    Ok(disagreements(data, beta.coords())? as f64 / data.n() as f64)
}

/// Strict-inequality multinomial score normalized by `n m (m - 1)`.
pub fn multinomial_score(data: &MultinomialDataset, beta: &UnitVector) -> Result<ScoreValue> {
    check_dim(data.p(), beta.dim())?;
    let m = data.m();
    let mut utilities = alloc::vec![0.0; m];
    let mut wins: i64 = 0;
    for i in 0..data.n() {
        for (j, u) in utilities.iter_mut().enumerate() {
            *u = dot(data.alternative(i, j), beta.coords());
        }
        let c = data.choice(i);
        wins += utilities.iter().enumerate().filter(|&(k, &u)| k != c && utilities[c] > u).count() as i64;
    }
    let denominator = (data.n() * m * (m - 1)) as u64;
    Ok(ScoreValue { value: wins as f64 / denominator as f64, numerator: wins, denominator })
}

/// `P(sgn(X'b1) != sgn(X'b2))` for `X ~ N(0, I)`, i.e. `arccos(<b1, b2>) / pi`.
pub fn gaussian_wedge_probability(beta1: &UnitVector, beta2: &UnitVector) -> Result<f64> {
    check_dim(beta1.dim(), beta2.dim())?;
    Ok(angle(beta1, beta2) / PI)
}

// acos loses precision near |dot| = 1; the chord form covers that range
fn angle(a: &UnitVector, b: &UnitVector) -> f64 {
    let dot = a.dot(b).clamp(-1.0, 1.0);
    if dot.abs() <= 0.5 {
        dot.acos()
    } else if dot > 0.0 {
        2.0 * (a.distance(b) / 2.0).asin()
    } else {
        PI - 2.0 * (a.distance(&b.negated()) / 2.0).asin()
    }
}

fn check_mc(spec: &DgpSpec, beta: &UnitVector, mc_samples: usize) -> Result<()> {
    if mc_samples < 100 {
        return Err(invalid("mc_samples", format!("{mc_samples} is below the minimum of 100")));
    }
    check_dim(spec.augmented_dim(), beta.dim())
}

/// Monte Carlo estimate of `S(beta) = E[Y sgn(X'beta)]` from simulated labels.
pub fn population_score_mc(spec: &DgpSpec, beta: &UnitVector, mc_samples: usize, seed: SeedSpec) -> Result<McEstimate> {
    check_mc(spec, beta, mc_samples)?;
    let mut sampler = spec.sampler()?;
    let mut x_rng = seed.derive(tags::MONTE_CARLO).derive(tags::COVARIATES).rng();
    let mut e_rng = seed.derive(tags::MONTE_CARLO).derive(tags::ERRORS).rng();
    let mut row = alloc::vec![0.0; spec.augmented_dim()];
    let mut sum = 0.0;
    for _ in 0..mc_samples {
        sampler.draw_covariates(&mut x_rng, &mut row);
        let y = sampler.draw_label(&mut e_rng, &row);
        sum += f64::from(y * sign(dot(&row, beta.coords())));
    }
    // Y sgn(X'beta) is +-1, so the second moment is exactly one.
    Ok(McEstimate::from_sums(sum, mc_samples as f64, mc_samples))
}

/// Monte Carlo estimate of `S(beta0) - S(beta) = 4 E[|eta(X) - 1/2| 1{wedge}]`.
pub fn excess_risk_mc(spec: &DgpSpec, beta: &UnitVector, mc_samples: usize, seed: SeedSpec) -> Result<McEstimate> {
    check_mc(spec, beta, mc_samples)?;
    let mut sampler = spec.sampler()?;
    let mut rng = seed.derive(tags::MONTE_CARLO).derive(tags::COVARIATES).rng();
    let mut row = alloc::vec![0.0; spec.augmented_dim()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc_samples {
        sampler.draw_covariates(&mut rng, &mut row);
        if sign(sampler.true_index(&row)) != sign(dot(&row, beta.coords())) {
            let v = 4.0 * (sampler.eta(&row) - 0.5).abs();
            sum += v;
            sum_sq += v * v;
        }
    }
    Ok(McEstimate::from_sums(sum, sum_sq, mc_samples))
}

/// Exact population score by one-dimensional quadrature for isotropic
/// Gaussian covariates with independent `N(0, sigma^2)` errors and no
/// intercept. Returns `None` for any other process.
pub fn population_score_quadrature(spec: &DgpSpec, beta: &UnitVector) -> Result<Option<f64>> {
    check_dim(spec.augmented_dim(), beta.dim())?;
    let sigma = match (spec.covariates, spec.errors, spec.intercept) {
        (CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma }, None) => sigma,
        _ => return Ok(None),
    };
    let rho = spec.beta0.dot(beta).clamp(-1.0, 1.0);
    if sigma == 0.0 {
        // E[sgn(U) sgn(V)] for a standard bivariate normal with correlation rho
        return Ok(Some(1.0 - 2.0 * angle(&spec.beta0, beta) / PI));
    }
    let signal = |u: f64| 2.0 * normal_cdf(u / sigma) - 1.0;
    let tilt = |u: f64| {
        let r = (1.0 - rho * rho).sqrt();
        if r == 0.0 {
            f64::from(sign(rho * u))
        } else {
            2.0 * normal_cdf(rho * u / r) - 1.0
        }
    };
    let f = |u: f64| signal(u) * tilt(u) * normal_pdf(u);
    // both factors are odd, so the integrand is even
    Ok(Some(2.0 * simpson(f, 0.0, 12.0, 40_000)))
}
