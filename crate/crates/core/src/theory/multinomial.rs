//! Rank ordering and curvature checks for the multinomial choice model.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::math::dot;
use crate::model::{generate_multinomial_dataset, DgpSpec, ErrorLaw, MultinomialDataset, UnitVector};
use crate::rng::{tags, SeedSpec};
use crate::score::McEstimate;

fn gaussian_sigma(spec: &DgpSpec) -> Result<f64> {
    match spec.errors {
        ErrorLaw::Gaussian { sigma } => Ok(sigma),
        _ => Err(invalid("errors", "multinomial checks need iid gaussian errors")),
    }
}

/// Choice probabilities for fixed deterministic utilities under iid
/// `N(0, sigma^2)` errors, estimated from `inner` error draws.
pub fn choice_probabilities_mc<R: Rng + ?Sized>(utilities: &[f64], sigma: f64, inner: usize, rng: &mut R) -> Vec<McEstimate> {
    let mut counts = vec![0usize; utilities.len()];
    for _ in 0..inner {
        let mut best = (0, f64::NEG_INFINITY);
        for (j, &u) in utilities.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            let v = u + sigma * e;
            if v > best.1 {
                best = (j, v);
            }
        }
        counts[best.0] += 1;
    }
    counts.into_iter().map(|c| McEstimate::from_sums(c as f64, c as f64, inner)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOrderingReport {
    pub matrices: usize,
    pub pairs_tested: usize,
    /// Pairs whose estimated probability gap is under four standard errors.
    pub pairs_skipped: usize,
    pub concordant: usize,
}

impl RankOrderingReport {
    pub fn concordance_rate(&self) -> f64 {
        if self.pairs_tested == 0 {
            1.0
        } else {
            self.concordant as f64 / self.pairs_tested as f64
        }
    }
}

/// Compares the ordering of nested-MC choice probabilities with the
/// ordering of deterministic utilities over `matrices` sampled covariate
/// matrices.
pub fn rank_ordering_check(spec: &DgpSpec, m: usize, matrices: usize, inner: usize, seed: SeedSpec) -> Result<RankOrderingReport> {
    let sigma = gaussian_sigma(spec)?;
    if m < 2 {
        return Err(invalid("m", "at least two alternatives are required"));
    }
    if inner < 2 {
        return Err(invalid("inner", format!("{inner} inner samples are too few")));
    }
    let mut sampler = spec.sampler()?;
    let mut x_rng = seed.derive(tags::COVARIATES).rng();
    let mut e_rng = seed.derive(tags::INNER).rng();
    let mut row = vec![0.0; spec.augmented_dim()];
    let mut report = RankOrderingReport { matrices, pairs_tested: 0, pairs_skipped: 0, concordant: 0 };
    let mut utilities = vec![0.0; m];
    for _ in 0..matrices {
        for u in utilities.iter_mut() {
            sampler.draw_covariates(&mut x_rng, &mut row);
            *u = sampler.true_index(&row);
        }
        let probs = choice_probabilities_mc(&utilities, sigma, inner, &mut e_rng);
        for j in 0..m {
            for k in j + 1..m {
                let (pj, pk) = (probs[j].mean, probs[k].mean);
                let se = ((pj + pk - (pj - pk) * (pj - pk)).max(0.0) / inner as f64).sqrt();
                if (pj - pk).abs() < 4.0 * se || pj == pk {
                    report.pairs_skipped += 1;
                    continue;
                }
                report.pairs_tested += 1;
                if (pj > pk) == (utilities[j] > utilities[k]) {
                    report.concordant += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Per-individual multinomial score contribution, already normalized by
/// `m (m - 1)`.
fn individual_score(data: &MultinomialDataset, i: usize, beta: &[f64], buf: &mut [f64]) -> f64 {
    for (j, u) in buf.iter_mut().enumerate() {
        *u = dot(data.alternative(i, j), beta);
    }
    let c = data.choice(i);
    let wins = buf.iter().enumerate().filter(|&(k, &u)| k != c && buf[c] > u).count();
    let m = data.m() as f64;
    wins as f64 / (m * (m - 1.0))
}

/// Monte Carlo population multinomial score.
pub fn multinomial_population_score_mc(spec: &DgpSpec, m: usize, beta: &UnitVector, mc_samples: usize, seed: SeedSpec) -> Result<McEstimate> {
    gaussian_sigma(spec)?;
    let data = generate_multinomial_dataset(spec, mc_samples, m, seed.derive(tags::MONTE_CARLO))?;
    let mut buf = vec![0.0; m];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for i in 0..data.n() {
        let v = individual_score(&data, i, beta.coords(), &mut buf);
        sum += v;
        sum_sq += v * v;
    }
    Ok(McEstimate::from_sums(sum, sum_sq, data.n()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialCurvaturePoint {
    pub distance: f64,
    pub excess: McEstimate,
    /// `excess / ||beta - beta0||^2`; NaN at the true direction.
    pub ratio: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialCurvatureReport {
    pub points: Vec<MultinomialCurvaturePoint>,
    /// Points with excess negative beyond three standard errors.
    pub violations: usize,
}

/// Paired Monte Carlo excess `S(beta0) - S(beta)` of the multinomial score,
/// every direction scored on one simulated sample.
pub fn multinomial_curvature_check(
    spec: &DgpSpec,
    m: usize,
    directions: &[UnitVector],
    mc_samples: usize,
    seed: SeedSpec,
) -> Result<MultinomialCurvatureReport> {
    gaussian_sigma(spec)?;
    if mc_samples < 2 {
        return Err(invalid("mc_samples", "at least two samples are required"));
    }
    if let Some(b) = directions.iter().find(|b| b.dim() != spec.p) {
        return Err(crate::error::Error::DimensionMismatch { expected: spec.p, got: b.dim() });
    }
    let data = generate_multinomial_dataset(spec, mc_samples, m, seed.derive(tags::MONTE_CARLO))?;
    let mut buf = vec![0.0; m];
    let base: Vec<f64> = (0..data.n()).map(|i| individual_score(&data, i, spec.beta0.coords(), &mut buf)).collect();
    let mut points = Vec::with_capacity(directions.len());
    for beta in directions {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for (i, b) in base.iter().enumerate() {
            let v = b - individual_score(&data, i, beta.coords(), &mut buf);
            sum += v;
            sum_sq += v * v;
        }
        let excess = McEstimate::from_sums(sum, sum_sq, data.n());
        let d = beta.distance(&spec.beta0);
        let ratio = if d > 0.0 { excess.mean / (d * d) } else { f64::NAN };
        let positive = excess.mean - 3.0 * excess.std_error > 0.0;
        points.push(MultinomialCurvaturePoint { distance: d, excess, ratio, positive });
    }
    let violations = points.iter().filter(|p| p.excess.mean + 3.0 * p.excess.std_error < 0.0).count();
    Ok(MultinomialCurvatureReport { points, violations })
}
