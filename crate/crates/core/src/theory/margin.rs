//! Transition (margin) constant `P(|eta(X) - 1/2| <= t) <= C t`.

use alloc::format;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::model::DgpSpec;
use crate::rng::{tags, SeedSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct MarginEstimate {
    pub t_grid: Vec<f64>,
    pub prob: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Least-squares slope through the origin of `prob` against `t`.
    pub fitted_c: f64,
}

/// Monte Carlo margin probabilities from the closed-form `eta` of `spec`.
pub fn transition_constant_estimate(
    spec: &DgpSpec,
    t_grid: &[f64],
    mc_samples: usize,
    seed: SeedSpec,
) -> Result<MarginEstimate> {
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "at least one threshold is required"));
    }
    if let Some(&t) = t_grid.iter().find(|t| !(0.0..0.5).contains(*t)) {
        return Err(invalid("t_grid", format!("{t} is not in [0, 1/2)")));
    }
    if mc_samples < 2 {
        return Err(invalid("mc_samples", "at least two samples are required"));
    }
    let mut sampler = spec.sampler()?;
    let mut rng = seed.derive(tags::MONTE_CARLO).rng();
    let mut row = alloc::vec![0.0; spec.augmented_dim()];
    let mut gaps: Vec<f64> = (0..mc_samples)
        .map(|_| {
            sampler.draw_covariates(&mut rng, &mut row);
            (sampler.eta(&row) - 0.5).abs()
        })
        .collect();
    gaps.sort_unstable_by(f64::total_cmp);
    let n = mc_samples as f64;
    let prob: Vec<f64> = t_grid.iter().map(|&t| gaps.partition_point(|&g| g <= t) as f64 / n).collect();
    let std_errors = prob.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
    let (num, den) = t_grid.iter().zip(&prob).fold((0.0, 0.0), |(a, b), (&t, &q)| (a + t * q, b + t * t));
    let fitted_c = if den > 0.0 { num / den } else { 0.0 };
    Ok(MarginEstimate { t_grid: t_grid.to_vec(), prob, std_errors, fitted_c })
}

/// `k` evenly spaced thresholds in `(0, t_max]`.
pub fn default_t_grid(t_max: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|i| t_max * i as f64 / k as f64).collect()
}
