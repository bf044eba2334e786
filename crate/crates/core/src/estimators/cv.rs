//! K-fold cross-validation of the `l1` penalty.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;

use super::convex::{finish, fit_raw, ConvexConfig, ConvexMethod};
use super::{EstimateResult, Method};
use crate::error::{invalid, Result};
use crate::model::BinaryDataset;
use crate::rng::{tags, SeedSpec};
use crate::score::score_of;

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best_lambda: f64,
    /// Mean held-out score per grid entry, in grid order.
    pub mean_scores: Vec<f64>,
}

/// `k` penalties log-spaced from `1e-4` to `1`.
pub fn default_lambda_grid(k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1e-4];
    }
    (0..k).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / (k - 1) as f64)).collect()
}

/// Fold label of each row: a seeded permutation dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: SeedSpec) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed.derive(tags::FOLDS).rng());
    let mut label = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        label[i] = pos % folds;
    }
    label
}

/// Chooses the penalty with the best mean held-out empirical score; ties go
/// to the smallest penalty. Held-out rows are scored with the raw fitted
/// vector, so a fully shrunk fit predicts `+1` everywhere.
pub fn cross_validate(
    data: &BinaryDataset,
    method: ConvexMethod,
    lambdas: &[f64],
    folds: usize,
    seed: SeedSpec,
    cfg: &ConvexConfig,
) -> Result<CvOutcome> {
    if lambdas.is_empty() {
        return Err(invalid("lambdas", "the penalty grid is empty"));
    }
    if folds < 2 || folds > data.n() {
        return Err(invalid("folds", format!("{folds} folds for {} rows", data.n())));
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(**l >= 0.0)) {
        return Err(invalid("lambdas", format!("{bad} is not a nonnegative penalty")));
    }
    let labels = fold_assignment(data.n(), folds, seed);
    // fit from the largest penalty down so each fit warm-starts the next
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]).then(a.cmp(&b)));
    let mut totals = vec![0.0; lambdas.len()];
    for k in 0..folds {
        let train: Vec<usize> = (0..data.n()).filter(|&i| labels[i] != k).collect();
        let test: Vec<usize> = (0..data.n()).filter(|&i| labels[i] == k).collect();
        let (train, test) = (data.subset(&train), data.subset(&test));
        let mut warm: Option<Vec<f64>> = None;
        for &li in &order {
            let fit = fit_raw(&train, method, lambdas[li], cfg, warm.as_deref())?;
            totals[li] += score_of(&test, &fit.beta)?.value;
            warm = Some(fit.beta);
        }
    }
    let mean_scores: Vec<f64> = totals.iter().map(|t| t / folds as f64).collect();
    let mut best = 0;
    for i in 1..lambdas.len() {
        let (s, b) = (mean_scores[i], mean_scores[best]);
        if s > b || (s == b && lambdas[i] < lambdas[best]) {
            best = i;
        }
    }
    Ok(CvOutcome { best_lambda: lambdas[best], mean_scores })
}

/// Cross-validates the penalty and refits on all rows.
pub fn cv_fit(
    data: &BinaryDataset,
    method: ConvexMethod,
    lambdas: &[f64],
    folds: usize,
    seed: SeedSpec,
    cfg: &ConvexConfig,
) -> Result<(EstimateResult, CvOutcome)> {
    let cv = cross_validate(data, method, lambdas, folds, seed, cfg)?;
    let fit = fit_raw(data, method, cv.best_lambda, cfg, None)?;
    let tag = match method {
        ConvexMethod::Logistic => Method::Logistic,
        ConvexMethod::Svm { .. } => Method::Svm,
    };
    Ok((finish(data, fit, tag)?, cv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_binary_dataset, DgpSpec, UnitVector};

    fn data() -> BinaryDataset {
        let beta = UnitVector::normalize(vec![1.0, -2.0, 0.0, 0.5]).unwrap();
        generate_binary_dataset(&DgpSpec::reference(beta), 300, SeedSpec::new(8, 0)).unwrap()
    }

    #[test]
    fn single_entry_grid() {
        let r = cross_validate(&data(), ConvexMethod::Logistic, &[0.05], 2, SeedSpec::new(1, 0), &ConvexConfig::default()).unwrap();
        assert_eq!(r.best_lambda, 0.05);
        assert!(cross_validate(&data(), ConvexMethod::Logistic, &[], 2, SeedSpec::new(1, 0), &ConvexConfig::default()).is_err());
        assert!(cross_validate(&data(), ConvexMethod::Logistic, &[0.1], 1, SeedSpec::new(1, 0), &ConvexConfig::default()).is_err());
    }

    #[test]
    fn full_shrinkage_is_not_selected() {
        let grid = [1e6, 1e-3, 1e-2];
        let r = cross_validate(&data(), ConvexMethod::Logistic, &grid, 2, SeedSpec::new(1, 0), &ConvexConfig::default()).unwrap();
        assert_ne!(r.best_lambda, 1e6);
    }

    #[test]
    fn deterministic_given_seed() {
        let grid = default_lambda_grid(6);
        let cfg = ConvexConfig::default();
        let a = cross_validate(&data(), ConvexMethod::Svm { cost: 1.0 }, &grid, 3, SeedSpec::new(2, 0), &cfg).unwrap();
        let b = cross_validate(&data(), ConvexMethod::Svm { cost: 1.0 }, &grid, 3, SeedSpec::new(2, 0), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_and_folds() {
        let g = default_lambda_grid(5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[4] - 1.0).abs() < 1e-15);
        let labels = fold_assignment(11, 2, SeedSpec::new(0, 0));
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 6);
    }
}
