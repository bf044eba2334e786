//! Random-grid maximizer of the empirical score.

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use super::{EstimateResult, Method};
use crate::error::{invalid, Result};
use crate::model::{sample_unit_sphere_with, BinaryDataset};
use crate::rng::{tags, SeedSpec};
use crate::score::disagreements;

/// Grid size `p (8n/p)^{(p-1)/3}` sufficient for the rate-optimal grid
/// estimator.
pub fn theoretical_grid_size(n: usize, p: usize) -> f64 {
    let (n, p) = (n as f64, p as f64);
    p * (8.0 * n / p).powf((p - 1.0) / 3.0)
}

/// [`theoretical_grid_size`] rounded up and capped at `budget`.
pub fn capped_grid_size(n: usize, p: usize, budget: usize) -> usize {
    let t = theoretical_grid_size(n, p).ceil();
    if t.is_finite() && t < budget as f64 {
        (t as usize).max(1)
    } else {
        budget
    }
}

/// Scores `grid_points` sequential uniform sphere draws and returns the first
/// maximizer. The draws form one seeded stream, so a larger grid extends a
/// smaller one with the same seed.
pub fn grid_estimator(data: &BinaryDataset, grid_points: usize, seed: SeedSpec) -> Result<EstimateResult> {
    if grid_points == 0 {
        return Err(invalid("grid_points", "at least one grid point is required"));
    }
    let mut rng = seed.derive(tags::GRID).rng();
    let mut best = sample_unit_sphere_with(data.p(), &mut rng);
    let mut best_d = disagreements(data, best.coords())?;
    for _ in 1..grid_points {
        let cand = sample_unit_sphere_with(data.p(), &mut rng);
        let d = disagreements(data, cand.coords())?;
        if d < best_d {
            best = cand;
            best_d = d;
        }
    }
    EstimateResult::scored(data, best, Method::Grid, grid_points as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::exact_max_score_2d;
    use crate::model::{generate_binary_dataset, sample_unit_sphere, CovariateLaw, DgpSpec, ErrorLaw, UnitVector};
    use crate::score::empirical_score;

    fn noisy(p: usize, n: usize, seed: u64) -> BinaryDataset {
        let beta = UnitVector::normalize((0..p).map(|i| 1.0 + i as f64).collect()).unwrap();
        generate_binary_dataset(&DgpSpec::reference(beta), n, SeedSpec::new(seed, 0)).unwrap()
    }

    #[test]
    fn single_point_grid_returns_the_draw() {
        let d = noisy(3, 20, 1);
        let seed = SeedSpec::new(4, 2);
        let r = grid_estimator(&d, 1, seed).unwrap();
        let first = sample_unit_sphere(3, seed.derive(tags::GRID)).unwrap();
        assert_eq!(r.beta_hat, first);
        assert!(grid_estimator(&d, 0, seed).is_err());
    }

    #[test]
    fn separable_plane_data() {
        let beta = UnitVector::normalize(alloc::vec![1.0, -2.0]).unwrap();
        let spec = DgpSpec::new(beta, CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma: 0.0 });
        let n = 100;
        let d = generate_binary_dataset(&spec, n, SeedSpec::new(2, 0)).unwrap();
        let r = grid_estimator(&d, 10_000, SeedSpec::new(2, 1)).unwrap();
        assert!(r.achieved_score.value >= 1.0 - 2.0 / n as f64);
    }

    #[test]
    fn nested_grids_are_monotone() {
        let d = noisy(4, 150, 3);
        let seed = SeedSpec::new(7, 7);
        let s: alloc::vec::Vec<f64> = [100, 1000, 10_000].iter().map(|&g| grid_estimator(&d, g, seed).unwrap().achieved_score.value).collect();
        assert!(s[0] <= s[1] && s[1] <= s[2]);
    }

    #[test]
    fn scale_free() {
        let d = noisy(2, 80, 5);
        let scaled = d.scaled(37.5);
        let seed = SeedSpec::new(1, 1);
        assert_eq!(grid_estimator(&d, 500, seed).unwrap().beta_hat, grid_estimator(&scaled, 500, seed).unwrap().beta_hat);
        let a = exact_max_score_2d(&d).unwrap();
        let b = exact_max_score_2d(&scaled).unwrap();
        assert_eq!(a.achieved_score, b.achieved_score);
        assert_eq!(empirical_score(&scaled, &a.beta_hat).unwrap(), a.achieved_score);
    }

    #[test]
    fn theoretical_size() {
        assert_eq!(theoretical_grid_size(100, 1), 1.0);
        // p = 4, n = 1000: 4 * 2000^1
        assert!((theoretical_grid_size(1000, 4) - 8000.0).abs() < 1e-9);
        assert_eq!(capped_grid_size(1000, 4, 500), 500);
        assert_eq!(capped_grid_size(1000, 4, 10_000), 8000);
    }
}
