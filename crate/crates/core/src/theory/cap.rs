//! Spherical cap measure on `S^{p-1}`.

use alloc::format;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::{tags, SeedSpec};
use crate::score::McEstimate;

/// `(1/2)(r/2)^{p-1}` and `r^{p-1} / (2 sqrt2)`.
pub fn spherical_cap_bounds(p: usize, r: f64) -> (f64, f64) {
    let k = (p - 1) as i32;
    (0.5 * (r / 2.0).powi(k), r.powi(k) / (2.0 * 2.0f64.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapCheck {
    pub estimate: McEstimate,
    pub lower: f64,
    pub upper: f64,
    /// The bounds are only established for `p >= 8`; smaller `p` is
    /// reported without a verdict.
    pub skipped: bool,
    pub pass: bool,
}

/// Monte Carlo measure of `D(e_1, r) = {y : ||y - e_1|| <= r}`, which is
/// the set `y_1 >= 1 - r^2 / 2`.
pub fn spherical_cap_check(p: usize, r: f64, mc_samples: usize, seed: SeedSpec) -> Result<CapCheck> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid("r", format!("{r} is not in (0, 1]")));
    }
    if p < 2 {
        return Err(invalid("p", "dimension must be at least 2"));
    }
    if mc_samples < 2 {
        return Err(invalid("mc_samples", "at least two samples are required"));
    }
    let threshold = 1.0 - r * r / 2.0;
    let mut rng = seed.derive(tags::MONTE_CARLO).rng();
    let mut hits = 0usize;
    for _ in 0..mc_samples {
        let z1: f64 = rng.sample(StandardNormal);
        let mut sq = z1 * z1;
        for _ in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            sq += z * z;
        }
        // y_1 = z_1 / ||z|| >= threshold, with threshold >= 1/2 > 0
        if z1 > 0.0 && z1 * z1 >= threshold * threshold * sq {
            hits += 1;
        }
    }
    let estimate = McEstimate::from_sums(hits as f64, hits as f64, mc_samples);
    let (lower, upper) = spherical_cap_bounds(p, r);
    let skipped = p < 8;
    let se = estimate.std_error;
    let pass = !skipped && estimate.mean >= lower - 3.0 * se && estimate.mean <= upper + 3.0 * se;
    Ok(CapCheck { estimate, lower, upper, skipped, pass })
}

/// Exact cap measure `P(y_1 >= h)` by quadrature of the marginal density
/// of `y_1`, proportional to `(1 - t^2)^{(p-3)/2}` on `[-1, 1]`.
pub fn spherical_cap_exact(p: usize, r: f64) -> f64 {
    let h = 1.0 - r * r / 2.0;
    let e = (p as f64 - 3.0) / 2.0;
    let f = |t: f64| (1.0 - t * t).max(0.0).powf(e);
    let total = crate::math::simpson(f, -1.0, 1.0, 200_000);
    crate::math::simpson(f, h, 1.0, 200_000) / total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values_at_p8_r1() {
        let (lo, hi) = spherical_cap_bounds(8, 1.0);
        assert_eq!(lo, 0.003_906_25);
        assert!((hi - 0.353_553_390_593_273_8).abs() < 1e-15);
    }

    #[test]
    fn domain_guards() {
        assert!(spherical_cap_check(8, 2.0, 100, SeedSpec::new(1, 0)).is_err());
        assert!(spherical_cap_check(8, 0.0, 100, SeedSpec::new(1, 0)).is_err());
        let small = spherical_cap_check(4, 0.5, 1000, SeedSpec::new(1, 0)).unwrap();
        assert!(small.skipped && !small.pass);
    }

    #[test]
    fn exact_cap_matches_closed_form_in_three_dimensions() {
        // on S^2 the cap of height 1 - h has measure (1 - h) / 2
        let r: f64 = 0.8;
        let exact = spherical_cap_exact(3, r);
        assert!((exact - r * r / 4.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let c = spherical_cap_check(8, 1.0, 400_000, SeedSpec::new(2, 0)).unwrap();
        assert!(c.pass);
        assert!(c.estimate.agrees_with(spherical_cap_exact(8, 1.0), 3.0), "{c:?}");
        let exact = spherical_cap_exact(16, 0.5);
        let (lo, hi) = spherical_cap_bounds(16, 0.5);
        assert!(lo <= exact && exact <= hi);
    }
}
