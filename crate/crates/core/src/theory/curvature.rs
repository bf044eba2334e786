//! Curvature of the population score around the true direction.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::model::{DgpSpec, UnitVector};
use crate::rng::SeedSpec;
use crate::score::{excess_risk_mc, McEstimate};

use super::margin::{default_t_grid, transition_constant_estimate};

/// Default upper end of the margin range.
pub const T_STAR: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePoint {
    pub distance: f64,
    pub excess: McEstimate,
    /// `excess / min(d^2 / C, 2 t* d)`; undefined (NaN) at `d = 0`.
    pub ratio: f64,
    /// Excess risk positive at three standard errors.
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub fitted_c: f64,
    pub points: Vec<CurvaturePoint>,
    /// Points whose excess risk is negative beyond three standard errors.
    pub violations: usize,
}

/// Excess risk at each direction, all evaluated on one shared covariate
/// sample so that the differences between directions are paired.
pub fn curvature_check(spec: &DgpSpec, directions: &[UnitVector], mc_samples: usize, seed: SeedSpec) -> Result<CurvatureReport> {
    if directions.is_empty() {
        return Err(invalid("directions", "at least one direction is required"));
    }
    let margin = transition_constant_estimate(spec, &default_t_grid(T_STAR, 10), mc_samples, seed.derive(1))?;
    let c = margin.fitted_c;
    let truth = true_direction(spec)?;
    let mut points = Vec::with_capacity(directions.len());
    for beta in directions {
        let excess = excess_risk_mc(spec, beta, mc_samples, seed)?;
        let d = beta.distance(&truth);
        let scale = if c > 0.0 { (d * d / c).min(2.0 * T_STAR * d) } else { 2.0 * T_STAR * d };
        let ratio = if d > 0.0 { excess.mean / scale } else { f64::NAN };
        let positive = excess.mean - 3.0 * excess.std_error > 0.0;
        points.push(CurvaturePoint { distance: d, excess, ratio, positive });
    }
    let violations = points.iter().filter(|p| p.excess.mean + 3.0 * p.excess.std_error < 0.0).count();
    Ok(CurvatureReport { fitted_c: c, points, violations })
}

/// The true parameter in the covariate space of `spec`, including a
/// leading intercept when present.
pub fn true_direction(spec: &DgpSpec) -> Result<UnitVector> {
    match spec.intercept {
        None => Ok(spec.beta0.clone()),
        Some(tau) => {
            let mut v = alloc::vec![tau];
            v.extend_from_slice(spec.beta0.coords());
            UnitVector::normalize(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_model_curvature() {
        let beta0 = UnitVector::normalize(alloc::vec![2.0, 1.0, -1.0, 0.5]).unwrap();
        let toward = UnitVector::basis(4, 3).unwrap();
        let spec = DgpSpec::reference(beta0.clone());
        let dirs: Vec<UnitVector> = [0.0, 0.1, 0.2, 0.4, 0.8].iter().map(|&d| beta0.at_distance(&toward, d).unwrap()).collect();
        let r = curvature_check(&spec, &dirs, 200_000, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.points[0].excess.mean, 0.0);
        assert!(r.points[1..].iter().all(|p| p.positive));
        for (p, &d) in r.points.iter().zip(&[0.0, 0.1, 0.2, 0.4, 0.8]) {
            assert!((p.distance - d).abs() < 1e-12);
        }
        assert!(r.points[3].excess.mean >= r.points[2].excess.mean);
        assert!(r.points[1..].iter().all(|p| p.ratio > 0.0 && p.ratio.is_finite()));
    }
}
