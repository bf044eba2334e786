//! Bernoulli divergences and the grid sweeps of their quadratic bounds.

use alloc::format;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Absolute slack granted to a bound for floating-point rounding.
const ROUNDING_SLACK: f64 = 1e-14;

/// `KL(Ber(p) || Ber(q))` with `0 ln 0 = 0`; infinite off the support of `q`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("{p} is not a probability")));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid("q", format!("{q} is not a probability")));
    }
    let term = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    Ok(term(p, q) + term(1.0 - p, 1.0 - q))
}

/// `(16/3)(p - q)^2`, valid for `q in [1/4, 3/4]`.
pub fn kl_quadratic_bound(p: f64, q: f64) -> f64 {
    16.0 / 3.0 * (p - q) * (p - q)
}

/// Squared Hellinger distance `1 - sqrt(p1 p2) - sqrt((1-p1)(1-p2))`.
pub fn hellinger_bernoulli(p1: f64, p2: f64) -> Result<f64> {
    for (name, v) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, format!("{v} is not a probability")));
        }
    }
    Ok(1.0 - (p1 * p2).sqrt() - ((1.0 - p1) * (1.0 - p2)).sqrt())
}

/// `nu^2 / (4 sqrt3 s (1 - s))` with `nu = p2 - p1`, `s = (p1 + p2) / 2`;
/// valid for `p1, p2 in [1/4, 3/4]`.
pub fn hellinger_quadratic_bound(p1: f64, p2: f64) -> f64 {
    let nu = p2 - p1;
    let s = 0.5 * (p1 + p2);
    nu * nu / (4.0 * 3.0f64.sqrt() * s * (1.0 - s))
}

/// Outcome of a pointwise bound sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport {
    pub points: usize,
    pub violations: usize,
    /// Largest `value - bound` over the grid.
    pub worst_gap: f64,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> + Clone {
    let k = ((hi - lo) / step).round() as usize;
    (0..=k).map(move |i| if i == k { hi } else { lo + i as f64 * step })
}

fn sweep<F: Fn(f64, f64) -> Result<(f64, f64)>>(
    a: (f64, f64),
    b: (f64, f64),
    step: f64,
    f: F,
) -> Result<SweepReport> {
    if !(step > 0.0) {
        return Err(invalid("step", "grid step must be positive"));
    }
    let mut report = SweepReport { points: 0, violations: 0, worst_gap: f64::NEG_INFINITY };
    for u in grid(a.0, a.1, step) {
        for v in grid(b.0, b.1, step) {
            let (value, bound) = f(u, v)?;
            report.points += 1;
            report.worst_gap = report.worst_gap.max(value - bound);
            if value > bound + ROUNDING_SLACK {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Sweeps `p in [0, 1]`, `q in [1/4, 3/4]` and counts violations of the KL bound.
pub fn kl_bound_check(step: f64) -> Result<SweepReport> {
    sweep((0.0, 1.0), (0.25, 0.75), step, |p, q| Ok((kl_bernoulli(p, q)?, kl_quadratic_bound(p, q))))
}

/// Sweeps `p1, p2 in [1/4, 3/4]` and counts violations of the Hellinger bound.
pub fn hellinger_bound_check(step: f64) -> Result<SweepReport> {
    sweep((0.25, 0.75), (0.25, 0.75), step, |a, b| {
        Ok((hellinger_bernoulli(a, b)?, hellinger_quadratic_bound(a, b)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
        let v = kl_bernoulli(0.5, 0.25).unwrap();
        let by_hand = 0.5 * 2.0f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((v - by_hand).abs() < 1e-15);
        assert!((v - 0.143_841).abs() < 1e-6);
        assert!((kl_quadratic_bound(0.5, 0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(kl_bernoulli(0.5, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(kl_bernoulli(1.0, 1.0).unwrap(), 0.0);
        assert!(kl_bernoulli(1.1, 0.5).is_err());
    }

    #[test]
    fn hellinger_examples() {
        assert!(hellinger_bernoulli(0.4, 0.4).unwrap().abs() < 1e-15);
        let v = hellinger_bernoulli(0.25, 0.75).unwrap();
        assert!((v - (1.0 - 3.0f64.sqrt() / 2.0)).abs() < 1e-15);
        let bound = hellinger_quadratic_bound(0.25, 0.75);
        // 0.25 / (4 sqrt3 * 0.25)
        assert!((bound - 1.0 / (4.0 * 3.0f64.sqrt())).abs() < 1e-15);
        assert!(v <= bound);
    }

    #[test]
    fn sweeps_have_no_violations() {
        let kl = kl_bound_check(0.005).unwrap();
        assert_eq!(kl.points, 201 * 101);
        assert!(kl.passed(), "{kl:?}");
        let h = hellinger_bound_check(0.005).unwrap();
        assert_eq!(h.points, 101 * 101);
        assert!(h.passed(), "{h:?}");
    }

    #[test]
    fn kl_sweep_detects_a_false_bound() {
        // outside q in [1/4, 3/4] the quadratic bound fails near the edges
        let r = sweep((0.0, 1.0), (0.01, 0.05), 0.01, |p, q| Ok((kl_bernoulli(p, q)?, kl_quadratic_bound(p, q)))).unwrap();
        assert!(r.violations > 0);
    }
}
