//! Exact maximizer of the empirical score on the unit circle.
//!
//! Point `x_i = r_i (cos phi_i, sin phi_i)` has `sgn(x_i'beta(theta)) = +1`
//! exactly on the closed arc `[phi_i - pi/2, phi_i + pi/2]`. The score is
//! therefore piecewise constant between the `2n` arc endpoints, and at an
//! endpoint every point whose arc starts or ends there counts as `+1`. A
//! sweep over the sorted endpoints yields the value of every open arc and
//! every endpoint; the best candidates are then re-scored exactly.

use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use super::{EstimateResult, Method};
use crate::error::{invalid, Result};
use crate::math::{dot, PI};
use crate::model::{sign, BinaryDataset, UnitVector};
use crate::score::empirical_score;

const TAU: f64 = 2.0 * PI;
/// Endpoints closer than this (in radians) are treated as one.
const CLUSTER_TOL: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Event {
    angle: f64,
    /// `+2 y_i` when the arc starts here, `-2 y_i` when it ends.
    delta: i64,
    starts: bool,
    /// The direction orthogonal to `x_i` at this endpoint, unnormalized.
    normal: [f64; 2],
}

fn wrap(a: f64) -> f64 {
    let r = a % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Globally maximizes `S_n` over the circle for two-dimensional data.
pub fn exact_max_score_2d(data: &BinaryDataset) -> Result<EstimateResult> {
    if data.p() != 2 {
        return Err(invalid("p", "exact search needs two-dimensional covariates"));
    }
    let mut events = Vec::with_capacity(2 * data.n());
    for (x, y) in data.rows() {
        if x[0] == 0.0 && x[1] == 0.0 {
            continue;
        }
        let phi = x[1].atan2(x[0]);
        let y = i64::from(y);
        events.push(Event { angle: wrap(phi - PI / 2.0), delta: 2 * y, starts: true, normal: [x[1], -x[0]] });
        events.push(Event { angle: wrap(phi + PI / 2.0), delta: -2 * y, starts: false, normal: [-x[1], x[0]] });
    }
    if events.is_empty() {
        // every direction gives the same score
        let mut r = EstimateResult::scored(data, UnitVector::basis(2, 0)?, Method::Exact2d, 1)?;
        r.degenerate = true;
        return Ok(r);
    }
    events.sort_by(|a, b| a.angle.total_cmp(&b.angle));

    // cluster boundaries: clusters[k] = start index into `events`
    let mut clusters = Vec::new();
    for (i, e) in events.iter().enumerate() {
        if i == 0 || e.angle - events[i - 1].angle > CLUSTER_TOL {
            clusters.push(i);
        }
    }
    let k = clusters.len();
    let angle_of = |c: usize| events[clusters[c]].angle;
    let gap_after = |c: usize| {
        if c + 1 < k {
            angle_of(c + 1) - angle_of(c)
        } else {
            angle_of(0) + TAU - angle_of(c)
        }
    };
    let widest = (0..k).max_by(|&a, &b| gap_after(a).total_cmp(&gap_after(b)).then(b.cmp(&a))).unwrap_or(0);

    let arc_mid = |c: usize| angle_of(c) + gap_after(c) / 2.0;
    let direction = |theta: f64| [theta.cos(), theta.sin()];
    let direct_sum = |b: [f64; 2]| data.rows().map(|(x, y)| i64::from(y * sign(dot(x, &b)))).sum::<i64>();

    // sweep starting inside the widest gap
    let mut arc_value = direct_sum(direction(arc_mid(widest)));
    let mut arcs: Vec<(i64, usize)> = Vec::with_capacity(k);
    let mut points: Vec<(i64, usize)> = Vec::with_capacity(k);
    arcs.push((arc_value, widest));
    for step in 1..=k {
        let c = (widest + step) % k;
        let end = if c + 1 < k { clusters[c + 1] } else { events.len() };
        let members = &events[clusters[c]..end];
        let entering: i64 = members.iter().filter(|e| e.starts).map(|e| e.delta).sum();
        let leaving: i64 = members.iter().filter(|e| !e.starts).map(|e| e.delta).sum();
        points.push((arc_value + entering, c));
        arc_value += entering + leaving;
        if step < k {
            arcs.push((arc_value, c));
        }
    }
    let best = arcs.iter().chain(&points).map(|v| v.0).max().unwrap_or(i64::MIN);

    let mut candidates: Vec<UnitVector> = Vec::new();
    for &(v, c) in &arcs {
        if v == best {
            candidates.push(UnitVector::normalize(direction(arc_mid(c)).to_vec())?);
        }
    }
    for &(v, c) in &points {
        if v == best {
            let e = &events[clusters[c]];
            candidates.push(UnitVector::normalize(e.normal.to_vec())?);
        }
    }
    let mut chosen: Option<(UnitVector, i64)> = None;
    for cand in candidates.iter() {
        let s = empirical_score(data, cand)?.numerator;
        if chosen.as_ref().is_none_or(|(_, b)| s > *b) {
            chosen = Some((cand.clone(), s));
        }
    }
    let evaluations = candidates.len() as u64 + 1;
    let beta = match chosen {
        Some((b, _)) => b,
        None => UnitVector::basis(2, 0)?,
    };
    EstimateResult::scored(data, beta, Method::Exact2d, evaluations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use alloc::vec;
    use rand::Rng;

    fn brute_force(data: &BinaryDataset, k: usize) -> i64 {
        (0..k)
            .map(|i| {
                let t = TAU * i as f64 / k as f64;
                let b = [t.cos(), t.sin()];
                data.rows().map(|(x, y)| i64::from(y * sign(dot(x, &b)))).sum::<i64>()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn separable_data_reaches_one() {
        let x = vec![1.0, 0.2, 2.0, -0.5, -1.0, 0.3, -0.4, -2.0];
        let d = BinaryDataset::new(2, x, vec![1, 1, -1, -1]).unwrap();
        let r = exact_max_score_2d(&d).unwrap();
        assert_eq!(r.achieved_score.value, 1.0);
    }

    #[test]
    fn single_point() {
        let d = BinaryDataset::new(2, vec![1.0, 0.0], vec![1]).unwrap();
        let r = exact_max_score_2d(&d).unwrap();
        assert_eq!(r.achieved_score.value, 1.0);
        assert!(dot(d.row(0), r.beta_hat.coords()) >= 0.0);
    }

    #[test]
    fn three_point_example_is_separable() {
        let d = BinaryDataset::new(2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0], vec![1, -1, 1]).unwrap();
        assert_eq!(exact_max_score_2d(&d).unwrap().achieved_score.value, 1.0);
    }

    #[test]
    fn rejects_other_dimensions() {
        let d = BinaryDataset::new(3, vec![1.0, 0.0, 0.0], vec![1]).unwrap();
        assert!(exact_max_score_2d(&d).is_err());
    }

    #[test]
    fn coincident_boundaries_are_exploited() {
        // x and -x both labelled +1 can only both be +1 on their common boundary
        let d = BinaryDataset::new(2, vec![1.0, 1.0, -1.0, -1.0, 0.3, -2.0], vec![1, 1, -1]).unwrap();
        let r = exact_max_score_2d(&d).unwrap();
        assert_eq!(r.achieved_score.numerator, 3);
    }

    #[test]
    fn matches_dense_grid_on_random_instances() {
        let mut rng = SeedSpec::new(10, 0).rng();
        for _ in 0..50 {
            let n = rng.random_range(1..=5);
            let x: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let d = BinaryDataset::new(2, x, y).unwrap();
            let r = exact_max_score_2d(&d).unwrap();
            let g = brute_force(&d, 100_000);
            assert_eq!(r.achieved_score.numerator, g);
            assert_eq!(r.achieved_score, empirical_score(&d, &r.beta_hat).unwrap());
        }
    }

    #[test]
    fn degenerate_inputs() {
        let d = BinaryDataset::new(2, vec![0.0, 0.0, 0.0, 0.0], vec![1, -1]).unwrap();
        let r = exact_max_score_2d(&d).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.achieved_score.value, 0.0);
        let d = BinaryDataset::new(2, vec![1.0, 2.0, -1.0, 0.5], vec![-1, -1]).unwrap();
        let r = exact_max_score_2d(&d).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.achieved_score.value, 1.0);
    }
}
