//! Discrepancy measures between estimated and true parameters.

use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{BinaryDataset, UnitVector};
use crate::score::empirical_risk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportMetrics {
    /// Selected but inactive.
    pub type1: usize,
    /// Active but not selected.
    pub type2: usize,
}

pub fn support_metrics(true_support: &[usize], selected: &[usize]) -> SupportMetrics {
    SupportMetrics {
        type1: selected.iter().filter(|j| !true_support.contains(j)).count(),
        type2: true_support.iter().filter(|j| !selected.contains(j)).count(),
    }
}

/// Fraction of the true support that was selected; one for an empty truth.
pub fn recall(true_support: &[usize], selected: &[usize]) -> f64 {
    if true_support.is_empty() {
        return 1.0;
    }
    let hit = true_support.iter().filter(|j| selected.contains(j)).count();
    hit as f64 / true_support.len() as f64
}

/// Coordinates with magnitude above `threshold`.
pub fn support_of(beta: &[f64], threshold: f64) -> Vec<usize> {
    beta.iter().enumerate().filter(|(_, v)| v.abs() > threshold).map(|(i, _)| i).collect()
}

/// `(n/p)^{1/3} * norm_diff`.
pub fn scaled_error(n: usize, p: usize, norm_diff: f64) -> f64 {
    (n as f64 / p as f64).cbrt() * norm_diff
}

pub fn misclassification_rate(test: &BinaryDataset, beta: &UnitVector) -> Result<f64> {
    empirical_risk(test, beta)
}
