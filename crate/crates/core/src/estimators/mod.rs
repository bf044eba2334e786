//! Estimators of the maximum score direction.

pub mod convex;
pub mod cv;
pub mod exact2d;
pub mod grid;
pub mod metrics;
pub mod smoothed;
pub mod srm;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use convex::{logistic_fit, svm_fit, ConvexConfig, ConvexMethod};
pub use cv::{cross_validate, default_lambda_grid, CvOutcome};
pub use exact2d::exact_max_score_2d;
pub use grid::{capped_grid_size, grid_estimator, theoretical_grid_size};
pub use metrics::{support_metrics, SupportMetrics};
pub use smoothed::{smoothed_gradient_ascent, smoothed_score, smoothed_score_gradient, SmoothedConfig};
pub use srm::{srm_penalty, srm_select, InnerSolver, SrmConfig, SrmOutcome};

use crate::error::Result;
use crate::model::{BinaryDataset, UnitVector};
use crate::score::{empirical_score, ScoreValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact2d,
    Grid,
    Smoothed,
    Logistic,
    Svm,
    Srm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub beta_hat: UnitVector,
    /// Always equal to `empirical_score(data, beta_hat)`.
    pub achieved_score: ScoreValue,
    pub method: Method,
    /// Iterations or objective evaluations, depending on the method.
    pub evaluations: u64,
    pub support: Option<Vec<usize>>,
    /// False when an iterative solver stopped at its iteration cap.
    pub converged: bool,
    /// Set for single-label data and for fits that shrank to zero.
    pub degenerate: bool,
    /// False when a budgeted search replaced an exact one.
    pub exact_search: bool,
}

impl EstimateResult {
    /// Scores `beta` on `data` and fills the bookkeeping fields.
    pub(crate) fn scored(data: &BinaryDataset, beta_hat: UnitVector, method: Method, evaluations: u64) -> Result<Self> {
        let achieved_score = empirical_score(data, &beta_hat)?;
        Ok(Self {
            beta_hat,
            achieved_score,
            method,
            evaluations,
            support: None,
            converged: true,
            degenerate: data.single_label(),
            exact_search: true,
        })
    }

    /// Normalizes a raw solver output; the zero vector maps to `e_1` and is
    /// flagged degenerate.
    pub(crate) fn from_raw(data: &BinaryDataset, raw: Vec<f64>, method: Method, evaluations: u64) -> Result<Self> {
        let zero = raw.iter().all(|&v| v == 0.0);
        let beta = if zero { UnitVector::basis(data.p(), 0)? } else { UnitVector::normalize(raw)? };
        let mut r = Self::scored(data, beta, method, evaluations)?;
        r.degenerate |= zero;
        Ok(r)
    }
}
