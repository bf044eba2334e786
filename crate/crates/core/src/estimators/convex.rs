//! Convex surrogates: logistic regression and the linear SVM, optionally
//! with an `l1` penalty.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::metrics::support_of;
use super::{EstimateResult, Method};
use crate::error::{invalid, Result};
use crate::linalg::gram_spectral_norm;
use crate::math::{dot, log1p_exp, norm, sigmoid};
use crate::model::BinaryDataset;

/// Coordinates at or below this magnitude are outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConvexMethod {
    Logistic,
    Svm { cost: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvexConfig {
    /// Iteration cap of the logistic proximal gradient solver.
    pub max_iter: usize,
    /// Stopping threshold on the norm of the proximal gradient mapping.
    pub tol: f64,
    /// Iterations of the SVM proximal subgradient solver.
    pub svm_iter: usize,
    /// Ridge weight keeping the SVM objective strictly convex.
    pub ridge: f64,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-8, svm_iter: 2000, ridge: 1e-6 }
    }
}

/// Unnormalized solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFit {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", format!("{lambda} is not a nonnegative penalty")));
    }
    Ok(())
}

fn margins(data: &BinaryDataset, beta: &[f64], out: &mut [f64]) {
    for (m, (x, y)) in out.iter_mut().zip(data.rows()) {
        *m = f64::from(y) * dot(x, beta);
    }
}

fn logistic_gradient(data: &BinaryDataset, beta: &[f64], buf: &mut [f64], g: &mut [f64]) {
    margins(data, beta, buf);
    g.iter_mut().for_each(|v| *v = 0.0);
    for (m, (x, y)) in buf.iter().zip(data.rows()) {
        let w = -f64::from(y) * sigmoid(-m);
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += w * xj;
        }
    }
    let n = data.n() as f64;
    g.iter_mut().for_each(|v| *v /= n);
}

/// Mean log-loss plus `lambda ||beta||_1`.
pub fn logistic_objective(data: &BinaryDataset, beta: &[f64], lambda: f64) -> f64 {
    let loss: f64 = data.rows().map(|(x, y)| log1p_exp(-f64::from(y) * dot(x, beta))).sum();
    loss / data.n() as f64 + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Accelerated proximal gradient with adaptive restart.
pub fn fit_logistic_raw(data: &BinaryDataset, lambda: f64, cfg: &ConvexConfig, warm: Option<&[f64]>) -> Result<ConvexFit> {
    check_lambda(lambda)?;
    let p = data.p();
    let lip = (gram_spectral_norm(data.x(), data.n(), p) / 4.0).max(1e-12);
    let step = 1.0 / lip;
    let mut x = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut g = vec![0.0; p];
    let mut buf = vec![0.0; data.n()];
    let mut next = vec![0.0; p];
    for it in 1..=cfg.max_iter {
        logistic_gradient(data, &y, &mut buf, &mut g);
        for j in 0..p {
            next[j] = soft_threshold(y[j] - step * g[j], step * lambda);
        }
        let mapping = lip * next.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let restart = next.iter().zip(&y).zip(&x).map(|((n, y), x)| (y - n) * (n - x)).sum::<f64>() > 0.0;
        let t_next = if restart { 1.0 } else { (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0 };
        let momentum = if restart { 0.0 } else { (t - 1.0) / t_next };
        for j in 0..p {
            y[j] = next[j] + momentum * (next[j] - x[j]);
        }
        core::mem::swap(&mut x, &mut next);
        t = t_next;
        if mapping <= cfg.tol {
            return Ok(ConvexFit { beta: x, iterations: it, converged: true });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::Diverged(format!("logistic iterate became non-finite at iteration {it}")));
        }
    }
    Ok(ConvexFit { beta: x, iterations: cfg.max_iter, converged: false })
}

/// `cost * mean hinge + (ridge/2) ||beta||^2 + lambda ||beta||_1`.
pub fn svm_objective(data: &BinaryDataset, beta: &[f64], lambda: f64, cost: f64, ridge: f64) -> f64 {
    let hinge: f64 = data.rows().map(|(x, y)| (1.0 - f64::from(y) * dot(x, beta)).max(0.0)).sum();
    cost * hinge / data.n() as f64 + 0.5 * ridge * dot(beta, beta) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Proximal subgradient with steps `eta0 / sqrt(t)`; returns the average of
/// the second half of the iterates.
pub fn fit_svm_raw(data: &BinaryDataset, lambda: f64, cost: f64, cfg: &ConvexConfig, warm: Option<&[f64]>) -> Result<ConvexFit> {
    check_lambda(lambda)?;
    if !(cost > 0.0) {
        return Err(invalid("cost", format!("{cost} is not a positive margin cost")));
    }
    let (n, p) = (data.n(), data.p());
    let mean_norm = data.rows().map(|(x, _)| norm(x)).sum::<f64>() / n as f64;
    let eta0 = 1.0 / (cost * mean_norm).max(1e-12);
    let iters = cfg.svm_iter.max(2);
    let mut beta = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let mut avg = vec![0.0; p];
    let mut averaged = 0usize;
    let mut buf = vec![0.0; n];
    let mut g = vec![0.0; p];
    let mut best_obj = f64::INFINITY;
    for t in 1..=iters {
        margins(data, &beta, &mut buf);
        g.iter_mut().zip(&beta).for_each(|(gj, bj)| *gj = cfg.ridge * bj);
        let mut hinge = 0.0;
        for (m, (x, y)) in buf.iter().zip(data.rows()) {
            if *m < 1.0 {
                hinge += 1.0 - m;
                let w = -cost * f64::from(y) / n as f64;
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj += w * xj;
                }
            }
        }
        let obj = cost * hinge / n as f64 + 0.5 * cfg.ridge * dot(&beta, &beta) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>();
        best_obj = best_obj.min(obj);
        let eta = eta0 / (t as f64).sqrt();
        for j in 0..p {
            beta[j] = soft_threshold(beta[j] - eta * g[j], eta * lambda);
        }
        if 2 * t > iters {
            averaged += 1;
            let w = 1.0 / averaged as f64;
            for j in 0..p {
                avg[j] += w * (beta[j] - avg[j]);
            }
        }
    }
    // averaging smears exact zeros; re-apply the support of the last iterate
    for j in 0..p {
        if beta[j] == 0.0 && avg[j].abs() <= SUPPORT_THRESHOLD {
            avg[j] = 0.0;
        }
    }
    if avg.iter().any(|v| !v.is_finite()) {
        return Err(crate::error::Error::Diverged("svm average became non-finite".into()));
    }
    let final_obj = svm_objective(data, &avg, lambda, cost, cfg.ridge);
    let converged = final_obj <= best_obj * (1.0 + 1e-3) + 1e-12;
    Ok(ConvexFit { beta: avg, iterations: iters, converged })
}

pub fn fit_raw(data: &BinaryDataset, method: ConvexMethod, lambda: f64, cfg: &ConvexConfig, warm: Option<&[f64]>) -> Result<ConvexFit> {
    match method {
        ConvexMethod::Logistic => fit_logistic_raw(data, lambda, cfg, warm),
        ConvexMethod::Svm { cost } => fit_svm_raw(data, lambda, cost, cfg, warm),
    }
}

pub(crate) fn finish(data: &BinaryDataset, fit: ConvexFit, method: Method) -> Result<EstimateResult> {
    let support = support_of(&fit.beta, SUPPORT_THRESHOLD);
    let mut r = EstimateResult::from_raw(data, fit.beta, method, fit.iterations as u64)?;
    r.support = Some(support);
    r.converged = fit.converged;
    Ok(r)
}

/// Logistic regression with penalty `lambda ||beta||_1`, normalized.
pub fn logistic_fit(data: &BinaryDataset, lambda: f64, cfg: &ConvexConfig) -> Result<EstimateResult> {
    finish(data, fit_logistic_raw(data, lambda, cfg, None)?, Method::Logistic)
}

/// Linear SVM with margin cost `cost` and penalty `lambda ||beta||_1`, normalized.
pub fn svm_fit(data: &BinaryDataset, lambda: f64, cost: f64, cfg: &ConvexConfig) -> Result<EstimateResult> {
    finish(data, fit_svm_raw(data, lambda, cost, cfg, None)?, Method::Svm)
}
