//! Structural risk minimization over nested sparsity classes.
//!
//! For each sparsity `m`, `beta_m` approximately maximizes `S_n` over
//! `||beta||_0 <= m`. The selected size minimizes `-S_n(beta_m) + pen(m)`.
//! Classes are nested, so `beta_m` is replaced by `beta_{m-1}` whenever
//! the latter scores higher; `S_n(beta_m)` is then nondecreasing in `m`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::exact2d::exact_max_score_2d;
use super::grid::grid_estimator;
use super::smoothed::{smoothed_gradient_ascent, SmoothedConfig};
use super::{EstimateResult, Method};
use crate::error::{invalid, Result};
use crate::math::binomial;
use crate::model::{BinaryDataset, UnitVector};
use crate::rng::{tags, SeedSpec};
use crate::score::{disagreements, score_of};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    /// Enumerate supports whenever `C(p, m)` fits the budget, otherwise
    /// fall back to greedy search.
    ExactEnumeration,
    /// Always use greedy forward selection with single swaps.
    GreedyForwardSwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SrmConfig {
    pub k: f64,
    pub c_n: f64,
    /// Defaults to `floor(n / (4 ln p))`, clamped to `1..=p`.
    pub max_sparsity: Option<usize>,
    pub inner_solver: InnerSolver,
    pub enumeration_budget: u64,
    /// Random sphere points per support when `m >= 3`.
    pub grid_points: usize,
    pub smoothed: SmoothedConfig,
    pub seed: SeedSpec,
}

impl Default for SrmConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            c_n: 1.0,
            max_sparsity: None,
            inner_solver: InnerSolver::ExactEnumeration,
            enumeration_budget: 5000,
            grid_points: 500,
            smoothed: SmoothedConfig { schedule: vec![1.0, 4.0, 16.0, 64.0], max_iter: 50, ..SmoothedConfig::default() },
            seed: SeedSpec::new(0, 0),
        }
    }
}

impl SrmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(invalid("K", format!("{} is not a positive constant", self.k)));
        }
        if !(self.c_n > 0.0 && self.c_n <= 1.0) {
            return Err(invalid("Cn", format!("{} is not in (0, 1]", self.c_n)));
        }
        if self.max_sparsity == Some(0) {
            return Err(invalid("max_sparsity", "must be at least 1"));
        }
        if self.grid_points == 0 {
            return Err(invalid("grid_points", "must be at least 1"));
        }
        Ok(())
    }

    /// Effective largest class size for `n` rows in dimension `p`.
    pub fn max_sparsity_for(&self, n: usize, p: usize) -> usize {
        let default = || {
            let v = n as f64 / (4.0 * (p as f64).ln());
            if v.is_finite() { v.floor() as usize } else { p }
        };
        self.max_sparsity.unwrap_or_else(default).clamp(1, p)
    }
}

/// `pen(i) = 2K max((V sqrt(Cn) L(n / (V sqrt(Cn))) / n)^{2/3}, V L(n/V) / n)`
/// with `V = i ln(e p / i)` and `L(z) = ln(max(z, e))`.
pub fn srm_penalty(i: usize, n: usize, p: usize, cfg: &SrmConfig) -> Result<f64> {
    cfg.validate()?;
    let top = cfg.max_sparsity_for(n, p);
    if i == 0 || i > top {
        return Err(invalid("i", format!("{i} is not in 1..={top}")));
    }
    Ok(penalty_value(i, n, p, cfg.k, cfg.c_n))
}

fn penalty_value(i: usize, n: usize, p: usize, k: f64, c_n: f64) -> f64 {
    let e = core::f64::consts::E;
    let (i, n, p) = (i as f64, n as f64, p as f64);
    let v = i * (e * p / i).ln();
    let a = v * c_n.sqrt();
    let first = (a * (n / a).max(e).ln() / n).powf(2.0 / 3.0);
    let second = v * (n / v).max(e).ln() / n;
    2.0 * k * first.max(second)
}

/// One row of the selection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmRow {
    pub m: usize,
    pub score: f64,
    pub penalty: f64,
    pub objective: f64,
    pub support: Vec<usize>,
    /// True when the class maximizer came from full support enumeration.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrmOutcome {
    pub result: EstimateResult,
    pub m_hat: usize,
    pub table: Vec<SrmRow>,
}

struct Fit {
    beta: Vec<f64>,
    d: usize,
}

fn fit_of(data: &BinaryDataset, beta: Vec<f64>) -> Result<Fit> {
    let d = disagreements(data, &beta)?;
    Ok(Fit { beta, d })
}

/// Best direction supported on `support`, embedded in `R^p`.
fn fit_on_support(data: &BinaryDataset, support: &[usize], cfg: &SrmConfig, seed: SeedSpec) -> Result<Fit> {
    let p = data.p();
    let sub = data.select_columns(support)?;
    let local: UnitVector = match support.len() {
        1 => {
            let plus = UnitVector::basis(1, 0)?;
            let minus = plus.negated();
            if disagreements(&sub, minus.coords())? < disagreements(&sub, plus.coords())? {
                minus
            } else {
                plus
            }
        }
        2 => exact_max_score_2d(&sub)?.beta_hat,
        _ => {
            let g = grid_estimator(&sub, cfg.grid_points, seed)?;
            let s = smoothed_gradient_ascent(&sub, &g.beta_hat, &cfg.smoothed)?;
            if s.achieved_score.numerator > g.achieved_score.numerator {
                s.beta_hat
            } else {
                g.beta_hat
            }
        }
    };
    fit_of(data, local.embed(p, support)?.into_inner())
}

/// Next combination of `k` indices out of `n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn enumerate_class(data: &BinaryDataset, m: usize, cfg: &SrmConfig) -> Result<Fit> {
    let mut support: Vec<usize> = (0..m).collect();
    let mut best: Option<Fit> = None;
    let mut index = 0u64;
    loop {
        let seed = cfg.seed.derive(tags::GRID).derive(((m as u64) << 40) ^ index);
        let fit = fit_on_support(data, &support, cfg, seed)?;
        if best.as_ref().is_none_or(|b| fit.d < b.d) {
            best = Some(fit);
        }
        index += 1;
        if !next_combination(&mut support, data.p()) {
            break;
        }
    }
    best.ok_or_else(|| invalid("m", "no support enumerated"))
}

/// Exact maximization over the plane spanned by `u` and `e_j`.
fn plane_search(data: &BinaryDataset, u: &[f64], j: usize) -> Result<Fit> {
    let mut z = Vec::with_capacity(2 * data.n());
    for (x, _) in data.rows() {
        z.push(crate::math::dot(x, u));
        z.push(x[j]);
    }
    let plane = BinaryDataset::new(2, z, data.y().to_vec())?;
    let ab = exact_max_score_2d(&plane)?.beta_hat;
    let (a, b) = (ab.coords()[0], ab.coords()[1]);
    let mut beta: Vec<f64> = u.iter().map(|v| a * v).collect();
    beta[j] += b;
    let r = crate::math::norm(&beta);
    if r > 0.0 {
        beta.iter_mut().for_each(|v| *v /= r);
    }
    fit_of(data, beta)
}

fn support_set(beta: &[f64]) -> Vec<usize> {
    beta.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

/// Greedy step from `prev` (support size `m - 1`) to size `m`, followed by
/// one pass of single swaps.
fn greedy_class(data: &BinaryDataset, prev: Option<&Fit>, m: usize, cfg: &SrmConfig) -> Result<Fit> {
    let p = data.p();
    let mut current = match prev {
        None => {
            let seed = cfg.seed.derive(tags::GRID);
            let mut best: Option<Fit> = None;
            for j in 0..p {
                let fit = fit_on_support(data, &[j], cfg, seed)?;
                if best.as_ref().is_none_or(|b| fit.d < b.d) {
                    best = Some(fit);
                }
            }
            best.ok_or_else(|| invalid("p", "no coordinates"))?
        }
        Some(prev) => {
            let support = support_set(&prev.beta);
            let mut best: Option<Fit> = None;
            for j in (0..p).filter(|j| !support.contains(j)) {
                let fit = plane_search(data, &prev.beta, j)?;
                if best.as_ref().is_none_or(|b| fit.d < b.d) {
                    best = Some(fit);
                }
            }
            match best {
                Some(b) => b,
                None => fit_of(data, prev.beta.clone())?,
            }
        }
    };
    if m >= 2 {
        let support = support_set(&current.beta);
        for &i in &support {
            let mut reduced = current.beta.clone();
            reduced[i] = 0.0;
            if reduced.iter().all(|v| *v == 0.0) {
                continue;
            }
            for j in (0..p).filter(|j| !support.contains(j)) {
                let fit = plane_search(data, &reduced, j)?;
                if fit.d < current.d {
                    current = fit;
                }
            }
            if support_set(&current.beta) != support {
                // one accepted swap per pass keeps the support bookkeeping simple
                break;
            }
        }
    }
    Ok(current)
}

/// Class maximizers `beta_1, ..., beta_M` with nesting enforced.
pub fn srm_path(data: &BinaryDataset, cfg: &SrmConfig) -> Result<Vec<(usize, EstimateResult)>> {
    cfg.validate()?;
    if data.p() < 2 {
        return Err(invalid("p", "subset selection needs at least two covariates"));
    }
    let top = cfg.max_sparsity_for(data.n(), data.p());
    let mut path = Vec::with_capacity(top);
    let mut prev: Option<Fit> = None;
    for m in 1..=top {
        let exact = cfg.inner_solver == InnerSolver::ExactEnumeration
            && binomial(data.p(), m) <= cfg.enumeration_budget as f64;
        let fit = if exact { enumerate_class(data, m, cfg)? } else { greedy_class(data, prev.as_ref(), m, cfg)? };
        let fit = match prev {
            Some(p) if p.d < fit.d => p,
            _ => fit,
        };
        let mut r = EstimateResult::from_raw(data, fit.beta.clone(), Method::Srm, 0)?;
        r.support = Some(support_set(&fit.beta));
        r.exact_search = exact;
        path.push((m, r));
        prev = Some(fit);
    }
    Ok(path)
}

/// Penalized selection of the sparsity level.
pub fn srm_select(data: &BinaryDataset, cfg: &SrmConfig) -> Result<SrmOutcome> {
    let path = srm_path(data, cfg)?;
    select_from_path(data, path, cfg)
}

fn select_from_path(data: &BinaryDataset, path: Vec<(usize, EstimateResult)>, cfg: &SrmConfig) -> Result<SrmOutcome> {
    let mut table = Vec::with_capacity(path.len());
    for (m, r) in &path {
        let penalty = penalty_value(*m, data.n(), data.p(), cfg.k, cfg.c_n);
        let score = r.achieved_score.value;
        table.push(SrmRow {
            m: *m,
            score,
            penalty,
            objective: -score + penalty,
            support: r.support.clone().unwrap_or_default(),
            exact: r.exact_search,
        });
    }
    let best = table
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| invalid("max_sparsity", "empty path"))?;
    let m_hat = table[best].m;
    let mut result = path.into_iter().nth(best).map(|(_, r)| r).ok_or_else(|| invalid("m", "missing"))?;
    result.exact_search = table.iter().all(|r| r.exact);
    result.evaluations = table.len() as u64;
    Ok(SrmOutcome { result, m_hat, table })
}

/// Chooses `K` from `k_grid` by held-out score over `folds` folds (ties go
/// to the smallest `K`), then selects on all rows with that `K`.
pub fn srm_select_cv_k(data: &BinaryDataset, cfg: &SrmConfig, k_grid: &[f64], folds: usize, seed: SeedSpec) -> Result<(SrmOutcome, f64)> {
    if k_grid.is_empty() {
        return Err(invalid("k_grid", "the grid is empty"));
    }
    if folds < 2 || folds > data.n() {
        return Err(invalid("folds", format!("{folds} folds for {} rows", data.n())));
    }
    let labels = super::cv::fold_assignment(data.n(), folds, seed);
    let mut totals = vec![0.0; k_grid.len()];
    for f in 0..folds {
        let train = data.subset(&(0..data.n()).filter(|&i| labels[i] != f).collect::<Vec<_>>());
        let test = data.subset(&(0..data.n()).filter(|&i| labels[i] == f).collect::<Vec<_>>());
        // the path does not depend on K, only the selection does
        let path = srm_path(&train, cfg)?;
        for (ki, &k) in k_grid.iter().enumerate() {
            let c = SrmConfig { k, ..cfg.clone() };
            let out = select_from_path(&train, path.clone(), &c)?;
            totals[ki] += score_of(&test, out.result.beta_hat.coords())?.value;
        }
    }
    let mut best = 0;
    for i in 1..k_grid.len() {
        if totals[i] > totals[best] || (totals[i] == totals[best] && k_grid[i] < k_grid[best]) {
            best = i;
        }
    }
    let c = SrmConfig { k: k_grid[best], ..cfg.clone() };
    Ok((srm_select(data, &c)?, k_grid[best]))
}
