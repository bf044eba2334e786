//! Domain types, sign convention and data-generating processes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::math::{dot, normal_cdf};
use crate::rng::{tags, SeedSpec};
use crate::theory::minimax::{condprob_from_index, MinimaxKind};

const UNIT_NORM_TOL: f64 = 1e-12;

/// Sign with the tie convention `sgn(0) = +1`.
pub fn sgn(x: f64) -> Result<i8> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(sign(x))
}

/// Unchecked [`sgn`] for hot loops; NaN maps to -1.
#[inline]
pub(crate) fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// A direction on the unit sphere `S^{p-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps coordinates that already have unit norm (within `1e-12`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("beta", "dimension must be at least 1"));
        }
        if let Some(&bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let n = crate::math::norm(&coords);
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(invalid("beta", format!("norm {n} is not 1")));
        }
        Ok(Self(coords))
    }

    /// Rescales a nonzero finite vector onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("beta", "dimension must be at least 1"));
        }
        if let Some(&bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let n = crate::math::norm(&coords);
        if n == 0.0 {
            return Err(invalid("beta", "cannot normalize the zero vector"));
        }
        for c in &mut coords {
            *c /= n;
        }
        Ok(Self(coords))
    }

    /// The `j`-th standard basis vector of `R^p`.
    pub fn basis(p: usize, j: usize) -> Result<Self> {
        if j >= p {
            return Err(invalid("j", format!("index {j} out of range for dimension {p}")));
        }
        let mut v = vec![0.0; p];
        v[j] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn distance(&self, other: &UnitVector) -> f64 {
        crate::math::dist(&self.0, &other.0)
    }

    /// Indices of coordinates with magnitude above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, c)| c.abs() > threshold).map(|(i, _)| i).collect()
    }

    /// The point at Euclidean distance `d in [0, 2]` from `self` on the great
    /// circle through `self` and `toward`.
    pub fn at_distance(&self, toward: &UnitVector, d: f64) -> Result<Self> {
        if self.dim() != toward.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: toward.dim() });
        }
        if !(0.0..=2.0).contains(&d) {
            return Err(invalid("d", format!("{d} is not in [0, 2]")));
        }
        let proj = self.dot(toward);
        let u: Vec<f64> = toward.0.iter().zip(&self.0).map(|(t, s)| t - proj * s).collect();
        if crate::math::norm(&u) < 1e-12 {
            return Err(invalid("toward", "direction is parallel to the base point"));
        }
        let u = Self::normalize(u)?;
        let cos = 1.0 - d * d / 2.0;
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        Self::normalize(self.0.iter().zip(&u.0).map(|(a, b)| cos * a + sin * b).collect())
    }

    /// Embeds a direction living on `support` into `R^p`.
    pub fn embed(&self, p: usize, support: &[usize]) -> Result<Self> {
        if support.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: support.len() });
        }
        let mut v = vec![0.0; p];
        for (&j, &c) in support.iter().zip(&self.0) {
            if j >= p {
                return Err(invalid("support", format!("index {j} out of range")));
            }
            v[j] = c;
        }
        Ok(Self(v))
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

/// `n` covariate rows in `R^p` with labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    p: usize,
    x: Vec<f64>,
    y: Vec<i8>,
}

impl BinaryDataset {
    /// `x` is row-major with `y.len()` rows of length `p`.
    pub fn new(p: usize, x: Vec<f64>, y: Vec<i8>) -> Result<Self> {
        if p == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if x.len() != y.len() * p {
            return Err(Error::DimensionMismatch { expected: y.len() * p, got: x.len() });
        }
        if let Some(&bad) = y.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::InvalidData(format!("label {bad} is not -1 or +1")));
        }
        if let Some(&bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { p, x, y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[i8] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.y[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], i8)> + '_ {
        self.x.chunks_exact(self.p).zip(self.y.iter().copied())
    }

    /// True when every label is the same.
    pub fn single_label(&self) -> bool {
        self.y.windows(2).all(|w| w[0] == w[1])
    }

    /// Keeps only the listed rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut x = Vec::with_capacity(rows.len() * self.p);
        let mut y = Vec::with_capacity(rows.len());
        for &i in rows {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self { p: self.p, x, y }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.p) {
            return Err(invalid("columns", format!("column {bad} out of range")));
        }
        if cols.is_empty() {
            return Err(invalid("columns", "at least one column is required"));
        }
        let mut x = Vec::with_capacity(self.n() * cols.len());
        for row in self.x.chunks_exact(self.p) {
            x.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Self { p: cols.len(), x, y: self.y.clone() })
    }

    /// Multiplies every covariate by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { p: self.p, x: self.x.iter().map(|v| v * c).collect(), y: self.y.clone() }
    }

    /// Binary reduction of a two-alternative choice dataset:
    /// `x_i = x_{i1} - x_{i2}` and `y_i = +1` iff the first alternative was chosen.
    pub fn from_two_alternatives(data: &MultinomialDataset) -> Result<Self> {
        if data.m() != 2 {
            return Err(invalid("m", format!("expected 2 alternatives, got {}", data.m())));
        }
        let p = data.p();
        let mut x = Vec::with_capacity(data.n() * p);
        let mut y = Vec::with_capacity(data.n());
        for i in 0..data.n() {
            let (a, b) = (data.alternative(i, 0), data.alternative(i, 1));
            x.extend(a.iter().zip(b).map(|(u, v)| u - v));
            y.push(if data.choice(i) == 0 { 1 } else { -1 });
        }
        Self::new(p, x, y)
    }
}

/// `n` individuals choosing one of `m` alternatives, each described by `p`
/// covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialDataset {
    m: usize,
    p: usize,
    x: Vec<f64>,
    choices: Vec<usize>,
}

impl MultinomialDataset {
    /// `x` is laid out as `[individual][alternative][covariate]`.
    pub fn new(m: usize, p: usize, x: Vec<f64>, choices: Vec<usize>) -> Result<Self> {
        if m < 2 {
            return Err(invalid("m", "at least two alternatives are required"));
        }
        if p == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if x.len() != choices.len() * m * p {
            return Err(Error::DimensionMismatch { expected: choices.len() * m * p, got: x.len() });
        }
        if let Some(&bad) = choices.iter().find(|&&c| c >= m) {
            return Err(Error::InvalidData(format!("choice {bad} out of range for {m} alternatives")));
        }
        if let Some(&bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { m, p, x, choices })
    }

    /// Builds from an `n x m` 0/1 indicator matrix; each row must sum to one.
    pub fn from_one_hot(m: usize, p: usize, x: Vec<f64>, indicators: &[u8]) -> Result<Self> {
        if m == 0 || indicators.len() % m != 0 {
            return Err(invalid("indicators", "length is not a multiple of m"));
        }
        let mut choices = Vec::with_capacity(indicators.len() / m);
        for (i, row) in indicators.chunks_exact(m).enumerate() {
            if row.iter().any(|&v| v > 1) || row.iter().map(|&v| v as usize).sum::<usize>() != 1 {
                return Err(Error::InvalidData(format!("choice row {i} does not sum to one")));
            }
            choices.push(row.iter().position(|&v| v == 1).unwrap_or(0));
        }
        Self::new(m, p, x, choices)
    }

    pub fn n(&self) -> usize {
        self.choices.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn alternative(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.m + j) * self.p;
        &self.x[start..start + self.p]
    }

    pub fn choice(&self, i: usize) -> usize {
        self.choices[i]
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    /// The one-hot indicator `Y_{ij}`.
    pub fn indicator(&self, i: usize, j: usize) -> u8 {
        u8::from(self.choices[i] == j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CovariateLaw {
    IsotropicGaussian,
    /// `N(0, Sigma)` with `Sigma_ij = rho^|i-j|`.
    Ar1Gaussian { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErrorLaw {
    /// `eps ~ N(0, sigma^2)` independent of `X`; `sigma = 0` is noiseless.
    Gaussian { sigma: f64 },
    /// `eps | X ~ N(0, max(1, |X'beta0|))`.
    HeteroscedasticGaussian,
    /// Labels drawn from the piecewise conditional probability of the
    /// lower-bound constructions. `delta` is the family's scale parameter.
    MinimaxFamily { family: MinimaxKind, delta: f64, c: f64 },
}

impl ErrorLaw {
    pub const STANDARD_GAUSSIAN: ErrorLaw = ErrorLaw::Gaussian { sigma: 1.0 };

    /// Conditional standard deviation of the error given the true index,
    /// when the law is Gaussian.
    pub fn conditional_std(&self, index: f64) -> Option<f64> {
        match *self {
            ErrorLaw::Gaussian { sigma } => Some(sigma),
            ErrorLaw::HeteroscedasticGaussian => Some(index.abs().max(1.0).sqrt()),
            ErrorLaw::MinimaxFamily { .. } => None,
        }
    }
}

/// A complete data-generating process for the binary (and, with Gaussian
/// errors, multinomial) choice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    pub p: usize,
    pub beta0: UnitVector,
    pub covariates: CovariateLaw,
    pub errors: ErrorLaw,
    /// When set, covariates gain a leading constant column and the true
    /// augmented parameter is `(intercept, beta0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
}

impl DgpSpec {
    pub fn new(beta0: UnitVector, covariates: CovariateLaw, errors: ErrorLaw) -> Self {
        Self { p: beta0.dim(), beta0, covariates, errors, intercept: None }
    }

    /// Isotropic Gaussian covariates with independent `N(0, 1)` errors.
    pub fn reference(beta0: UnitVector) -> Self {
        Self::new(beta0, CovariateLaw::IsotropicGaussian, ErrorLaw::STANDARD_GAUSSIAN)
    }

    pub fn with_intercept(mut self, tau: f64) -> Self {
        self.intercept = Some(tau);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid("p", "dimension must be at least 1"));
        }
        if self.beta0.dim() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: self.beta0.dim() });
        }
        if let CovariateLaw::Ar1Gaussian { rho } = self.covariates {
            if !(rho.abs() < 1.0) {
                return Err(invalid("rho", format!("{rho} is not in (-1, 1)")));
            }
        }
        match self.errors {
            ErrorLaw::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                return Err(invalid("sigma", format!("{sigma} is not a finite nonnegative scale")));
            }
            ErrorLaw::MinimaxFamily { delta, c, .. } => {
                if !(delta > 0.0 && delta < 0.25) {
                    return Err(invalid("delta", format!("{delta} is not in (0, 1/4)")));
                }
                if !(c > 0.0 && c <= 1.0) {
                    return Err(invalid("c", format!("{c} is not in (0, 1]")));
                }
                if !matches!(self.covariates, CovariateLaw::IsotropicGaussian) {
                    return Err(invalid("covariates", "minimax families use isotropic covariates"));
                }
                if self.intercept.is_some() {
                    return Err(invalid("intercept", "minimax families have no intercept"));
                }
            }
            _ => {}
        }
        if let Some(tau) = self.intercept {
            if !tau.is_finite() {
                return Err(Error::NonFinite(tau));
            }
        }
        Ok(())
    }

    /// Dimension of the (possibly intercept-augmented) covariate rows.
    pub fn augmented_dim(&self) -> usize {
        self.p + usize::from(self.intercept.is_some())
    }

    /// Sparsity of the true parameter.
    pub fn s0(&self) -> usize {
        self.beta0.support(0.0).len()
    }

    pub fn sampler(&self) -> Result<DgpSampler<'_>> {
        self.validate()?;
        let rho = match self.covariates {
            CovariateLaw::IsotropicGaussian => None,
            CovariateLaw::Ar1Gaussian { rho } => Some(rho),
        };
        Ok(DgpSampler { spec: self, rho })
    }
}

/// Draws covariates and labels for a validated [`DgpSpec`].
#[derive(Debug, Clone)]
pub struct DgpSampler<'a> {
    spec: &'a DgpSpec,
    rho: Option<f64>,
}

impl DgpSampler<'_> {
    pub fn spec(&self) -> &DgpSpec {
        self.spec
    }

    /// Fills `out` (length [`DgpSpec::augmented_dim`]) with one covariate row.
    pub fn draw_covariates<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        let offset = usize::from(self.spec.intercept.is_some());
        if offset == 1 {
            out[0] = 1.0;
        }
        let target = &mut out[offset..];
        for v in target.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if let Some(rho) = self.rho {
            // x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j has covariance rho^|i-j|
            let tail = (1.0 - rho * rho).sqrt();
            for j in 1..target.len() {
                target[j] = rho * target[j - 1] + tail * target[j];
            }
        }
    }

    /// The true index `tau + x'beta0` of an augmented row.
    pub fn true_index(&self, row: &[f64]) -> f64 {
        match self.spec.intercept {
            Some(tau) => tau * row[0] + dot(&row[1..], self.spec.beta0.coords()),
            None => dot(row, self.spec.beta0.coords()),
        }
    }

    /// `eta(x) = P(Y = +1 | X = x)`.
    pub fn eta(&self, row: &[f64]) -> f64 {
        let index = self.true_index(row);
        match self.spec.errors {
            ErrorLaw::Gaussian { sigma } if sigma == 0.0 => {
                if index >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ErrorLaw::Gaussian { sigma } => normal_cdf(index / sigma),
            ErrorLaw::HeteroscedasticGaussian => normal_cdf(index / index.abs().max(1.0).sqrt()),
            ErrorLaw::MinimaxFamily { family, delta, c } => {
                condprob_from_index(family, self.spec.p, delta, c, index, row[0])
            }
        }
    }

    /// Draws a label for a covariate row.
    pub fn draw_label<R: Rng + ?Sized>(&self, rng: &mut R, row: &[f64]) -> i8 {
        let index = self.true_index(row);
        match self.spec.errors {
            ErrorLaw::Gaussian { .. } | ErrorLaw::HeteroscedasticGaussian => {
                let sd = self.spec.errors.conditional_std(index).unwrap_or(1.0);
                let eps: f64 = rng.sample(StandardNormal);
                sign(index + sd * eps)
            }
            ErrorLaw::MinimaxFamily { .. } => {
                let u: f64 = rng.random();
                if u < self.eta(row) {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// Uniform draw from `S^{p-1}` by normalizing a standard Gaussian vector.
pub fn sample_unit_sphere(p: usize, seed: SeedSpec) -> Result<UnitVector> {
    if p == 0 {
        return Err(invalid("p", "dimension must be at least 1"));
    }
    Ok(sample_unit_sphere_with(p, &mut seed.rng()))
}

pub fn sample_unit_sphere_with<R: Rng + ?Sized>(p: usize, rng: &mut R) -> UnitVector {
    let mut v = vec![0.0; p];
    loop {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        if let Ok(u) = UnitVector::normalize(v.clone()) {
            return u;
        }
    }
}

/// `Sigma_ij = rho^|i-j|`.
pub fn ar1_covariance(p: usize, rho: f64) -> Result<Matrix> {
    if !(rho.abs() < 1.0) {
        return Err(invalid("rho", format!("{rho} is not in (-1, 1)")));
    }
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let k = i.abs_diff(j);
            m[(i, j)] = if k == 0 { 1.0 } else { rho.powi(k as i32) };
        }
    }
    Ok(m)
}

pub fn generate_binary_dataset(spec: &DgpSpec, n: usize, seed: SeedSpec) -> Result<BinaryDataset> {
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    let mut sampler = spec.sampler()?;
    let d = spec.augmented_dim();
    let mut x_rng = seed.derive(tags::COVARIATES).rng();
    let mut e_rng = seed.derive(tags::ERRORS).rng();
    let mut x = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    for row in x.chunks_exact_mut(d) {
        sampler.draw_covariates(&mut x_rng, row);
        y.push(sampler.draw_label(&mut e_rng, row));
    }
    BinaryDataset::new(d, x, y)
}

/// Utilities `u_ij = x_ij'beta0 + eps_ij` with iid Gaussian errors; the
/// chosen alternative is the argmax, ties going to the lowest index.
pub fn generate_multinomial_dataset(
    spec: &DgpSpec,
    n: usize,
    m: usize,
    seed: SeedSpec,
) -> Result<MultinomialDataset> {
    if m < 2 {
        return Err(invalid("m", "at least two alternatives are required"));
    }
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    let sigma = match spec.errors {
        ErrorLaw::Gaussian { sigma } => sigma,
        _ => return Err(invalid("errors", "multinomial data needs iid gaussian errors")),
    };
    if spec.intercept.is_some() {
        return Err(invalid("intercept", "an intercept shared by all alternatives is not identified"));
    }
    let mut sampler = spec.sampler()?;
    let p = spec.p;
    let mut x_rng = seed.derive(tags::COVARIATES).rng();
    let mut e_rng = seed.derive(tags::ERRORS).rng();
    let mut x = vec![0.0; n * m * p];
    let mut choices = Vec::with_capacity(n);
    for block in x.chunks_exact_mut(m * p) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (j, row) in block.chunks_exact_mut(p).enumerate() {
            sampler.draw_covariates(&mut x_rng, row);
            let eps: f64 = e_rng.sample(StandardNormal);
            let u = dot(row, spec.beta0.coords()) + sigma * eps;
            if u > best.1 {
                best = (j, u);
            }
        }
        choices.push(best.0);
    }
    MultinomialDataset::new(m, p, x, choices)
}

/// Dense true parameter: entries `Unif(1, 2)`, then normalized.
pub fn dense_beta0(p: usize, seed: SeedSpec) -> Result<UnitVector> {
    if p == 0 {
        return Err(invalid("p", "dimension must be at least 1"));
    }
    let mut rng = seed.derive(tags::BETA0).rng();
    UnitVector::normalize((0..p).map(|_| rng.random_range(1.0..2.0)).collect())
}

/// Sparse true parameter: `s0` positions uniformly without replacement,
/// entries `Unif(2, 3)`, then normalized.
pub fn sparse_beta0(p: usize, s0: usize, seed: SeedSpec) -> Result<UnitVector> {
    if s0 == 0 || s0 > p {
        return Err(invalid("s0", format!("{s0} is not in 1..={p}")));
    }
    let mut rng = seed.derive(tags::BETA0).rng();
    let mut support = rand::seq::index::sample(&mut rng, p, s0).into_vec();
    support.sort_unstable();
    let mut v = vec![0.0; p];
    for j in support {
        v[j] = rng.random_range(2.0..3.0);
    }
    UnitVector::normalize(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ref_beta(p: usize) -> UnitVector {
        UnitVector::normalize((1..=p).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn sgn_convention() {
        assert_eq!(sgn(3.7).unwrap(), 1);
        assert_eq!(sgn(-0.2).unwrap(), -1);
        assert_eq!(sgn(0.0).unwrap(), 1);
        assert_eq!(sgn(-0.0).unwrap(), 1);
        assert!(sgn(f64::NAN).is_err());
        assert!(sgn(f64::INFINITY).is_err());
    }

    #[test]
    fn unit_vector_invariants() {
        assert!(UnitVector::new(vec![]).is_err());
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        assert!(UnitVector::new(vec![0.6, 0.81]).is_err());
        assert!(UnitVector::normalize(vec![0.0, 0.0]).is_err());
        let u = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        assert_eq!(u.coords(), &[0.6, 0.8]);
        let e = u.embed(4, &[1, 3]).unwrap();
        assert_eq!(e.coords(), &[0.0, 0.6, 0.0, 0.8]);
        assert_eq!(e.support(0.0), vec![1, 3]);
    }

    #[test]
    fn unit_sphere_edge_cases() {
        assert!(sample_unit_sphere(0, SeedSpec::new(1, 0)).is_err());
        for s in 0..20 {
            let u = sample_unit_sphere(1, SeedSpec::new(s, 0)).unwrap();
            assert!(u.coords() == [1.0] || u.coords() == [-1.0]);
        }
        let u = sample_unit_sphere(3, SeedSpec::new(42, 1)).unwrap();
        assert!((crate::math::norm(u.coords()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_circle_first_coordinate_is_centered() {
        // Var(cos theta) = 1/2 for theta uniform, so the CLT half-width is 3/sqrt(n/2).
        let n = 100_000;
        let mut rng = SeedSpec::new(2024, 0).rng();
        let mean = (0..n).map(|_| sample_unit_sphere_with(2, &mut rng).coords()[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64 * 0.5).sqrt(), "mean {mean}");
    }

    #[test]
    fn ar1_examples() {
        let s = ar1_covariance(2, 0.5).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 0.5, 0.5, 1.0]);
        assert_eq!(ar1_covariance(3, 0.0).unwrap(), Matrix::identity(3));
        let s = ar1_covariance(3, 0.5).unwrap();
        assert_eq!(s[(0, 2)], 0.25);
        assert!(s.is_symmetric(0.0));
        assert!(s.cholesky().is_some());
        assert!(ar1_covariance(3, 1.0).is_err());
        assert!(ar1_covariance(3, -1.2).is_err());
    }

    #[test]
    fn ar1_recursion_matches_cholesky_factor() {
        let spec = DgpSpec::new(ref_beta(6), CovariateLaw::Ar1Gaussian { rho: 0.5 }, ErrorLaw::STANDARD_GAUSSIAN);
        let l = ar1_covariance(6, 0.5).unwrap().cholesky().unwrap();
        let mut sampler = spec.sampler().unwrap();
        let (mut a, mut b) = (SeedSpec::new(2, 0).rng(), SeedSpec::new(2, 0).rng());
        let (mut row, mut z, mut expected) = ([0.0; 6], [0.0; 6], [0.0; 6]);
        for _ in 0..50 {
            sampler.draw_covariates(&mut a, &mut row);
            for v in z.iter_mut() {
                *v = b.sample(StandardNormal);
            }
            l.lower_mul_into(&z, &mut expected);
            for (u, v) in row.iter().zip(&expected) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_labels_follow_index() {
        let spec = DgpSpec::new(ref_beta(4), CovariateLaw::Ar1Gaussian { rho: 0.5 }, ErrorLaw::Gaussian { sigma: 0.0 });
        let d = generate_binary_dataset(&spec, 500, SeedSpec::new(3, 9)).unwrap();
        for (x, y) in d.rows() {
            assert_eq!(y, sign(dot(x, spec.beta0.coords())));
        }
    }

    #[test]
    fn heteroscedastic_std_near_boundary_is_one() {
        assert_eq!(ErrorLaw::HeteroscedasticGaussian.conditional_std(0.3), Some(1.0));
        assert_eq!(ErrorLaw::HeteroscedasticGaussian.conditional_std(-4.0), Some(2.0));
    }

    #[test]
    fn heteroscedastic_slab_frequency() {
        // On the slab x'beta0 in [0.49, 0.51], sigma = 1 so P(Y=1|X) = Phi(x'beta0) ~ 0.6915.
        let spec = DgpSpec::new(ref_beta(3), CovariateLaw::IsotropicGaussian, ErrorLaw::HeteroscedasticGaussian);
        let mut sampler = spec.sampler().unwrap();
        let mut rng = SeedSpec::new(11, 0).rng();
        let (mut hits, mut total, mut expected) = (0usize, 0usize, 0.0);
        let mut row = [0.0; 3];
        // rejection sampling onto the slab: keep drawing until enough rows land there
        while total < 100_000 {
            sampler.draw_covariates(&mut rng, &mut row);
            let t = sampler.true_index(&row);
            if (0.49..=0.51).contains(&t) {
                total += 1;
                expected += normal_cdf(t);
                hits += usize::from(sampler.draw_label(&mut rng, &row) == 1);
            }
        }
        let p_hat = hits as f64 / total as f64;
        let p_bar = expected / total as f64;
        let se = (p_bar * (1.0 - p_bar) / total as f64).sqrt();
        assert!((p_bar - 0.6915).abs() < 0.004);
        assert!((p_hat - p_bar).abs() < 3.0 * se, "{p_hat} vs {p_bar}");
    }

    #[test]
    fn boundary_slab_is_balanced() {
        // med(eps | X) = 0: on the slab x'beta0 ~ 0 labels are +1 half the time.
        let spec = DgpSpec::new(ref_beta(3), CovariateLaw::Ar1Gaussian { rho: 0.5 }, ErrorLaw::HeteroscedasticGaussian);
        let mut sampler = spec.sampler().unwrap();
        let mut rng = SeedSpec::new(12, 0).rng();
        let (mut hits, mut total) = (0usize, 0usize);
        let mut row = [0.0; 3];
        while total < 40_000 {
            sampler.draw_covariates(&mut rng, &mut row);
            if sampler.true_index(&row).abs() < 0.01 {
                total += 1;
                hits += usize::from(sampler.draw_label(&mut rng, &row) == 1);
            }
        }
        let p_hat = hits as f64 / total as f64;
        assert!((p_hat - 0.5).abs() < 3.0 * (0.25 / total as f64).sqrt());
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let spec = DgpSpec::new(ref_beta(5), CovariateLaw::Ar1Gaussian { rho: 0.5 }, ErrorLaw::HeteroscedasticGaussian);
        let a = generate_binary_dataset(&spec, 200, SeedSpec::new(5, 17)).unwrap();
        let b = generate_binary_dataset(&spec, 200, SeedSpec::new(5, 17)).unwrap();
        assert_eq!(a, b);
        let c = generate_binary_dataset(&spec, 200, SeedSpec::new(5, 18)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn intercept_augments_covariates() {
        let spec = DgpSpec::new(ref_beta(2), CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma: 0.0 })
            .with_intercept(0.7);
        let d = generate_binary_dataset(&spec, 100, SeedSpec::new(1, 1)).unwrap();
        assert_eq!(d.p(), 3);
        for (x, y) in d.rows() {
            assert_eq!(x[0], 1.0);
            assert_eq!(y, sign(0.7 + dot(&x[1..], spec.beta0.coords())));
        }
    }

    #[test]
    fn spec_validation() {
        let b = ref_beta(3);
        assert!(DgpSpec::new(b.clone(), CovariateLaw::Ar1Gaussian { rho: 1.0 }, ErrorLaw::STANDARD_GAUSSIAN)
            .validate()
            .is_err());
        let bad = ErrorLaw::MinimaxFamily { family: MinimaxKind::FanoSparse, delta: 0.3, c: 1.0 };
        assert!(DgpSpec::new(b.clone(), CovariateLaw::IsotropicGaussian, bad).validate().is_err());
        let bad = ErrorLaw::MinimaxFamily { family: MinimaxKind::FanoSparse, delta: 0.1, c: 1.5 };
        assert!(DgpSpec::new(b.clone(), CovariateLaw::IsotropicGaussian, bad).validate().is_err());
        let mut s = DgpSpec::reference(b);
        s.p = 4;
        assert!(s.validate().is_err());
        assert!(generate_binary_dataset(&DgpSpec::reference(ref_beta(2)), 0, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn multinomial_noiseless_and_one_hot() {
        let beta = ref_beta(3);
        let spec = DgpSpec::new(beta.clone(), CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma: 0.0 });
        let d = generate_multinomial_dataset(&spec, 300, 2, SeedSpec::new(1, 2)).unwrap();
        for i in 0..d.n() {
            let u0 = dot(d.alternative(i, 0), beta.coords());
            let u1 = dot(d.alternative(i, 1), beta.coords());
            assert_eq!(d.choice(i), if u0 >= u1 { 0 } else { 1 });
            assert_eq!(d.indicator(i, 0) + d.indicator(i, 1), 1);
        }
        assert!(generate_multinomial_dataset(&spec, 10, 1, SeedSpec::new(1, 2)).is_err());
        assert!(MultinomialDataset::from_one_hot(2, 1, vec![0.0; 4], &[1, 1, 0, 1]).is_err());
        assert!(MultinomialDataset::from_one_hot(2, 1, vec![0.0; 4], &[1, 0, 0, 1]).is_ok());
    }

    #[test]
    fn multinomial_exchangeable_alternatives_are_uniform() {
        // Alternatives are exchangeable, so each is chosen with probability 1/m.
        let m = 3;
        let n = 60_000;
        let spec = DgpSpec::reference(UnitVector::new(vec![0.6, 0.8]).unwrap());
        let d = generate_multinomial_dataset(&spec, n, m, SeedSpec::new(9, 0)).unwrap();
        let mut counts = [0usize; 3];
        for &c in d.choices() {
            counts[c] += 1;
        }
        let se = ((1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
        for (j, &c) in counts.iter().enumerate() {
            let f = c as f64 / n as f64;
            assert!((f - 1.0 / 3.0).abs() < 4.0 * se, "alt {j}: {f}");
        }
    }

    #[test]
    fn beta0_generators() {
        let b = dense_beta0(6, SeedSpec::new(1, 0)).unwrap();
        assert!(b.coords().iter().all(|&c| c > 0.0));
        let ratio = b.coords().iter().cloned().fold(0.0, f64::max) / b.coords().iter().cloned().fold(1.0, f64::min);
        assert!(ratio <= 2.0);
        let s = sparse_beta0(50, 4, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(s.support(0.0).len(), 4);
        assert!(sparse_beta0(5, 6, SeedSpec::new(1, 0)).is_err());
        assert_eq!(dense_beta0(6, SeedSpec::new(1, 0)).unwrap(), b);
    }
}
