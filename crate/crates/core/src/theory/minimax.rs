//! Parameter families used by the minimax lower-bound constructions.
//!
//! Both families draw `X ~ N(0, I_p)` and put `P(Y = 1 | X = x)` at
//! `1/2 + clamp(beta'x / C, -h, h)` with
//! `h = (a ∨ |x_1| / (2 C m)) ∧ 1/4`, where
//!
//! - sparse family: `a = delta`, `m = sqrt(1 + delta^2)`,
//! - moderate family: `a = eps sqrt(p)`, `m = sqrt(1 + (p - 1) eps^2)`.
//!
//! The conditional probability therefore always lies in `[1/4, 3/4]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::divergence::kl_bernoulli;
use super::packing::gv_packing;
use crate::error::{invalid, Error, Result};
use crate::math::{dot, PI};
use crate::model::{CovariateLaw, DgpSpec, ErrorLaw, UnitVector};
use crate::rng::{tags, SeedSpec};
use crate::score::McEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimaxKind {
    /// Hypercube family `(1, eps * omega) / m(eps)`, `omega in {-1, 1}^{p-1}`.
    AssouadModerate,
    /// Sparse packing family `(1, delta / sqrt(s) * w) / m(delta)`.
    FanoSparse,
}

fn sqrt_2_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}

/// `U_c = (128/3) sqrt(2/pi) [6 + sqrt3 + 2(sqrt3 + 6)/27 + sqrt(pi)/(8 sqrt2)]`.
pub fn fano_constant() -> f64 {
    let r3 = 3.0f64.sqrt();
    128.0 / 3.0 * sqrt_2_over_pi() * (6.0 + r3 + 2.0 * (r3 + 6.0) / 27.0 + PI.sqrt() / (8.0 * 2.0f64.sqrt()))
}

/// `zeta = 128 / (3 sqrt3) sqrt(2/pi) (1 + sqrt3)`.
pub fn assouad_constant() -> f64 {
    let r3 = 3.0f64.sqrt();
    128.0 / (3.0 * r3) * sqrt_2_over_pi() * (1.0 + r3)
}

/// `delta = ((s/64) ln(p/s) / (n U_c))^{1/3} C^{2/3}`.
pub fn fano_delta(n: usize, p: usize, s: usize, c: f64) -> f64 {
    let (n, p, s) = (n as f64, p as f64, s as f64);
    ((s / 64.0) * (p / s).ln() / (n * fano_constant())).cbrt() * c.powf(2.0 / 3.0)
}

/// `eps = (1 / (2 zeta))^{1/3} n^{-1/3} p^{-1/6} C^{2/3}`.
pub fn assouad_epsilon(n: usize, p: usize, c: f64) -> f64 {
    (1.0 / (2.0 * assouad_constant())).cbrt() * (n as f64).powf(-1.0 / 3.0) * (p as f64).powf(-1.0 / 6.0) * c.powf(2.0 / 3.0)
}

/// `(a, m)` for a family: the clip floor and the normalizing constant.
fn family_scales(kind: MinimaxKind, p: usize, param: f64) -> (f64, f64) {
    match kind {
        MinimaxKind::FanoSparse => (param, (1.0 + param * param).sqrt()),
        MinimaxKind::AssouadModerate => {
            (param * (p as f64).sqrt(), (1.0 + (p as f64 - 1.0) * param * param).sqrt())
        }
    }
}

/// Clip half-width `h(x_1) = (a ∨ |x_1| / (2 C m)) ∧ 1/4`.
pub fn clip_half_width(kind: MinimaxKind, p: usize, param: f64, c: f64, x1: f64) -> f64 {
    let (a, m) = family_scales(kind, p, param);
    a.max(x1.abs() / (2.0 * c * m)).min(0.25)
}

/// Conditional probability given the index `beta'x` and the first covariate.
pub fn condprob_from_index(kind: MinimaxKind, p: usize, param: f64, c: f64, index: f64, x1: f64) -> f64 {
    let h = clip_half_width(kind, p, param, c, x1);
    0.5 + (index / c).clamp(-h, h)
}

fn check_params(param: f64, c: f64) -> Result<()> {
    if !(param > 0.0 && param < 0.25) {
        return Err(invalid("delta", format!("{param} is not in (0, 1/4)")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid("c", format!("{c} is not in (0, 1]")));
    }
    Ok(())
}

/// `P(Y = 1 | X = x)` for the family member `beta`.
pub fn minimax_family_condprob(kind: MinimaxKind, beta: &UnitVector, c: f64, param: f64, x: &[f64]) -> Result<f64> {
    check_params(param, c)?;
    if x.len() != beta.dim() {
        return Err(Error::DimensionMismatch { expected: beta.dim(), got: x.len() });
    }
    Ok(condprob_from_index(kind, beta.dim(), param, c, dot(beta.coords(), x), x[0]))
}

/// Size parameters of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    /// All hypercube vertices when `2^{p-1} <= max_members`, otherwise
    /// `max_members` distinct vertices drawn at random.
    Moderate { n: usize, p: usize, max_members: usize },
    /// Members indexed by a Gilbert–Varshamov packing of weight `s` in
    /// dimension `p - 1`.
    Sparse { n: usize, p: usize, s: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub beta: UnitVector,
    pub spec: DgpSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxFamily {
    pub kind: MinimaxKind,
    pub p: usize,
    /// `delta` for the sparse family, `eps` for the moderate family.
    pub param: f64,
    pub c: f64,
    pub members: Vec<FamilyMember>,
    /// Guaranteed lower bound on pairwise Euclidean distances.
    pub separation: f64,
    /// Smallest observed pairwise Euclidean distance.
    pub min_distance: f64,
}

impl MinimaxFamily {
    pub fn condprob(&self, member: usize, x: &[f64]) -> f64 {
        let beta = &self.members[member].beta;
        condprob_from_index(self.kind, self.p, self.param, self.c, dot(beta.coords(), x), x[0])
    }

    /// Per-observation KL bound `U_c delta^3 / C^2` of the sparse family.
    pub fn kl_bound(&self) -> Option<f64> {
        match self.kind {
            MinimaxKind::FanoSparse => Some(fano_constant() * self.param.powi(3) / (self.c * self.c)),
            MinimaxKind::AssouadModerate => None,
        }
    }
}

fn member(kind: MinimaxKind, gamma: Vec<f64>, param: f64, c: f64) -> Result<FamilyMember> {
    let beta = UnitVector::normalize(gamma)?;
    let spec = DgpSpec::new(
        beta.clone(),
        CovariateLaw::IsotropicGaussian,
        ErrorLaw::MinimaxFamily { family: kind, delta: param, c },
    );
    spec.validate()?;
    Ok(FamilyMember { beta, spec })
}

fn min_pairwise_distance(members: &[FamilyMember]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            best = best.min(a.beta.distance(&b.beta));
        }
    }
    best
}

/// Builds a family and verifies its pairwise separation.
pub fn build_minimax_family(params: FamilyParams, c: f64, seed: SeedSpec) -> Result<MinimaxFamily> {
    let (kind, p, param, members, separation) = match params {
        FamilyParams::Sparse { n, p, s } => {
            if p < 2 {
                return Err(invalid("p", "dimension must be at least 2"));
            }
            let delta = fano_delta(n, p, s, c);
            check_params(delta, c)?;
            let packing = gv_packing(p - 1, s, 1_000_000, seed)?;
            let scale = delta / (s as f64).sqrt();
            let members = packing
                .codewords()
                .iter()
                .map(|support| {
                    let mut gamma = vec![0.0; p];
                    gamma[0] = 1.0;
                    for &j in support {
                        gamma[j + 1] = scale;
                    }
                    member(MinimaxKind::FanoSparse, gamma, delta, c)
                })
                .collect::<Result<Vec<_>>>()?;
            (MinimaxKind::FanoSparse, p, delta, members, delta / 2.0)
        }
        FamilyParams::Moderate { n, p, max_members } => {
            if p < 2 {
                return Err(invalid("p", "dimension must be at least 2"));
            }
            if max_members < 2 {
                return Err(invalid("max_members", "a family needs at least two members"));
            }
            let eps = assouad_epsilon(n, p, c);
            check_params(eps, c)?;
            let d = p - 1;
            let mut omegas: Vec<Vec<bool>> = Vec::new();
            if d < 63 && (1u64 << d) <= max_members as u64 {
                for code in 0..(1u64 << d) {
                    omegas.push((0..d).map(|j| code >> j & 1 == 1).collect());
                }
            } else {
                let mut rng = seed.derive(tags::GRID).rng();
                while omegas.len() < max_members {
                    let w: Vec<bool> = (0..d).map(|_| rng.random()).collect();
                    if !omegas.contains(&w) {
                        omegas.push(w);
                    }
                }
            }
            let members = omegas
                .into_iter()
                .map(|w| {
                    let mut gamma = Vec::with_capacity(p);
                    gamma.push(1.0);
                    gamma.extend(w.iter().map(|&b| if b { eps } else { -eps }));
                    member(MinimaxKind::AssouadModerate, gamma, eps, c)
                })
                .collect::<Result<Vec<_>>>()?;
            let m = (1.0 + d as f64 * eps * eps).sqrt();
            (MinimaxKind::AssouadModerate, p, eps, members, 2.0 * eps / m)
        }
    };
    let min_distance = min_pairwise_distance(&members);
    // distances are exact up to rounding of the normalization
    if min_distance < separation * (1.0 - 1e-12) {
        return Err(Error::InvalidData(format!(
            "family separation {min_distance} is below the guaranteed {separation}"
        )));
    }
    Ok(MinimaxFamily { kind, p, param, c, members, separation, min_distance })
}

/// Monte Carlo estimate of `E_X[KL(Ber(eta_i(X)) || Ber(eta_j(X)))]`, the
/// per-observation KL divergence between two members' joint laws.
pub fn pairwise_kl_mc(family: &MinimaxFamily, i: usize, j: usize, mc_samples: usize, seed: SeedSpec) -> Result<McEstimate> {
    if i >= family.members.len() || j >= family.members.len() {
        return Err(invalid("member", "index out of range"));
    }
    if mc_samples < 2 {
        return Err(invalid("mc_samples", "at least two samples are required"));
    }
    let mut rng = seed.derive(tags::MONTE_CARLO).rng();
    let mut x = vec![0.0; family.p];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc_samples {
        for v in x.iter_mut() {
            *v = rng.sample(rand_distr::StandardNormal);
        }
        let k = kl_bernoulli(family.condprob(i, &x), family.condprob(j, &x))?;
        sum += k;
        sum_sq += k * k;
    }
    Ok(McEstimate::from_sums(sum, sum_sq, mc_samples))
}

/// Margin bound `5 sqrt(2/pi) C t` satisfied by both families for `t < 1/4`.
pub fn family_margin_bound(c: f64, t: f64) -> f64 {
    5.0 * sqrt_2_over_pi() * c * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::gaussian_wedge_probability;

    #[test]
    fn constants() {
        let uc = fano_constant();
        let by_hand = 128.0 / 3.0 * 0.797_884_560_802_865_4 * (6.0 + 1.732_050_807_568_877_2 + 2.0 * 7.732_050_807_568_877 / 27.0 + 1.772_453_850_905_516 / 11.313_708_498_984_761);
        assert!((uc - by_hand).abs() < 1e-10);
        assert!((uc - 288.0).abs() < 1.0);
        let zeta = assouad_constant();
        assert!((zeta - 128.0 / 5.196_152_422_706_632 * 0.797_884_560_802_865_4 * 2.732_050_807_568_877).abs() < 1e-10);
    }

    #[test]
    fn condprob_boundary_and_range() {
        let beta = UnitVector::normalize(vec![1.0, 0.05, 0.0, 0.05]).unwrap();
        let x = [0.05, -1.0, 0.3, 0.0];
        assert_eq!(dot(beta.coords(), &x), 0.0);
        assert_eq!(minimax_family_condprob(MinimaxKind::FanoSparse, &beta, 0.7, 0.1, &x).unwrap(), 0.5);
        let mut rng = SeedSpec::new(1, 0).rng();
        let mut z = [0.0; 4];
        for _ in 0..10_000 {
            for v in z.iter_mut() {
                *v = 3.0 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            for &c in &[0.2, 0.5, 1.0] {
                for kind in [MinimaxKind::FanoSparse, MinimaxKind::AssouadModerate] {
                    let eta = minimax_family_condprob(kind, &beta, c, 0.1, &z).unwrap();
                    assert!((0.25..=0.75).contains(&eta));
                }
            }
        }
        assert!(minimax_family_condprob(MinimaxKind::FanoSparse, &beta, 1.0, 0.3, &x).is_err());
        assert!(minimax_family_condprob(MinimaxKind::FanoSparse, &beta, 1.2, 0.1, &x).is_err());
    }

    #[test]
    fn condprob_agrees_with_piecewise_form_at_unit_c() {
        // with C = 1 the clamp equals the two-branch definition exactly
        let (p, delta) = (5, 0.1);
        let m = (1.0 + delta * delta).sqrt();
        let mut rng = SeedSpec::new(2, 0).rng();
        for _ in 0..10_000 {
            let index: f64 = rng.random_range(-1.0..1.0);
            let x1: f64 = rng.random_range(-2.0..2.0);
            let inner = (delta.max(x1.abs() / (2.0 * m))).min(0.25);
            let expected = if index.abs() <= inner { 0.5 + index } else { 0.5 + inner * index.signum() };
            let got = condprob_from_index(MinimaxKind::FanoSparse, p, delta, 1.0, index, x1);
            assert!((got - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn sparse_family_packing() {
        let fam = build_minimax_family(FamilyParams::Sparse { n: 1000, p: 200, s: 4 }, 1.0, SeedSpec::new(3, 0)).unwrap();
        let delta = fam.param;
        assert!((delta - fano_delta(1000, 200, 4, 1.0)).abs() < 1e-15);
        assert!(fam.members.len() >= 2);
        for (i, a) in fam.members.iter().enumerate() {
            assert!((crate::math::norm(a.beta.coords()) - 1.0).abs() < 1e-12);
            for b in &fam.members[i + 1..] {
                let d2 = a.beta.distance(&b.beta).powi(2);
                assert!(d2 >= delta * delta / 4.0);
                let w = gaussian_wedge_probability(&a.beta, &b.beta).unwrap();
                assert!(w >= a.beta.distance(&b.beta) / PI);
            }
        }
    }

    #[test]
    fn moderate_family_enumerates_hypercube() {
        let fam = build_minimax_family(FamilyParams::Moderate { n: 2000, p: 5, max_members: 64 }, 0.8, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(fam.members.len(), 16);
        let eps = fam.param;
        let m = (1.0 + 4.0 * eps * eps).sqrt();
        assert!((fam.min_distance - 2.0 * eps / m).abs() < 1e-12);
        let fam = build_minimax_family(FamilyParams::Moderate { n: 2000, p: 40, max_members: 10 }, 0.8, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(fam.members.len(), 10);
    }

    #[test]
    fn sparse_family_kl_below_bound() {
        let fam = build_minimax_family(FamilyParams::Sparse { n: 1000, p: 200, s: 4 }, 1.0, SeedSpec::new(4, 0)).unwrap();
        let bound = fam.kl_bound().unwrap();
        let kl = pairwise_kl_mc(&fam, 0, 1, 200_000, SeedSpec::new(4, 1)).unwrap();
        assert!(kl.mean <= bound + 3.0 * kl.std_error, "{kl:?} vs {bound}");
        assert!(kl.mean > 0.0);
    }
}
