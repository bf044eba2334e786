//! Named verification checks producing `check,params,estimate,bound,stderr,pass`
//! rows.

use std::io::Write;

use maxscore_core::estimators::smoothed::smoothed_score_gradient;
use maxscore_core::score::{empirical_risk, empirical_score, gaussian_wedge_probability, multinomial_score};
use maxscore_core::theory::cap::spherical_cap_check;
use maxscore_core::theory::curvature::curvature_check;
use maxscore_core::theory::divergence::{hellinger_bound_check, kl_bound_check, SweepReport};
use maxscore_core::theory::margin::{default_t_grid, transition_constant_estimate};
use maxscore_core::theory::minimax::{build_minimax_family, family_margin_bound, pairwise_kl_mc, FamilyParams};
use maxscore_core::theory::multinomial::{multinomial_curvature_check, rank_ordering_check};
use maxscore_core::theory::packing::{gv_packing, gv_target};
use maxscore_core::theory::CheckRow;
use maxscore_core::{
    generate_binary_dataset, generate_multinomial_dataset, sample_unit_sphere, BinaryDataset, CovariateLaw, DgpSpec,
    ErrorLaw, McEstimate, SeedSpec, UnitVector,
};

use crate::emit::format_float;

pub const CHECKS: [&str; 15] = [
    "affine-identity",
    "wedge",
    "gradient",
    "kl-bound",
    "hellinger-bound",
    "margin",
    "curvature",
    "cap",
    "gv-packing",
    "minimax-margin",
    "minimax-separation",
    "minimax-kl",
    "rank-ordering",
    "multinomial-curvature",
    "multinomial-reduction",
];

/// Sample sizes and seed shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Monte Carlo draws per estimate; the spherical cap check uses ten times
    /// as many.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { mc_samples: 200_000, seed: 20_240_601 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown check `{0}`; available: {list}", list = CHECKS.join(", "))]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] maxscore_core::Error),
}

type Rows = Result<Vec<CheckRow>, VerifyError>;

fn row(check: &str, params: String, estimate: f64, bound: f64, stderr: f64, pass: bool) -> CheckRow {
    CheckRow { check: check.to_owned(), params, estimate, bound, stderr, pass }
}

pub fn run_check(name: &str, opts: &VerifyOptions) -> Rows {
    let seed = SeedSpec::new(opts.seed, 0);
    match name {
        "affine-identity" => affine_identity(seed),
        "wedge" => wedge(opts.mc_samples, seed),
        "gradient" => gradient(seed),
        "kl-bound" => Ok(vec![sweep_row("kl-bound", kl_bound_check(0.005)?)]),
        "hellinger-bound" => Ok(vec![sweep_row("hellinger-bound", hellinger_bound_check(0.005)?)]),
        "margin" => margin(opts.mc_samples, seed),
        "curvature" => curvature(opts.mc_samples, seed),
        "cap" => cap(10 * opts.mc_samples, seed),
        "gv-packing" => packing(seed),
        "minimax-margin" => minimax_margin(opts.mc_samples, seed),
        "minimax-separation" => minimax_separation(seed),
        "minimax-kl" => minimax_kl(opts.mc_samples, seed),
        "rank-ordering" => rank_ordering(seed),
        "multinomial-curvature" => multinomial_curvature(opts.mc_samples, seed),
        "multinomial-reduction" => multinomial_reduction(seed),
        other => Err(VerifyError::Unknown(other.to_owned())),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Rows {
    let mut rows = Vec::new();
    for name in CHECKS {
        rows.extend(run_check(name, opts)?);
    }
    Ok(rows)
}

pub fn write_report<W: Write>(rows: &[CheckRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "check,params,estimate,bound,stderr,pass")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.check,
            r.params,
            format_float(r.estimate),
            format_float(r.bound),
            format_float(r.stderr),
            if r.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}

fn sweep_row(check: &str, r: SweepReport) -> CheckRow {
    row(check, format!("grid=0.005;points={}", r.points), r.worst_gap, 0.0, 0.0, r.passed())
}

fn random_dataset(seed: SeedSpec, n: usize, p: usize) -> maxscore_core::Result<(BinaryDataset, UnitVector)> {
    let beta0 = sample_unit_sphere(p, seed.derive(1))?;
    let data = generate_binary_dataset(&DgpSpec::reference(beta0), n, seed.derive(2))?;
    Ok((data, sample_unit_sphere(p, seed.derive(3))?))
}

/// Mismatches of `score = 1 - 2 risk` over 200 random pairs, compared bitwise.
fn affine_identity(seed: SeedSpec) -> Rows {
    let mut mismatches = 0;
    for k in 0..200u64 {
        let (n, p) = (1 + (k as usize * 37) % 200, 1 + k as usize % 20);
        let (data, beta) = random_dataset(seed.derive(k), n, p)?;
        if empirical_score(&data, &beta)?.value != 1.0 - 2.0 * empirical_risk(&data, &beta)? {
            mismatches += 1;
        }
    }
    Ok(vec![row("affine-identity", "pairs=200".into(), f64::from(mismatches), 0.0, 0.0, mismatches == 0)])
}

/// Monte Carlo wedge probability: labels `sgn(x'b1)` scored by `b2` under
/// isotropic Gaussian covariates, drawn in chunks to bound memory.
pub fn wedge_mc(b1: &UnitVector, b2: &UnitVector, samples: usize, seed: SeedSpec) -> maxscore_core::Result<McEstimate> {
    const CHUNK: usize = 50_000;
    let spec = DgpSpec::new(b1.clone(), CovariateLaw::IsotropicGaussian, ErrorLaw::Gaussian { sigma: 0.0 });
    let mut wrong = 0.0;
    let mut done = 0;
    let mut chunk_id = 0;
    while done < samples {
        let len = CHUNK.min(samples - done);
        let data = generate_binary_dataset(&spec, len, seed.derive(chunk_id))?;
        wrong += empirical_risk(&data, b2)? * len as f64;
        done += len;
        chunk_id += 1;
    }
    let q = wrong.round() / samples as f64;
    Ok(McEstimate { mean: q, std_error: (q * (1.0 - q) / samples as f64).sqrt(), samples })
}

fn wedge(mc: usize, seed: SeedSpec) -> Rows {
    let mut rows = Vec::new();
    for (i, &p) in [2usize, 10, 50].iter().enumerate() {
        for k in 0..3u64 {
            let s = seed.derive(100 * i as u64 + k);
            let b1 = sample_unit_sphere(p, s.derive(1))?;
            let b2 = sample_unit_sphere(p, s.derive(2))?;
            let exact = gaussian_wedge_probability(&b1, &b2)?;
            let est = wedge_mc(&b1, &b2, mc, s.derive(3))?;
            let pass = (est.mean - exact).abs() <= 3.0 * est.std_error;
            rows.push(row("wedge", format!("p={p};pair={k}"), est.mean, exact, est.std_error, pass));
        }
    }
    Ok(rows)
}

/// Largest gap between the analytic gradient and central differences.
pub fn gradient_error(data: &BinaryDataset, beta: &[f64], xi: f64) -> maxscore_core::Result<f64> {
    use maxscore_core::estimators::smoothed_score;
    let g = smoothed_score_gradient(data, beta, xi)?;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..beta.len() {
        let (mut up, mut down) = (beta.to_vec(), beta.to_vec());
        up[j] += h;
        down[j] -= h;
        let fd = (smoothed_score(data, &up, xi)? - smoothed_score(data, &down, xi)?) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs());
    }
    Ok(worst)
}

fn gradient(seed: SeedSpec) -> Rows {
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let (data, beta) = random_dataset(seed.derive(k), 50 + 10 * k as usize, 2 + k as usize % 6)?;
        let xi = [0.5, 1.0, 4.0, 10.0][k as usize % 4];
        worst = worst.max(gradient_error(&data, beta.coords(), xi)?);
    }
    Ok(vec![row("gradient", "triples=20;h=1e-6".into(), worst, 1e-6, 0.0, worst <= 1e-6)])
}

fn margin(mc: usize, seed: SeedSpec) -> Rows {
    let spec = DgpSpec::reference(UnitVector::normalize(vec![1.0, -1.0, 2.0])?);
    let grid = default_t_grid(0.2, 10);
    let est = transition_constant_estimate(&spec, &grid, mc, seed)?;
    let se = est.std_errors.last().copied().unwrap_or(0.0) / grid.last().copied().unwrap_or(1.0);
    let pass = (1.9..=2.1).contains(&est.fitted_c);
    Ok(vec![row("margin", "model=reference;t<=0.2".into(), est.fitted_c, 2.0, se, pass)])
}

fn curvature(mc: usize, seed: SeedSpec) -> Rows {
    let beta0 = UnitVector::normalize(vec![1.0, 2.0, 3.0, 4.0, 5.0])?;
    let spec = DgpSpec::reference(beta0.clone());
    let toward = sample_unit_sphere(5, seed.derive(1))?;
    let distances = [0.0, 0.1, 0.2, 0.4, 0.8];
    let dirs = distances.iter().map(|&d| beta0.at_distance(&toward, d)).collect::<Result<Vec<_>, _>>()?;
    let report = curvature_check(&spec, &dirs, mc, seed.derive(2))?;
    let mut rows: Vec<CheckRow> = report
        .points
        .iter()
        .zip(distances)
        .map(|(pt, d)| {
            let pass = if d == 0.0 { pt.excess.mean == 0.0 } else { pt.positive };
            row("curvature", format!("d={d}"), pt.excess.mean, 0.0, pt.excess.std_error, pass)
        })
        .collect();
    let (a, b) = (&report.points[2].excess, &report.points[3].excess);
    rows.push(row("curvature", "monotone=0.2..0.4".into(), b.mean - a.mean, 0.0, a.std_error.hypot(b.std_error), b.mean > a.mean));
    Ok(rows)
}

fn cap(mc: usize, seed: SeedSpec) -> Rows {
    let mut rows = Vec::new();
    for (i, &(p, r)) in [(8usize, 1.0), (8, 0.5), (16, 0.5)].iter().enumerate() {
        let c = spherical_cap_check(p, r, mc, seed.derive(i as u64))?;
        rows.push(row("cap", format!("p={p};r={r};lower={}", format_float(c.lower)), c.estimate.mean, c.upper, c.estimate.std_error, c.pass));
    }
    Ok(rows)
}

fn packing(seed: SeedSpec) -> Rows {
    let mut rows = Vec::new();
    for (i, &(d, s)) in [(8usize, 1usize), (64, 8), (256, 16)].iter().enumerate() {
        let set = gv_packing(d, s, 1_000_000, seed.derive(i as u64))?;
        let pass = set.verify().all();
        rows.push(row("gv-packing", format!("d={d};s={s};min_dist={}", set.min_pairwise_distance()), set.len() as f64, gv_target(d, s) as f64, 0.0, pass));
    }
    Ok(rows)
}

fn sparse_family(c: f64, seed: SeedSpec) -> Result<maxscore_core::theory::minimax::MinimaxFamily, VerifyError> {
    Ok(build_minimax_family(FamilyParams::Sparse { n: 1000, p: 200, s: 4 }, c, seed)?)
}

fn minimax_margin(mc: usize, seed: SeedSpec) -> Rows {
    let mut rows = Vec::new();
    let t = [0.05, 0.1, 0.2];
    for &c in &[0.5, 1.0] {
        let fam = sparse_family(c, seed)?;
        let est = transition_constant_estimate(&fam.members[0].spec, &t, mc, seed.derive(1))?;
        for i in 0..t.len() {
            let bound = family_margin_bound(c, t[i]);
            let pass = est.prob[i] <= bound + 3.0 * est.std_errors[i];
            rows.push(row("minimax-margin", format!("C={c};t={}", t[i]), est.prob[i], bound, est.std_errors[i], pass));
        }
    }
    Ok(rows)
}

fn minimax_separation(seed: SeedSpec) -> Rows {
    let mut rows = Vec::new();
    for &c in &[0.5, 1.0] {
        let sparse = sparse_family(c, seed)?;
        let moderate = build_minimax_family(FamilyParams::Moderate { n: 2000, p: 6, max_members: 64 }, c, seed)?;
        for (label, fam) in [("sparse", &sparse), ("moderate", &moderate)] {
            let mut wedge_ok = true;
            for (i, a) in fam.members.iter().enumerate() {
                for b in &fam.members[i + 1..] {
                    wedge_ok &= gaussian_wedge_probability(&a.beta, &b.beta)? >= a.beta.distance(&b.beta) / std::f64::consts::PI;
                }
            }
            let pass = fam.min_distance >= fam.separation && wedge_ok;
            rows.push(row("minimax-separation", format!("family={label};C={c};members={}", fam.members.len()), fam.min_distance, fam.separation, 0.0, pass));
        }
    }
    Ok(rows)
}

fn minimax_kl(mc: usize, seed: SeedSpec) -> Rows {
    let fam = sparse_family(1.0, seed)?;
    let bound = fam.kl_bound().unwrap_or(f64::INFINITY);
    let kl = pairwise_kl_mc(&fam, 0, 1, mc, seed.derive(1))?;
    let pass = kl.mean <= bound + 3.0 * kl.std_error;
    Ok(vec![row("minimax-kl", format!("family=sparse;delta={}", format_float(fam.param)), kl.mean, bound, kl.std_error, pass)])
}

fn rank_ordering(seed: SeedSpec) -> Rows {
    let spec = DgpSpec::reference(UnitVector::normalize(vec![1.0, -0.5, 0.8])?);
    let r = rank_ordering_check(&spec, 3, 200, 10_000, seed)?;
    let rate = r.concordance_rate();
    Ok(vec![row(
        "rank-ordering",
        format!("m=3;matrices=200;tested={};skipped={}", r.pairs_tested, r.pairs_skipped),
        rate,
        0.95,
        0.0,
        rate >= 0.95,
    )])
}

fn multinomial_curvature(mc: usize, seed: SeedSpec) -> Rows {
    let beta0 = UnitVector::normalize(vec![1.0, -0.5, 0.8])?;
    let spec = DgpSpec::reference(beta0.clone());
    let toward = sample_unit_sphere(3, seed.derive(1))?;
    let dirs = vec![beta0.clone(), beta0.at_distance(&toward, 0.3)?];
    let report = multinomial_curvature_check(&spec, 3, &dirs, mc, seed.derive(2))?;
    Ok(report
        .points
        .iter()
        .map(|pt| {
            let pass = if pt.distance == 0.0 { pt.excess.mean == 0.0 } else { pt.positive };
            row("multinomial-curvature", format!("m=3;d={:.3}", pt.distance), pt.excess.mean, 0.0, pt.excess.std_error, pass)
        })
        .collect())
}

/// Exact check of `2 wins = n + (agreements - disagreements)` for `m = 2`.
fn multinomial_reduction(seed: SeedSpec) -> Rows {
    let mut mismatches = 0;
    for k in 0..20u64 {
        let s = seed.derive(k);
        let spec = DgpSpec::reference(sample_unit_sphere(3, s.derive(1))?);
        let data = generate_multinomial_dataset(&spec, 100, 2, s.derive(2))?;
        let bin = BinaryDataset::from_two_alternatives(&data)?;
        for j in 0..10 {
            let beta = sample_unit_sphere(3, s.derive(10 + j))?;
            let (ms, bs) = (multinomial_score(&data, &beta)?, empirical_score(&bin, &beta)?);
            if 2 * ms.numerator != bs.numerator + bs.denominator as i64 {
                mismatches += 1;
            }
        }
    }
    Ok(vec![row("multinomial-reduction", "datasets=20;betas=10".into(), f64::from(mismatches), 0.0, 0.0, mismatches == 0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions { mc_samples: 20_000, seed: 3 }
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(matches!(run_check("nope", &quick()), Err(VerifyError::Unknown(_))));
    }

    #[test]
    fn exact_checks_pass() {
        for name in ["affine-identity", "gradient", "kl-bound", "hellinger-bound", "multinomial-reduction"] {
            let rows = run_check(name, &quick()).unwrap();
            assert!(rows.iter().all(|r| r.pass), "{rows:?}");
        }
    }

    #[test]
    fn wedge_mc_matches_closed_form() {
        let b1 = UnitVector::basis(3, 0).unwrap();
        let b2 = UnitVector::normalize(vec![1.0, 1.0, 0.0]).unwrap();
        let est = wedge_mc(&b1, &b2, 120_000, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(est.samples, 120_000);
        assert!(est.agrees_with(0.25, 3.0), "{est:?}");
    }

    #[test]
    fn report_has_header_and_one_line_per_row() {
        let rows = run_check("kl-bound", &quick()).unwrap();
        let mut buf = Vec::new();
        write_report(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("check,params,estimate,bound,stderr,pass\n"));
        assert_eq!(text.lines().count(), 1 + rows.len());
        assert!(text.trim_end().ends_with("PASS"));
    }
}
