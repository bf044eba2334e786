//! Result serialization: CSV tables and SVG kernel density plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::experiments::{ExperimentResult, ResultRow};

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "n",
    "p",
    "s0",
    "replicate",
    "scaled_error",
    "norm_diff",
    "misclass_rate",
    "type1",
    "type2",
    "wall_time",
];

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("nothing to plot")]
    Empty,
}

/// Seventeen significant digits in scientific notation; parses back to the
/// identical `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io { path: path.display().to_string(), source }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_csv<W: Write>(result: &ExperimentResult, writer: W) -> Result<(), EmitError> {
    let mut wtr = csv_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for r in &result.rows {
        wtr.write_record([
            r.method.name().to_owned(),
            r.n.to_string(),
            r.p.to_string(),
            r.s0.to_string(),
            r.replicate.to_string(),
            format_float(r.scaled_error),
            format_float(r.norm_diff),
            format_float(r.misclass_rate),
            r.type1.to_string(),
            r.type2.to_string(),
            format_float(r.wall_time),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<(), EmitError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_csv(result, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: Read>(reader: R) -> Result<ExperimentResult, EmitError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let found = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    let expected = CSV_HEADER.join(",");
    if found != expected {
        return Err(EmitError::Header { expected, found });
    }
    let rows = rdr.deserialize::<ResultRow>().collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult { rows })
}

/// How rows are grouped into density curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    MethodN,
    MethodS0,
}

impl GroupKey {
    fn label(self, r: &ResultRow) -> String {
        match self {
            GroupKey::MethodN => format!("{} n={}", r.method, r.n),
            GroupKey::MethodS0 => format!("{} s0={}", r.method, r.s0),
        }
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `0.9 min(sd, IQR / 1.34) n^{-1/5}`, falling back to
/// whichever spread is positive.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let (_, sd) = mean_sd(&s);
    let iqr = (quantile(&s, 0.75) - quantile(&s, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 1e-3 * s[0].abs().max(1.0),
    };
    0.9 * spread * (s.len() as f64).powf(-0.2)
}

/// Gaussian kernel density of `xs` with bandwidth `h`, evaluated at `at`.
pub fn gaussian_kde(xs: &[f64], h: f64, at: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    at.iter()
        .map(|&t| xs.iter().map(|&x| (-0.5 * ((t - x) / h).powi(2)).exp()).sum::<f64>() * norm)
        .collect()
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// One density curve of the scaled error per group.
pub fn density_svg(result: &ExperimentResult, key: GroupKey) -> Result<String, EmitError> {
    let mut groups: BTreeMap<(crate::config::StudyMethod, usize), (String, Vec<f64>)> = BTreeMap::new();
    for r in &result.rows {
        let k = match key {
            GroupKey::MethodN => (r.method, r.n),
            GroupKey::MethodS0 => (r.method, r.s0),
        };
        groups.entry(k).or_insert_with(|| (key.label(r), Vec::new())).1.push(r.scaled_error);
    }
    if groups.is_empty() {
        return Err(EmitError::Empty);
    }
    const POINTS: usize = 200;
    let curves: Vec<(String, Vec<f64>, Vec<f64>)> = groups
        .into_values()
        .map(|(label, xs)| {
            let h = silverman_bandwidth(&xs);
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
            let grid: Vec<f64> = (0..POINTS).map(|i| lo + (hi - lo) * i as f64 / (POINTS - 1) as f64).collect();
            let dens = gaussian_kde(&xs, h, &grid);
            (label, grid, dens)
        })
        .collect();
    let x_lo = curves.iter().map(|c| c.1[0]).fold(f64::INFINITY, f64::min);
    let x_hi = curves.iter().map(|c| c.1[POINTS - 1]).fold(f64::NEG_INFINITY, f64::max);
    let y_hi = curves.iter().flat_map(|c| c.2.iter().copied()).fold(0.0, f64::max);
    let (w, h, m) = (720.0, 440.0, 50.0);
    let sx = |x: f64| m + (x - x_lo) / (x_hi - x_lo) * (w - 2.0 * m);
    let sy = |y: f64| h - m - y / y_hi * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<line x1="{m}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - m, w - m, h - m);
    let _ = writeln!(svg, r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{}" stroke="black"/>"#, h - m);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">scaled error (n/p)^(1/3) |beta_hat - beta0|</text>"#, w / 2.0, h - 15.0);
    for i in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * f64::from(i) / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" font-size="10" text-anchor="middle">{x:.3}</text>"#, sx(x), h - m + 14.0);
    }
    for (i, (label, grid, dens)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = grid.iter().zip(dens).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = m + 14.0 * i as f64;
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{label}</text>"#, w - m - 150.0);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_density_svg(result: &ExperimentResult, key: GroupKey, path: &Path) -> Result<(), EmitError> {
    let svg = density_svg(result, key)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    std::fs::write(path, svg).map_err(io_err(path))
}
