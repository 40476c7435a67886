//! Dataset files, simulation, and report persistence.
//!
//! Datasets are UTF-8 delimited text (comma or whitespace), one header row,
//! `#` comment lines, and per-row columns `t y sigma` or `t y err_lo err_hi`
//! (two error columns are symmetrized into sigma by their arithmetic mean).
//! Scientific notation is accepted. Values are written in shortest
//! round-trip decimal form, so a written file loads back bit-exactly.

mod report;

pub use report::{load_report, parse_report, render_report, save_report, REPORT_FORMAT_VERSION};

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{CorrelatorPoint, ExpSumParams};
use crate::rng::seeded;

/// An observed series (t, y, sigma) with optional pair correlation and a
/// provenance record.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorDataset {
    points: Vec<CorrelatorPoint>,
    rho12: f64,
    provenance: Vec<String>,
}

impl CorrelatorDataset {
    /// Builds a dataset; points are sorted by t and duplicates rejected.
    pub fn new(mut points: Vec<CorrelatorPoint>, rho12: f64, provenance: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("dataset must have at least one point".into()));
        }
        if !(rho12.is_finite() && rho12.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dataset correlation {rho12} must lie in (-1, 1)"
            )));
        }
        for p in &points {
            if !(p.sigma.is_finite() && p.sigma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "sigma {} at t={} must be > 0",
                    p.sigma, p.t
                )));
            }
        }
        points.sort_by_key(|p| p.t);
        for pair in points.windows(2) {
            if pair[0].t == pair[1].t {
                return Err(Error::InvalidParameter(format!("duplicate time t={}", pair[0].t)));
            }
        }
        Ok(Self { points, rho12, provenance })
    }

    pub fn points(&self) -> &[CorrelatorPoint] {
        &self.points
    }

    pub fn rho12(&self) -> f64 {
        self.rho12
    }

    /// Replaces the pair correlation (e.g. from a command-line override).
    pub fn with_rho12(mut self, rho12: f64) -> Result<Self> {
        if !(rho12.is_finite() && rho12.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dataset correlation {rho12} must lie in (-1, 1)"
            )));
        }
        self.rho12 = rho12;
        Ok(self)
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn point_at(&self, t: u32) -> Option<&CorrelatorPoint> {
        self.points.iter().find(|p| p.t == t)
    }

    /// All times, ascending.
    pub fn times(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// Loads a dataset file. See the module docs for the format.
pub fn load_dataset(path: &Path) -> Result<CorrelatorDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string())
}

/// Parses dataset text; `origin` names the source in diagnostics.
pub fn parse_dataset(text: &str, origin: &str) -> Result<CorrelatorDataset> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut provenance = Vec::new();
    let mut rho12 = 0.0f64;
    let mut header: Option<usize> = None; // column count after the header
    let mut points = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("rho12:") {
                rho12 = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| err(line_no, format!("bad rho12 directive: {comment}")))?;
            } else if !comment.is_empty() {
                provenance.push(comment.to_string());
            }
            continue;
        }
        let tokens: Vec<&str> = line.split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        match header {
            None => {
                // The header row is required; a numeric first row means it
                // is missing.
                if tokens[0].parse::<f64>().is_ok() {
                    return Err(err(line_no, "missing header row (expected: t y sigma | t y err_lo err_hi)".into()));
                }
                if tokens.len() != 3 && tokens.len() != 4 {
                    return Err(err(line_no, format!(
                        "header must have 3 or 4 columns, got {}",
                        tokens.len()
                    )));
                }
                if !tokens[0].eq_ignore_ascii_case("t") || !tokens[1].eq_ignore_ascii_case("y") {
                    return Err(err(line_no, format!(
                        "header must start with `t y`, got `{} {}`",
                        tokens[0], tokens[1]
                    )));
                }
                header = Some(tokens.len());
            }
            Some(cols) => {
                if tokens.len() != cols {
                    return Err(err(line_no, format!(
                        "expected {cols} columns, got {}",
                        tokens.len()
                    )));
                }
                let t: u32 = tokens[0]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad time index `{}`", tokens[0])))?;
                let y: f64 = tokens[1]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad value `{}`", tokens[1])))?;
                let sigma = if cols == 3 {
                    tokens[2]
                        .parse::<f64>()
                        .map_err(|_| err(line_no, format!("bad sigma `{}`", tokens[2])))?
                } else {
                    let lo: f64 = tokens[2]
                        .parse()
                        .map_err(|_| err(line_no, format!("bad err_lo `{}`", tokens[2])))?;
                    let hi: f64 = tokens[3]
                        .parse()
                        .map_err(|_| err(line_no, format!("bad err_hi `{}`", tokens[3])))?;
                    (lo + hi) / 2.0
                };
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(err(line_no, format!("sigma {sigma} at t={t} must be > 0")));
                }
                if points.iter().any(|p: &CorrelatorPoint| p.t == t) {
                    return Err(err(line_no, format!("duplicate time t={t}")));
                }
                points.push(CorrelatorPoint { t, y, sigma });
            }
        }
    }
    if header.is_none() {
        return Err(err(1, "empty dataset".into()));
    }
    if points.is_empty() {
        return Err(err(1, "no data rows".into()));
    }
    CorrelatorDataset::new(points, rho12, provenance)
}

/// Renders a dataset in the sigma-column form. Loading the result restores
/// the dataset exactly.
pub fn render_dataset(ds: &CorrelatorDataset) -> String {
    let mut out = String::new();
    for line in ds.provenance() {
        let _ = writeln!(out, "# {line}");
    }
    if ds.rho12() != 0.0 {
        let _ = writeln!(out, "# rho12: {}", ds.rho12());
    }
    let _ = writeln!(out, "t y sigma");
    for p in ds.points() {
        let _ = writeln!(out, "{} {} {}", p.t, p.y, p.sigma);
    }
    out
}

/// Writes a dataset file.
pub fn write_dataset(ds: &CorrelatorDataset, path: &Path) -> Result<()> {
    std::fs::write(path, render_dataset(ds))?;
    Ok(())
}

/// Simulates observations y_t = G(t) + eps_t for t = 1..t_max, with
/// independent Gaussian noise of scale sigma_t = noise_coeff * G(t) * t.
/// The generating parameters and seed are recorded in the provenance.
pub fn simulate_dataset(
    params: &ExpSumParams,
    t_max: u32,
    noise_coeff: f64,
    seed: u64,
) -> Result<CorrelatorDataset> {
    if t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be at least 1".into()));
    }
    if !(noise_coeff.is_finite() && noise_coeff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise coefficient {noise_coeff} must be > 0"
        )));
    }
    let mut rng = seeded(seed);
    let normal = rand_distr::StandardNormal;
    let mut points = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let g = params.eval(t);
        let sigma = noise_coeff * g * f64::from(t);
        let z: f64 = rng.sample(normal);
        points.push(CorrelatorPoint { t, y: g + sigma * z, sigma });
    }
    let amplitudes = params
        .amplitudes()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let provenance = vec![
        "simulated sum-of-exponentials correlator".to_string(),
        format!("amplitudes: {amplitudes}"),
        format!("base_energy: {}", params.base_energy()),
        format!("spacing: {}", params.spacing()),
        format!("noise_coeff: {noise_coeff}"),
        format!("seed: {seed}"),
    ];
    CorrelatorDataset::new(points, 0.0, provenance)
}
