//! Sequential extraction of higher modes by residual subtraction.
//!
//! A converged fit pins the leading mode (A1, E1). Subtracting the fitted
//! mode from the data leaves a residual series whose own leading mode is the
//! original second mode (base rate E2 = E1 + c), so the whole pipeline
//! applies again under the index shift A*_n = A_{n+1}, E*_n = E_{n+1}.
//! Because the residual model is approximate, each level inflates the
//! observation sigmas. The spacing c is a nuisance here: peeling estimates
//! the (A, E) ladder without ever trusting any one level's c.

use crate::dataio::CorrelatorDataset;
use crate::error::{Error, Result};
use crate::model::{CorrelatorPoint, ScheduleRule, TelescopeSchedule};
use crate::priors::PriorSpec;
use crate::sampler::{phase3_seeded, FitReport, McmcConfig};

/// One stage of the peel: depth 0 is the original data, each further depth
/// has one more fitted mode subtracted and its sigmas inflated.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelLevel {
    pub depth: usize,
    pub dataset: CorrelatorDataset,
    /// The (amplitude, energy) removed to produce this level; absent at depth 0.
    pub subtracted_mode: Option<(f64, f64)>,
    /// Factor applied to the parent level's sigmas (1 at depth 0).
    pub variance_inflation: f64,
}

impl PeelLevel {
    /// Wraps the original data as depth 0.
    pub fn original(dataset: CorrelatorDataset) -> Self {
        Self { depth: 0, dataset, subtracted_mode: None, variance_inflation: 1.0 }
    }
}

/// Subtracts the mode `a_hat * e^(-e_hat * t)` from every point of the level
/// and inflates every sigma by `inflation`, producing the next level.
/// Negative residual values are retained as-is; the Gaussian observation
/// model handles them.
pub fn subtract_mode(level: &PeelLevel, a_hat: f64, e_hat: f64, inflation: f64) -> Result<PeelLevel> {
    if !(a_hat.is_finite() && (0.0..1.0).contains(&a_hat)) {
        return Err(Error::InvalidParameter(format!(
            "subtracted amplitude {a_hat} must lie in [0, 1)"
        )));
    }
    if !(e_hat.is_finite() && e_hat > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "subtracted energy {e_hat} must be > 0"
        )));
    }
    if !(inflation.is_finite() && inflation >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance inflation {inflation} must be >= 1"
        )));
    }
    let points: Vec<CorrelatorPoint> = level
        .dataset
        .points()
        .iter()
        .map(|p| CorrelatorPoint {
            t: p.t,
            y: p.y - a_hat * (-e_hat * f64::from(p.t)).exp(),
            sigma: inflation * p.sigma,
        })
        .collect();
    let mut provenance = level.dataset.provenance().to_vec();
    provenance.push(format!(
        "peel level {}: subtracted mode a={a_hat} e={e_hat}, sigma inflation {inflation}",
        level.depth + 1
    ));
    Ok(PeelLevel {
        depth: level.depth + 1,
        dataset: CorrelatorDataset::new(points, level.dataset.rho12(), provenance)?,
        subtracted_mode: Some((a_hat, e_hat)),
        variance_inflation: inflation,
    })
}

/// Which posterior point estimate seeds the subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointEstimate {
    Mode,
    Mean,
}

/// Knobs of the peel loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeelOptions {
    /// Sigma inflation applied at each subtraction.
    pub inflation: f64,
    pub estimate: PointEstimate,
    /// A time is usable while |y| exceeds this multiple of its (inflated)
    /// sigma; the per-level schedule is drawn from usable times only.
    pub noise_floor: f64,
}

impl Default for PeelOptions {
    fn default() -> Self {
        Self { inflation: 2.0, estimate: PointEstimate::Mode, noise_floor: 3.0 }
    }
}

/// The fit performed at one level.
#[derive(Debug)]
pub struct PeelOutcome {
    /// Level index; level j estimates mode j+1 of the original ladder.
    pub level: usize,
    /// Leading-amplitude point estimate at this level.
    pub amplitude: f64,
    /// Leading-energy point estimate at this level.
    pub energy: f64,
    pub report: FitReport,
    /// The data this level was fit on.
    pub data: PeelLevel,
}

/// Why a peel stopped before the requested depth.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStop {
    pub level: usize,
    pub usable_times: usize,
    pub message: String,
}

/// A full peel: one outcome per fitted level, plus the early-stop record if
/// the residual ran out of signal first.
#[derive(Debug)]
pub struct PeelChain {
    pub outcomes: Vec<PeelOutcome>,
    pub stopped: Option<EarlyStop>,
}

impl PeelChain {
    /// The recovered (amplitude, energy) ladder, one entry per fitted level.
    pub fn estimates(&self) -> Vec<(f64, f64)> {
        self.outcomes.iter().map(|o| (o.amplitude, o.energy)).collect()
    }
}

/// Runs `depth` subtractions with a fresh fit at every level (depth+1 fits
/// in total when nothing stops early). Level j's fit estimates
/// (A_{j+1}, E_{j+1}) of the original model; its A2 posterior cloud seeds the
/// next level's leading-amplitude prior. Stops early, keeping the partial
/// result, once fewer than two usable times remain.
pub fn peel_sequence(
    data: &CorrelatorDataset,
    depth: usize,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    opts: &PeelOptions,
) -> Result<PeelChain> {
    if depth < 1 {
        return Err(Error::InvalidParameter("peel depth must be at least 1".into()));
    }
    if !(opts.noise_floor.is_finite() && opts.noise_floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise floor {} must be > 0",
            opts.noise_floor
        )));
    }
    let mut level = PeelLevel::original(data.clone());
    let mut outcomes: Vec<PeelOutcome> = Vec::with_capacity(depth + 1);
    let mut a1_seed: Option<Vec<f64>> = None;

    for idx in 0..=depth {
        let usable: Vec<u32> = level
            .dataset
            .points()
            .iter()
            .filter(|p| p.y.abs() > opts.noise_floor * p.sigma)
            .map(|p| p.t)
            .collect();
        if usable.len() < 2 {
            return Ok(PeelChain {
                outcomes,
                stopped: Some(EarlyStop {
                    level: idx,
                    usable_times: usable.len(),
                    message: format!(
                        "residual signal below the noise floor at level {idx}: \
                         {} usable time(s), need 2",
                        usable.len()
                    ),
                }),
            });
        }
        let schedule = TelescopeSchedule::select(&usable, 2, ScheduleRule::Ratio)?;
        let report =
            phase3_seeded(&level.dataset, &schedule, priors, cfg, a1_seed.as_deref())?;
        let (amplitude, energy) = match opts.estimate {
            PointEstimate::Mode => (report.summaries.a1.mode, report.summaries.e1.mode),
            PointEstimate::Mean => (report.summaries.a1.mean, report.summaries.e1.mean),
        };
        a1_seed = Some(report.posterior.a2().to_vec());
        outcomes.push(PeelOutcome { level: idx, amplitude, energy, report, data: level.clone() });
        if idx < depth {
            level = subtract_mode(&level, amplitude, energy, opts.inflation)?;
        }
    }
    Ok(PeelChain { outcomes, stopped: None })
}
