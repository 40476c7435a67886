//! The three-phase particle MCMC.
//!
//! Phase I runs a Metropolis-within-Gibbs chain over (A1, E1) against the
//! marginal likelihood of the largest-time observation y1; its post-burn-in
//! draws form a particle cloud that discretizes the Phase-I posterior. Phase
//! II chains over (A1, E1, A2, c) against the conditional likelihood of y2
//! given y1, proposing (A1, E1) jointly as resampled particles from the
//! Phase-I cloud — the cloud acts as the prior, in the manner of a particle
//! Kalman filter — while A2 walks with reflection in (0,1) and c walks in
//! log space. Every c proposal below the floor c0 is discarded and redrawn,
//! preserving the validity of the truncation times chosen for c0. Phase III
//! repeats the two phases m times from fresh starting values, keeping each
//! repetition's final state as one posterior particle.

mod mh;

pub use mh::{mh_step, Coord, CoordKind};

use rand::Rng;
use rayon::prelude::*;

use crate::dataio::CorrelatorDataset;
use crate::diagnostics::{summarize, ParamSummaries, PosteriorSummary, DEFAULT_BINS, DEFAULT_CI_LEVEL};
use crate::error::{Error, Result};
use crate::likelihood::{log_lik_conditional, log_lik_marginal, ObservationPair};
use crate::model::{CorrelatorPoint, TelescopeSchedule};
use crate::priors::PriorSpec;
use crate::rng::{derived, seeded, Stream};
use mh::{decide, reflect_unit};

/// Which phase produced a particle cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PhaseI,
    PhaseII,
}

/// A set of posterior draws acting as a discretized distribution.
///
/// Phase-I clouds hold (A1, E1) pairs; Phase-II clouds hold full
/// (A1, E1, A2, c) tuples. Draws are stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    phase: Phase,
    seed: u64,
    a1: Vec<f64>,
    e1: Vec<f64>,
    a2: Vec<f64>,
    c: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl ParticleCloud {
    /// Builds a Phase-I cloud of (A1, E1) draws.
    pub fn new_pair(a1: Vec<f64>, e1: Vec<f64>, seed: u64) -> Result<Self> {
        let cloud =
            Self { phase: Phase::PhaseI, seed, a1, e1, a2: Vec::new(), c: Vec::new(), weights: None };
        cloud.check()?;
        Ok(cloud)
    }

    /// Builds a Phase-II cloud of (A1, E1, A2, c) draws.
    pub fn new_joint(a1: Vec<f64>, e1: Vec<f64>, a2: Vec<f64>, c: Vec<f64>, seed: u64) -> Result<Self> {
        let cloud = Self { phase: Phase::PhaseII, seed, a1, e1, a2, c, weights: None };
        cloud.check()?;
        Ok(cloud)
    }

    /// Attaches normalized importance weights (absent means uniform).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} draws",
                weights.len(),
                self.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if self.a1.is_empty() {
            return Err(Error::InvalidParameter("particle cloud must be non-empty".into()));
        }
        if self.e1.len() != self.a1.len() {
            return Err(Error::InvalidParameter("particle columns must have equal length".into()));
        }
        let unit = |name: &str, xs: &[f64]| -> Result<()> {
            for &x in xs {
                if !(x.is_finite() && 0.0 < x && x < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} draw {x} outside (0, 1)"
                    )));
                }
            }
            Ok(())
        };
        let positive = |name: &str, xs: &[f64]| -> Result<()> {
            for &x in xs {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} draw {x} must be > 0")));
                }
            }
            Ok(())
        };
        unit("A1", &self.a1)?;
        positive("E1", &self.e1)?;
        match self.phase {
            Phase::PhaseI => {
                if !(self.a2.is_empty() && self.c.is_empty()) {
                    return Err(Error::InvalidParameter(
                        "phase-I cloud cannot carry A2/c columns".into(),
                    ));
                }
            }
            Phase::PhaseII => {
                if self.a2.len() != self.a1.len() || self.c.len() != self.a1.len() {
                    return Err(Error::InvalidParameter(
                        "particle columns must have equal length".into(),
                    ));
                }
                unit("A2", &self.a2)?;
                positive("c", &self.c)?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.a1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a1.is_empty()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn a1(&self) -> &[f64] {
        &self.a1
    }

    pub fn e1(&self) -> &[f64] {
        &self.e1
    }

    pub fn a2(&self) -> &[f64] {
        &self.a2
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Resamples one (A1, E1) pair with replacement; uniform unless the
    /// cloud carries weights.
    pub fn resample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let idx = match &self.weights {
            None => rng.gen_range(0..self.len()),
            Some(w) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = self.len() - 1;
                for (i, wi) in w.iter().enumerate() {
                    acc += wi;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                chosen
            }
        };
        (self.a1[idx], self.e1[idx])
    }
}

/// Per-coordinate random-walk scales.
///
/// Amplitude scales are absolute steps for the reflected walk; the energy
/// and spacing scales are standard deviations of the log-space step, i.e.
/// relative moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalScales {
    pub a1: f64,
    pub e1: f64,
    pub a2: f64,
    pub c: f64,
}

impl ProposalScales {
    /// Defaults to 10% of each prior's dispersion: the Beta standard
    /// deviation for amplitudes, the prior coefficient of variation for the
    /// log-space coordinates.
    pub fn from_prior(spec: &PriorSpec) -> Self {
        let a = (0.1 * spec.amplitude_sd()).max(1e-4);
        // cv of U(0, w) is 1/sqrt(3) regardless of w.
        let c = 0.1 / 3.0_f64.sqrt();
        Self { a1: a, e1: 0.1 * spec.energy_cv(), a2: a, c }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a1", self.a1), ("e1", self.e1), ("a2", self.a2), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "proposal scale {name} = {v} must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Configuration of the three-phase run.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    /// Chain length of each Phase-I cycle.
    pub iters_phase1: usize,
    /// Chain length of Phase II.
    pub iters_phase2: usize,
    /// Outer repetitions; the posterior sample size.
    pub m: usize,
    /// Spacing floor and Phase-II starting value; held fixed across
    /// repetitions because changing it would invalidate the truncation times.
    pub c0: f64,
    /// Phase-I starting energy for standalone runs; Phase III redraws it
    /// from the energy prior at every repetition.
    pub e1_0: f64,
    /// Draws dropped from the start of every chain.
    pub burn_in: usize,
    pub proposal_scales: ProposalScales,
    /// Maximum tolerated fraction of discarded spacing proposals, in (0, 1].
    pub discard_limit: f64,
    pub seed: u64,
    /// Fold the observations between t2 and t1 into Phase I, one extra
    /// cycle per observation in decreasing-t order.
    pub cycle_intermediate: bool,
}

impl McmcConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            iters_phase1: 1000,
            iters_phase2: 1000,
            m: 1000,
            c0: 0.05,
            e1_0: 1.0,
            burn_in: 100,
            proposal_scales: ProposalScales::from_prior(&PriorSpec::default()),
            discard_limit: 0.5,
            seed,
            cycle_intermediate: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iters_phase1 == 0 || self.iters_phase2 == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("iteration counts and m must be positive".into()));
        }
        if self.burn_in >= self.iters_phase1 || self.burn_in >= self.iters_phase2 {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} consumes a whole phase",
                self.burn_in
            )));
        }
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("c0 = {} must be > 0", self.c0)));
        }
        if !(self.e1_0.is_finite() && self.e1_0 > 0.0) {
            return Err(Error::InvalidParameter(format!("e1_0 = {} must be > 0", self.e1_0)));
        }
        if !(self.discard_limit > 0.0 && self.discard_limit <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "discard limit {} must lie in (0, 1]",
                self.discard_limit
            )));
        }
        self.proposal_scales.validate()
    }
}

/// Counts of spacing proposals hitting the floor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscardStats {
    pub discarded: u64,
    pub proposed: u64,
}

impl DiscardStats {
    pub fn fraction(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.discarded as f64 / self.proposed as f64
        }
    }

    fn absorb(&mut self, other: DiscardStats) {
        self.discarded += other.discarded;
        self.proposed += other.proposed;
    }
}

/// Whether a proposed spacing survives the floor rule: values below c0 are
/// discarded (and redrawn by the caller); the boundary itself is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingDecision {
    Accept,
    Discard,
}

pub fn enforce_spacing_floor(c_proposed: f64, c0: f64) -> SpacingDecision {
    debug_assert!(c0 > 0.0);
    if c_proposed < c0 {
        SpacingDecision::Discard
    } else {
        SpacingDecision::Accept
    }
}

/// Don't judge the discard fraction before this many proposals.
const MIN_DISCARD_SAMPLE: u64 = 50;
/// Hard cap on consecutive redraws within one update, so a discard limit of
/// 1.0 cannot spin forever.
const MAX_CONSECUTIVE_REDRAWS: u64 = 10_000;

/// Proposes the amplitude/rate pair moved along the curve that keeps the
/// fitted product `a * e^(-rate * t)` invariant: rate shifts by delta and the
/// amplitude compensates. Coordinate-wise walks cross this ridge but barely
/// travel along it, so without this move a chain stays near wherever it
/// first hit the ridge. The map (a, rate) -> (a * e^(t*delta), rate + delta)
/// has Jacobian e^(t*delta), which the caller must add to the log ratio.
fn ridge_proposal<R: Rng + ?Sized>(
    a: f64,
    rate: f64,
    t: u32,
    scale: f64,
    rng: &mut R,
) -> (f64, f64, f64) {
    let delta = scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
    let log_jacobian = f64::from(t) * delta;
    (a * log_jacobian.exp(), rate + delta, log_jacobian)
}

/// Draws spacing proposals until one clears the floor, counting discards and
/// enforcing the abort rules.
fn redraw_until_floor<R: Rng + ?Sized>(
    mut gen: impl FnMut(&mut R) -> f64,
    c0: f64,
    limit: f64,
    discards: &mut DiscardStats,
    rng: &mut R,
) -> Result<f64> {
    let mut consecutive: u64 = 0;
    loop {
        let prop = gen(rng);
        discards.proposed += 1;
        match enforce_spacing_floor(prop, c0) {
            SpacingDecision::Accept => return Ok(prop),
            SpacingDecision::Discard => {
                discards.discarded += 1;
                consecutive += 1;
                if (discards.proposed >= MIN_DISCARD_SAMPLE && discards.fraction() > limit)
                    || consecutive >= MAX_CONSECUTIVE_REDRAWS
                {
                    return Err(Error::DiscardLimit {
                        discarded: discards.discarded,
                        proposed: discards.proposed,
                        limit,
                    });
                }
            }
        }
    }
}

/// Phase I: posterior of (A1, E1) given the largest-time observation.
///
/// When `extra_obs` is non-empty the chain is cycled once more per extra
/// observation in decreasing-t order, each cycle resampling (A1, E1) from the
/// previous cycle's cloud as its prior and re-burning.
pub fn phase1(
    y1: &CorrelatorPoint,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    extra_obs: &[CorrelatorPoint],
) -> Result<ParticleCloud> {
    priors.validate()?;
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    phase1_with(y1, priors, cfg, extra_obs, cfg.e1_0, None, &mut rng)
}

fn phase1_with(
    y1: &CorrelatorPoint,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    extra_obs: &[CorrelatorPoint],
    e1_start: f64,
    a1_seed: Option<&[f64]>,
    rng: &mut Stream,
) -> Result<ParticleCloud> {
    for p in extra_obs {
        if p.t >= y1.t {
            return Err(Error::InvalidParameter(format!(
                "intermediate observation at t={} is not below t1={}",
                p.t, y1.t
            )));
        }
    }
    let keep = cfg.iters_phase1 - cfg.burn_in;
    let mut a1s: Vec<f64> = Vec::with_capacity(keep);
    let mut e1s: Vec<f64> = Vec::with_capacity(keep);
    let mut accepted: u64 = 0;
    let mut decisions: u64 = 0;

    // First cycle: analytic priors (or a seeded amplitude cloud), y1 as data.
    let mut a1 = match a1_seed {
        Some(seed) => seed[rng.gen_range(0..seed.len())],
        None => priors.sample_amplitude(rng),
    };
    let mut e1 = e1_start;
    let log_target = |a: f64, e: f64| {
        // With a seeded amplitude prior the cloud is also the proposal, so
        // its factor cancels in the ratio and only the support matters.
        let amp_prior = match a1_seed {
            Some(_) => {
                if 0.0 < a && a < 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            None => priors.log_amplitude_density(a),
        };
        amp_prior + priors.log_energy_density(e) + log_lik_marginal(a, e, y1.y, y1.sigma, y1.t)
    };
    let mut lt_cur = log_target(a1, e1);
    for iter in 0..cfg.iters_phase1 {
        // A1 update: resample from the seed cloud, or walk with reflection.
        match a1_seed {
            Some(seed) => {
                let prop = seed[rng.gen_range(0..seed.len())];
                decisions += 1;
                let lt_prop = log_target(prop, e1);
                if decide(&mut lt_cur, lt_prop, 0.0, rng) {
                    a1 = prop;
                    accepted += 1;
                }
            }
            None => {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                let prop = reflect_unit(a1 + cfg.proposal_scales.a1 * z);
                decisions += 1;
                let lt_prop = log_target(prop, e1);
                if decide(&mut lt_cur, lt_prop, 0.0, rng) {
                    a1 = prop;
                    accepted += 1;
                }
            }
        }
        // E1 update: log-space walk.
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        let ln_prop = e1.ln() + cfg.proposal_scales.e1 * z;
        let prop = ln_prop.exp();
        decisions += 1;
        let lt_prop = log_target(a1, prop);
        if decide(&mut lt_cur, lt_prop, ln_prop - e1.ln(), rng) {
            e1 = prop;
            accepted += 1;
        }
        // Joint move along the constant-product curve of (A1, E1).
        let (pa, pe, log_jac) = ridge_proposal(a1, e1, y1.t, cfg.proposal_scales.e1, rng);
        decisions += 1;
        let lt_prop = log_target(pa, pe);
        if decide(&mut lt_cur, lt_prop, log_jac, rng) {
            a1 = pa;
            e1 = pe;
            accepted += 1;
        }
        if iter >= cfg.burn_in {
            a1s.push(a1);
            e1s.push(e1);
        }
    }
    let mut cloud = ParticleCloud::new_pair(a1s, e1s, cfg.seed)?;

    // Extra cycles: the previous cloud is both prior and proposal for the
    // (A1, E1) pair, so acceptance reduces to the likelihood ratio of the
    // cycle's observation. Each cycle re-burns.
    let mut cycle_obs: Vec<CorrelatorPoint> = extra_obs.to_vec();
    cycle_obs.sort_by_key(|p| std::cmp::Reverse(p.t));
    for obs in &cycle_obs {
        let mut a1s: Vec<f64> = Vec::with_capacity(keep);
        let mut e1s: Vec<f64> = Vec::with_capacity(keep);
        let (mut a1, mut e1) = cloud.resample_pair(rng);
        let lik = |a: f64, e: f64| log_lik_marginal(a, e, obs.y, obs.sigma, obs.t);
        let mut lt_cur = lik(a1, e1);
        for iter in 0..cfg.iters_phase1 {
            let (pa, pe) = cloud.resample_pair(rng);
            decisions += 1;
            let lt_prop = lik(pa, pe);
            if decide(&mut lt_cur, lt_prop, 0.0, rng) {
                a1 = pa;
                e1 = pe;
                accepted += 1;
            }
            if iter >= cfg.burn_in {
                a1s.push(a1);
                e1s.push(e1);
            }
        }
        cloud = ParticleCloud::new_pair(a1s, e1s, cfg.seed)?;
    }

    let rate = accepted as f64 / decisions as f64;
    if rate < 0.01 {
        return Err(Error::AcceptanceTooLow { rate });
    }
    Ok(cloud)
}

/// Phase-II output: the joint cloud plus its floor diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Output {
    pub cloud: ParticleCloud,
    pub discards: DiscardStats,
    pub acceptance: f64,
}

/// Phase II: posterior of (A1, E1, A2, c) given y2, with the Phase-I cloud
/// as the (A1, E1) prior.
pub fn phase2(
    obs: &ObservationPair,
    cloud1: &ParticleCloud,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<Phase2Output> {
    priors.validate()?;
    cfg.validate()?;
    let mut rng = seeded(cfg.seed);
    phase2_with(obs, cloud1, priors, cfg, &mut rng)
}

fn phase2_with(
    obs: &ObservationPair,
    cloud1: &ParticleCloud,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    rng: &mut Stream,
) -> Result<Phase2Output> {
    if cloud1.phase() != Phase::PhaseI {
        return Err(Error::InvalidParameter("phase II takes a phase-I cloud as prior".into()));
    }
    let keep = cfg.iters_phase2 - cfg.burn_in;
    let mut a1s = Vec::with_capacity(keep);
    let mut e1s = Vec::with_capacity(keep);
    let mut a2s = Vec::with_capacity(keep);
    let mut cs = Vec::with_capacity(keep);
    let mut discards = DiscardStats::default();
    let mut accepted: u64 = 0;
    let mut decisions: u64 = 0;

    let (mut a1, mut e1) = cloud1.resample_pair(rng);
    let mut a2 = priors.sample_amplitude(rng);
    let mut c = cfg.c0;

    // Everything in the target except the cloud prior, which cancels against
    // the particle proposals.
    let log_rest = |a1: f64, e1: f64, a2: f64, c: f64| {
        priors.log_amplitude_density(a2)
            + priors.log_spacing_density(c, e1)
            + log_lik_conditional(a1, e1, a2, c, obs)
    };
    let mut lt_cur = log_rest(a1, e1, a2, c);

    for iter in 0..cfg.iters_phase2 {
        // (A1, E1) block: a resampled particle.
        let (pa, pe) = cloud1.resample_pair(rng);
        decisions += 1;
        let lt_prop = log_rest(pa, pe, a2, c);
        if decide(&mut lt_cur, lt_prop, 0.0, rng) {
            a1 = pa;
            e1 = pe;
            accepted += 1;
        }

        // A2: reflected walk.
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        let prop = reflect_unit(a2 + cfg.proposal_scales.a2 * z);
        decisions += 1;
        let lt_prop = log_rest(a1, e1, prop, c);
        if decide(&mut lt_cur, lt_prop, 0.0, rng) {
            a2 = prop;
            accepted += 1;
        }

        // c: log-space walk; proposals below the floor are discarded and
        // redrawn, never stepped over.
        let base = c;
        let c_prop = redraw_until_floor(
            |rng: &mut Stream| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (base.ln() + cfg.proposal_scales.c * z).exp()
            },
            cfg.c0,
            cfg.discard_limit,
            &mut discards,
            rng,
        )?;
        decisions += 1;
        let lt_prop = log_rest(a1, e1, a2, c_prop);
        if decide(&mut lt_cur, lt_prop, c_prop.ln() - c.ln(), rng) {
            c = c_prop;
            accepted += 1;
        }

        if iter >= cfg.burn_in {
            a1s.push(a1);
            e1s.push(e1);
            a2s.push(a2);
            cs.push(c);
        }
    }

    if discards.proposed >= MIN_DISCARD_SAMPLE && discards.fraction() > cfg.discard_limit {
        return Err(Error::DiscardLimit {
            discarded: discards.discarded,
            proposed: discards.proposed,
            limit: cfg.discard_limit,
        });
    }

    let cloud = ParticleCloud::new_joint(a1s, e1s, a2s, cs, cfg.seed)?;
    Ok(Phase2Output { cloud, discards, acceptance: accepted as f64 / decisions as f64 })
}

/// The assembled result of a Phase-III run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// One particle per successful repetition, in repetition order.
    pub posterior: ParticleCloud,
    pub summaries: ParamSummaries,
    pub discard_count: u64,
    pub discard_fraction: f64,
    pub failed_repetitions: usize,
    pub failure_messages: Vec<String>,
    pub config: McmcConfig,
    pub priors: PriorSpec,
    pub schedule: TelescopeSchedule,
}

struct RepOutcome {
    a1: f64,
    e1: f64,
    a2: f64,
    c: f64,
    discards: DiscardStats,
}

/// Phase III: repeats Phases I and II `m` times and summarizes.
///
/// Repetition i owns the derived stream (seed, i), redraws its starting
/// energy from the prior, and keeps c0 fixed; its Phase-II chain's final
/// draw becomes one posterior particle. Repetitions run in parallel and are
/// assembled in index order, so parallel and serial runs are bit-identical.
pub fn phase3(
    dataset: &CorrelatorDataset,
    schedule: &TelescopeSchedule,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<FitReport> {
    phase3_seeded(dataset, schedule, priors, cfg, None)
}

/// `phase3` with an optional particle prior for A1, used by peeling to pass
/// one level's A2 posterior down as the next level's first-amplitude prior.
pub fn phase3_seeded(
    dataset: &CorrelatorDataset,
    schedule: &TelescopeSchedule,
    priors: &PriorSpec,
    cfg: &McmcConfig,
    a1_seed: Option<&[f64]>,
) -> Result<FitReport> {
    priors.validate()?;
    cfg.validate()?;
    if schedule.len() != 2 {
        return Err(Error::InvalidSchedule(format!(
            "the base pipeline fits a two-row system, got k = {}",
            schedule.len()
        )));
    }
    if let Some(seed) = a1_seed {
        if seed.is_empty() {
            return Err(Error::InvalidParameter("amplitude seed cloud is empty".into()));
        }
    }
    let t1 = schedule.times()[0];
    let t2 = schedule.times()[1];
    let p1 = *dataset
        .point_at(t1)
        .ok_or_else(|| Error::InvalidSchedule(format!("dataset has no point at t1={t1}")))?;
    let p2 = *dataset
        .point_at(t2)
        .ok_or_else(|| Error::InvalidSchedule(format!("dataset has no point at t2={t2}")))?;
    let obs = ObservationPair::new(p1.y, p2.y, p1.sigma, p2.sigma, dataset.rho12(), t1, t2)?;
    let extra: Vec<CorrelatorPoint> = if cfg.cycle_intermediate {
        let mut between: Vec<CorrelatorPoint> =
            dataset.points().iter().filter(|p| p.t > t2 && p.t < t1).copied().collect();
        between.sort_by_key(|p| std::cmp::Reverse(p.t));
        between
    } else {
        Vec::new()
    };

    // Starts above this rate are data-dead: even a unit amplitude would lie
    // below y1, so the likelihood is flat there and a chain can dawdle for
    // the whole run. Redraw such starts (they carry no posterior mass).
    let e1_start_cap = if p1.y > 0.0 { (1.0 / p1.y).ln() / f64::from(p1.t) } else { f64::INFINITY };

    let outcomes: Vec<Result<RepOutcome>> = (0..cfg.m)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived(cfg.seed, i as u64);
            let mut e1_start = priors.sample_energy(&mut rng);
            for _ in 0..1000 {
                if e1_start <= e1_start_cap {
                    break;
                }
                e1_start = priors.sample_energy(&mut rng);
            }
            e1_start = e1_start.min(e1_start_cap);
            let cloud1 = phase1_with(&p1, priors, cfg, &extra, e1_start, a1_seed, &mut rng)?;
            let out = phase2_with(&obs, &cloud1, priors, cfg, &mut rng)?;
            let last = out.cloud.len() - 1;
            Ok(RepOutcome {
                a1: out.cloud.a1()[last],
                e1: out.cloud.e1()[last],
                a2: out.cloud.a2()[last],
                c: out.cloud.c()[last],
                discards: out.discards,
            })
        })
        .collect();

    let mut a1 = Vec::with_capacity(cfg.m);
    let mut e1 = Vec::with_capacity(cfg.m);
    let mut a2 = Vec::with_capacity(cfg.m);
    let mut c = Vec::with_capacity(cfg.m);
    let mut discards = DiscardStats::default();
    let mut failure_messages = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(rep) => {
                a1.push(rep.a1);
                e1.push(rep.e1);
                a2.push(rep.a2);
                c.push(rep.c);
                discards.absorb(rep.discards);
            }
            Err(e) => failure_messages.push(e.to_string()),
        }
    }
    let failed = failure_messages.len();
    if failed * 5 > cfg.m {
        return Err(Error::TooManyFailures {
            failed,
            total: cfg.m,
            last_cause: failure_messages.last().cloned().unwrap_or_default(),
        });
    }

    let summaries = ParamSummaries {
        a1: summarize_cloud(&a1)?,
        e1: summarize_cloud(&e1)?,
        a2: summarize_cloud(&a2)?,
        c: summarize_cloud(&c)?,
    };
    let posterior = ParticleCloud::new_joint(a1, e1, a2, c, cfg.seed)?;
    Ok(FitReport {
        posterior,
        summaries,
        discard_count: discards.discarded,
        discard_fraction: discards.fraction(),
        failed_repetitions: failed,
        failure_messages,
        config: cfg.clone(),
        priors: *priors,
        schedule: schedule.clone(),
    })
}

/// Histogram summary for real sample sizes, degenerate fallback for tiny m
/// (a single-particle posterior summarizes to that particle).
fn summarize_cloud(draws: &[f64]) -> Result<PosteriorSummary> {
    if draws.len() >= 10 {
        summarize(draws, DEFAULT_BINS, DEFAULT_CI_LEVEL)
    } else {
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let min = draws.iter().copied().fold(f64::INFINITY, f64::min);
        let max = draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(PosteriorSummary {
            mode: mean,
            mean,
            ci_low: min,
            ci_high: max,
            bin_width: 0.0,
            degenerate: min == max,
        })
    }
}
