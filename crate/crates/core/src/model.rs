//! The truncated sum-of-exponentials signal model and its telescoped form.
//!
//! A correlator-like signal is modeled as
//!
//! ```text
//! G(t) = e^(-E1*t) * sum_{n=1..k} A_n * e^(-(n-1)*c*t)
//! ```
//!
//! with amplitudes `A_n` in (0,1), base decay rate `E1 > 0` and a common
//! spacing `c > 0` between successive decay rates, `E_n = E1 + (n-1)c`.
//! Because higher modes die off faster, one can pick truncation times
//! `t_1 > t_2 > ... > t_k` such that at `t_j` only the first `j` terms are
//! above numerical noise, turning the model into a triangular ("telescoped")
//! system of k equations.

use crate::error::{Error, Result};

/// Parameters of the k-term model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumParams {
    amplitudes: Vec<f64>,
    base_energy: f64,
    spacing: f64,
}

impl ExpSumParams {
    /// Builds a parameter set, validating every invariant: all amplitudes in
    /// (0,1), `base_energy > 0`, `spacing > 0`.
    pub fn new(amplitudes: Vec<f64>, base_energy: f64, spacing: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("need at least one amplitude".into()));
        }
        for (i, a) in amplitudes.iter().enumerate() {
            if !(a.is_finite() && 0.0 < *a && *a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "amplitude A{} = {a} is outside (0, 1)",
                    i + 1
                )));
            }
        }
        if !(base_energy.is_finite() && base_energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "base energy {base_energy} must be > 0"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing {spacing} must be > 0")));
        }
        Ok(Self { amplitudes, base_energy, spacing })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn base_energy(&self) -> f64 {
        self.base_energy
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of retained terms, k.
    pub fn order(&self) -> usize {
        self.amplitudes.len()
    }

    /// Decay rate of the n-th mode (1-based): `E1 + (n-1)c`.
    pub fn energy(&self, n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.order());
        self.base_energy + (n - 1) as f64 * self.spacing
    }

    /// Evaluates the full k-term signal at integer time `t`.
    ///
    /// Terms are summed in ascending `n` so results are bit-reproducible.
    pub fn eval(&self, t: u32) -> f64 {
        self.eval_truncated(t, self.order())
    }

    /// Evaluates the signal keeping only the first `terms` modes.
    pub fn eval_truncated(&self, t: u32, terms: usize) -> f64 {
        debug_assert!(terms >= 1 && terms <= self.order());
        let t = f64::from(t);
        let mut sum = 0.0;
        for (n, a) in self.amplitudes[..terms].iter().enumerate() {
            sum += a * (-(n as f64) * self.spacing * t).exp();
        }
        (-self.base_energy * t).exp() * sum
    }

    /// The triangular system: row `j` (1-based) is the signal at `times[j-1]`
    /// keeping only the first `j` terms.
    pub fn telescoped(&self, schedule: &TelescopeSchedule) -> Result<Vec<f64>> {
        if schedule.len() > self.order() {
            return Err(Error::InvalidSchedule(format!(
                "schedule has {} rows but the model only has {} amplitudes",
                schedule.len(),
                self.order()
            )));
        }
        Ok(schedule
            .times()
            .iter()
            .enumerate()
            .map(|(row, &t)| self.eval_truncated(t, row + 1))
            .collect())
    }

    /// Absolute truncation error of keeping only the first `kept` terms at
    /// time `t`: the sum of the dropped modes `kept+1 .. k`.
    ///
    /// Requires `1 <= kept < k`.
    pub fn annihilation_residual(&self, t: u32, kept: usize) -> f64 {
        assert!(
            kept >= 1 && kept < self.order(),
            "kept terms must satisfy 1 <= kept < k"
        );
        let t = f64::from(t);
        let mut sum = 0.0;
        for (n, a) in self.amplitudes.iter().enumerate().skip(kept) {
            sum += a * (-(n as f64) * self.spacing * t).exp();
        }
        (-self.base_energy * t).exp() * sum
    }
}

/// One observed value of the signal: the physics-code estimate `y` of G(t)
/// and its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorPoint {
    pub t: u32,
    pub y: f64,
    pub sigma: f64,
}

impl CorrelatorPoint {
    pub fn new(t: u32, y: f64, sigma: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::InvalidParameter(format!("observation at t={t} is not finite")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma {sigma} at t={t} must be > 0"
            )));
        }
        Ok(Self { t, y, sigma })
    }
}

/// How truncation times are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleRule {
    /// `t_1` = largest available time, `t_j` ≈ `t_1 / j` rounded half-up and
    /// snapped to the nearest available time (ties toward the larger time).
    Ratio,
    /// `t_j` = largest available time below `t_{j-1}` at which the first
    /// dropped term is annihilated under a unit-amplitude bound,
    /// `e^(-j*c0*t) < tol`; falls back to the Ratio value for rows where no
    /// time qualifies.
    Tolerance {
        /// Provisional spacing `c0` used for the bound.
        provisional_spacing: f64,
        /// Relative annihilation threshold.
        tolerance: f64,
    },
}

/// Truncation times `t_1 > t_2 > ... > t_k` drawn from a dataset's times.
#[derive(Debug, Clone, PartialEq)]
pub struct TelescopeSchedule {
    times: Vec<u32>,
    rule: ScheduleRule,
}

impl TelescopeSchedule {
    /// Builds a schedule from explicit times (strictly decreasing, all
    /// present in `available`).
    pub fn from_times(times: Vec<u32>, available: &[u32], rule: ScheduleRule) -> Result<Self> {
        for &t in &times {
            if !available.contains(&t) {
                return Err(Error::InvalidSchedule(format!(
                    "time {t} is not present in the dataset"
                )));
            }
        }
        Self::from_raw(times, rule)
    }

    /// Builds a schedule from trusted times without a dataset to check
    /// against (deserialization); only the strict-decrease invariant holds.
    pub fn from_raw(times: Vec<u32>, rule: ScheduleRule) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSchedule("schedule must have at least one time".into()));
        }
        for pair in times.windows(2) {
            if pair[0] <= pair[1] {
                return Err(Error::InvalidSchedule(format!(
                    "times must strictly decrease, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { times, rule })
    }

    /// Selects `k` truncation times from the available times by `rule`.
    ///
    /// Deterministic: identical inputs yield identical schedules.
    pub fn select(available: &[u32], k: usize, rule: ScheduleRule) -> Result<Self> {
        let mut avail: Vec<u32> = available.to_vec();
        avail.sort_unstable();
        avail.dedup();
        if k == 0 {
            return Err(Error::InvalidSchedule("k must be at least 1".into()));
        }
        if k > avail.len() {
            return Err(Error::InvalidSchedule(format!(
                "k = {k} exceeds the {} distinct times available",
                avail.len()
            )));
        }
        if let ScheduleRule::Tolerance { provisional_spacing, tolerance } = rule {
            let positive = |v: f64| v.is_finite() && v > 0.0;
            if !positive(provisional_spacing) || !positive(tolerance) {
                return Err(Error::InvalidSchedule(
                    "tolerance rule needs provisional_spacing > 0 and tolerance > 0".into(),
                ));
            }
        }

        let t1 = *avail.last().expect("non-empty");
        let mut times = vec![t1];
        for j in 2..=k {
            let ratio_target = half_up(f64::from(t1) / j as f64);
            let ratio_value = snap_nearest(&avail, ratio_target);
            let chosen = match rule {
                ScheduleRule::Ratio => ratio_value,
                ScheduleRule::Tolerance { provisional_spacing, tolerance } => {
                    let prev = *times.last().expect("non-empty");
                    avail
                        .iter()
                        .rev()
                        .copied()
                        .find(|&t| {
                            t < prev
                                && (-(j as f64) * provisional_spacing * f64::from(t)).exp()
                                    < tolerance
                        })
                        .unwrap_or(ratio_value)
                }
            };
            if times.contains(&chosen) {
                return Err(Error::InvalidSchedule(format!(
                    "selection produced duplicate time {chosen} for row {j}"
                )));
            }
            times.push(chosen);
        }
        // Snapping can only break strict decrease by duplicating, checked above,
        // but a tolerance fallback could in principle jump upward.
        for pair in times.windows(2) {
            if pair[0] <= pair[1] {
                return Err(Error::InvalidSchedule(format!(
                    "selected times are not strictly decreasing: {:?}",
                    times
                )));
            }
        }
        Ok(Self { times, rule })
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn rule(&self) -> ScheduleRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn half_up(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}

/// Nearest available time to `target`; ties prefer the larger time.
fn snap_nearest(sorted: &[u32], target: u32) -> u32 {
    let mut best = sorted[0];
    let mut best_dist = u32::MAX;
    for &t in sorted {
        let dist = t.abs_diff(target);
        if dist < best_dist || (dist == best_dist && t > best) {
            best = t;
            best_dist = dist;
        }
    }
    best
}
