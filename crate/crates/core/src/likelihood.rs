//! Gaussian observation model over a telescoped pair of observations.
//!
//! The two observations (y1 at the largest truncation time t1, y2 at t2) are
//! jointly normal around the one- and two-term model rows with known sigmas
//! and correlation rho12. Inference factors the joint density into the
//! marginal of y1 and the conditional of y2 given y1; those two exponents are
//! what the sampler phases target. The phase likelihoods drop their
//! normalizing constants (Metropolis ratios cancel them); the joint density
//! keeps them and serves as the factorization oracle.

use crate::error::{Error, Result};

/// A telescoped observation pair with its noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPair {
    pub y1: f64,
    pub y2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Correlation between the two observation errors, in (-1, 1).
    pub rho12: f64,
    pub t1: u32,
    pub t2: u32,
}

impl ObservationPair {
    pub fn new(
        y1: f64,
        y2: f64,
        sigma1: f64,
        sigma2: f64,
        rho12: f64,
        t1: u32,
        t2: u32,
    ) -> Result<Self> {
        if !(sigma1.is_finite() && sigma1 > 0.0 && sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "observation sigmas must be > 0, got {sigma1} and {sigma2}"
            )));
        }
        if !(rho12.is_finite() && rho12.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation {rho12} must lie in (-1, 1); |rho| = 1 makes the covariance singular"
            )));
        }
        if t1 <= t2 {
            return Err(Error::InvalidParameter(format!(
                "truncation times must satisfy t1 > t2, got {t1} <= {t2}"
            )));
        }
        Ok(Self { y1, y2, sigma1, sigma2, rho12, t1, t2 })
    }

    /// One-term model mean at t1.
    fn mean1(&self, a1: f64, e1: f64) -> f64 {
        a1 * (-e1 * f64::from(self.t1)).exp()
    }

    /// Two-term model mean at t2.
    fn mean2(&self, a1: f64, e1: f64, a2: f64, c: f64) -> f64 {
        (-e1 * f64::from(self.t2)).exp() * (a1 + a2 * (-c * f64::from(self.t2)).exp())
    }
}

/// Log likelihood of (a1, e1) given y1 alone, up to its constant:
/// `-(y1 - a1*e^(-e1*t1))^2 / (2*sigma1^2)`.
pub fn log_lik_marginal(a1: f64, e1: f64, y1: f64, sigma1: f64, t1: u32) -> f64 {
    debug_assert!(sigma1 > 0.0);
    let resid = y1 - a1 * (-e1 * f64::from(t1)).exp();
    -(resid * resid) / (2.0 * sigma1 * sigma1)
}

/// Log likelihood of (a1, e1, a2, c) given y2 with y1 fixed, up to its
/// constant. The conditional mean shifts the two-term row by
/// `rho12 * (sigma2/sigma1) * (y1 - a1*e^(-e1*t1))` and the conditional
/// variance shrinks to `sigma2^2 * (1 - rho12^2)`.
pub fn log_lik_conditional(a1: f64, e1: f64, a2: f64, c: f64, obs: &ObservationPair) -> f64 {
    let shift = obs.rho12 * (obs.sigma2 / obs.sigma1) * (obs.y1 - obs.mean1(a1, e1));
    let resid = obs.y2 - (obs.mean2(a1, e1, a2, c) + shift);
    -(resid * resid) / (2.0 * obs.sigma2 * obs.sigma2 * (1.0 - obs.rho12 * obs.rho12))
}

/// Full bivariate normal log density of (y1, y2) around the telescoped model
/// rows, normalizing constants included.
pub fn log_lik_joint(a1: f64, e1: f64, a2: f64, c: f64, obs: &ObservationPair) -> f64 {
    let z1 = (obs.y1 - obs.mean1(a1, e1)) / obs.sigma1;
    let z2 = (obs.y2 - obs.mean2(a1, e1, a2, c)) / obs.sigma2;
    let rho = obs.rho12;
    let one_minus = 1.0 - rho * rho;
    let quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_minus;
    factorization_constant(obs.sigma1, obs.sigma2, rho) - 0.5 * quad
}

/// The additive constant relating the three densities:
/// `joint = marginal + conditional + constant`, with
/// `constant = -ln(2*pi*sigma1*sigma2*sqrt(1 - rho^2))`.
pub fn factorization_constant(sigma1: f64, sigma2: f64, rho12: f64) -> f64 {
    -(2.0 * std::f64::consts::PI * sigma1 * sigma2 * (1.0 - rho12 * rho12).sqrt()).ln()
}
