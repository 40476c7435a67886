//! Prior families for the model parameters.
//!
//! Amplitudes get independent Beta(alpha, beta) priors on (0,1). The base
//! decay rate E1 gets either a Gamma(shape lambda, scale eta) prior — mean
//! `lambda * eta` — or a fat-tailed Pareto alternative. The spacing c is
//! uniform on (0, omega/E1) given E1, encoding that a larger base rate leaves
//! less room between modes. E1 and c are independent of the amplitudes.

use rand::Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::math::{ln_beta, ln_gamma};

/// Prior family for the base decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyPrior {
    /// Gamma with the given scale (eta) and shape (lambda); mean = shape * scale.
    Gamma { scale: f64, shape: f64 },
    /// Pareto on [x_min, inf) with the given tail index.
    Pareto { x_min: f64, shape: f64 },
}

impl EnergyPrior {
    /// Default fat-tailed alternative.
    pub fn default_pareto() -> Self {
        EnergyPrior::Pareto { x_min: 0.01, shape: 1.5 }
    }
}

/// Hyperparameters of the full prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    /// Beta shape parameters shared by every amplitude.
    pub alpha: f64,
    pub beta: f64,
    pub energy: EnergyPrior,
    /// Width control of the conditional uniform on the spacing.
    pub omega: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            energy: EnergyPrior::Gamma { scale: 1.0, shape: 1.0 },
            omega: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("prior hyperparameter {name} = {v} must be > 0")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("omega", self.omega)?;
        match self.energy {
            EnergyPrior::Gamma { scale, shape } => {
                positive("eta (gamma scale)", scale)?;
                positive("lambda (gamma shape)", shape)
            }
            EnergyPrior::Pareto { x_min, shape } => {
                positive("x_min (pareto)", x_min)?;
                positive("shape (pareto)", shape)
            }
        }
    }

    /// One amplitude draw from Beta(alpha, beta). Distinct amplitudes are
    /// independent, so callers draw once per amplitude.
    pub fn sample_amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Beta::new(self.alpha, self.beta)
            .expect("validated hyperparameters")
            .sample(rng)
    }

    /// One draw from the energy prior.
    pub fn sample_energy<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.energy {
            EnergyPrior::Gamma { scale, shape } => rand_distr::Gamma::new(shape, scale)
                .expect("validated hyperparameters")
                .sample(rng),
            EnergyPrior::Pareto { x_min, shape } => rand_distr::Pareto::new(x_min, shape)
                .expect("validated hyperparameters")
                .sample(rng),
        }
    }

    /// One spacing draw, uniform on (0, omega/e1).
    pub fn sample_spacing<R: Rng + ?Sized>(&self, e1: f64, rng: &mut R) -> f64 {
        debug_assert!(e1 > 0.0);
        let u: f64 = rng.sample(rand_distr::Open01);
        u * (self.omega / e1)
    }

    /// Log density of one amplitude under Beta(alpha, beta); -inf outside (0,1).
    pub fn log_amplitude_density(&self, a: f64) -> f64 {
        if !(0.0 < a && a < 1.0) {
            return f64::NEG_INFINITY;
        }
        (self.alpha - 1.0) * a.ln() + (self.beta - 1.0) * (1.0 - a).ln()
            - ln_beta(self.alpha, self.beta)
    }

    /// Log density of the base decay rate; -inf outside the support.
    pub fn log_energy_density(&self, e: f64) -> f64 {
        match self.energy {
            EnergyPrior::Gamma { scale, shape } => {
                if e <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * e.ln() - e / scale - shape * scale.ln() - ln_gamma(shape)
            }
            EnergyPrior::Pareto { x_min, shape } => {
                if e < x_min {
                    return f64::NEG_INFINITY;
                }
                shape.ln() + shape * x_min.ln() - (shape + 1.0) * e.ln()
            }
        }
    }

    /// Log density of the spacing given the base rate: uniform on
    /// (0, omega/e1), so the density is e1/omega inside and -inf outside
    /// (including c >= omega/e1).
    pub fn log_spacing_density(&self, c: f64, e1: f64) -> f64 {
        if e1 <= 0.0 || c <= 0.0 || c >= self.omega / e1 {
            return f64::NEG_INFINITY;
        }
        (e1 / self.omega).ln()
    }

    /// Joint log prior of a partial parameter set. Factorizes as
    /// `sum_n Beta(A_n) + family(E1) + Uniform(c | E1)`; any out-of-support
    /// component makes the result -inf.
    ///
    /// A spacing without its conditioning energy is a caller bug and panics.
    pub fn log_density(&self, amplitudes: &[f64], energy: Option<f64>, spacing: Option<f64>) -> f64 {
        if spacing.is_some() && energy.is_none() {
            panic!("spacing density is conditional on the energy; supply both");
        }
        let mut total = 0.0;
        for &a in amplitudes {
            total += self.log_amplitude_density(a);
        }
        if let Some(e) = energy {
            total += self.log_energy_density(e);
        }
        if let (Some(c), Some(e)) = (spacing, energy) {
            total += self.log_spacing_density(c, e);
        }
        total
    }

    /// Standard deviation of the amplitude prior (used for proposal scaling).
    pub fn amplitude_sd(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt()
    }

    /// Mean of the energy prior. Infinite-mean Pareto shapes fall back to x_min.
    pub fn energy_mean(&self) -> f64 {
        match self.energy {
            EnergyPrior::Gamma { scale, shape } => shape * scale,
            EnergyPrior::Pareto { x_min, shape } => {
                if shape > 1.0 {
                    shape * x_min / (shape - 1.0)
                } else {
                    x_min
                }
            }
        }
    }

    /// Coefficient of variation of the energy prior, clamped to something a
    /// log-space random walk can use even for heavy tails.
    pub fn energy_cv(&self) -> f64 {
        let cv = match self.energy {
            EnergyPrior::Gamma { shape, .. } => 1.0 / shape.sqrt(),
            EnergyPrior::Pareto { shape, .. } => {
                if shape > 2.0 {
                    (shape / (shape - 2.0)).sqrt() / (shape - 1.0)
                } else {
                    1.0
                }
            }
        };
        cv.clamp(0.05, 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn uniform_beta_has_mean_half() {
        let spec = PriorSpec::default();
        let mut rng = seeded(11);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_amplitude(&mut rng)).collect();
        assert!((mean(&draws) - 0.5).abs() < 0.005);
        assert!(draws.iter().all(|&a| 0.0 < a && a < 1.0));
    }

    #[test]
    fn beta_two_two_moments() {
        let spec = PriorSpec { alpha: 2.0, beta: 2.0, ..PriorSpec::default() };
        let mut rng = seeded(12);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_amplitude(&mut rng)).collect();
        let m = mean(&draws);
        let var = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / draws.len() as f64;
        assert!((m - 0.5).abs() < 0.005);
        assert!((var - 0.05).abs() < 0.003);
    }

    #[test]
    fn beta_five_one_mean() {
        let spec = PriorSpec { alpha: 5.0, beta: 1.0, ..PriorSpec::default() };
        let mut rng = seeded(13);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_amplitude(&mut rng)).collect();
        assert!((mean(&draws) - 5.0 / 6.0).abs() < 0.005);
    }

    #[test]
    fn unit_gamma_is_standard_exponential() {
        let spec = PriorSpec::default();
        let mut rng = seeded(14);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_energy(&mut rng)).collect();
        assert!((mean(&draws) - 1.0).abs() < 0.01);
    }

    #[test]
    fn gamma_mean_is_shape_times_scale() {
        let spec = PriorSpec {
            energy: EnergyPrior::Gamma { scale: 2.0, shape: 3.0 },
            ..PriorSpec::default()
        };
        let mut rng = seeded(15);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_energy(&mut rng)).collect();
        assert!((mean(&draws) - 6.0).abs() < 0.05);
    }

    #[test]
    fn pareto_mean() {
        let spec = PriorSpec {
            energy: EnergyPrior::Pareto { x_min: 0.1, shape: 3.0 },
            ..PriorSpec::default()
        };
        let mut rng = seeded(16);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_energy(&mut rng)).collect();
        assert!((mean(&draws) - 0.15).abs() < 0.002);
        assert!(draws.iter().all(|&e| e >= 0.1));
    }

    #[test]
    fn spacing_support_shrinks_with_energy() {
        let spec = PriorSpec::default();
        let mut rng = seeded(17);
        for _ in 0..100_000 {
            let c = spec.sample_spacing(2.0, &mut rng);
            assert!(0.0 < c && c < 0.5);
        }
    }

    #[test]
    fn spacing_mean_and_reach() {
        let spec = PriorSpec::default();
        let mut rng = seeded(18);
        let draws: Vec<f64> = (0..100_000).map(|_| spec.sample_spacing(1.0, &mut rng)).collect();
        assert!((mean(&draws) - 0.5).abs() < 0.005);

        let spec = PriorSpec { omega: 2.0, ..PriorSpec::default() };
        let mut rng = seeded(19);
        let max = (0..100_000)
            .map(|_| spec.sample_spacing(0.5, &mut rng))
            .fold(f64::MIN, f64::max);
        assert!(max > 3.99 && max < 4.0);
    }

    #[test]
    fn log_density_default_spec_example() {
        let spec = PriorSpec::default();
        let v = spec.log_density(&[0.3], Some(1.0), Some(0.5));
        // Beta(1,1) contributes 0, Exp(1) contributes -1, the conditional
        // uniform has density E1/omega = 1.
        assert!((v - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn out_of_support_is_neg_infinity() {
        let spec = PriorSpec::default();
        assert_eq!(spec.log_density(&[0.3], Some(1.0), Some(1.5)), f64::NEG_INFINITY);
        assert_eq!(spec.log_density(&[1.2], None, None), f64::NEG_INFINITY);
        assert_eq!(spec.log_amplitude_density(0.0), f64::NEG_INFINITY);
        assert_eq!(spec.log_amplitude_density(1.0), f64::NEG_INFINITY);
        assert_eq!(spec.log_energy_density(-0.5), f64::NEG_INFINITY);
        // Boundary of the conditional support is excluded.
        assert_eq!(spec.log_spacing_density(1.0, 1.0), f64::NEG_INFINITY);
        assert!(spec.log_spacing_density(0.999, 1.0).is_finite());
    }

    #[test]
    fn pareto_density_below_xmin_is_neg_infinity() {
        let spec = PriorSpec { energy: EnergyPrior::default_pareto(), ..PriorSpec::default() };
        assert_eq!(spec.log_energy_density(0.005), f64::NEG_INFINITY);
        assert!(spec.log_energy_density(0.02).is_finite());
    }

    #[test]
    #[should_panic(expected = "conditional on the energy")]
    fn spacing_without_energy_panics() {
        PriorSpec::default().log_density(&[], None, Some(0.3));
    }

    #[test]
    fn same_seed_same_draws() {
        let spec = PriorSpec::default();
        let mut a = seeded(20);
        let mut b = seeded(20);
        for _ in 0..32 {
            assert_eq!(spec.sample_amplitude(&mut a), spec.sample_amplitude(&mut b));
            assert_eq!(spec.sample_energy(&mut a), spec.sample_energy(&mut b));
        }
    }
}
