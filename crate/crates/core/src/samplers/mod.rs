//! Posterior samplers producing draws of the prediction parameter `(ν, τ)`.
//!
//! - [`iid`]: normal data with a normal–inverse-gamma prior, either with the
//!   prior variance of `ν` proportional to `τ²` or independent of it.
//! - [`oneway`]: the unbalanced one-way random-effects model, with vague
//!   independent priors or a parameter-expanded random-effect scale.
//! - [`lmm`]: the conditional posterior of the fixed effects in a general
//!   linear mixed model and the map to `(ν, τ)`.
//!
//! Inverse-gamma laws use the shape–rate convention, density
//! `∝ x^(−shape−1) e^(−rate/x)`.

pub mod conditionals;
pub mod iid;
pub mod lmm;
pub mod oneway;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use iid::{exact_conjugate_iid, gibbs_iid_normal, IidPriorConfig, VarianceMode};
pub use lmm::{lmm_beta_conditional, lmm_beta_mean_alternative, prediction_params, BetaPrior, LmmDesign};
pub use oneway::{gibbs_oneway, LmmPriorConfig, OneWayDataset, PriorSetup};

/// Chain length, burn-in, thinning and seed of one MCMC run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 12_000,
            burn_in: 2_000,
            thin: 1,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thin must be >= 1"));
        }
        Ok(())
    }

    /// Whether iteration `i` (0-based) is kept.
    #[inline]
    pub fn keeps(&self, i: usize) -> bool {
        i >= self.burn_in && (i - self.burn_in).is_multiple_of(self.thin)
    }

    /// Number of retained draws, `⌈(iterations − burn_in) / thin⌉`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// A normal law given by mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLaw {
    pub mean: f64,
    pub var: f64,
}

impl NormalLaw {
    /// From precision and precision-weighted mean (`mean = weighted / precision`).
    #[inline]
    pub fn from_precision(precision: f64, weighted: f64) -> Self {
        Self {
            mean: weighted / precision,
            var: 1.0 / precision,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.var.sqrt() * z
    }
}

/// Inverse-gamma law in shape–rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGammaLaw {
    pub shape: f64,
    pub rate: f64,
}

impl InvGammaLaw {
    /// `rate / G` with `G ~ Gamma(shape, 1)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = Gamma::new(self.shape, 1.0)
            .expect("inverse-gamma shape must be positive")
            .sample(rng);
        self.rate / g
    }

    /// Mean of the reciprocal (a gamma precision), `shape / rate`.
    pub fn precision_mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// Variance of the reciprocal, `shape / rate²`.
    pub fn precision_var(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

/// Shape and rate hyperparameters of an inverse-gamma prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvGammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl InvGammaPrior {
    pub const VAGUE: Self = Self {
        shape: 0.001,
        rate: 0.001,
    };

    pub(crate) fn validate(&self, name: &str) -> Result<()> {
        if !(self.shape > 0.0 && self.rate > 0.0 && self.shape.is_finite() && self.rate.is_finite()) {
            return Err(Error::config(format!(
                "{name}: inverse-gamma shape and rate must be positive, got ({}, {})",
                self.shape, self.rate
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_count_and_indices() {
        for (iters, burn, thin) in [(10, 2, 1), (10, 2, 3), (11, 0, 5), (12_000, 2_000, 1), (7, 6, 4)] {
            let c = ChainConfig { iterations: iters, burn_in: burn, thin, seed: 0 };
            c.validate().unwrap();
            let kept = (0..iters).filter(|&i| c.keeps(i)).count();
            assert_eq!(kept, c.retained(), "{c:?}");
        }
        let c = ChainConfig { iterations: 10, burn_in: 2, thin: 3, seed: 0 };
        let kept: Vec<usize> = (0..10).filter(|&i| c.keeps(i)).collect();
        assert_eq!(kept, vec![2, 5, 8]);
        assert_eq!(ChainConfig::default().retained(), 10_000);
    }

    #[test]
    fn chain_config_validation() {
        assert!(ChainConfig { iterations: 10, burn_in: 10, thin: 1, seed: 0 }.validate().is_err());
        assert!(ChainConfig { iterations: 10, burn_in: 0, thin: 0, seed: 0 }.validate().is_err());
    }
}
