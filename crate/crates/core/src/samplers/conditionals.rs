//! Full conditional laws used by the Gibbs samplers.
//!
//! Each function returns the closed-form law of one block given the others,
//! so every step can be checked in isolation before it is chained.

use super::iid::{IidPriorConfig, VarianceMode};
use super::{InvGammaLaw, InvGammaPrior, NormalLaw};

/// Sufficient statistics of an i.i.d. normal sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidStats {
    pub n: usize,
    pub mean: f64,
    /// `Σ (x_i − x̄)² = (n − 1) s²`.
    pub ss: f64,
}

impl IidStats {
    pub fn from_data(data: &[f64]) -> Self {
        let n = data.len();
        let mean = data.iter().sum::<f64>() / n as f64;
        let ss = data.iter().map(|x| (x - mean).powi(2)).sum();
        Self { n, mean, ss }
    }
}

/// `ν | τ², X`.
pub fn iid_nu(stats: &IidStats, prior: &IidPriorConfig, tau2: f64) -> NormalLaw {
    let n = stats.n as f64;
    match prior.variance_mode {
        VarianceMode::Proportional => NormalLaw {
            mean: (prior.b * prior.a + n * stats.mean) / (prior.b + n),
            var: tau2 / (prior.b + n),
        },
        VarianceMode::Independent => {
            NormalLaw::from_precision(prior.b + n / tau2, prior.b * prior.a + n * stats.mean / tau2)
        }
    }
}

/// `τ² | ν, X`.
pub fn iid_tau2(stats: &IidStats, prior: &IidPriorConfig, nu: f64) -> InvGammaLaw {
    let n = stats.n as f64;
    let data_ss = stats.ss + n * (stats.mean - nu).powi(2);
    match prior.variance_mode {
        VarianceMode::Independent => InvGammaLaw {
            shape: prior.alpha0 + 0.5 * n,
            rate: prior.beta0 + 0.5 * data_ss,
        },
        // The prior N(a, τ²/b) on ν contributes one more half-degree of freedom.
        VarianceMode::Proportional => InvGammaLaw {
            shape: prior.alpha0 + 0.5 * (n + 1.0),
            rate: prior.beta0 + 0.5 * (data_ss + prior.b * (nu - prior.a).powi(2)),
        },
    }
}

/// Per-group sufficient statistics of one-way data.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub sizes: Vec<usize>,
    pub means: Vec<f64>,
    /// Within-group sums of squares `Σ_k (X_ik − X̄_i)²`.
    pub within_ss: Vec<f64>,
    pub total: usize,
}

impl GroupStats {
    pub fn from_groups<'a, I>(groups: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut stats = GroupStats {
            sizes: Vec::new(),
            means: Vec::new(),
            within_ss: Vec::new(),
            total: 0,
        };
        for g in groups {
            let iid = IidStats::from_data(g);
            stats.sizes.push(iid.n);
            stats.means.push(iid.mean);
            stats.within_ss.push(iid.ss);
            stats.total += iid.n;
        }
        stats
    }

    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    /// `Σ_ik (X_ik − ν − γ_i)²`.
    pub fn residual_ss(&self, nu: f64, gamma: &[f64]) -> f64 {
        self.sizes
            .iter()
            .zip(&self.means)
            .zip(&self.within_ss)
            .zip(gamma)
            .map(|(((&n, &m), &w), &g)| w + n as f64 * (m - nu - g).powi(2))
            .sum()
    }
}

/// `ν | γ, σ², X` under the prior `ν ~ N(0, prior_var)`.
pub fn oneway_nu(stats: &GroupStats, gamma: &[f64], sigma2: f64, prior_var: f64) -> NormalLaw {
    let weighted: f64 = stats
        .sizes
        .iter()
        .zip(&stats.means)
        .zip(gamma)
        .map(|((&n, &m), &g)| n as f64 * (m - g))
        .sum();
    NormalLaw::from_precision(stats.total as f64 / sigma2 + 1.0 / prior_var, weighted / sigma2)
}

/// `σ² | ν, γ, X`.
pub fn oneway_sigma2(stats: &GroupStats, nu: f64, gamma: &[f64], prior: InvGammaPrior) -> InvGammaLaw {
    InvGammaLaw {
        shape: prior.shape + 0.5 * stats.total as f64,
        rate: prior.rate + 0.5 * stats.residual_ss(nu, gamma),
    }
}

/// `γ_i | ν, σ², d², X` under `γ_i ~ N(0, d²)`.
pub fn oneway_gamma(stats: &GroupStats, group: usize, nu: f64, sigma2: f64, d2: f64) -> NormalLaw {
    let n = stats.sizes[group] as f64;
    NormalLaw::from_precision(n / sigma2 + 1.0 / d2, n * (stats.means[group] - nu) / sigma2)
}

/// Scale of a set of zero-mean normal effects, `d² | γ` (or `ω² | η`).
pub fn effect_scale(effects: &[f64], prior: InvGammaPrior) -> InvGammaLaw {
    InvGammaLaw {
        shape: prior.shape + 0.5 * effects.len() as f64,
        rate: prior.rate + 0.5 * effects.iter().map(|g| g * g).sum::<f64>(),
    }
}

/// Parameter expansion `γ_i = ξ η_i`: `η_i | ξ, ω², ν, σ², X` with `η_i ~ N(0, ω²)`.
pub fn px_eta(stats: &GroupStats, group: usize, nu: f64, sigma2: f64, xi: f64, omega2: f64) -> NormalLaw {
    let n = stats.sizes[group] as f64;
    NormalLaw::from_precision(
        xi * xi * n / sigma2 + 1.0 / omega2,
        xi * n * (stats.means[group] - nu) / sigma2,
    )
}

/// `ξ | η, ν, σ², X` with `ξ ~ N(0, 1)`.
pub fn px_xi(stats: &GroupStats, eta: &[f64], nu: f64, sigma2: f64) -> NormalLaw {
    let (precision, weighted) = stats
        .sizes
        .iter()
        .zip(&stats.means)
        .zip(eta)
        .fold((1.0, 0.0), |(p, w), ((&n, &m), &e)| {
            let n = n as f64;
            (p + n * e * e / sigma2, w + e * n * (m - nu) / sigma2)
        });
    NormalLaw::from_precision(precision, weighted)
}

/// `σ₀² | ν` for the hierarchy `ν | σ₀ ~ N(0, σ₀²)`.
pub fn px_sigma0_2(nu: f64, prior: InvGammaPrior) -> InvGammaLaw {
    InvGammaLaw {
        shape: prior.shape + 0.5,
        rate: prior.rate + 0.5 * nu * nu,
    }
}
