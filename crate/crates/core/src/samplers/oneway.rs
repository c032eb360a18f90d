//! Unbalanced one-way random-effects model `X_ik = ν + γ_i + e_ik`,
//! `γ_i ~ N(0, d²)`, `e_ik ~ N(0, σ²)`, predicting `Z ~ N(ν, d² + σ²)`.

use serde::{Deserialize, Serialize};

use super::conditionals::{self, GroupStats};
use super::{ChainConfig, InvGammaPrior};
use crate::error::{Error, Result};
use crate::normal::PredictionParam;
use crate::rng::{stream_rng, CHAIN_STREAM};
use crate::solver::PosteriorDraws;

#[derive(Debug, Clone, PartialEq)]
pub struct OneWayGroup {
    pub label: String,
    pub values: Vec<f64>,
}

/// Grouped observations; at least two groups, none empty.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWayDataset {
    groups: Vec<OneWayGroup>,
}

impl OneWayDataset {
    pub fn new(groups: Vec<OneWayGroup>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::config(format!(
                "one-way model needs at least 2 groups, got {}",
                groups.len()
            )));
        }
        for g in &groups {
            if g.values.is_empty() {
                return Err(Error::config(format!("group `{}` has no observations", g.label)));
            }
            if let Some(x) = g.values.iter().find(|x| !x.is_finite()) {
                return Err(Error::domain(format!("group `{}`: observation {x} is not finite", g.label)));
            }
        }
        Ok(Self { groups })
    }

    /// Groups labelled `0, 1, …` from a list of value vectors.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            values
                .into_iter()
                .enumerate()
                .map(|(i, values)| OneWayGroup {
                    label: i.to_string(),
                    values,
                })
                .collect(),
        )
    }

    pub fn groups(&self) -> &[OneWayGroup] {
        &self.groups
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.values.len()).collect()
    }

    pub fn stats(&self) -> GroupStats {
        GroupStats::from_groups(self.groups.iter().map(|g| g.values.as_slice()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSetup {
    /// `ν ~ N(0, 1000)`, `d² ~ IG`, `σ² ~ IG`.
    Vanilla,
    /// `ν | σ₀ ~ N(0, σ₀²)`, `σ₀² ~ IG`, `d = |ξ|ω` with `ξ ~ N(0, 1)`, `ω² ~ IG`, `σ² ~ IG`.
    ParameterExpansion,
}

impl PriorSetup {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorSetup::Vanilla => "vanilla",
            PriorSetup::ParameterExpansion => "parameter_expansion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmmPriorConfig {
    pub setup: PriorSetup,
    /// Prior variance of `ν` in the vanilla setup.
    #[serde(default = "default_nu_var")]
    pub nu_prior_var: f64,
    #[serde(default = "vague")]
    pub d2: InvGammaPrior,
    #[serde(default = "vague")]
    pub sigma2: InvGammaPrior,
    #[serde(default = "vague")]
    pub sigma0_2: InvGammaPrior,
    #[serde(default = "vague")]
    pub omega2: InvGammaPrior,
}

fn default_nu_var() -> f64 {
    1000.0
}

fn vague() -> InvGammaPrior {
    InvGammaPrior::VAGUE
}

impl LmmPriorConfig {
    pub fn new(setup: PriorSetup) -> Self {
        Self {
            setup,
            nu_prior_var: default_nu_var(),
            d2: vague(),
            sigma2: vague(),
            sigma0_2: vague(),
            omega2: vague(),
        }
    }

    pub fn vanilla() -> Self {
        Self::new(PriorSetup::Vanilla)
    }

    pub fn parameter_expansion() -> Self {
        Self::new(PriorSetup::ParameterExpansion)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu_prior_var > 0.0 && self.nu_prior_var.is_finite()) {
            return Err(Error::config("nu_prior_var must be positive"));
        }
        self.d2.validate("d2")?;
        self.sigma2.validate("sigma2")?;
        self.sigma0_2.validate("sigma0_2")?;
        self.omega2.validate("omega2")
    }
}

/// One retained state of the variance-component chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentsDraw {
    pub nu: f64,
    pub d2: f64,
    pub sigma2: f64,
    /// Prior variance of `ν` in this state: fixed for the vanilla setup, `σ₀²` under expansion.
    pub nu_prior_var: f64,
}

impl ComponentsDraw {
    pub fn tau2(&self) -> f64 {
        self.d2 + self.sigma2
    }
}

fn degenerate(iteration: usize, what: &str, value: f64) -> Error {
    Error::Sampler(format!("degenerate {what} = {value} at iteration {iteration}"))
}

fn check_positive(iteration: usize, what: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(degenerate(iteration, what, value))
    }
}

/// Gibbs sampler over `(ν, γ, d², σ²)` (plus `ξ, η, ω², σ₀²` under parameter
/// expansion), returning every retained state.
pub fn gibbs_oneway_components(
    dataset: &OneWayDataset,
    prior: &LmmPriorConfig,
    chain: &ChainConfig,
) -> Result<Vec<ComponentsDraw>> {
    prior.validate()?;
    chain.validate()?;
    let stats = dataset.stats();
    if stats.within_ss.iter().all(|&w| w == 0.0) {
        return Err(Error::Sampler(
            "observations are identical within every group; the error variance is not identified".into(),
        ));
    }

    let m = stats.groups();
    let total = stats.total as f64;
    let grand = stats
        .sizes
        .iter()
        .zip(&stats.means)
        .map(|(&n, &x)| n as f64 * x)
        .sum::<f64>()
        / total;
    let pooled = stats.within_ss.iter().sum::<f64>() / (total - m as f64).max(1.0);
    let mut nu = grand;
    let mut gamma: Vec<f64> = stats.means.iter().map(|x| x - grand).collect();
    let mut sigma2 = pooled;
    let mut d2 = (gamma.iter().map(|g| g * g).sum::<f64>() / m as f64).max(0.1 * pooled);

    // Parameter-expansion state: γ = ξ η, d² = ξ² ω².
    let mut xi = 1.0;
    let mut eta = gamma.clone();
    let mut omega2 = d2;
    let mut sigma0_2 = prior.nu_prior_var;

    let mut rng = stream_rng(chain.seed, CHAIN_STREAM);
    let mut out = Vec::with_capacity(chain.retained());
    for it in 0..chain.iterations {
        match prior.setup {
            PriorSetup::Vanilla => {
                for (i, g) in gamma.iter_mut().enumerate() {
                    *g = conditionals::oneway_gamma(&stats, i, nu, sigma2, d2).sample(&mut rng);
                }
                nu = conditionals::oneway_nu(&stats, &gamma, sigma2, prior.nu_prior_var).sample(&mut rng);
                sigma2 = conditionals::oneway_sigma2(&stats, nu, &gamma, prior.sigma2).sample(&mut rng);
                d2 = conditionals::effect_scale(&gamma, prior.d2).sample(&mut rng);
            }
            PriorSetup::ParameterExpansion => {
                for (i, e) in eta.iter_mut().enumerate() {
                    *e = conditionals::px_eta(&stats, i, nu, sigma2, xi, omega2).sample(&mut rng);
                }
                xi = conditionals::px_xi(&stats, &eta, nu, sigma2).sample(&mut rng);
                omega2 = check_positive(it, "omega^2", conditionals::effect_scale(&eta, prior.omega2).sample(&mut rng))?;
                for (g, e) in gamma.iter_mut().zip(&eta) {
                    *g = xi * e;
                }
                nu = conditionals::oneway_nu(&stats, &gamma, sigma2, sigma0_2).sample(&mut rng);
                // σ₀² may overflow to +∞ under its vague prior; that is a flat prior on ν.
                sigma0_2 = conditionals::px_sigma0_2(nu, prior.sigma0_2).sample(&mut rng);
                if !(sigma0_2 > 0.0) {
                    return Err(degenerate(it, "sigma0^2", sigma0_2));
                }
                sigma2 = conditionals::oneway_sigma2(&stats, nu, &gamma, prior.sigma2).sample(&mut rng);
                d2 = xi * xi * omega2;
            }
        }
        sigma2 = check_positive(it, "sigma^2", sigma2)?;
        if !(d2.is_finite() && d2 >= 0.0) || !nu.is_finite() {
            return Err(degenerate(it, "d^2", d2));
        }
        if prior.setup == PriorSetup::Vanilla && d2 == 0.0 {
            return Err(degenerate(it, "d^2", d2));
        }
        if chain.keeps(it) {
            let nu_prior_var = match prior.setup {
                PriorSetup::Vanilla => prior.nu_prior_var,
                PriorSetup::ParameterExpansion => sigma0_2,
            };
            out.push(ComponentsDraw { nu, d2, sigma2, nu_prior_var });
        }
    }
    Ok(out)
}

/// Posterior draws of `(ν, τ)` with `τ² = d² + σ²`.
pub fn gibbs_oneway(dataset: &OneWayDataset, prior: &LmmPriorConfig, chain: &ChainConfig) -> Result<PosteriorDraws> {
    let comps = gibbs_oneway_components(dataset, prior, chain)?;
    let draws = comps
        .iter()
        .map(|c| PredictionParam::new(c.nu, c.tau2().sqrt()))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Sampler(format!("invalid prediction draw: {e}")))?;
    PosteriorDraws::new(draws)
}
