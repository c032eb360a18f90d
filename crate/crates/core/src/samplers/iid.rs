//! I.i.d. normal data `X_1, …, X_n ~ N(ν, τ²)` with `τ² ~ IG(α₀, β₀)`.

use serde::{Deserialize, Serialize};

use super::conditionals::{self, IidStats};
use super::{ChainConfig, InvGammaLaw, NormalLaw};
use crate::error::{Error, Result};
use crate::normal::PredictionParam;
use crate::rng::{stream_rng, CHAIN_STREAM, EXACT_STREAM};
use crate::solver::PosteriorDraws;

/// How the prior variance of `ν` relates to `τ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// `ν | τ ~ N(a, τ²/b)`.
    Proportional,
    /// `ν ~ N(a, 1/b)`, independent of `τ`.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidPriorConfig {
    pub a: f64,
    pub b: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub variance_mode: VarianceMode,
}

impl IidPriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::config("prior mean a must be finite"));
        }
        for (name, v) in [("b", self.b), ("alpha0", self.alpha0), ("beta0", self.beta0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("prior {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

fn sample_stats(data: &[f64]) -> Result<IidStats> {
    if data.len() < 2 {
        return Err(Error::config(format!(
            "i.i.d. model needs at least 2 observations, got {}",
            data.len()
        )));
    }
    if let Some(x) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::domain(format!("observation {x} is not finite")));
    }
    Ok(IidStats::from_data(data))
}

fn checked_draw(nu: f64, tau2: f64, iteration: usize) -> Result<PredictionParam> {
    let tau = tau2.sqrt();
    if !(tau.is_finite() && tau > 0.0 && nu.is_finite()) {
        return Err(Error::Sampler(format!(
            "degenerate draw at iteration {iteration}: nu = {nu}, tau^2 = {tau2}"
        )));
    }
    Ok(PredictionParam::new_unchecked(nu, tau))
}

/// Two-block Gibbs sampler alternating `τ² | ν` and `ν | τ²`.
pub fn gibbs_iid_normal(data: &[f64], prior: &IidPriorConfig, chain: &ChainConfig) -> Result<PosteriorDraws> {
    prior.validate()?;
    chain.validate()?;
    let stats = sample_stats(data)?;
    let mut rng = stream_rng(chain.seed, CHAIN_STREAM);
    let mut out = Vec::with_capacity(chain.retained());
    let mut nu = stats.mean;
    for i in 0..chain.iterations {
        let tau2 = conditionals::iid_tau2(&stats, prior, nu).sample(&mut rng);
        nu = conditionals::iid_nu(&stats, prior, tau2).sample(&mut rng);
        if chain.keeps(i) {
            out.push(checked_draw(nu, tau2, i)?);
        }
    }
    PosteriorDraws::new(out)
}

/// Independent draws from the closed-form normal–inverse-gamma posterior of
/// the proportional-variance model.
pub fn exact_conjugate_iid(data: &[f64], prior: &IidPriorConfig, draws: usize, seed: u64) -> Result<PosteriorDraws> {
    prior.validate()?;
    if prior.variance_mode != VarianceMode::Proportional {
        return Err(Error::config(
            "exact conjugate sampling needs the proportional variance mode; the independent prior has no closed form",
        ));
    }
    if draws == 0 {
        return Err(Error::config("need at least one draw"));
    }
    let stats = sample_stats(data)?;
    let (tau2_law, nu_mean, nu_scale) = conjugate_posterior(&stats, prior);
    let mut rng = stream_rng(seed, EXACT_STREAM);
    let out = (0..draws)
        .map(|i| {
            let tau2 = tau2_law.sample(&mut rng);
            let nu = NormalLaw {
                mean: nu_mean,
                var: tau2 / nu_scale,
            }
            .sample(&mut rng);
            checked_draw(nu, tau2, i)
        })
        .collect::<Result<Vec<_>>>()?;
    PosteriorDraws::new(out)
}

/// Marginal law of `τ²`, and `(E(ν | τ, X), b + n)` with `var(ν | τ, X) = τ² / (b + n)`.
pub fn conjugate_posterior(stats: &IidStats, prior: &IidPriorConfig) -> (InvGammaLaw, f64, f64) {
    let n = stats.n as f64;
    let shrink = n * prior.b * (stats.mean - prior.a).powi(2) / (2.0 * (prior.b + n));
    let tau2 = InvGammaLaw {
        shape: prior.alpha0 + 0.5 * n,
        rate: prior.beta0 + 0.5 * stats.ss + shrink,
    };
    let mean = (prior.b * prior.a + n * stats.mean) / (prior.b + n);
    (tau2, mean, prior.b + n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_data() -> Vec<f64> {
        // n = 3, mean 10, s² = 1.
        vec![9.0, 10.0, 11.0]
    }

    fn prior(mode: VarianceMode, a: f64, b: f64) -> IidPriorConfig {
        IidPriorConfig { a, b, alpha0: 0.01, beta0: 0.01, variance_mode: mode }
    }

    fn mean_sd(xs: impl Iterator<Item = f64>) -> (f64, f64) {
        let xs: Vec<f64> = xs.collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn proportional_posterior_mean_of_nu() {
        let p = prior(VarianceMode::Proportional, 0.0, 1.0);
        let chain = ChainConfig { iterations: 41_000, burn_in: 1_000, thin: 1, seed: 3 };
        let d = gibbs_iid_normal(&example_data(), &p, &chain).unwrap();
        assert_eq!(d.len(), 40_000);
        let (m, sd) = mean_sd(d.iter().map(|t| t.nu()));
        // E(ν | τ, X) is free of τ, so successive ν draws are uncorrelated.
        assert!((m - 7.5).abs() < 3.0 * sd / (d.len() as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn independent_mode_collapses_with_huge_precision() {
        let p = prior(VarianceMode::Independent, 2.0, 1e10);
        let d = gibbs_iid_normal(&example_data(), &p, &ChainConfig { iterations: 3000, burn_in: 500, thin: 1, seed: 1 }).unwrap();
        assert!(d.iter().all(|t| (t.nu() - 2.0).abs() < 1e-3));
    }

    #[test]
    fn chains_are_reproducible() {
        let p = prior(VarianceMode::Independent, 0.0, 0.1);
        let c = ChainConfig { iterations: 500, burn_in: 100, thin: 3, seed: 99 };
        let a = gibbs_iid_normal(&example_data(), &p, &c).unwrap();
        let b = gibbs_iid_normal(&example_data(), &p, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), c.retained());
        let other = gibbs_iid_normal(&example_data(), &p, &ChainConfig { seed: 100, ..c }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_input() {
        let p = prior(VarianceMode::Proportional, 0.0, 1.0);
        assert!(matches!(gibbs_iid_normal(&[1.0], &p, &ChainConfig::default()), Err(Error::Config(_))));
        let ind = prior(VarianceMode::Independent, 0.0, 1.0);
        assert!(matches!(exact_conjugate_iid(&example_data(), &ind, 10, 0), Err(Error::Config(_))));
        assert!(gibbs_iid_normal(&[1.0, f64::NAN], &p, &ChainConfig::default()).is_err());
    }

    #[test]
    fn exact_conjugate_precision_mean() {
        // E(1/τ²) = shape / rate of the marginal inverse gamma.
        let p = prior(VarianceMode::Proportional, 1.0, 2.0);
        let data = example_data();
        let d = exact_conjugate_iid(&data, &p, 200_000, 5).unwrap();
        let shape = 0.01 + 1.5;
        let rate = 0.01 + 1.0 + 3.0 * 2.0 * 81.0 / (2.0 * 5.0);
        let (m, sd) = mean_sd(d.iter().map(|t| 1.0 / (t.tau() * t.tau())));
        assert!((m - shape / rate).abs() < 4.0 * sd / (d.len() as f64).sqrt());
        let (mn, sdn) = mean_sd(d.iter().map(|t| t.nu()));
        assert!((mn - (2.0 + 30.0) / 5.0).abs() < 4.0 * sdn / (d.len() as f64).sqrt());
    }
}
