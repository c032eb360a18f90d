//! Gibbs sampling of an unbalanced one-way random-effects model under both
//! prior setups, followed by the tolerance interval for a new observation.

use tolerant::samplers::{gibbs_oneway, ChainConfig, LmmPriorConfig, OneWayDataset};
use tolerant::solver::{solve_proposed_pair, CenterSearchConfig, ToleranceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = OneWayDataset::from_values(vec![
        vec![10.2, 9.7, 10.9],
        vec![11.4, 12.0],
        vec![9.1, 8.8, 9.6, 9.3],
        vec![10.5],
        vec![10.0, 10.8, 11.1],
        vec![9.9, 9.4],
    ])?;
    let spec = ToleranceSpec::new(0.1, 0.05)?;

    for prior in [LmmPriorConfig::vanilla(), LmmPriorConfig::parameter_expansion()] {
        let draws = gibbs_oneway(&dataset, &prior, &ChainConfig::with_seed(11))?;
        let (fixed, optimal) = solve_proposed_pair(&draws, &spec, &CenterSearchConfig::default())?;
        println!("{}:", prior.setup.as_str());
        println!("  E(nu|X) = {:.4}, J = {}", draws.mean_nu(), draws.len());
        for iv in [fixed, optimal] {
            println!("  {:<24} [{:.4}, {:.4}]", iv.method.as_str(), iv.lower(), iv.upper());
        }
    }
    Ok(())
}
