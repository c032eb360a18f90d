//! Half-length `B(A)` as a function of the center for the three-point data
//! `9, 10, 11` under an independent normal prior on `ν` centered at 0.
//!
//! The minimum is pulled away from `E(ν|X)` toward the prior mean.

use tolerant::samplers::{gibbs_iid_normal, ChainConfig, IidPriorConfig, VarianceMode};
use tolerant::solver::{half_length_profile, search_center, CenterSearchConfig, ToleranceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prior = IidPriorConfig { a: 0.0, b: 0.1, alpha0: 0.01, beta0: 0.01, variance_mode: VarianceMode::Independent };
    let chain = ChainConfig { iterations: 102_000, burn_in: 2_000, thin: 1, seed: 7 };
    let draws = gibbs_iid_normal(&[9.0, 10.0, 11.0], &prior, &chain)?;
    let spec = ToleranceSpec::new(0.05, 0.1)?;

    let mean = draws.mean_nu();
    let sd = draws.sd_nu();
    let centers: Vec<f64> = (-20..=20).map(|k| mean + 0.1 * k as f64 * sd).collect();
    let profile = half_length_profile(&draws, &spec, &centers)?;
    println!("{:>10} {:>10}", "A", "B(A)");
    for (a, b) in centers.iter().zip(&profile) {
        println!("{a:>10.4} {b:>10.4}");
    }

    let best = search_center(&draws, &spec, &CenterSearchConfig::default())?;
    println!();
    println!("E(nu|X) = {:.4}, B there = {:.4}", best.fixed_center, best.fixed_half_length);
    println!("argmin A = {:.4}, B there = {:.4}", best.center, best.half_length);
    Ok(())
}
