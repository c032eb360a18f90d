//! Every interval construction on the same conjugate posterior.

use tolerant::samplers::{exact_conjugate_iid, IidPriorConfig, VarianceMode};
use tolerant::solver::{
    solve_expectation, solve_one_sided, solve_proposed, solve_wkm, CenterMode, CenterSearchConfig, Side,
    ToleranceSpec, WkmVariant,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prior = IidPriorConfig { a: 0.0, b: 0.01, alpha0: 0.01, beta0: 0.01, variance_mode: VarianceMode::Proportional };
    let data = [4.1, 5.3, 3.8, 4.9, 5.6, 4.4, 4.0, 5.1];
    let draws = exact_conjugate_iid(&data, &prior, 20_000, 3)?;
    let spec = ToleranceSpec::new(0.1, 0.05)?;
    let search = CenterSearchConfig::default();

    let intervals = [
        solve_proposed(&draws, &spec, CenterMode::FixedAtPosteriorMean, &search)?,
        solve_proposed(&draws, &spec, CenterMode::Optimal, &search)?,
        solve_wkm(&draws, &spec, WkmVariant::W)?,
        solve_wkm(&draws, &spec, WkmVariant::KM)?,
        solve_expectation(&draws, &spec)?,
        solve_one_sided(&draws, &spec, Side::Upper)?,
        solve_one_sided(&draws, &spec, Side::Lower)?,
    ];
    println!("{:<24} {:>10} {:>10} {:>8}", "method", "L", "U", "content");
    for iv in &intervals {
        println!("{:<24} {:>10.4} {:>10.4} {:>8.4}", iv.method.as_str(), iv.lower(), iv.upper(), iv.empirical_content);
    }
    Ok(())
}
