//! Large-sample behaviour of the optimal-center half-length against its
//! first-order expansion.

use tolerant::simulation::{run_asymptotic_diagnostic, AsymptoticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let datasets = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50);
    let config = AsymptoticConfig { datasets, ..AsymptoticConfig::default() };
    let rows = run_asymptotic_diagnostic(&config)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>12}", "n", "mean B", "formula", "|gap|", "correction", "|A - xbar|");
    for r in rows {
        println!(
            "{:>6} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>12.5}",
            r.n, r.mean_half_length, r.mean_formula, r.mean_abs_gap, r.correction, r.mean_abs_center_offset
        );
    }
    Ok(())
}
