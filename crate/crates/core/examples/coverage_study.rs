//! Frequentist coverage of the interval on simulated unbalanced one-way data.
//!
//! ```text
//! cargo run --release --example coverage_study -- [replicates] [rho...]
//! ```

use std::time::Instant;

use tolerant::samplers::PriorSetup;
use tolerant::simulation::{format_tables, run_coverage_study, SimulationScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let mut rhos: Vec<f64> = args.map(|s| s.parse()).collect::<Result<_, _>>()?;
    if rhos.is_empty() {
        rhos = vec![0.1, 0.3, 0.5, 0.7, 0.9];
    }

    let mut reports = Vec::new();
    for setup in [PriorSetup::Vanilla, PriorSetup::ParameterExpansion] {
        for &rho in &rhos {
            let scenario = SimulationScenario {
                replicates,
                ..SimulationScenario::new(rho, setup)
            };
            let start = Instant::now();
            let report = run_coverage_study(&scenario)?;
            eprintln!("{}: {:.1}s", scenario.label(), start.elapsed().as_secs_f64());
            reports.push(report);
        }
    }
    print!("{}", format_tables(&reports));
    Ok(())
}
