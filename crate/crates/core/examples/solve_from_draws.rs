//! Reads a `nu,tau` draws file and prints the proposed interval at both centers.
//!
//! ```text
//! cargo run --example solve_from_draws -- draws.csv [delta] [alpha]
//! ```
//!
//! Without a file argument a small synthetic draw set is used.

use tolerant::io::{read_draws, IntervalReport};
use tolerant::solver::{solve_proposed_pair, CenterSearchConfig, PosteriorDraws, ToleranceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let draws = match args.next() {
        Some(path) => read_draws(path.as_ref())?,
        None => PosteriorDraws::from_pairs((0..2000).map(|i| {
            let u = (i as f64 + 0.5) / 2000.0;
            (10.0 + 0.6 * tolerant::normal::quantile(u), 1.0 + 0.4 * u)
        }))?,
    };
    let delta = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let alpha = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let spec = ToleranceSpec::new(delta, alpha)?;

    let (fixed, optimal) = solve_proposed_pair(&draws, &spec, &CenterSearchConfig::default())?;
    for iv in [fixed, optimal] {
        println!("{}", IntervalReport::new(iv, &draws).summary_line());
    }
    Ok(())
}
