//! The per-draw half-length root and the content it achieves.

use tolerant::normal::{interval_content, IntervalGeometry, PredictionParam};
use tolerant::solver::{solve_g, ToleranceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ToleranceSpec::new(0.1, 0.05)?;
    let theta = PredictionParam::new(0.0, 1.0)?;
    println!("{:>8} {:>12} {:>14}", "A", "g", "content");
    for a in [0.0, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let g = solve_g(theta, a, spec.delta, &spec)?;
        let content = interval_content(theta, IntervalGeometry::new(a, g)?);
        println!("{a:>8.2} {g:>12.8} {content:>14.12}");
    }
    Ok(())
}
