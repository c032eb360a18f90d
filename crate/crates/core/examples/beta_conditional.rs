//! Conditional posterior of the fixed effects in a small mixed model and the
//! implied prediction parameters `(ν, τ)` for a new observation.

use nalgebra::{DMatrix, DVector};
use tolerant::samplers::{lmm_beta_conditional, lmm_beta_mean_alternative, BetaPrior, LmmDesign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two groups of three with an intercept and a slope; random intercepts.
    let t = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0];
    let u = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { t[i] });
    let v = DMatrix::from_fn(6, 2, |i, j| if i / 3 == j { 1.0 } else { 0.0 });
    let x = DVector::from_vec(vec![1.1, 2.0, 3.2, 0.6, 1.7, 2.5]);

    let design = LmmDesign {
        u,
        v,
        d: DMatrix::identity(2, 2) * 0.5,
        sigma2: 0.2,
        lambda: BetaPrior::Improper,
        u_vec: DVector::from_vec(vec![1.0, 1.5]),
        v_vec: DVector::from_vec(vec![1.0, 0.0]),
    };
    let (mean, cov) = lmm_beta_conditional(&design, &x)?;
    println!("flat prior: E(beta | X) = {:.5?}", mean.as_slice());
    println!("flat prior: Cov(beta | X) = {:.5?}", cov.as_slice());

    let theta = design.prediction(&mean)?;
    println!("nu = {:.5}, tau = {:.5}", theta.nu(), theta.tau());

    let proper = LmmDesign { lambda: BetaPrior::Proper(DMatrix::identity(2, 2) * 4.0), ..design };
    let (shrunk, _) = lmm_beta_conditional(&proper, &x)?;
    let alt = lmm_beta_mean_alternative(&proper, &x)?;
    println!("Lambda = 4 I: E(beta | X) = {:.5?}", shrunk.as_slice());
    println!("Lambda = 4 I: alternative form max diff = {:.2e}", (&shrunk - &alt).amax());
    Ok(())
}
