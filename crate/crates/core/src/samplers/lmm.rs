//! Conditional posterior of the fixed effects in `X = Uβ + Vγ + e`,
//! `γ ~ N(0, D)`, `e ~ N(0, σ² I)`, `β ~ N(0, Λ)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::normal::PredictionParam;

/// Prior covariance of `β`.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaPrior {
    Proper(DMatrix<f64>),
    /// The limit `Λ → ∞` (flat prior).
    Improper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmDesign {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub sigma2: f64,
    pub lambda: BetaPrior,
    pub u_vec: DVector<f64>,
    pub v_vec: DVector<f64>,
}

impl LmmDesign {
    pub fn validate(&self) -> Result<()> {
        let (n, p) = self.u.shape();
        let q = self.v.ncols();
        if self.v.nrows() != n {
            return Err(Error::config(format!("V has {} rows, U has {n}", self.v.nrows())));
        }
        if self.d.shape() != (q, q) {
            return Err(Error::config(format!("D must be {q}x{q}, got {:?}", self.d.shape())));
        }
        if let BetaPrior::Proper(l) = &self.lambda {
            if l.shape() != (p, p) {
                return Err(Error::config(format!("Lambda must be {p}x{p}, got {:?}", l.shape())));
            }
        }
        if self.u_vec.len() != p || self.v_vec.len() != q {
            return Err(Error::config("prediction vectors do not match the design dimensions"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::domain(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        Ok(())
    }

    /// Marginal covariance `C = V D Vᵀ + σ² I`.
    pub fn marginal_cov(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        &self.v * &self.d * self.v.transpose() + DMatrix::identity(n, n) * self.sigma2
    }

    /// `ν = uᵀβ`, `τ² = vᵀ D v + σ²` for a given `β`.
    pub fn prediction(&self, beta: &DVector<f64>) -> Result<PredictionParam> {
        prediction_params(beta, &self.d, self.sigma2, &self.u_vec, &self.v_vec)
    }
}

/// Cholesky factorization, retried once with a `1e-10·trace/n` ridge.
pub(crate) fn spd_factor(m: DMatrix<f64>, name: &'static str) -> Result<Cholesky<f64, Dyn>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::LinAlg { matrix: name });
    }
    let n = m.nrows();
    let ridge = 1e-10 * m.trace().abs() / n.max(1) as f64;
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let jittered = m + DMatrix::identity(n, n) * ridge;
    let c = Cholesky::new(jittered).ok_or(Error::LinAlg { matrix: name })?;
    // A pivot that is mostly ridge means the matrix itself was singular.
    let min_pivot = c.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &x| a.min(x * x));
    if min_pivot < 100.0 * ridge {
        return Err(Error::LinAlg { matrix: name });
    }
    Ok(c)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Mean and covariance of `β | D, σ², X`:
/// `(UᵀC⁻¹U + Λ⁻¹)⁻¹ UᵀC⁻¹X` and `(UᵀC⁻¹U + Λ⁻¹)⁻¹`.
pub fn lmm_beta_conditional(design: &LmmDesign, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    design.validate()?;
    if x.len() != design.u.nrows() {
        return Err(Error::config(format!(
            "observation vector has length {}, design has {} rows",
            x.len(),
            design.u.nrows()
        )));
    }
    let c = spd_factor(design.marginal_cov(), "C")?;
    let cinv_u = c.solve(&design.u);
    let cinv_x = c.solve(x);
    let mut precision = design.u.transpose() * &cinv_u;
    let name = match &design.lambda {
        BetaPrior::Proper(l) => {
            precision += spd_factor(l.clone(), "Lambda")?.inverse();
            "U^T C^-1 U + Lambda^-1"
        }
        BetaPrior::Improper => "U^T C^-1 U",
    };
    let p = spd_factor(symmetrize(precision), name)?;
    let mean = p.solve(&(design.u.transpose() * cinv_x));
    let cov = symmetrize(p.inverse());
    Ok((mean, cov))
}

/// The same mean through `Λ Uᵀ (U Λ Uᵀ + C)⁻¹ X`; requires a proper prior.
pub fn lmm_beta_mean_alternative(design: &LmmDesign, x: &DVector<f64>) -> Result<DVector<f64>> {
    design.validate()?;
    let BetaPrior::Proper(l) = &design.lambda else {
        return Err(Error::config("the alternative form requires a proper prior covariance"));
    };
    let m = &design.u * l * design.u.transpose() + design.marginal_cov();
    let f = spd_factor(symmetrize(m), "U Lambda U^T + C")?;
    Ok(l * design.u.transpose() * f.solve(x))
}

/// `ν = uᵀβ`, `τ = √(vᵀ D v + σ²)`.
pub fn prediction_params(
    beta: &DVector<f64>,
    d: &DMatrix<f64>,
    sigma2: f64,
    u_vec: &DVector<f64>,
    v_vec: &DVector<f64>,
) -> Result<PredictionParam> {
    if beta.len() != u_vec.len() || d.shape() != (v_vec.len(), v_vec.len()) {
        return Err(Error::config("prediction vectors do not match beta or D"));
    }
    let nu = u_vec.dot(beta);
    let tau2 = (v_vec.transpose() * d * v_vec)[(0, 0)] + sigma2;
    if !(tau2 > 0.0) {
        return Err(Error::domain(format!("tau^2 = {tau2} is not positive")));
    }
    PredictionParam::new(nu, tau2.sqrt())
}
