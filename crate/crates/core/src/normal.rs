//! Standard normal primitives and the content of an interval under `N(ν, τ²)`.
//!
//! The CDF is evaluated through the complementary error function so that both
//! tails keep relative accuracy, which matters when the half-length roots sit
//! at content `1 − δ` with small `δ`. The quantile starts from Acklam's
//! rational approximation and is polished with a single Halley step.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Location and scale of a normal future observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionParam {
    nu: f64,
    tau: f64,
}

impl PredictionParam {
    pub fn new(nu: f64, tau: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::domain(format!("nu must be finite, got {nu}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain(format!("tau must be finite and > 0, got {tau}")));
        }
        Ok(Self { nu, tau })
    }

    pub(crate) fn new_unchecked(nu: f64, tau: f64) -> Self {
        debug_assert!(tau > 0.0);
        Self { nu, tau }
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// An interval stored as midpoint `A` and half-length `B ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGeometry {
    center: f64,
    half_length: f64,
}

impl IntervalGeometry {
    pub fn new(center: f64, half_length: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::domain(format!("center must be finite, got {center}")));
        }
        if !(half_length.is_finite() && half_length >= 0.0) {
            return Err(Error::domain(format!(
                "half-length must be finite and >= 0, got {half_length}"
            )));
        }
        Ok(Self {
            center,
            half_length,
        })
    }

    /// Builds the geometry from interval endpoints `lower ≤ upper`.
    pub fn from_limits(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::domain(format!("need lower <= upper, got [{lower}, {upper}]")));
        }
        Self::new(0.5 * (lower + upper), 0.5 * (upper - lower))
    }

    pub(crate) fn new_unchecked(center: f64, half_length: f64) -> Self {
        debug_assert!(half_length >= 0.0);
        Self {
            center,
            half_length,
        }
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.center - self.half_length
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.center + self.half_length
    }
}

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF without input validation. Infinite arguments map to 0
/// or 1 and NaN propagates.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal CDF, rejecting non-finite input.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal CDF needs a finite argument, got {x}")));
    }
    Ok(cdf(x))
}

/// Standard normal quantile, rejecting `p ∉ (0, 1)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    Ok(quantile(p))
}

/// Standard normal quantile without input validation.
///
/// Antisymmetric up to the rounding of `1 − p`: `quantile(1 − p)` is computed
/// as `-quantile(1 − (1 − p))`.
pub fn quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    // Work in the lower half where Φ has full relative precision; 1 − p is
    // exact for p ≥ 0.5.
    let (q, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let mut x = acklam_lower(q);
    let e = cdf(x) - q;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    if u.is_finite() {
        x -= u / (1.0 + 0.5 * x * u);
    }
    sign * x
}

/// Acklam's rational approximation for `0 < p < 0.5`, relative error ~1e-9.
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Upper `p`-quantile `ξ_p`, i.e. `Φ(ξ_p) = 1 − p`.
#[inline]
pub fn upper_quantile(p: f64) -> f64 {
    -quantile(p)
}

/// Content `Q_θ[A − g, A + g]` written in terms of the offset `ε = A − ν`.
///
/// Computed as one minus the two tail masses, which makes the value exactly
/// invariant under `ε → −ε`.
#[inline]
pub(crate) fn content_at_offset(offset: f64, g: f64, tau: f64) -> f64 {
    let upper_tail = cdf(-(offset + g) / tau);
    let lower_tail = cdf((offset - g) / tau);
    (1.0 - (upper_tail + lower_tail)).max(0.0)
}

/// `∂/∂g Q_θ[A − g, A + g]` in terms of `ε = A − ν`.
#[inline]
pub(crate) fn content_slope_at_offset(offset: f64, g: f64, tau: f64) -> f64 {
    (pdf((offset + g) / tau) + pdf((offset - g) / tau)) / tau
}

/// Probability mass `Q_θ[L, U]` of the interval under `N(ν, τ²)`.
pub fn interval_content(theta: PredictionParam, geom: IntervalGeometry) -> f64 {
    content_at_offset(geom.center - theta.nu, geom.half_length, theta.tau)
}

/// Derivative of the content of `[A − g, A + g]` with respect to `g`.
pub fn content_half_length_derivative(theta: PredictionParam, center: f64, g: f64) -> f64 {
    content_slope_at_offset(center - theta.nu, g, theta.tau)
}

/// Membership of `θ` in `G_{A,B,δ}`: the interval `[A − B, A + B]` holds at
/// least `1 − δ` of `N(ν, τ²)`. The boundary counts as inside.
pub fn tolerance_set_contains(theta: PredictionParam, center: f64, half_length: f64, delta: f64) -> bool {
    content_at_offset(center - theta.nu, half_length, theta.tau) >= 1.0 - delta
}
