//! Tolerance intervals from a sample of posterior draws of `(ν, τ)`.
//!
//! The two-sided `(δ, α)` interval `[A − B, A + B]` is found by solving, for
//! every draw, the half-length `g_j` at which the draw sits exactly on the
//! boundary of `G_{A,B,δ}`, and taking `B` as the conservative empirical
//! `(1 − α)`-quantile of the `g_j`. The center is either the posterior mean of
//! `ν` or the minimizer of `B(A)` over a grid refined by golden-section search.
//!
//! The WKM construction, one-sided limits, α-expectation intervals and the
//! large-sample half-length expansion are provided for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{self, IntervalGeometry, PredictionParam};

/// A posterior sample of the prediction parameter, in chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    draws: Vec<PredictionParam>,
}

impl PosteriorDraws {
    pub fn new(draws: Vec<PredictionParam>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::config("posterior draws must contain at least one draw"));
        }
        Ok(Self { draws })
    }

    /// Validates raw `(ν, τ)` pairs; `τ ≤ 0` is rejected rather than dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let draws = pairs
            .into_iter()
            .enumerate()
            .map(|(j, (nu, tau))| {
                PredictionParam::new(nu, tau)
                    .map_err(|e| Error::domain(format!("draw {j}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(draws)
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn as_slice(&self) -> &[PredictionParam] {
        &self.draws
    }

    pub fn iter(&self) -> impl Iterator<Item = &PredictionParam> {
        self.draws.iter()
    }

    /// Posterior mean of `ν`.
    pub fn mean_nu(&self) -> f64 {
        self.draws.iter().map(|d| d.nu()).sum::<f64>() / self.draws.len() as f64
    }

    /// Sample standard deviation of `ν` (zero for a single draw).
    pub fn sd_nu(&self) -> f64 {
        let n = self.draws.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_nu();
        let ss: f64 = self.draws.iter().map(|d| (d.nu() - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }
}

/// The `(δ, α)` pair plus root-finding controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub delta: f64,
    pub alpha: f64,
    /// Stop tolerance on `|content − (1 − δ)|` for each half-length root.
    pub root_tol: f64,
    pub max_newton_iters: usize,
}

impl ToleranceSpec {
    pub const DEFAULT_ROOT_TOL: f64 = 1e-4;
    pub const DEFAULT_MAX_ITERS: usize = 100;

    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        Self {
            delta,
            alpha,
            root_tol: Self::DEFAULT_ROOT_TOL,
            max_newton_iters: Self::DEFAULT_MAX_ITERS,
        }
        .validated()
    }

    pub fn with_root_tol(mut self, root_tol: f64) -> Result<Self> {
        self.root_tol = root_tol;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.root_tol > 0.0) {
            return Err(Error::config(format!("root_tol must be > 0, got {}", self.root_tol)));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::config("max_newton_iters must be >= 1"));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProposedFixedCenter,
    ProposedOptimalCenter,
    WkmW,
    WkmKm,
    OneSidedUpper,
    OneSidedLower,
    Expectation,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ProposedFixedCenter => "proposed_fixed_center",
            Method::ProposedOptimalCenter => "proposed_optimal_center",
            Method::WkmW => "wkm_w",
            Method::WkmKm => "wkm_km",
            Method::OneSidedUpper => "one_sided_upper",
            Method::OneSidedLower => "one_sided_lower",
            Method::Expectation => "expectation",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMode {
    FixedAtPosteriorMean,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WkmVariant {
    W,
    KM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Grid-plus-golden-section search for the center minimizing `B(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CenterSearchConfig {
    /// Odd number of grid points; the middle one is the posterior mean.
    pub grid_points: usize,
    /// Grid half-width in units of the posterior SD of `ν`.
    pub half_width_sds: f64,
    /// Golden-section iterations inside the bracket around the best grid point.
    pub refine_iters: usize,
}

impl Default for CenterSearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 41,
            half_width_sds: 2.0,
            refine_iters: 24,
        }
    }
}

impl CenterSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 || self.grid_points.is_multiple_of(2) {
            return Err(Error::config(format!(
                "grid_points must be odd and >= 3, got {}",
                self.grid_points
            )));
        }
        if !(self.half_width_sds > 0.0 && self.half_width_sds.is_finite()) {
            return Err(Error::config("half_width_sds must be positive"));
        }
        Ok(())
    }
}

/// Interval limits; one-sided limits leave the other end unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limits {
    TwoSided(IntervalGeometry),
    Upper(f64),
    Lower(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceInterval {
    pub limits: Limits,
    pub method: Method,
    pub spec: ToleranceSpec,
    /// Number of posterior draws `J`.
    pub draws: usize,
    /// Fraction of draws inside `G` (posterior-mean content for expectation
    /// intervals).
    pub empirical_content: f64,
    /// WKM only: the attained `#S / J`.
    pub achieved_fraction: Option<f64>,
}

impl ToleranceInterval {
    pub fn geometry(&self) -> Option<IntervalGeometry> {
        match self.limits {
            Limits::TwoSided(g) => Some(g),
            _ => None,
        }
    }

    pub fn lower(&self) -> f64 {
        match self.limits {
            Limits::TwoSided(g) => g.lower(),
            Limits::Upper(_) => f64::NEG_INFINITY,
            Limits::Lower(l) => l,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.limits {
            Limits::TwoSided(g) => g.upper(),
            Limits::Upper(u) => u,
            Limits::Lower(_) => f64::INFINITY,
        }
    }

    pub fn half_length(&self) -> Option<f64> {
        self.geometry().map(|g| g.half_length())
    }

    pub fn center(&self) -> Option<f64> {
        self.geometry().map(|g| g.center())
    }
}

/// Conservative rank `⌈p·n⌉` (1-based, clamped to `[1, n]`), robust to the
/// rounding of `p·n` sitting just above an integer.
pub fn conservative_rank(p: f64, n: usize) -> usize {
    let x = p * n as f64;
    let k = (x - x.abs() * 1e-12).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Order statistic at rank `⌈p·n⌉`. Reorders `values`.
pub fn empirical_quantile(values: &mut [f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "empirical quantile of an empty sample");
    let k = conservative_rank(p, values.len());
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Precomputed constants for the per-draw half-length root.
#[derive(Debug, Clone, Copy)]
struct RootContext {
    target: f64,
    // In standardized units: the root lies in [max(0, r + xi_delta), r + xi_half_delta].
    xi_delta: f64,
    xi_half_delta: f64,
    root_tol: f64,
    max_iters: usize,
}

impl RootContext {
    fn new(delta: f64, spec: &ToleranceSpec) -> Self {
        Self {
            target: 1.0 - delta,
            xi_delta: normal::upper_quantile(delta),
            xi_half_delta: normal::upper_quantile(0.5 * delta),
            root_tol: spec.root_tol,
            max_iters: spec.max_newton_iters,
        }
    }

    /// Solves `Q[A − g, A + g] = 1 − δ` for one draw, returning `g`.
    ///
    /// Works with `r = |A − ν| / τ` and `h = g / τ`. Newton starts at `r + 1`
    /// when `r < 1` and at `r` otherwise; any iterate leaving the current
    /// bracket is replaced by the bracket midpoint.
    fn solve(&self, index: usize, offset: f64, tau: f64) -> Result<f64> {
        let r = offset.abs() / tau;
        if !r.is_finite() {
            return Err(Error::Solver {
                index,
                reason: format!("non-finite standardized offset {r}"),
            });
        }
        let mut lo = (r + self.xi_delta).max(0.0);
        let mut hi = r + self.xi_half_delta;
        // The analytic bracket can be off by rounding at extreme offsets.
        while normal::content_at_offset(r, hi, 1.0) < self.target {
            hi = 2.0 * hi + 1.0;
            if !hi.is_finite() {
                return Err(Error::Solver {
                    index,
                    reason: "could not bracket the root".into(),
                });
            }
        }

        let mut h = if r < 1.0 { r + 1.0 } else { r };
        if !(h > lo && h < hi) {
            h = 0.5 * (lo + hi);
        }
        for _ in 0..self.max_iters {
            let f = normal::content_at_offset(r, h, 1.0) - self.target;
            if f < 0.0 {
                lo = lo.max(h);
            } else {
                hi = hi.min(h);
            }
            let slope = normal::content_slope_at_offset(r, h, 1.0);
            let step = f / slope;
            let x_tol = 1e-12 * (1.0 + h);
            if f.abs() <= self.root_tol && (step.abs() <= x_tol || hi - lo <= x_tol) {
                return Ok(h * tau);
            }
            let mut next = h - step;
            if !(next.is_finite() && next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == h {
                // Bracket collapsed to adjacent floats.
                if f.abs() <= self.root_tol {
                    return Ok(h * tau);
                }
                break;
            }
            h = next;
        }
        Err(Error::Solver {
            index,
            reason: format!(
                "no convergence within {} iterations (offset {offset}, tau {tau})",
                self.max_iters
            ),
        })
    }
}

/// Half-length `g ≥ 0` at which `[A − g, A + g]` has content exactly `1 − δ`
/// under the given draw, to `spec.root_tol` in content.
pub fn solve_g(draw: PredictionParam, center: f64, delta: f64, spec: &ToleranceSpec) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta must be in (0, 1), got {delta}")));
    }
    RootContext::new(delta, spec).solve(0, center - draw.nu(), draw.tau())
}

/// Cubic Hermite table of the standardized root `h(r)` on `[0, R_MAX]`.
///
/// For a fixed `δ` the root depends on a draw only through `r = |A − ν|/τ`,
/// with `g = τ h(r)` and `h'(r) = (φ(h − r) − φ(h + r)) / (φ(h − r) + φ(h + r))`.
/// Nodes are solved to full precision, so interpolation errors stay near
/// 1e-10 in `h`, far inside the content tolerance. Offsets beyond the table
/// fall back to Newton.
#[derive(Debug, Clone)]
struct RootTable {
    ctx: RootContext,
    h: Vec<f64>,
    dh: Vec<f64>,
}

impl RootTable {
    const R_MAX: f64 = 8.0;
    const PER_UNIT: f64 = 128.0;

    fn new(ctx: RootContext) -> Result<Self> {
        let nodes = (Self::R_MAX * Self::PER_UNIT) as usize + 1;
        let mut h = Vec::with_capacity(nodes);
        let mut dh = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let r = i as f64 / Self::PER_UNIT;
            let hi = ctx.solve(0, r, 1.0)?;
            let (a, b) = (normal::pdf(hi - r), normal::pdf(hi + r));
            h.push(hi);
            dh.push((a - b) / (a + b));
        }
        Ok(Self { ctx, h, dh })
    }

    #[inline]
    fn g(&self, index: usize, offset: f64, tau: f64) -> Result<f64> {
        let r = offset.abs() / tau;
        if !(r < Self::R_MAX) {
            return self.ctx.solve(index, offset, tau);
        }
        let x = r * Self::PER_UNIT;
        let i = (x as usize).min(self.h.len() - 2);
        let t = x - i as f64;
        let step = 1.0 / Self::PER_UNIT;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let h = h00 * self.h[i] + h10 * step * self.dh[i] + h01 * self.h[i + 1] + h11 * step * self.dh[i + 1];
        Ok(h * tau)
    }
}

fn fill_g_values(draws: &PosteriorDraws, center: f64, table: &RootTable, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    for (j, d) in draws.iter().enumerate() {
        out.push(table.g(j, center - d.nu(), d.tau())?);
    }
    Ok(())
}

/// All per-draw roots `g_j` for a fixed center, in draw order.
pub fn g_values(draws: &PosteriorDraws, center: f64, spec: &ToleranceSpec) -> Result<Vec<f64>> {
    let table = RootTable::new(RootContext::new(spec.delta, spec))?;
    let mut out = Vec::with_capacity(draws.len());
    fill_g_values(draws, center, &table, &mut out)?;
    Ok(out)
}

/// `B(A)`: the order statistic of `{g_j}` at rank `⌈(1 − α)J⌉`.
pub fn half_length_for_center(draws: &PosteriorDraws, center: f64, spec: &ToleranceSpec) -> Result<f64> {
    HalfLengthProfile::new(draws, spec)?.eval(center)
}

/// Reusable evaluator of `A ↦ B(A)` that keeps its scratch buffer.
struct HalfLengthProfile<'a> {
    draws: &'a PosteriorDraws,
    table: RootTable,
    alpha: f64,
    scratch: Vec<f64>,
}

impl<'a> HalfLengthProfile<'a> {
    fn new(draws: &'a PosteriorDraws, spec: &ToleranceSpec) -> Result<Self> {
        Ok(Self {
            draws,
            table: RootTable::new(RootContext::new(spec.delta, spec))?,
            alpha: spec.alpha,
            scratch: Vec::with_capacity(draws.len()),
        })
    }

    fn eval(&mut self, center: f64) -> Result<f64> {
        fill_g_values(self.draws, center, &self.table, &mut self.scratch)?;
        Ok(empirical_quantile(&mut self.scratch, 1.0 - self.alpha))
    }
}

/// `B(A)` at each of the given centers.
pub fn half_length_profile(
    draws: &PosteriorDraws,
    spec: &ToleranceSpec,
    centers: &[f64],
) -> Result<Vec<f64>> {
    let mut profile = HalfLengthProfile::new(draws, spec)?;
    centers.iter().map(|&a| profile.eval(a)).collect()
}

fn check_quantile_rank(draws: &PosteriorDraws, alpha: f64) -> Result<()> {
    let j = draws.len() as f64;
    if j * alpha < 1.0 - 1e-9 {
        return Err(Error::config(format!(
            "need at least 1/alpha = {:.1} draws for an interior (1 - alpha)-quantile, got {}",
            1.0 / alpha,
            draws.len()
        )));
    }
    Ok(())
}

/// Fraction of draws `θ_j` with `Q_{θ_j}[L, U] ≥ 1 − δ`.
pub fn empirical_bayes_content(draws: &PosteriorDraws, geom: IntervalGeometry, delta: f64) -> f64 {
    let inside = draws
        .iter()
        .filter(|d| normal::tolerance_set_contains(**d, geom.center(), geom.half_length(), delta))
        .count();
    inside as f64 / draws.len() as f64
}

/// Result of the center search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSearchOutcome {
    pub center: f64,
    pub half_length: f64,
    pub fixed_center: f64,
    pub fixed_half_length: f64,
}

/// Minimizes `B(A)` over a grid centered at the posterior mean, then refines by
/// golden-section search between the grid neighbours of the best point. The
/// result never exceeds `B` at the posterior mean.
pub fn search_center(
    draws: &PosteriorDraws,
    spec: &ToleranceSpec,
    search: &CenterSearchConfig,
) -> Result<CenterSearchOutcome> {
    search.validate()?;
    let mut profile = HalfLengthProfile::new(draws, spec)?;
    let mean = draws.mean_nu();
    let fixed_half_length = profile.eval(mean)?;
    let mut best = (mean, fixed_half_length);

    let sd = draws.sd_nu();
    if sd > 0.0 {
        let mid = (search.grid_points / 2) as isize;
        let step = search.half_width_sds * sd / mid as f64;
        let grid: Vec<f64> = (0..search.grid_points as isize)
            .map(|i| mean + (i - mid) as f64 * step)
            .collect();
        let mut values = Vec::with_capacity(grid.len());
        for (i, &a) in grid.iter().enumerate() {
            let b = if i as isize == mid { fixed_half_length } else { profile.eval(a)? };
            values.push(b);
        }
        let (imin, _) = values
            .iter()
            .enumerate()
            .fold((mid as usize, fixed_half_length), |acc, (i, &b)| {
                if b < acc.1 {
                    (i, b)
                } else {
                    acc
                }
            });
        best = (grid[imin], values[imin]);

        let mut lo = grid[imin.saturating_sub(1)];
        let mut hi = grid[(imin + 1).min(grid.len() - 1)];
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = profile.eval(x1)?;
        let mut f2 = profile.eval(x2)?;
        for _ in 0..search.refine_iters {
            for (x, f) in [(x1, f1), (x2, f2)] {
                if f < best.1 {
                    best = (x, f);
                }
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = profile.eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = profile.eval(x2)?;
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < best.1 {
                best = (x, f);
            }
        }
    }

    Ok(CenterSearchOutcome {
        center: best.0,
        half_length: best.1,
        fixed_center: mean,
        fixed_half_length,
    })
}

/// Two-sided Bayesian `(δ, α)` interval from per-draw half-length roots.
pub fn solve_proposed(
    draws: &PosteriorDraws,
    spec: &ToleranceSpec,
    center_mode: CenterMode,
    search: &CenterSearchConfig,
) -> Result<ToleranceInterval> {
    let spec = spec.validated()?;
    check_quantile_rank(draws, spec.alpha)?;
    let (center, half_length, method) = match center_mode {
        CenterMode::FixedAtPosteriorMean => {
            let a = draws.mean_nu();
            (a, half_length_for_center(draws, a, &spec)?, Method::ProposedFixedCenter)
        }
        CenterMode::Optimal => {
            let out = search_center(draws, &spec, search)?;
            (out.center, out.half_length, Method::ProposedOptimalCenter)
        }
    };
    let geom = IntervalGeometry::new_unchecked(center, half_length);
    Ok(ToleranceInterval {
        limits: Limits::TwoSided(geom),
        method,
        empirical_content: empirical_bayes_content(draws, geom, spec.delta),
        spec,
        draws: draws.len(),
        achieved_fraction: None,
    })
}

/// Both proposed intervals from a single center search.
pub fn solve_proposed_pair(
    draws: &PosteriorDraws,
    spec: &ToleranceSpec,
    search: &CenterSearchConfig,
) -> Result<(ToleranceInterval, ToleranceInterval)> {
    let spec = spec.validated()?;
    check_quantile_rank(draws, spec.alpha)?;
    let out = search_center(draws, &spec, search)?;
    let make = |center: f64, half_length: f64, method| {
        let geom = IntervalGeometry::new_unchecked(center, half_length);
        ToleranceInterval {
            limits: Limits::TwoSided(geom),
            method,
            empirical_content: empirical_bayes_content(draws, geom, spec.delta),
            spec,
            draws: draws.len(),
            achieved_fraction: None,
        }
    };
    Ok((
        make(out.fixed_center, out.fixed_half_length, Method::ProposedFixedCenter),
        make(out.center, out.half_length, Method::ProposedOptimalCenter),
    ))
}

/// The WKM graphical construction, symmetric about the posterior mean.
///
/// Candidates are the projections of the per-draw quantile pairs onto the
/// line `L + U = 2Â`, expressed as half-lengths. KM counts pairs contained in
/// the candidate interval; W counts pairs containing it and uses the infimum
/// half-length attaining each count. Ties go to the shorter interval.
pub fn solve_wkm(draws: &PosteriorDraws, spec: &ToleranceSpec, variant: WkmVariant) -> Result<ToleranceInterval> {
    let spec = spec.validated()?;
    if draws.len() < 2 {
        return Err(Error::config("WKM needs at least two draws"));
    }
    let n = draws.len();
    let center = draws.mean_nu();
    let z_lo = normal::quantile(0.5 * spec.delta);
    let z_hi = -z_lo;

    let (half_length, count) = match variant {
        WkmVariant::KM => {
            // Pair j is inside [Â − h, Â + h] iff h ≥ max(Â − L_j, U_j − Â).
            let mut need: Vec<f64> = draws
                .iter()
                .map(|d| {
                    let l = d.nu() + d.tau() * z_lo;
                    let u = d.nu() + d.tau() * z_hi;
                    (center - l).max(u - center).max(0.0)
                })
                .collect();
            need.sort_by(f64::total_cmp);
            let target = 1.0 - spec.alpha;
            let mut best = (0.0, need.partition_point(|&x| x <= 0.0));
            let mut best_crit = (best.1 as f64 / n as f64 - target).abs();
            let mut i = 0;
            while i < n {
                let h = need[i];
                let count = need.partition_point(|&x| x <= h);
                let crit = (count as f64 / n as f64 - target).abs();
                if crit < best_crit {
                    best = (h, count);
                    best_crit = crit;
                }
                i = count;
            }
            best
        }
        WkmVariant::W => {
            // Pair j contains [Â − h, Â + h] iff h ≤ min(Â − L_j, U_j − Â).
            let mut room: Vec<f64> = draws
                .iter()
                .map(|d| {
                    let l = d.nu() + d.tau() * z_lo;
                    let u = d.nu() + d.tau() * z_hi;
                    (center - l).min(u - center)
                })
                .collect();
            room.sort_by(f64::total_cmp);
            let target = spec.alpha;
            let count_ge = |h: f64| n - room.partition_point(|&x| x < h);
            let count_gt = |h: f64| n - room.partition_point(|&x| x <= h);
            let mut best = (0.0, count_ge(0.0));
            let mut best_crit = (best.1 as f64 / n as f64 - target).abs();
            let mut prev = f64::NAN;
            for &w in room.iter() {
                let h = w.max(0.0);
                if h == prev {
                    continue;
                }
                prev = h;
                for count in [count_ge(h), count_gt(h)] {
                    let crit = (count as f64 / n as f64 - target).abs();
                    if crit < best_crit {
                        best = (h, count);
                        best_crit = crit;
                    }
                }
            }
            best
        }
    };

    let geom = IntervalGeometry::new_unchecked(center, half_length);
    Ok(ToleranceInterval {
        limits: Limits::TwoSided(geom),
        method: match variant {
            WkmVariant::W => Method::WkmW,
            WkmVariant::KM => Method::WkmKm,
        },
        empirical_content: empirical_bayes_content(draws, geom, spec.delta),
        spec,
        draws: n,
        achieved_fraction: Some(count as f64 / n as f64),
    })
}

/// One-sided `(δ, α)` limit: the conservative `(1 − α)`-quantile of the
/// per-draw `(1 − δ)`-quantiles (upper), or its mirror image (lower).
pub fn solve_one_sided(draws: &PosteriorDraws, spec: &ToleranceSpec, side: Side) -> Result<ToleranceInterval> {
    let spec = spec.validated()?;
    check_quantile_rank(draws, spec.alpha)?;
    let z = normal::quantile(spec.delta);
    let n = draws.len();
    let (limits, method, inside) = match side {
        Side::Upper => {
            let per_draw: Vec<f64> = draws.iter().map(|d| d.nu() - d.tau() * z).collect();
            let mut scratch = per_draw.clone();
            let u = empirical_quantile(&mut scratch, 1.0 - spec.alpha);
            let inside = per_draw.iter().filter(|&&x| x <= u).count();
            (Limits::Upper(u), Method::OneSidedUpper, inside)
        }
        Side::Lower => {
            let per_draw: Vec<f64> = draws.iter().map(|d| d.nu() + d.tau() * z).collect();
            let mut negated: Vec<f64> = per_draw.iter().map(|x| -x).collect();
            let l = -empirical_quantile(&mut negated, 1.0 - spec.alpha);
            let inside = per_draw.iter().filter(|&&x| x >= l).count();
            (Limits::Lower(l), Method::OneSidedLower, inside)
        }
    };
    Ok(ToleranceInterval {
        limits,
        method,
        spec,
        draws: n,
        empirical_content: inside as f64 / n as f64,
        achieved_fraction: None,
    })
}

fn mean_content(draws: &PosteriorDraws, center: f64, half_length: f64) -> f64 {
    draws
        .iter()
        .map(|d| normal::content_at_offset(center - d.nu(), half_length, d.tau()))
        .sum::<f64>()
        / draws.len() as f64
}

/// Bayesian α-expectation interval centered at the posterior mean: the
/// smallest `B` with posterior-mean content `1 − α`. `spec.delta` is unused.
pub fn solve_expectation(draws: &PosteriorDraws, spec: &ToleranceSpec) -> Result<ToleranceInterval> {
    let spec = spec.validated()?;
    let center = draws.mean_nu();
    let target = 1.0 - spec.alpha;
    let xi = normal::upper_quantile(0.5 * spec.alpha);
    // Every draw individually reaches content 1 − α at this half-length.
    let mut hi = draws
        .iter()
        .map(|d| (center - d.nu()).abs() + d.tau() * xi)
        .fold(0.0, f64::max);
    while mean_content(draws, center, hi) < target {
        hi = 2.0 * hi + f64::MIN_POSITIVE;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_content(draws, center, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let half_length = 0.5 * (lo + hi);
    let content = mean_content(draws, center, half_length);
    if (content - target).abs() > spec.root_tol {
        return Err(Error::Solver {
            index: 0,
            reason: format!("expectation bisection ended at content {content}, target {target}"),
        });
    }
    Ok(ToleranceInterval {
        limits: Limits::TwoSided(IntervalGeometry::new_unchecked(center, half_length)),
        method: Method::Expectation,
        spec,
        draws: draws.len(),
        empirical_content: content,
        achieved_fraction: None,
    })
}

/// Ingredients of the large-sample half-length expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticApprox {
    pub tau_hat: f64,
    /// Asymptotic variance of `√n (τ̂ − τ)`.
    pub sigma22: f64,
    pub n: u64,
}

impl AsymptoticApprox {
    pub fn new(tau_hat: f64, sigma22: f64, n: u64) -> Result<Self> {
        if !(tau_hat > 0.0 && sigma22 > 0.0 && n > 0) {
            return Err(Error::config(format!(
                "asymptotic approximation needs positive tau_hat, sigma22, n; got {tau_hat}, {sigma22}, {n}"
            )));
        }
        Ok(Self { tau_hat, sigma22, n })
    }

    /// The `n^{-1/2}` correction `ξ_α ξ_{δ/2} √Σ₂₂ / √n`.
    pub fn correction(&self, spec: &ToleranceSpec) -> f64 {
        normal::upper_quantile(spec.alpha)
            * normal::upper_quantile(0.5 * spec.delta)
            * (self.sigma22 / self.n as f64).sqrt()
    }
}

/// `B_n ≈ τ̂ ξ_{δ/2} + ξ_α ξ_{δ/2} √Σ₂₂ n^{-1/2}`.
pub fn asymptotic_half_length(approx: &AsymptoticApprox, spec: &ToleranceSpec) -> f64 {
    approx.tau_hat * normal::upper_quantile(0.5 * spec.delta) + approx.correction(spec)
}
