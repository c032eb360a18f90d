//! Frequentist coverage of the Bayesian interval on simulated one-way data,
//! and the large-sample half-length diagnostic on i.i.d. normal data.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::normal::{interval_content, IntervalGeometry, PredictionParam};
use crate::rng::{derive_seed, label_hash, stream_rng, DATA_STREAM};
use crate::samplers::{
    exact_conjugate_iid, gibbs_oneway, ChainConfig, IidPriorConfig, LmmPriorConfig, OneWayDataset, PriorSetup,
    VarianceMode,
};
use crate::solver::{
    asymptotic_half_length, solve_proposed, solve_proposed_pair, AsymptoticApprox, CenterMode, CenterSearchConfig,
    ToleranceSpec,
};
use crate::normal;

/// Chain length settings shared by every replicate; seeds are derived per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainLength {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for ChainLength {
    fn default() -> Self {
        let c = ChainConfig::default();
        Self {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
        }
    }
}

impl ChainLength {
    pub fn with_seed(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
        }
    }
}

/// Which variance share `intra_correlation` denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationConvention {
    /// `ρ = σ² / (d² + σ²)`, so `σ² = d² ρ / (1 − ρ)`.
    #[default]
    ErrorShare,
    /// `ρ = d² / (d² + σ²)`, so `σ² = d² (1 − ρ) / ρ`.
    EffectShare,
}

/// One cell of the one-way coverage study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationScenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub nu_true: f64,
    #[serde(default = "default_d2")]
    pub d2_true: f64,
    /// `ρ = σ² / (d² + σ²)` unless `convention` says otherwise.
    pub intra_correlation: f64,
    #[serde(default)]
    pub convention: CorrelationConvention,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_sizes")]
    pub group_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "LmmPriorConfig::vanilla")]
    pub prior: LmmPriorConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub chain: ChainLength,
    #[serde(default)]
    pub center_search: CenterSearchConfig,
}

fn default_d2() -> f64 {
    1.0
}
fn default_m() -> usize {
    6
}
fn default_sizes() -> Vec<usize> {
    vec![2, 3, 4, 2, 3, 4]
}
fn default_replicates() -> usize {
    1000
}
fn default_delta() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.05
}

impl SimulationScenario {
    pub fn new(intra_correlation: f64, setup: PriorSetup) -> Self {
        Self {
            name: String::new(),
            nu_true: 0.0,
            d2_true: default_d2(),
            intra_correlation,
            convention: CorrelationConvention::default(),
            m: default_m(),
            group_sizes: default_sizes(),
            replicates: default_replicates(),
            delta: default_delta(),
            alpha: default_alpha(),
            prior: LmmPriorConfig::new(setup),
            master_seed: 0,
            chain: ChainLength::default(),
            center_search: CenterSearchConfig::default(),
        }
    }

    /// `σ² = d² ρ / (1 − ρ)` (or `d² (1 − ρ) / ρ` under [`CorrelationConvention::EffectShare`]).
    pub fn sigma2_true(&self) -> f64 {
        let rho = self.intra_correlation;
        match self.convention {
            CorrelationConvention::ErrorShare => self.d2_true * rho / (1.0 - rho),
            CorrelationConvention::EffectShare => self.d2_true * (1.0 - rho) / rho,
        }
    }

    pub fn theta_true(&self) -> PredictionParam {
        PredictionParam::new_unchecked(self.nu_true, (self.d2_true + self.sigma2_true()).sqrt())
    }

    pub fn spec(&self) -> Result<ToleranceSpec> {
        ToleranceSpec::new(self.delta, self.alpha)
    }

    /// The name, or a label built from the prior and `ρ`.
    pub fn label(&self) -> String {
        if self.name.is_empty() {
            let suffix = match self.convention {
                CorrelationConvention::ErrorShare => "",
                CorrelationConvention::EffectShare => "_effect_share",
            };
            format!("{}_rho{}{suffix}", self.prior.setup.as_str(), self.intra_correlation)
        } else {
            self.name.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rho = self.intra_correlation;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::config(format!("intra_correlation must be in (0, 1), got {rho}")));
        }
        if !(self.d2_true > 0.0 && self.d2_true.is_finite()) {
            return Err(Error::config(format!("d2_true must be positive, got {}", self.d2_true)));
        }
        if !self.nu_true.is_finite() {
            return Err(Error::config("nu_true must be finite"));
        }
        if self.m < 2 {
            return Err(Error::config(format!("m must be >= 2, got {}", self.m)));
        }
        if self.group_sizes.len() != self.m {
            return Err(Error::config(format!(
                "group_sizes has {} entries but m = {}",
                self.group_sizes.len(),
                self.m
            )));
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::config("every group size must be >= 1"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates must be >= 1"));
        }
        self.spec()?;
        self.prior.validate()?;
        self.chain.with_seed(0).validate()?;
        self.center_search.validate()
    }

    /// Key of the data-generating fields, shared by scenarios that differ only
    /// in prior or solver settings so they see the same datasets.
    fn data_key(&self) -> u64 {
        let mut parts = vec![
            self.master_seed,
            label_hash("one-way data"),
            self.nu_true.to_bits(),
            self.d2_true.to_bits(),
            self.sigma2_true().to_bits(),
        ];
        parts.extend(self.group_sizes.iter().map(|&n| n as u64));
        derive_seed(&parts)
    }

    fn data_seed(&self, replicate: usize) -> u64 {
        derive_seed(&[self.data_key(), replicate as u64])
    }

    fn chain_seed(&self, replicate: usize) -> u64 {
        derive_seed(&[
            self.data_seed(replicate),
            label_hash("chain"),
            label_hash(self.prior.setup.as_str()),
        ])
    }
}

/// Draws `X_ik = ν + γ_i + e_ik` for replicate `replicate_index`.
pub fn simulate_oneway_dataset(scenario: &SimulationScenario, replicate_index: usize) -> Result<OneWayDataset> {
    scenario.validate()?;
    let mut rng = stream_rng(scenario.data_seed(replicate_index), DATA_STREAM);
    let effect = Normal::new(0.0, scenario.d2_true.sqrt()).map_err(|e| Error::config(e.to_string()))?;
    let noise = Normal::new(0.0, scenario.sigma2_true().sqrt()).map_err(|e| Error::config(e.to_string()))?;
    let groups = scenario
        .group_sizes
        .iter()
        .map(|&n| {
            let g = effect.sample(&mut rng);
            (0..n).map(|_| scenario.nu_true + g + noise.sample(&mut rng)).collect()
        })
        .collect();
    OneWayDataset::from_values(groups)
}

/// `Q_θ[L, U]` at the generating parameter.
pub fn true_content(theta_true: PredictionParam, geom: IntervalGeometry) -> f64 {
    interval_content(theta_true, geom)
}

/// One interval of a replicate and its content under the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateInterval {
    pub center: f64,
    pub half_length: f64,
    pub true_content: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub fixed: ReplicateInterval,
    pub optimal: ReplicateInterval,
}

impl ReplicateRecord {
    pub fn length_ratio(&self) -> f64 {
        self.optimal.half_length / self.fixed.half_length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedReplicate {
    pub index: usize,
    pub reason: String,
}

/// Qualification statistics for one center mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    /// Fraction of replicates whose true content is at least `1 − δ`.
    pub qualified_fraction: f64,
    /// `√(p̂(1 − p̂)/K)`.
    pub standard_error: f64,
    pub mean_half_length: f64,
}

/// Distribution of `B_optimal / B_fixed` over replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub strictly_shorter_fraction: f64,
    pub tie_fraction: f64,
}

/// Deterministic run metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    pub draws_per_replicate: usize,
    pub chain: ChainLength,
    pub sigma2_true: f64,
    pub tau_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: SimulationScenario,
    pub completed: usize,
    pub excluded: Vec<ExcludedReplicate>,
    pub fixed: ModeSummary,
    pub optimal: ModeSummary,
    pub length_ratio: RatioSummary,
    pub metadata: StudyMetadata,
    pub records: Vec<ReplicateRecord>,
}

/// Type-7 sample quantile of sorted data.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn run_replicate(scenario: &SimulationScenario, spec: &ToleranceSpec, index: usize) -> Result<ReplicateRecord> {
    let data = simulate_oneway_dataset(scenario, index)?;
    let draws = gibbs_oneway(&data, &scenario.prior, &scenario.chain.with_seed(scenario.chain_seed(index)))?;
    let (fixed, optimal) = solve_proposed_pair(&draws, spec, &scenario.center_search)?;
    let theta = scenario.theta_true();
    let summarize = |g: IntervalGeometry| ReplicateInterval {
        center: g.center(),
        half_length: g.half_length(),
        true_content: true_content(theta, g),
    };
    Ok(ReplicateRecord {
        index,
        fixed: summarize(fixed.geometry().expect("two-sided")),
        optimal: summarize(optimal.geometry().expect("two-sided")),
    })
}

fn mode_summary(records: &[ReplicateRecord], delta: f64, pick: fn(&ReplicateRecord) -> ReplicateInterval) -> ModeSummary {
    let k = records.len() as f64;
    let qualified = records.iter().filter(|r| pick(r).true_content >= 1.0 - delta).count() as f64;
    let p = qualified / k;
    ModeSummary {
        qualified_fraction: p,
        standard_error: (p * (1.0 - p) / k).sqrt(),
        mean_half_length: records.iter().map(|r| pick(r).half_length).sum::<f64>() / k,
    }
}

fn ratio_summary(records: &[ReplicateRecord]) -> RatioSummary {
    let mut ratios: Vec<f64> = records.iter().map(ReplicateRecord::length_ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let k = ratios.len() as f64;
    RatioSummary {
        min: ratios[0],
        q25: sample_quantile(&ratios, 0.25),
        median: sample_quantile(&ratios, 0.5),
        q75: sample_quantile(&ratios, 0.75),
        max: ratios[ratios.len() - 1],
        strictly_shorter_fraction: ratios.iter().filter(|&&r| r < 1.0).count() as f64 / k,
        tie_fraction: ratios.iter().filter(|&&r| r == 1.0).count() as f64 / k,
    }
}

/// Runs every replicate of `scenario` on the current rayon pool.
///
/// Replicates whose sampler or solver fails are excluded and listed in the
/// report as long as they are fewer than 1% of `K`; otherwise the study fails.
pub fn run_coverage_study(scenario: &SimulationScenario) -> Result<CoverageReport> {
    scenario.validate()?;
    let spec = scenario.spec()?;
    let outcomes: Vec<Result<ReplicateRecord>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|i| run_replicate(scenario, &spec, i))
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut excluded = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e @ (Error::Sampler(_) | Error::Solver { .. } | Error::LinAlg { .. })) => {
                excluded.push(ExcludedReplicate { index, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    if excluded.len() as f64 >= 0.01 * scenario.replicates as f64 {
        return Err(Error::Sampler(format!(
            "{}: {} of {} replicates failed (first: replicate {}: {}); at least 1% failures aborts the study",
            scenario.label(),
            excluded.len(),
            scenario.replicates,
            excluded[0].index,
            excluded[0].reason
        )));
    }

    let theta = scenario.theta_true();
    Ok(CoverageReport {
        fixed: mode_summary(&records, spec.delta, |r| r.fixed),
        optimal: mode_summary(&records, spec.delta, |r| r.optimal),
        length_ratio: ratio_summary(&records),
        completed: records.len(),
        excluded,
        metadata: StudyMetadata {
            draws_per_replicate: scenario.chain.with_seed(0).retained(),
            chain: scenario.chain,
            sigma2_true: scenario.sigma2_true(),
            tau_true: theta.tau(),
        },
        records,
        scenario: scenario.clone(),
    })
}

/// [`run_coverage_study`] on a dedicated pool of `workers` threads.
pub fn run_coverage_study_with_workers(scenario: &SimulationScenario, workers: usize) -> Result<CoverageReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| run_coverage_study(scenario))
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Aligned-text tables: length-ratio quartiles, then qualified fractions,
/// one row per intra-correlation and one column block per prior setup, followed
/// by per-scenario details.
pub fn format_tables(reports: &[CoverageReport]) -> String {
    let mut rhos: Vec<f64> = reports.iter().map(|r| r.scenario.intra_correlation).collect();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    let setups = [PriorSetup::Vanilla, PriorSetup::ParameterExpansion];
    let find = |rho: f64, setup: PriorSetup| {
        reports
            .iter()
            .find(|r| r.scenario.intra_correlation == rho && r.scenario.prior.setup == setup)
    };

    let mut out = String::new();
    let _ = writeln!(out, "Half-length at the optimal center relative to the posterior-mean center");
    let _ = writeln!(
        out,
        "{:>6}  {:^35}   {:^35}",
        "", "vanilla", "parameter expansion"
    );
    let quart = format!("{:>8} {:>8} {:>8} {:>8}", "min", "q25", "median", "q75");
    let _ = writeln!(out, "{:>6}  {quart}   {quart}", "rho");
    for &rho in &rhos {
        let mut line = format!("{rho:>6.2}");
        for setup in setups {
            let r = find(rho, setup).map(|r| r.length_ratio);
            let _ = write!(
                line,
                "  {:>8} {:>8} {:>8} {:>8} ",
                cell(r.map(|x| x.min), 4),
                cell(r.map(|x| x.q25), 4),
                cell(r.map(|x| x.median), 4),
                cell(r.map(|x| x.q75), 4)
            );
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "Fraction of intervals with true content at least 1 - delta");
    let _ = writeln!(out, "{:>6}  {:^19}   {:^19}", "", "vanilla", "parameter expansion");
    let modes = format!("{:>9} {:>9}", "A=E(nu|X)", "A=optimal");
    let _ = writeln!(out, "{:>6}  {modes}   {modes}", "rho");
    for &rho in &rhos {
        let mut line = format!("{rho:>6.2}");
        for setup in setups {
            let r = find(rho, setup);
            let _ = write!(
                line,
                "  {:>9} {:>9} ",
                cell(r.map(|x| x.fixed.qualified_fraction), 3),
                cell(r.map(|x| x.optimal.qualified_fraction), 3)
            );
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }

    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<32} {:>6} {:>5} {:>8} {:>8} {:>8} {:>8}",
        "scenario", "K", "excl", "se_fixed", "se_opt", "shorter", "ties"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<32} {:>6} {:>5} {:>8.4} {:>8.4} {:>8.3} {:>8.3}",
            r.scenario.label(),
            r.completed,
            r.excluded.len(),
            r.fixed.standard_error,
            r.optimal.standard_error,
            r.length_ratio.strictly_shorter_fraction,
            r.length_ratio.tie_fraction
        );
    }
    out
}

/// Settings of the large-sample diagnostic on `X_i ~ N(ν, τ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticConfig {
    pub n_values: Vec<u64>,
    pub nu_true: f64,
    pub tau_true: f64,
    pub delta: f64,
    pub alpha: f64,
    pub datasets: usize,
    pub draws: usize,
    pub prior: IidPriorConfig,
    pub master_seed: u64,
    #[serde(default)]
    pub center_search: CenterSearchConfig,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        Self {
            n_values: vec![50, 200, 800],
            nu_true: 0.0,
            tau_true: 1.0,
            delta: 0.1,
            alpha: 0.05,
            datasets: 200,
            draws: 10_000,
            prior: IidPriorConfig {
                a: 0.0,
                b: 0.01,
                alpha0: 0.01,
                beta0: 0.01,
                variance_mode: VarianceMode::Proportional,
            },
            master_seed: 0,
            center_search: CenterSearchConfig::default(),
        }
    }
}

/// Averages over datasets at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub mean_half_length: f64,
    pub mean_formula: f64,
    /// Mean of `|B̂ − (τ̂ ξ_{δ/2} + ξ_α ξ_{δ/2} √(τ̂²/2) / √n)|`.
    pub mean_abs_gap: f64,
    /// Mean of the `n^{-1/2}` correction term.
    pub correction: f64,
    /// Mean of `√n |B̂ − τ̂ ξ_{δ/2}|`.
    pub scaled_excess: f64,
    /// Mean of `|A − x̄|`.
    pub mean_abs_center_offset: f64,
}

fn asymptotic_dataset(config: &AsymptoticConfig, spec: &ToleranceSpec, n: u64, i: usize) -> Result<[f64; 6]> {
    let seed = derive_seed(&[config.master_seed, label_hash("asymptotic"), n, i as u64]);
    let mut rng = stream_rng(seed, DATA_STREAM);
    let law = Normal::new(config.nu_true, config.tau_true).map_err(|e| Error::config(e.to_string()))?;
    let data: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    let mean = data.iter().sum::<f64>() / n as f64;
    let tau_hat = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let draws = exact_conjugate_iid(&data, &config.prior, config.draws, rng.random())?;
    let interval = solve_proposed(&draws, spec, CenterMode::Optimal, &config.center_search)?;
    let geom = interval.geometry().expect("two-sided");
    // For a normal sample the Fisher information gives Σ₂₂ = τ²/2.
    let approx = AsymptoticApprox::new(tau_hat, 0.5 * tau_hat * tau_hat, n)?;
    let formula = asymptotic_half_length(&approx, spec);
    let b = geom.half_length();
    let leading = tau_hat * normal::upper_quantile(0.5 * spec.delta);
    Ok([
        b,
        formula,
        (b - formula).abs(),
        approx.correction(spec),
        (n as f64).sqrt() * (b - leading).abs(),
        (geom.center() - mean).abs(),
    ])
}

/// For each `n`: simulate data, sample the exact conjugate posterior, solve the
/// proposed interval with an optimal center, and compare with the expansion.
pub fn run_asymptotic_diagnostic(config: &AsymptoticConfig) -> Result<Vec<AsymptoticRow>> {
    let spec = ToleranceSpec::new(config.delta, config.alpha)?;
    if config.prior.variance_mode != VarianceMode::Proportional {
        return Err(Error::config("the asymptotic diagnostic samples the conjugate posterior; use the proportional mode"));
    }
    if config.datasets == 0 || config.n_values.iter().any(|&n| n < 2) {
        return Err(Error::config("need at least one dataset and n >= 2"));
    }
    config
        .n_values
        .iter()
        .map(|&n| {
            let rows = (0..config.datasets)
                .into_par_iter()
                .map(|i| asymptotic_dataset(config, &spec, n, i))
                .collect::<Result<Vec<_>>>()?;
            let k = rows.len() as f64;
            let avg = |c: usize| rows.iter().map(|r| r[c]).sum::<f64>() / k;
            Ok(AsymptoticRow {
                n,
                mean_half_length: avg(0),
                mean_formula: avg(1),
                mean_abs_gap: avg(2),
                correction: avg(3),
                scaled_excess: avg(4),
                mean_abs_center_offset: avg(5),
            })
        })
        .collect()
}
