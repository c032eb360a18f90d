//! Shared oracles for the sampler tests and the acceptance suite.
//!
//! Each full conditional is checked against numerical quadrature of
//! log prior + log likelihood written directly from the raw data, and its
//! sampler against the quadrature moments over 10^5 repeated draws.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tolerant::samplers::conditionals::{self, GroupStats, IidStats};
use tolerant::samplers::{
    exact_conjugate_iid, gibbs_iid_normal, ChainConfig, IidPriorConfig, InvGammaLaw, InvGammaPrior, NormalLaw,
    VarianceMode,
};

/// Collects failed checks instead of panicking on the first.
#[derive(Debug, Default)]
pub struct Checks {
    pub total: usize,
    pub failures: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(msg());
        }
    }

    pub fn assert_ok(&self) {
        assert!(self.failures.is_empty(), "{} of {} checks failed:\n{}", self.failures.len(), self.total, self.failures.join("\n"));
    }
}

const DRAWS: usize = 100_000;

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (x - mean).powi(2) / var - 0.5 * var.ln()
}

fn ln_inv_gamma(x: f64, p: InvGammaPrior) -> f64 {
    -(p.shape + 1.0) * x.ln() - p.rate / x
}

/// Mean and variance of a density known up to a constant, by locating its
/// bulk on a coarse grid and then integrating with the trapezoid rule.
fn quad_moments(logf: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let coarse = 20_000;
    let xs: Vec<f64> = (0..=coarse).map(|i| lo + (hi - lo) * i as f64 / coarse as f64).collect();
    let ls: Vec<f64> = xs.iter().map(|&x| logf(x)).collect();
    let max = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first = ls.iter().position(|&l| l > max - 60.0).unwrap();
    let last = ls.iter().rposition(|&l| l > max - 60.0).unwrap();
    let a = xs[first.saturating_sub(1)];
    let b = xs[(last + 1).min(coarse)];
    let fine = 400_000;
    let h = (b - a) / fine as f64;
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..=fine {
        let x = a + h * i as f64;
        let w = if i == 0 || i == fine { 0.5 } else { 1.0 };
        let f = w * (logf(x) - max).exp();
        z += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Quadrature moments of the *precision* `1/x` when `logf` is a log density in `x`.
/// Integrates over `s = ln p` so the density stays smooth near `p = 0`.
fn quad_precision_moments(logf: impl Fn(f64) -> f64, hi: f64) -> (f64, f64) {
    let lo = -60.0;
    let hi = hi.ln();
    let coarse = 20_000;
    let g = |s: f64| logf((-s).exp()) - s;
    let ls: Vec<f64> = (0..=coarse).map(|i| g(lo + (hi - lo) * i as f64 / coarse as f64)).collect();
    let max = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let fine = 400_000;
    let step = (hi - lo) / fine as f64;
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..=fine {
        let s = lo + step * i as f64;
        let w = if i == 0 || i == fine { 0.5 } else { 1.0 };
        let f = w * (g(s) - max).exp();
        let p = s.exp();
        z += f;
        m1 += f * p;
        m2 += f * p * p;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

pub fn sample_moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m, v, ((m4 - v * v) / n).sqrt())
}

fn check_close(c: &mut Checks, label: &str, closed: (f64, f64), quad: (f64, f64)) {
    let tol = |a: f64| 1e-6 * a.abs().max(1e-3);
    c.check((closed.0 - quad.0).abs() < tol(quad.0), || format!("{label}: mean {} vs quadrature {}", closed.0, quad.0));
    c.check((closed.1 - quad.1).abs() < tol(quad.1), || format!("{label}: var {} vs quadrature {}", closed.1, quad.1));
}

fn check_draws(c: &mut Checks, label: &str, draws: &[f64], target: (f64, f64)) {
    let (m, v, v_se) = sample_moments(draws);
    let m_se = (target.1 / draws.len() as f64).sqrt();
    c.check((m - target.0).abs() < 4.0 * m_se, || format!("{label}: draw mean {m} vs {}", target.0));
    c.check((v - target.1).abs() < 4.0 * v_se, || format!("{label}: draw var {v} vs {}", target.1));
}

fn check_normal(c: &mut Checks, label: &str, law: NormalLaw, logf: impl Fn(f64) -> f64, seed: u64) {
    let sd = law.var.sqrt();
    let quad = quad_moments(logf, law.mean - 40.0 * sd - 10.0, law.mean + 40.0 * sd + 10.0);
    check_close(c, label, (law.mean, law.var), quad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..DRAWS).map(|_| law.sample(&mut rng)).collect();
    check_draws(c, label, &draws, quad);
}

fn check_inv_gamma(c: &mut Checks, label: &str, law: InvGammaLaw, logf: impl Fn(f64) -> f64, seed: u64) {
    let hi = 50.0 * law.precision_mean() + 50.0 * law.precision_var().sqrt();
    let quad = quad_precision_moments(logf, hi);
    check_close(c, label, (law.precision_mean(), law.precision_var()), quad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..DRAWS).map(|_| 1.0 / law.sample(&mut rng)).collect();
    check_draws(c, label, &draws, quad);
}

pub const IID_DATA: [f64; 5] = [2.1, 3.4, 1.7, 2.9, 4.0];

fn iid_ll(nu: f64, tau2: f64) -> f64 {
    IID_DATA.iter().map(|&x| ln_normal(x, nu, tau2)).sum()
}

pub fn iid_conditionals(c: &mut Checks) {
    let stats = IidStats::from_data(&IID_DATA);
    for (k, mode) in [VarianceMode::Proportional, VarianceMode::Independent].into_iter().enumerate() {
        let prior = IidPriorConfig { a: -1.0, b: 0.4, alpha0: 2.0, beta0: 0.5, variance_mode: mode };
        let ig = InvGammaPrior { shape: prior.alpha0, rate: prior.beta0 };
        let nu_prior_var = |tau2: f64| match mode {
            VarianceMode::Proportional => tau2 / prior.b,
            VarianceMode::Independent => 1.0 / prior.b,
        };
        for (j, tau2) in [0.3, 1.7].into_iter().enumerate() {
            let law = conditionals::iid_nu(&stats, &prior, tau2);
            let logf = |nu: f64| ln_normal(nu, prior.a, nu_prior_var(tau2)) + iid_ll(nu, tau2);
            check_normal(c, &format!("nu|tau2 {mode:?}"), law, logf, 10 + (k * 2 + j) as u64);
        }
        for (j, nu) in [2.5, 0.0].into_iter().enumerate() {
            let law = conditionals::iid_tau2(&stats, &prior, nu);
            let logf = |t2: f64| ln_inv_gamma(t2, ig) + ln_normal(nu, prior.a, nu_prior_var(t2)) + iid_ll(nu, t2);
            check_inv_gamma(c, &format!("tau2|nu {mode:?}"), law, logf, 20 + (k * 2 + j) as u64);
        }
    }
}

const GROUPS: [&[f64]; 4] = [&[0.4, -0.3], &[1.9, 1.2, 2.3], &[-0.8], &[0.1, 0.6, -0.2, 0.9]];

fn group_ll(nu: f64, gamma: &[f64], sigma2: f64) -> f64 {
    GROUPS
        .iter()
        .zip(gamma)
        .map(|(xs, g)| xs.iter().map(|&x| ln_normal(x, nu + g, sigma2)).sum::<f64>())
        .sum()
}

pub fn oneway_conditionals(c: &mut Checks) {
    let stats = GroupStats::from_groups(GROUPS.iter().copied());
    let gamma = [0.2, 1.1, -0.9, -0.1];
    let (nu, sigma2, d2) = (0.35, 0.45, 0.8);
    let prior = InvGammaPrior { shape: 1.5, rate: 0.7 };

    let law = conditionals::oneway_nu(&stats, &gamma, sigma2, 3.0);
    check_normal(c, "nu", law, |v| ln_normal(v, 0.0, 3.0) + group_ll(v, &gamma, sigma2), 1);

    let law = conditionals::oneway_sigma2(&stats, nu, &gamma, prior);
    check_inv_gamma(c, "sigma2", law, |s| ln_inv_gamma(s, prior) + group_ll(nu, &gamma, s), 2);

    for i in 0..GROUPS.len() {
        let law = conditionals::oneway_gamma(&stats, i, nu, sigma2, d2);
        let logf = |g: f64| {
            let mut gs = gamma;
            gs[i] = g;
            ln_normal(g, 0.0, d2) + group_ll(nu, &gs, sigma2)
        };
        check_normal(c, &format!("gamma_{i}"), law, logf, 3 + i as u64);
    }

    let law = conditionals::effect_scale(&gamma, prior);
    let logf = |d: f64| ln_inv_gamma(d, prior) + gamma.iter().map(|&g| ln_normal(g, 0.0, d)).sum::<f64>();
    check_inv_gamma(c, "d2", law, logf, 9);
}

pub fn parameter_expansion_conditionals(c: &mut Checks) {
    let stats = GroupStats::from_groups(GROUPS.iter().copied());
    let eta = [0.5, 1.4, -1.2, 0.3];
    let (nu, sigma2, xi, omega2) = (0.35, 0.45, -0.7, 1.3);
    let gamma_of = |xi: f64, eta: &[f64]| eta.iter().map(|e| xi * e).collect::<Vec<_>>();

    for i in 0..GROUPS.len() {
        let law = conditionals::px_eta(&stats, i, nu, sigma2, xi, omega2);
        let logf = |e: f64| {
            let mut es = eta;
            es[i] = e;
            ln_normal(e, 0.0, omega2) + group_ll(nu, &gamma_of(xi, &es), sigma2)
        };
        check_normal(c, &format!("eta_{i}"), law, logf, 30 + i as u64);
    }

    let law = conditionals::px_xi(&stats, &eta, nu, sigma2);
    check_normal(c, "xi", law, |x| ln_normal(x, 0.0, 1.0) + group_ll(nu, &gamma_of(x, &eta), sigma2), 40);

    let prior = InvGammaPrior { shape: 0.8, rate: 0.3 };
    let law = conditionals::effect_scale(&eta, prior);
    let logf = |w: f64| ln_inv_gamma(w, prior) + eta.iter().map(|&e| ln_normal(e, 0.0, w)).sum::<f64>();
    check_inv_gamma(c, "omega2", law, logf, 41);

    let law = conditionals::px_sigma0_2(nu, prior);
    check_inv_gamma(c, "sigma0_2", law, |s| ln_inv_gamma(s, prior) + ln_normal(nu, 0.0, s), 42);
}

/// Batch-means standard error of the chain average.
pub fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let per = xs.len() / batches;
    let means: Vec<f64> = xs.chunks(per).take(batches).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let (_, v, _) = sample_moments(&means);
    (v / batches as f64).sqrt()
}

pub fn gibbs_matches_exact_conjugate(c: &mut Checks) {
    let prior = IidPriorConfig { a: 1.0, b: 0.5, alpha0: 3.0, beta0: 2.0, variance_mode: VarianceMode::Proportional };
    let chain = ChainConfig { iterations: 82_000, burn_in: 2_000, thin: 1, seed: 12 };
    let gibbs = gibbs_iid_normal(&IID_DATA, &prior, &chain).unwrap();
    let exact = exact_conjugate_iid(&IID_DATA, &prior, 80_000, 13).unwrap();
    type Stat = fn(&tolerant::normal::PredictionParam) -> f64;
    let stats: [(&str, Stat); 4] = [
        ("nu", |p| p.nu()),
        ("tau", |p| p.tau()),
        ("nu^2", |p| p.nu() * p.nu()),
        ("tau^2", |p| p.tau() * p.tau()),
    ];
    for (label, f) in stats {
        let g: Vec<f64> = gibbs.iter().map(f).collect();
        let e: Vec<f64> = exact.iter().map(f).collect();
        let (gm, _, _) = sample_moments(&g);
        let (em, ev, _) = sample_moments(&e);
        let se = (batch_se(&g, 40).powi(2) + ev / e.len() as f64).sqrt();
        c.check((gm - em).abs() < 4.0 * se, || format!("{label}: gibbs {gm} vs exact {em}, se {se}"));
    }
}
