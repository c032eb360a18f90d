//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input (including
//! unsupported flag combinations), 3 when sampling or solving fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, fmt_f64, IntervalReport};
use crate::samplers::{
    exact_conjugate_iid, gibbs_iid_normal, gibbs_oneway, ChainConfig, IidPriorConfig, LmmPriorConfig, VarianceMode,
};
use crate::simulation::{self, CoverageReport, SimulationScenario};
use crate::solver::{
    half_length_profile, solve_expectation, solve_one_sided, solve_proposed, solve_wkm, CenterMode,
    CenterSearchConfig, PosteriorDraws, Side, ToleranceInterval, ToleranceSpec, WkmVariant,
};

#[derive(Debug, Parser)]
#[command(name = "tolerant", version, about = "Bayesian tolerance intervals from posterior draws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an interval from a draws file.
    Solve(SolveArgs),
    /// Sample a posterior from a dataset, then solve.
    FitSolve(FitSolveArgs),
    /// Solve every method on one draws file and print one summary line each.
    Compare(CompareArgs),
    /// Tabulate the half-length B(A) over a grid of centers.
    Profile(ProfileArgs),
    /// Run coverage studies described by a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Proposed,
    WkmW,
    WkmKm,
    Expectation,
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    Mean,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Iid,
    Oneway,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Vanilla,
    Px,
    Conjugate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarianceModeArg {
    Proportional,
    Independent,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Content tolerance of each per-draw root.
    #[arg(long, default_value_t = ToleranceSpec::DEFAULT_ROOT_TOL)]
    pub root_tol: f64,
}

impl SpecArgs {
    fn spec(&self) -> Result<ToleranceSpec> {
        ToleranceSpec::new(self.delta, self.alpha)?.with_root_tol(self.root_tol)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveOpts {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Proposed)]
    pub method: MethodArg,
    /// Center of the proposed interval (defaults to `mean`).
    #[arg(long, value_enum)]
    pub center: Option<CenterArg>,
    /// Write the key=value report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub draws: PathBuf,
    #[command(flatten)]
    pub opts: SolveOpts,
}

#[derive(Debug, Clone, Args)]
pub struct FitSolveArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = PriorArg::Vanilla)]
    pub prior: PriorArg,
    #[arg(long, default_value_t = ChainConfig::default().iterations)]
    pub iters: usize,
    #[arg(long, default_value_t = ChainConfig::default().burn_in)]
    pub burnin: usize,
    #[arg(long, default_value_t = ChainConfig::default().thin)]
    pub thin: usize,
    #[arg(long, env = "TOLERANT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// i.i.d. model: prior mean of nu.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// i.i.d. model: prior precision scale of nu.
    #[arg(long, default_value_t = 0.1)]
    pub b: f64,
    /// i.i.d. model: inverse-gamma shape of tau^2.
    #[arg(long, default_value_t = 0.01)]
    pub alpha0: f64,
    /// i.i.d. model: inverse-gamma rate of tau^2.
    #[arg(long, default_value_t = 0.01)]
    pub beta0: f64,
    /// i.i.d. model with the vanilla prior: how the prior variance of nu relates to tau^2.
    #[arg(long, value_enum, default_value_t = VarianceModeArg::Independent)]
    pub variance_mode: VarianceModeArg,
    /// Also write the posterior draws.
    #[arg(long)]
    pub save_draws: Option<PathBuf>,
    #[command(flatten)]
    pub opts: SolveOpts,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub draws: PathBuf,
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub draws: PathBuf,
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Lowest center (defaults to the posterior mean minus 3 SD).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_lo: Option<f64>,
    /// Highest center (defaults to the posterior mean plus 3 SD).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_hi: Option<f64>,
    #[arg(long, default_value_t = 121)]
    pub grid_n: usize,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override the replicate count of every scenario.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON report path; the text tables go next to it with a `.txt` extension.
    #[arg(long)]
    pub out: PathBuf,
}

/// Top-level document of a simulation config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenarios: Vec<SimulationScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub reports: Vec<CoverageReport>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
        Error::Domain(_) | Error::Solver { .. } | Error::Sampler(_) | Error::LinAlg { .. } => 3,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::FitSolve(a) => cmd_fit_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn solve_with(draws: &PosteriorDraws, spec: &ToleranceSpec, method: MethodArg, center: Option<CenterArg>) -> Result<ToleranceInterval> {
    if center.is_some() && method != MethodArg::Proposed {
        return Err(Error::config("--center only applies to --method proposed"));
    }
    let search = CenterSearchConfig::default();
    match method {
        MethodArg::Proposed => {
            let mode = match center.unwrap_or(CenterArg::Mean) {
                CenterArg::Mean => CenterMode::FixedAtPosteriorMean,
                CenterArg::Optimal => CenterMode::Optimal,
            };
            solve_proposed(draws, spec, mode, &search)
        }
        MethodArg::WkmW => solve_wkm(draws, spec, WkmVariant::W),
        MethodArg::WkmKm => solve_wkm(draws, spec, WkmVariant::KM),
        MethodArg::Expectation => solve_expectation(draws, spec),
        MethodArg::Upper => solve_one_sided(draws, spec, Side::Upper),
        MethodArg::Lower => solve_one_sided(draws, spec, Side::Lower),
    }
}

fn emit(report: &IntervalReport, out: Option<&Path>) -> Result<()> {
    println!("{}", report.summary_line());
    if let Some(path) = out {
        fs::write(path, report.to_text())?;
    }
    Ok(())
}

fn method_echo(opts: &SolveOpts) -> String {
    opts.method.to_possible_value().expect("named").get_name().to_string()
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let draws = io::read_draws(&args.draws)?;
    let spec = args.opts.spec.spec()?;
    let interval = solve_with(&draws, &spec, args.opts.method, args.opts.center)?;
    let mut report = IntervalReport::new(interval, &draws)
        .with("draws_file", args.draws.display())
        .with("cli_method", method_echo(&args.opts));
    if let Some(c) = args.opts.center {
        report = report.with("center", c.to_possible_value().expect("named").get_name());
    }
    emit(&report, args.opts.out.as_deref())
}

fn cmd_fit_solve(args: &FitSolveArgs) -> Result<()> {
    let chain = ChainConfig {
        iterations: args.iters,
        burn_in: args.burnin,
        thin: args.thin,
        seed: args.seed,
    };
    chain.validate()?;
    let dataset = io::read_dataset(&args.data)?;
    let variance_mode = match args.variance_mode {
        VarianceModeArg::Proportional => VarianceMode::Proportional,
        VarianceModeArg::Independent => VarianceMode::Independent,
    };
    let iid_prior = |mode| IidPriorConfig {
        a: args.a,
        b: args.b,
        alpha0: args.alpha0,
        beta0: args.beta0,
        variance_mode: mode,
    };
    let draws = match (args.model, args.prior) {
        (ModelArg::Iid, PriorArg::Vanilla) => gibbs_iid_normal(&dataset.values(), &iid_prior(variance_mode), &chain)?,
        (ModelArg::Iid, PriorArg::Conjugate) => exact_conjugate_iid(
            &dataset.values(),
            &iid_prior(VarianceMode::Proportional),
            chain.retained(),
            chain.seed,
        )?,
        (ModelArg::Oneway, PriorArg::Vanilla) => gibbs_oneway(&dataset.into_oneway()?, &LmmPriorConfig::vanilla(), &chain)?,
        (ModelArg::Oneway, PriorArg::Px) => {
            gibbs_oneway(&dataset.into_oneway()?, &LmmPriorConfig::parameter_expansion(), &chain)?
        }
        (ModelArg::Iid, PriorArg::Px) | (ModelArg::Oneway, PriorArg::Conjugate) => {
            return Err(Error::config(format!(
                "unsupported combination --model {} --prior {}",
                args.model.to_possible_value().expect("named").get_name(),
                args.prior.to_possible_value().expect("named").get_name()
            )))
        }
    };
    if let Some(path) = &args.save_draws {
        io::write_draws(path, &draws)?;
    }
    let spec = args.opts.spec.spec()?;
    let interval = solve_with(&draws, &spec, args.opts.method, args.opts.center)?;
    let mut report = IntervalReport::new(interval, &draws)
        .with("data_file", args.data.display())
        .with("model", args.model.to_possible_value().expect("named").get_name())
        .with("prior", args.prior.to_possible_value().expect("named").get_name())
        .with("iters", args.iters)
        .with("burnin", args.burnin)
        .with("thin", args.thin)
        .with("seed", args.seed)
        .with("cli_method", method_echo(&args.opts));
    if args.model == ModelArg::Iid {
        report = report
            .with("a", fmt_f64(args.a))
            .with("b", fmt_f64(args.b))
            .with("alpha0", fmt_f64(args.alpha0))
            .with("beta0", fmt_f64(args.beta0));
        if args.prior == PriorArg::Vanilla {
            report = report.with("variance_mode", args.variance_mode.to_possible_value().expect("named").get_name());
        }
    }
    emit(&report, args.opts.out.as_deref())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let draws = io::read_draws(&args.draws)?;
    let spec = args.spec.spec()?;
    let runs = [
        (MethodArg::Proposed, Some(CenterArg::Mean)),
        (MethodArg::Proposed, Some(CenterArg::Optimal)),
        (MethodArg::WkmW, None),
        (MethodArg::WkmKm, None),
        (MethodArg::Expectation, None),
        (MethodArg::Upper, None),
        (MethodArg::Lower, None),
    ];
    for (method, center) in runs {
        let interval = solve_with(&draws, &spec, method, center)?;
        println!("{}", IntervalReport::new(interval, &draws).summary_line());
    }
    Ok(())
}

/// Plot-ready `A,B,nearest_mean` rows; `nearest_mean` is 1 on the grid row
/// closest to the posterior mean of `ν`.
pub fn format_profile(draws: &PosteriorDraws, spec: &ToleranceSpec, centers: &[f64]) -> Result<String> {
    let b = half_length_profile(draws, spec, centers)?;
    let mean = draws.mean_nu();
    let nearest = centers
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - mean).abs().total_cmp(&(y.1 - mean).abs()))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let mut out = format!("# posterior_mean_nu={}\nA,B,nearest_mean\n", fmt_f64(mean));
    for (i, (a, b)) in centers.iter().zip(&b).enumerate() {
        out.push_str(&format!("{},{},{}\n", fmt_f64(*a), fmt_f64(*b), u8::from(i == nearest)));
    }
    Ok(out)
}

fn cmd_profile(args: &ProfileArgs) -> Result<()> {
    let draws = io::read_draws(&args.draws)?;
    let spec = args.spec.spec()?;
    if args.grid_n < 3 {
        return Err(Error::config(format!("--grid-n must be >= 3, got {}", args.grid_n)));
    }
    let (mean, sd) = (draws.mean_nu(), draws.sd_nu().max(f64::MIN_POSITIVE));
    let lo = args.grid_lo.unwrap_or(mean - 3.0 * sd);
    let hi = args.grid_hi.unwrap_or(mean + 3.0 * sd);
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::config(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (args.grid_n - 1) as f64;
    let centers: Vec<f64> = (0..args.grid_n).map(|i| lo + step * i as f64).collect();
    let text = format_profile(&draws, &spec, &centers)?;
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn read_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path)?;
    let config: SimulationConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if config.scenarios.is_empty() {
        return Err(Error::config("config lists no scenarios"));
    }
    for s in &config.scenarios {
        s.validate()
            .map_err(|e| Error::config(format!("scenario `{}`: {e}", s.label())))?;
    }
    Ok(config)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = read_simulation_config(&args.config)?;
    if let Some(k) = args.replicates {
        for s in &mut config.scenarios {
            s.replicates = k;
        }
    }
    let mut reports = Vec::with_capacity(config.scenarios.len());
    for s in &config.scenarios {
        let report = match args.workers {
            Some(w) => simulation::run_coverage_study_with_workers(s, w)?,
            None => simulation::run_coverage_study(s)?,
        };
        eprintln!(
            "{}: qualified {:.3} (A=E(nu|X)), {:.3} (A=optimal) over {} replicates",
            s.label(),
            report.fixed.qualified_fraction,
            report.optimal.qualified_fraction,
            report.completed
        );
        reports.push(report);
    }
    let tables = simulation::format_tables(&reports);
    let output = SimulationOutput { reports };
    fs::write(&args.out, serde_json::to_string_pretty(&output)? + "\n")?;
    fs::write(args.out.with_extension("txt"), &tables)?;
    print!("{tables}");
    Ok(())
}
