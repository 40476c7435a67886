//! Command-line driver: simulate / fit / peel / sweep / summarize.
//!
//! Exit codes are stable: 0 success, 1 usage error, 2 data error,
//! 3 sampler abort (discard rule or mis-scaled proposals), 4 peel early
//! stop. Every output file embeds the fully resolved configuration and
//! seed, so any result can be re-derived from its own header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use telefit::{
    load_dataset, load_report, peel_sequence, phase3, save_report, sensitivity_sweep,
    simulate_dataset, summarize, write_dataset, write_histogram, CorrelatorDataset, EnergyPrior,
    Error as CoreError, ExpSumParams, FitReport, McmcConfig, PeelOptions, PointEstimate,
    PriorSpec, ProposalScales, ScheduleRule, TelescopeSchedule,
};

#[derive(Parser)]
#[command(name = "telefit", version, about = "Bayesian multi-exponential decay estimation")]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic decay dataset.
    Simulate(SimulateArgs),
    /// Fit the two-row telescoped model to a dataset.
    Fit(FitArgs),
    /// Extract successive modes by residual subtraction.
    Peel(PeelArgs),
    /// Run a prior-sensitivity sweep over a hyperparameter grid.
    Sweep(SweepArgs),
    /// Re-summarize the particles of a saved report.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated amplitudes, e.g. 0.8,0.6,0.4,0.2,0.1
    #[arg(long, short = 'A', value_name = "LIST")]
    amplitudes: String,
    /// Base decay rate E1.
    #[arg(long)]
    e1: f64,
    /// Spacing between successive decay rates.
    #[arg(long)]
    c: f64,
    /// Largest time index (series runs t = 1..tmax).
    #[arg(long, default_value_t = 12)]
    tmax: u32,
    /// Noise coefficient in sigma_t = coeff * G(t) * t.
    #[arg(long, default_value_t = 1e-3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path.
    #[arg(long, short)]
    out: PathBuf,
    /// Also print the noise-free signal column next to the draws.
    #[arg(long)]
    emit_truth: bool,
}

#[derive(Args, Clone)]
struct PriorFlags {
    /// Beta shape alpha for the amplitude priors.
    #[arg(long)]
    alpha: Option<f64>,
    /// Beta shape beta for the amplitude priors.
    #[arg(long)]
    beta: Option<f64>,
    /// Energy prior family.
    #[arg(long, value_parser = ["gamma", "pareto"])]
    energy_prior: Option<String>,
    /// Gamma scale (eta).
    #[arg(long)]
    eta: Option<f64>,
    /// Gamma shape (lambda).
    #[arg(long)]
    lambda: Option<f64>,
    /// Pareto lower bound.
    #[arg(long)]
    pareto_x_min: Option<f64>,
    /// Pareto tail index.
    #[arg(long)]
    pareto_shape: Option<f64>,
    /// Width control of the conditional uniform spacing prior.
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Args, Clone)]
struct McmcFlags {
    /// Declarative config file (JSON); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Posterior sample size (outer repetitions).
    #[arg(long)]
    m: Option<usize>,
    /// Phase-I chain length.
    #[arg(long)]
    iters1: Option<usize>,
    /// Phase-II chain length.
    #[arg(long)]
    iters2: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Spacing floor and Phase-II starting value.
    #[arg(long)]
    c0: Option<f64>,
    /// Phase-I starting energy for standalone runs.
    #[arg(long)]
    e1_0: Option<f64>,
    /// Max tolerated fraction of discarded spacing proposals.
    #[arg(long)]
    discard_limit: Option<f64>,
    /// Fold the observations between t2 and t1 into Phase I.
    #[arg(long)]
    cycle_intermediate: bool,
    #[arg(long)]
    scale_a1: Option<f64>,
    #[arg(long)]
    scale_e1: Option<f64>,
    #[arg(long)]
    scale_a2: Option<f64>,
    #[arg(long)]
    scale_c: Option<f64>,
}

#[derive(Args, Clone)]
struct ScheduleFlags {
    /// Explicit truncation times, largest first, e.g. 13,7.
    #[arg(long, value_name = "LIST")]
    times: Option<String>,
    /// Selection rule when --times is absent (default: ratio).
    #[arg(long, value_parser = ["ratio", "tolerance"])]
    rule: Option<String>,
    /// Annihilation threshold for the tolerance rule.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Pair correlation between the telescoped observations.
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Report output path.
    #[arg(long, short, default_value = "fit.report")]
    out: PathBuf,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[command(flatten)]
    priors: PriorFlags,
    #[command(flatten)]
    mcmc: McmcFlags,
}

#[derive(Args)]
struct PeelArgs {
    #[arg(long)]
    data: PathBuf,
    /// Number of subtraction levels (fits depth+1 times).
    #[arg(long)]
    depth: usize,
    /// Output prefix; writes <prefix>.level<k>.report and <prefix>.manifest.
    #[arg(long, short, default_value = "peel")]
    out: PathBuf,
    /// Sigma inflation applied at each subtraction.
    #[arg(long, default_value_t = 2.0)]
    inflation: f64,
    /// Point estimate used for the subtraction.
    #[arg(long, default_value = "mode", value_parser = ["mode", "mean"])]
    estimate: String,
    /// A time is usable while |y| exceeds this multiple of sigma.
    #[arg(long, default_value_t = 3.0)]
    noise_floor: f64,
    #[command(flatten)]
    priors: PriorFlags,
    #[command(flatten)]
    mcmc: McmcFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// Table output path.
    #[arg(long, short, default_value = "sweep.table")]
    out: PathBuf,
    /// Grid axis, e.g. --grid eta=1,5,10 (axes combine as a cross product).
    #[arg(long, value_name = "KEY=V1,V2,..")]
    grid: Vec<String>,
    /// Explicit cell, e.g. --cell alpha=2,beta=2 (appended to the grid).
    #[arg(long, value_name = "KEY=V,..")]
    cell: Vec<String>,
    /// Directory for per-cell histogram files.
    #[arg(long)]
    hist_dir: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleFlags,
    #[command(flatten)]
    priors: PriorFlags,
    #[command(flatten)]
    mcmc: McmcFlags,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Report file to re-summarize.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, default_value_t = 0.95)]
    ci: f64,
    /// Directory for per-parameter histogram files.
    #[arg(long)]
    hist_dir: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Error and exit-code plumbing

enum ExitKind {
    Usage,
    Data,
    Sampler,
    EarlyStop,
}

struct CliError {
    kind: ExitKind,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Usage, message: message.into() }
    }

    fn code(&self) -> u8 {
        match self.kind {
            ExitKind::Usage => 1,
            ExitKind::Data => 2,
            ExitKind::Sampler => 3,
            ExitKind::EarlyStop => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let kind = match err {
            CoreError::AcceptanceTooLow { .. }
            | CoreError::DiscardLimit { .. }
            | CoreError::TooManyFailures { .. } => ExitKind::Sampler,
            _ => ExitKind::Data,
        };
        Self { kind, message: err.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Peel(args) => cmd_peel(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Summarize(args) => cmd_summarize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code())
        }
    }
}

// ---------------------------------------------------------------------------
// Declarative config file

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    priors: Option<FilePriors>,
    mcmc: Option<FileMcmc>,
    schedule: Option<FileSchedule>,
    rho12: Option<f64>,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct FilePriors {
    alpha: Option<f64>,
    beta: Option<f64>,
    family: Option<String>,
    eta: Option<f64>,
    lambda: Option<f64>,
    pareto_x_min: Option<f64>,
    pareto_shape: Option<f64>,
    omega: Option<f64>,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct FileMcmc {
    seed: Option<u64>,
    m: Option<usize>,
    iters_phase1: Option<usize>,
    iters_phase2: Option<usize>,
    burn_in: Option<usize>,
    c0: Option<f64>,
    e1_0: Option<f64>,
    discard_limit: Option<f64>,
    cycle_intermediate: Option<bool>,
    scale_a1: Option<f64>,
    scale_e1: Option<f64>,
    scale_a2: Option<f64>,
    scale_c: Option<f64>,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct FileSchedule {
    times: Option<Vec<u32>>,
    rule: Option<String>,
    tol: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        kind: ExitKind::Data,
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError {
        kind: ExitKind::Data,
        message: format!("{}: {e}", path.display()),
    })
}

/// Flags beat file values beat defaults.
fn resolve_priors(flags: &PriorFlags, file: &FileConfig) -> Result<PriorSpec, CliError> {
    let fp = file.priors.clone().unwrap_or_default();
    let defaults = PriorSpec::default();
    let family = flags.energy_prior.clone().or(fp.family).unwrap_or_else(|| "gamma".to_string());
    let energy = match family.as_str() {
        "gamma" => EnergyPrior::Gamma {
            scale: flags.eta.or(fp.eta).unwrap_or(1.0),
            shape: flags.lambda.or(fp.lambda).unwrap_or(1.0),
        },
        "pareto" => {
            let EnergyPrior::Pareto { x_min, shape } = EnergyPrior::default_pareto() else {
                unreachable!()
            };
            EnergyPrior::Pareto {
                x_min: flags.pareto_x_min.or(fp.pareto_x_min).unwrap_or(x_min),
                shape: flags.pareto_shape.or(fp.pareto_shape).unwrap_or(shape),
            }
        }
        other => return Err(CliError::usage(format!("unknown energy prior family `{other}`"))),
    };
    let spec = PriorSpec {
        alpha: flags.alpha.or(fp.alpha).unwrap_or(defaults.alpha),
        beta: flags.beta.or(fp.beta).unwrap_or(defaults.beta),
        energy,
        omega: flags.omega.or(fp.omega).unwrap_or(defaults.omega),
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(spec)
}

fn resolve_mcmc(
    flags: &McmcFlags,
    file: &FileConfig,
    priors: &PriorSpec,
) -> Result<McmcConfig, CliError> {
    let fm = file.mcmc.clone().unwrap_or_default();
    let seed = flags.seed.or(fm.seed).unwrap_or(0);
    let mut cfg = McmcConfig::new(seed);
    cfg.proposal_scales = ProposalScales::from_prior(priors);
    cfg.m = flags.m.or(fm.m).unwrap_or(cfg.m);
    cfg.iters_phase1 = flags.iters1.or(fm.iters_phase1).unwrap_or(cfg.iters_phase1);
    cfg.iters_phase2 = flags.iters2.or(fm.iters_phase2).unwrap_or(cfg.iters_phase2);
    cfg.burn_in = flags.burn_in.or(fm.burn_in).unwrap_or(cfg.burn_in);
    cfg.c0 = flags.c0.or(fm.c0).unwrap_or(cfg.c0);
    cfg.e1_0 = flags.e1_0.or(fm.e1_0).unwrap_or(cfg.e1_0);
    cfg.discard_limit = flags.discard_limit.or(fm.discard_limit).unwrap_or(cfg.discard_limit);
    cfg.cycle_intermediate = flags.cycle_intermediate || fm.cycle_intermediate.unwrap_or(false);
    if let Some(s) = flags.scale_a1.or(fm.scale_a1) {
        cfg.proposal_scales.a1 = s;
    }
    if let Some(s) = flags.scale_e1.or(fm.scale_e1) {
        cfg.proposal_scales.e1 = s;
    }
    if let Some(s) = flags.scale_a2.or(fm.scale_a2) {
        cfg.proposal_scales.a2 = s;
    }
    if let Some(s) = flags.scale_c.or(fm.scale_c) {
        cfg.proposal_scales.c = s;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

fn parse_number_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("bad number `{s}`"))))
        .collect()
}

fn resolve_schedule(
    flags: &ScheduleFlags,
    file: &FileConfig,
    dataset: &CorrelatorDataset,
    c0: f64,
) -> Result<TelescopeSchedule, CliError> {
    let fs = file.schedule.clone().unwrap_or_default();
    let explicit: Option<Vec<u32>> = match &flags.times {
        Some(text) => Some(
            text.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .map_err(|_| CliError::usage(format!("bad time `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        ),
        None => fs.times,
    };
    let rule_name = flags.rule.clone().or(fs.rule).unwrap_or_else(|| "ratio".to_string());
    let rule = match rule_name.as_str() {
        "ratio" => ScheduleRule::Ratio,
        "tolerance" => ScheduleRule::Tolerance {
            provisional_spacing: c0,
            tolerance: fs.tol.unwrap_or(flags.tol),
        },
        other => return Err(CliError::usage(format!("unknown schedule rule `{other}`"))),
    };
    let schedule = match explicit {
        Some(times) => TelescopeSchedule::from_times(times, &dataset.times(), rule)?,
        None => TelescopeSchedule::select(&dataset.times(), 2, rule)?,
    };
    Ok(schedule)
}

fn apply_rho(
    dataset: CorrelatorDataset,
    flags: &ScheduleFlags,
    file: &FileConfig,
) -> Result<CorrelatorDataset, CliError> {
    match flags.rho.or(file.rho12) {
        Some(rho) => dataset.with_rho12(rho).map_err(|e| CliError::usage(e.to_string())),
        None => Ok(dataset),
    }
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let amplitudes = parse_number_list(&args.amplitudes)?;
    let params =
        ExpSumParams::new(amplitudes, args.e1, args.c).map_err(|e| CliError::usage(e.to_string()))?;
    if args.tmax < 1 {
        return Err(CliError::usage("--tmax must be at least 1"));
    }
    if args.noise.is_nan() || args.noise <= 0.0 {
        return Err(CliError::usage("--noise must be positive"));
    }
    let ds = simulate_dataset(&params, args.tmax, args.noise, args.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    write_dataset(&ds, &args.out)?;
    if args.emit_truth {
        println!("t signal y");
        for p in ds.points() {
            println!("{} {} {}", p.t, params.eval(p.t), p.y);
        }
    }
    println!("wrote {} points to {}", ds.points().len(), args.out.display());
    Ok(())
}

fn print_summary_table(report: &FitReport) {
    println!("param     mode        mean        95% CI");
    for (name, s) in [
        ("A1", &report.summaries.a1),
        ("E1", &report.summaries.e1),
        ("A2", &report.summaries.a2),
        ("c", &report.summaries.c),
    ] {
        println!("{name:<8}{:<12.5}{:<12.5}[{:.5}, {:.5}]", s.mode, s.mean, s.ci_low, s.ci_high);
    }
    println!(
        "discards: {} spacing proposals ({:.3}%); failed repetitions: {}",
        report.discard_count,
        100.0 * report.discard_fraction,
        report.failed_repetitions
    );
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let file = load_config(args.mcmc.config.as_deref())?;
    let priors = resolve_priors(&args.priors, &file)?;
    let cfg = resolve_mcmc(&args.mcmc, &file, &priors)?;
    let dataset = apply_rho(load_dataset(&args.data)?, &args.schedule, &file)?;
    let schedule = resolve_schedule(&args.schedule, &file, &dataset, cfg.c0)?;
    if schedule.len() != 2 {
        return Err(CliError::usage("fitting needs exactly two truncation times"));
    }
    let report = phase3(&dataset, &schedule, &priors, &cfg)?;
    println!(
        "fit: {} times={:?} m={} seed={}",
        args.data.display(),
        schedule.times(),
        cfg.m,
        cfg.seed
    );
    print_summary_table(&report);
    save_report(&report, &args.out)?;
    println!("report: {}", args.out.display());
    Ok(())
}

fn cmd_peel(args: PeelArgs) -> Result<(), CliError> {
    let file = load_config(args.mcmc.config.as_deref())?;
    let priors = resolve_priors(&args.priors, &file)?;
    let cfg = resolve_mcmc(&args.mcmc, &file, &priors)?;
    if args.depth < 1 {
        return Err(CliError::usage("--depth must be at least 1"));
    }
    let opts = PeelOptions {
        inflation: args.inflation,
        estimate: if args.estimate == "mean" { PointEstimate::Mean } else { PointEstimate::Mode },
        noise_floor: args.noise_floor,
    };
    if opts.inflation < 1.0 {
        return Err(CliError::usage("--inflation must be at least 1"));
    }
    if opts.noise_floor.is_nan() || opts.noise_floor <= 0.0 {
        return Err(CliError::usage("--noise-floor must be positive"));
    }
    let dataset = load_dataset(&args.data)?;
    let chain = peel_sequence(&dataset, args.depth, &priors, &cfg, &opts)?;

    let prefix = args.out.display();
    let mut manifest = String::new();
    let _ = writeln!(manifest, "telefit-peel-manifest v1");
    let _ = writeln!(
        manifest,
        "# data = {}; depth = {}; inflation = {}; estimate = {}; noise_floor = {}; seed = {}",
        args.data.display(),
        args.depth,
        opts.inflation,
        args.estimate,
        opts.noise_floor,
        cfg.seed
    );
    let _ = writeln!(manifest, "# level amplitude energy report");
    for outcome in &chain.outcomes {
        let path = PathBuf::from(format!("{prefix}.level{}.report", outcome.level));
        save_report(&outcome.report, &path)?;
        let _ = writeln!(
            manifest,
            "{} {} {} {}",
            outcome.level,
            outcome.amplitude,
            outcome.energy,
            path.display()
        );
        println!(
            "level {}: amplitude {:.5} energy {:.5} (times {:?})",
            outcome.level,
            outcome.amplitude,
            outcome.energy,
            outcome.report.schedule.times()
        );
    }
    if let Some(stop) = &chain.stopped {
        let _ = writeln!(manifest, "stopped = {}", stop.message);
    }
    let manifest_path = PathBuf::from(format!("{prefix}.manifest"));
    std::fs::write(&manifest_path, manifest).map_err(CoreError::from)?;
    println!("manifest: {}", manifest_path.display());
    if let Some(stop) = chain.stopped {
        return Err(CliError { kind: ExitKind::EarlyStop, message: stop.message });
    }
    Ok(())
}

/// One `key=v1,v2,..` axis of the sweep grid.
fn parse_grid_axis(text: &str) -> Result<(String, Vec<String>), CliError> {
    let (key, values) = text
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("grid axis `{text}` is not KEY=V1,V2,..")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if values.is_empty() || values.iter().any(|v| v.is_empty()) {
        return Err(CliError::usage(format!("grid axis `{text}` has empty values")));
    }
    Ok((key.trim().to_string(), values))
}

fn apply_prior_key(spec: &mut PriorSpec, key: &str, value: &str) -> Result<(), CliError> {
    let parse = |v: &str| {
        v.parse::<f64>().map_err(|_| CliError::usage(format!("bad value `{v}` for {key}")))
    };
    match key {
        "alpha" => spec.alpha = parse(value)?,
        "beta" => spec.beta = parse(value)?,
        "omega" => spec.omega = parse(value)?,
        "eta" => {
            let shape = match spec.energy {
                EnergyPrior::Gamma { shape, .. } => shape,
                _ => 1.0,
            };
            spec.energy = EnergyPrior::Gamma { scale: parse(value)?, shape };
        }
        "lambda" => {
            let scale = match spec.energy {
                EnergyPrior::Gamma { scale, .. } => scale,
                _ => 1.0,
            };
            spec.energy = EnergyPrior::Gamma { scale, shape: parse(value)? };
        }
        "pareto-x-min" => {
            let shape = match spec.energy {
                EnergyPrior::Pareto { shape, .. } => shape,
                _ => 1.5,
            };
            spec.energy = EnergyPrior::Pareto { x_min: parse(value)?, shape };
        }
        "pareto-shape" => {
            let x_min = match spec.energy {
                EnergyPrior::Pareto { x_min, .. } => x_min,
                _ => 0.01,
            };
            spec.energy = EnergyPrior::Pareto { x_min, shape: parse(value)? };
        }
        "family" => match value {
            "gamma" => spec.energy = EnergyPrior::Gamma { scale: 1.0, shape: 1.0 },
            "pareto" => spec.energy = EnergyPrior::default_pareto(),
            other => return Err(CliError::usage(format!("unknown family `{other}`"))),
        },
        other => return Err(CliError::usage(format!("unknown hyperparameter `{other}`"))),
    }
    Ok(())
}

fn build_grid(base: &PriorSpec, args: &SweepArgs) -> Result<Vec<PriorSpec>, CliError> {
    let mut specs = Vec::new();
    if !args.grid.is_empty() {
        let axes: Vec<(String, Vec<String>)> =
            args.grid.iter().map(|a| parse_grid_axis(a)).collect::<Result<_, _>>()?;
        let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (key, values) in &axes {
            let mut next = Vec::new();
            for combo in &combos {
                for value in values {
                    let mut c = combo.clone();
                    c.push((key.clone(), value.clone()));
                    next.push(c);
                }
            }
            combos = next;
        }
        for combo in combos {
            let mut spec = *base;
            for (key, value) in &combo {
                apply_prior_key(&mut spec, key, value)?;
            }
            specs.push(spec);
        }
    }
    for cell in &args.cell {
        let mut spec = *base;
        for assign in cell.split(',') {
            let (key, value) = assign
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("cell entry `{assign}` is not KEY=V")))?;
            apply_prior_key(&mut spec, key.trim(), value.trim())?;
        }
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(CliError::usage("the sweep grid is empty; pass --grid or --cell"));
    }
    Ok(specs)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_config(args.mcmc.config.as_deref())?;
    let base = resolve_priors(&args.priors, &file)?;
    let cfg = resolve_mcmc(&args.mcmc, &file, &base)?;
    let grid = build_grid(&base, &args)?;
    let dataset = apply_rho(load_dataset(&args.data)?, &args.schedule, &file)?;
    let schedule = resolve_schedule(&args.schedule, &file, &dataset, cfg.c0)?;
    let table = sensitivity_sweep(&dataset, &schedule, &grid, &cfg)?;

    let mut out = String::new();
    let _ = writeln!(out, "telefit-sweep-table v1");
    let _ = writeln!(
        out,
        "# data = {}; times = {:?}; m = {}; seed = {}; cells = {}",
        args.data.display(),
        schedule.times(),
        cfg.m,
        cfg.seed,
        table.cells.len()
    );
    let _ = writeln!(out, "# cell seed label | param mode mean ci_low ci_high");
    for cell in &table.cells {
        match &cell.outcome {
            Ok(report) => {
                for (name, s) in [
                    ("a1", &report.summaries.a1),
                    ("e1", &report.summaries.e1),
                    ("a2", &report.summaries.a2),
                    ("c", &report.summaries.c),
                ] {
                    let _ = writeln!(
                        out,
                        "{} {} {} | {name} {} {} {} {}",
                        cell.index, cell.seed, cell.label, s.mode, s.mean, s.ci_low, s.ci_high
                    );
                }
                if let Some(dir) = &args.hist_dir {
                    std::fs::create_dir_all(dir).map_err(CoreError::from)?;
                    for (name, draws) in [
                        ("a1", report.posterior.a1()),
                        ("e1", report.posterior.e1()),
                        ("a2", report.posterior.a2()),
                        ("c", report.posterior.c()),
                    ] {
                        let path = dir.join(format!("cell{}_{name}.hist", cell.index));
                        let mut buf = format!(
                            "# {name} histogram; cell {} seed {} ({})\n",
                            cell.index, cell.seed, cell.label
                        )
                        .into_bytes();
                        write_histogram(&mut buf, draws, 50)?;
                        std::fs::write(path, buf).map_err(CoreError::from)?;
                    }
                }
            }
            Err(message) => {
                let _ = writeln!(
                    out,
                    "{} {} {} | FAILED {message}",
                    cell.index, cell.seed, cell.label
                );
            }
        }
    }
    std::fs::write(&args.out, out).map_err(CoreError::from)?;
    println!("sweep: {} cells -> {}", table.cells.len(), args.out.display());
    if table.all_failed() {
        return Err(CliError {
            kind: ExitKind::Sampler,
            message: "every sweep cell failed".to_string(),
        });
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), CliError> {
    let report = load_report(&args.report)?;
    if args.bins < 2 {
        return Err(CliError::usage("--bins must be at least 2"));
    }
    if !(args.ci > 0.0 && args.ci < 1.0) {
        return Err(CliError::usage("--ci must lie in (0, 1)"));
    }
    println!(
        "report: {} ({} particles, seed {})",
        args.report.display(),
        report.posterior.len(),
        report.config.seed
    );
    println!("param     mode        mean        {:.0}% CI", 100.0 * args.ci);
    for (name, draws) in [
        ("A1", report.posterior.a1()),
        ("E1", report.posterior.e1()),
        ("A2", report.posterior.a2()),
        ("c", report.posterior.c()),
    ] {
        let s = summarize(draws, args.bins, args.ci)?;
        println!("{name:<8}{:<12.5}{:<12.5}[{:.5}, {:.5}]", s.mode, s.mean, s.ci_low, s.ci_high);
        if let Some(dir) = &args.hist_dir {
            std::fs::create_dir_all(dir).map_err(CoreError::from)?;
            let mut buf = format!(
                "# {name} histogram of {} (seed {}, {} bins)\n",
                args.report.display(),
                report.config.seed,
                args.bins
            )
            .into_bytes();
            write_histogram(&mut buf, draws, args.bins)?;
            std::fs::write(dir.join(format!("{}.hist", name.to_lowercase())), buf)
                .map_err(CoreError::from)?;
        }
    }
    Ok(())
}
