mod config;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use aoi_bandit::bounds::{evaluate_bounds, BoundParams, DEFAULT_SEARCH_CAP};
use aoi_bandit::instance::{builtin, classify_arms, load_instance, BanditInstance, InstanceSummary};
use aoi_bandit::report::{bounds_csv, pulls_csv, regret_csv, write_atomic};
use aoi_bandit::simulator::{run_ensemble, BaselineMode, SimConfig};
use aoi_bandit::{ExactInstance, ExactSummary, Instance, Scalar, Summary};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{ExperimentConfig, FileConfig, FlagOverrides};

/// Overrides the number of simulation worker threads.
const WORKERS_ENV: &str = "AOI_BANDIT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "aoi-bandit", version, about = "Correlated-bandit AoI scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the derived quantities of an instance as JSON.
    Inspect(InspectArgs),
    /// Run a Monte-Carlo ensemble and write regret and pull-count CSVs.
    Simulate(SimulateArgs),
    /// Evaluate the regret bounds over a horizon grid.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Builtin name (i1, i2) or path to a JSON instance.
    #[arg(value_name = "INSTANCE", conflicts_with = "instance")]
    positional: Option<String>,
    #[arg(long)]
    instance: Option<String>,
    /// Also write summary.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Comma-separated policy labels, e.g. `ucb,cts_beta_aoi`.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    /// Comma-separated checkpoint slots; log-spaced when omitted.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// `coupled_oracle` (default) or `analytic`.
    #[arg(long)]
    baseline: Option<BaselineMode>,
    /// Render regret.svg next to regret.csv.
    #[arg(long)]
    plot: bool,
    /// TOML or JSON experiment file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named experiment preset (`paper-iv`: both builtins, every policy).
    #[arg(long)]
    preset: Option<String>,
    /// Posterior variance scale for the Gaussian samplers.
    #[arg(long)]
    beta: Option<f64>,
    /// Constant `c` of the AoI-aware threshold `c ln(t + 1)`.
    #[arg(long)]
    aoi_threshold_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated horizons.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = aoi_bandit::policies::DEFAULT_BETA)]
    beta: f64,
    /// `ARM=VALUE` (1-based arm), once per strictly competitive arm.
    #[arg(long = "divergence", value_parser = parse_divergence)]
    divergences: Vec<(usize, f64)>,
    /// Which bounds to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "lower,upper")]
    kinds: Vec<BoundKind>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
    search_cap: u64,
}

fn parse_divergence(text: &str) -> std::result::Result<(usize, f64), String> {
    let (arm, value) = text.split_once('=').ok_or("expected ARM=VALUE")?;
    let arm: usize = arm.trim().parse().map_err(|e| format!("arm: {e}"))?;
    if arm == 0 {
        return Err("arms are numbered from 1".into());
    }
    let value: f64 = value.trim().parse().map_err(|e| format!("value: {e}"))?;
    Ok((arm - 1, value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Inspect(args) => inspect(args),
        Command::Simulate(args) => simulate(args),
        Command::Bounds(args) => bounds(args),
    }
}

fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Resolves a builtin name or a JSON file path.
fn load<T: Scalar>(reference: &str) -> Result<BanditInstance<T>> {
    if let Some(inst) = builtin(reference) {
        return Ok(inst);
    }
    let text = std::fs::read_to_string(reference).with_context(|| format!("cannot read instance {reference:?}"))?;
    load_instance(&text).with_context(|| format!("invalid instance {reference:?}"))
}

fn short_name(reference: &str) -> String {
    Path::new(reference)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| reference.to_string())
}

/// Inspect output. Arms are 1-based.
#[derive(Debug, Serialize)]
struct InspectDocument {
    name: String,
    num_arms: usize,
    num_states: usize,
    means: Vec<f64>,
    optimal_arm: usize,
    optimal_mean: f64,
    gaps: Vec<f64>,
    /// Row `l`, column `k`: expected pseudo-reward of arm `l` w.r.t. arm `k`.
    expected_pseudo: Vec<Vec<f64>>,
    pseudo_gaps: Vec<f64>,
    competitive: Vec<usize>,
    strictly_competitive: Vec<usize>,
    non_competitive: Vec<usize>,
    competitive_count: usize,
    mu_min: f64,
}

impl InspectDocument {
    fn new<T: Scalar, U: Scalar>(inst: &BanditInstance<T>, s: &InstanceSummary<U>) -> Self {
        let f = |v: &[U]| v.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        let one_based = |v: &[usize]| v.iter().map(|k| k + 1).collect::<Vec<_>>();
        Self {
            name: inst.name().to_string(),
            num_arms: s.num_arms,
            num_states: inst.num_states(),
            means: f(&s.means),
            optimal_arm: s.optimal_arm + 1,
            optimal_mean: s.optimal_mean.as_f64(),
            gaps: f(&s.gaps),
            expected_pseudo: s.expected_pseudo.iter().map(|row| f(row)).collect(),
            pseudo_gaps: f(&s.pseudo_gaps),
            competitive: one_based(&s.competitive_suboptimal),
            strictly_competitive: one_based(&s.strictly_competitive),
            non_competitive: one_based(&s.non_competitive()),
            competitive_count: s.competitive_count,
            mu_min: s.mu_min.as_f64(),
        }
    }
}

fn inspect(args: InspectArgs) -> Result<()> {
    let reference = args
        .positional
        .or(args.instance)
        .context("no instance given (positional argument or --instance)")?;
    let inst: Instance = load(&reference)?;
    let float = classify_arms(&inst)?;
    let doc = match exact_summary(&reference, &float) {
        Some(exact) => InspectDocument::new(&inst, &exact),
        None => InspectDocument::new(&inst, &float),
    };
    let json = serde_json::to_string_pretty(&doc)?;
    println!("{json}");
    if let Some(dir) = args.out_dir {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomic(&dir.join("summary.json"), format!("{json}\n").as_bytes())?;
    }
    Ok(())
}

/// Classification in exact rationals, so published values print without
/// rounding noise. Decimals with many digits can overflow `i64` ratios;
/// then (or on any disagreement with the float result) this returns `None`.
fn exact_summary(reference: &str, float: &Summary) -> Option<ExactSummary> {
    let reference = reference.to_string();
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let exact = std::panic::catch_unwind(move || {
        let inst: ExactInstance = load(&reference).ok()?;
        classify_arms(&inst).ok()
    });
    std::panic::set_hook(hook);
    let exact = exact.ok()??;
    let close = |a: &[aoi_bandit::Rational], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x.as_f64() - y).abs() < 1e-9);
    let agrees = exact.optimal_arm == float.optimal_arm
        && exact.competitive_suboptimal == float.competitive_suboptimal
        && close(&exact.means, &float.means)
        && close(&exact.pseudo_gaps, &float.pseudo_gaps)
        && exact.expected_pseudo.iter().zip(&float.expected_pseudo).all(|(a, b)| close(a, b));
    agrees.then_some(exact)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let file = args.config.as_deref().map(FileConfig::load).transpose()?;
    let flags = FlagOverrides {
        preset: args.preset,
        instance: args.instance,
        out_dir: args.out_dir,
        seed: args.seed,
        horizon: args.horizon,
        runs: args.runs,
        checkpoints: args.checkpoints,
        baseline: args.baseline,
        plot: args.plot,
        policies: args.policies,
        beta: args.beta,
        aoi_threshold_c: args.aoi_threshold_c,
    };
    let cfg = ExperimentConfig::resolve(file, flags)?;
    let nested = cfg.instances.len() > 1;
    for reference in &cfg.instances {
        let inst: Instance = load(reference)?;
        let dir = if nested {
            cfg.out_dir.join(short_name(reference))
        } else {
            cfg.out_dir.clone()
        };
        simulate_one(&cfg, &inst, &dir)?;
    }
    Ok(())
}

fn simulate_one(cfg: &ExperimentConfig, inst: &Instance, dir: &Path) -> Result<()> {
    let mut sim = SimConfig::new(cfg.horizon, cfg.runs, cfg.seed, cfg.policies.clone());
    sim.baseline_mode = cfg.baseline;
    if let Some(points) = &cfg.checkpoints {
        sim = sim.with_checkpoints(points.clone());
    }
    sim.validate()?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let outcomes = run_ensemble(&sim, inst)?;
    let regret_path = dir.join("regret.csv");
    write_atomic(&regret_path, &regret_csv(&outcomes)?)
        .with_context(|| format!("writing {}", regret_path.display()))?;
    let pulls_path = dir.join("pulls.csv");
    write_atomic(&pulls_path, &pulls_csv(&outcomes)?).with_context(|| format!("writing {}", pulls_path.display()))?;
    eprintln!("{}: wrote {} and {}", inst.name(), regret_path.display(), pulls_path.display());

    if cfg.plot {
        let svg = dir.join("regret.svg");
        plot::render_regret_svg(&regret_path, &svg, inst.name())?;
        eprintln!("{}: wrote {}", inst.name(), svg.display());
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    if args.grid.is_empty() {
        bail!("--grid needs at least one horizon");
    }
    let inst: Instance = load(&args.instance)?;
    let summary = classify_arms(&inst)?;
    let mut params = BoundParams::new(args.alpha, args.m, args.beta);
    params.search_cap = args.search_cap;
    for (arm, value) in args.divergences {
        if arm >= summary.num_arms {
            bail!("divergence for arm {} but the instance has {} arms", arm + 1, summary.num_arms);
        }
        params = params.with_divergence(arm, value);
    }
    let include_lower = args.kinds.contains(&BoundKind::Lower);
    let mut grid = args.grid;
    grid.sort_unstable();
    grid.dedup();
    let report = evaluate_bounds(&summary, &params, &grid, include_lower)?;

    let mut bytes = bounds_csv(&report)?;
    if !args.kinds.contains(&BoundKind::Upper) {
        bytes = keep_kind(&bytes, "lower");
    }
    match args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("bounds.csv");
            write_atomic(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} (t0 = {}, tb = {})", path.display(), report.t0, report.tb);
        }
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(())
}

/// Drops every data row whose first field is not `kind`.
fn keep_kind(csv: &[u8], kind: &str) -> Vec<u8> {
    let text = String::from_utf8_lossy(csv);
    let mut lines = text.lines();
    let mut out = String::new();
    if let Some(header) = lines.next() {
        out.push_str(header);
        out.push('\n');
    }
    for line in lines.filter(|l| l.split(',').next() == Some(kind)) {
        out.push_str(line);
        out.push('\n');
    }
    out.into_bytes()
}
