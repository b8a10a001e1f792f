//! `raoco` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use raoco::datasets::{save_instance, InstanceSpec};
use raoco::guarantees;
use raoco::harness::{self, AlgoSpec, Algorithm, ExperimentConfig, GenOverrides, InstanceSource, SummaryRow};
use raoco::oco::DEFAULT_ETA;
use raoco::oracle::{self, OracleConfig, OracleMode};

#[derive(Parser)]
#[command(name = "raoco", version, about = "Online two-stage submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms on an instance and write per-step CSV.
    Run(RunArgs),
    /// Run algorithms over a list of learning rates.
    Sweep(SweepArgs),
    /// Offline optimum of an instance.
    Opt(OptArgs),
    /// Print approximation constants.
    Guarantees(GuaranteeArgs),
    /// Write a generated instance as JSON.
    Gen(GenArgs),
}

#[derive(Args, Clone, Default)]
struct InstanceArgs {
    /// Generator name (coverage, team-formation, influence) or instance file.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    gen_seed: Option<u64>,
    /// Override the generator's ground-set size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Override the generator's horizon.
    #[arg(long = "T")]
    t: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithms, comma separated; `name=eta` sets a per-algorithm rate.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    oracle: Option<OracleMode>,
    #[arg(long)]
    exact_budget: Option<u64>,
    #[arg(long)]
    co_epsilon: Option<f64>,
    /// Record per-step wall time in the step_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long, value_delimiter = ',')]
    etas: Vec<f64>,
}

#[derive(Args)]
struct OptArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solve the fractional relaxation instead of enumerating.
    #[arg(long)]
    fractional: bool,
    #[arg(long)]
    exact_budget: Option<u64>,
}

#[derive(Args)]
struct GuaranteeArgs {
    #[arg(long)]
    k: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    instance: Option<String>,
    gen_seed: Option<u64>,
    n: Option<usize>,
    ell: Option<usize>,
    k: Option<usize>,
    #[serde(rename = "T")]
    t: Option<usize>,
    algo: Option<Vec<String>>,
    eta: Option<f64>,
    etas: Option<Vec<f64>>,
    repeats: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    oracle: Option<OracleMode>,
    exact_budget: Option<u64>,
    co_epsilon: Option<f64>,
    timing: Option<bool>,
}

fn parse_mode(s: &str) -> Result<OracleMode, String> {
    match s {
        "exact" => Ok(OracleMode::Exact),
        "greedy" => Ok(OracleMode::Greedy),
        "auto" => Ok(OracleMode::Auto),
        other => Err(format!("unknown oracle mode {other:?}; expected exact, greedy or auto")),
    }
}

fn read_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn instance_parts(a: &InstanceArgs, file: &FileConfig) -> Result<(InstanceSource, u64, GenOverrides)> {
    let name = a.instance.clone().or_else(|| file.instance.clone());
    let Some(name) = name else { bail!("no instance given; pass --instance or set `instance` in the config") };
    let overrides = GenOverrides {
        n: a.n.or(file.n),
        ell: a.ell.or(file.ell),
        k: a.k.or(file.k),
        t: a.t.or(file.t),
    };
    Ok((InstanceSource::parse(&name), a.gen_seed.or(file.gen_seed).unwrap_or(0), overrides))
}

fn parse_algos(list: &[String], eta: f64) -> Result<Vec<AlgoSpec>> {
    let mut out = Vec::new();
    for item in list {
        let (name, rate) = match item.split_once('=') {
            Some((n, r)) => (n.trim(), r.trim().parse::<f64>().with_context(|| format!("bad learning rate in {item:?}"))?),
            None => (item.trim(), eta),
        };
        out.push(AlgoSpec { algo: name.parse::<Algorithm>()?, eta: rate });
    }
    Ok(out)
}

fn experiment_config(a: &ExperimentArgs) -> Result<(ExperimentConfig, FileConfig)> {
    let file = read_config(a.config.as_deref())?;
    let (instance, gen_seed, overrides) = instance_parts(&a.instance, &file)?;
    let eta = a.eta.or(file.eta).unwrap_or(DEFAULT_ETA);
    let names = if !a.algo.is_empty() {
        a.algo.clone()
    } else {
        file.algo.clone().unwrap_or_else(|| vec![Algorithm::RaocoOga.name().to_string()])
    };
    let mut oracle = OracleConfig::default();
    oracle.mode = a.oracle.or(file.oracle).unwrap_or(oracle.mode);
    oracle.exact_budget = a.exact_budget.or(file.exact_budget).unwrap_or(oracle.exact_budget);
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        instance,
        gen_seed,
        overrides,
        algorithms: parse_algos(&names, eta)?,
        repeats: a.repeats.or(file.repeats).unwrap_or(defaults.repeats),
        oracle,
        out_dir: a.out.clone().or_else(|| file.out.clone()),
        master_seed: a.seed.or(file.seed).unwrap_or(defaults.master_seed),
        co_epsilon: a.co_epsilon.or(file.co_epsilon).unwrap_or(defaults.co_epsilon),
        timing: a.timing || file.timing.unwrap_or(false),
    };
    cfg.validate()?;
    Ok((cfg, file))
}

fn print_summary(rows: &[SummaryRow], mark_best: bool) {
    println!("{:<14} {:>10} {:>14} {:>12} {:>8}", "algo", "eta", "mean_CT", "std_CT", "repeats");
    for r in rows {
        let eta = r.eta.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        let mark = if mark_best && r.best && r.eta.is_some() { "  *best" } else { "" };
        println!("{:<14} {:>10} {:>14.6} {:>12.6} {:>8}{mark}", r.algo.name(), eta, r.mean_ct, r.std_ct, r.repeats);
    }
}

fn report_failures(records: &[harness::RunRecord]) {
    for r in records.iter().filter(|r| !r.is_valid()) {
        eprintln!("run {} failed: {}", r.run_id, r.error.as_deref().unwrap_or(""));
    }
}

fn emit(cfg: &ExperimentConfig, records: &[harness::RunRecord], rows: &[SummaryRow], mark_best: bool) -> Result<()> {
    report_failures(records);
    match &cfg.out_dir {
        Some(dir) => {
            harness::write_outputs(dir, records, rows, cfg.timing)?;
            print_summary(rows, mark_best);
        }
        None => {
            let stdout = std::io::stdout();
            harness::write_runs_csv(stdout.lock(), records, cfg.timing)?;
            let mut err = std::io::stderr().lock();
            harness::write_summary_csv(&mut err, rows)?;
            err.flush()?;
        }
    }
    if records.iter().all(|r| !r.is_valid()) {
        bail!("every run failed");
    }
    Ok(())
}

fn run(a: &RunArgs) -> Result<()> {
    let (cfg, _) = experiment_config(&a.exp)?;
    let spec = cfg.load_instance()?;
    let records = harness::run_experiment(&cfg, &spec)?;
    let rows = harness::summarize(&records);
    emit(&cfg, &records, &rows, false)
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let (cfg, file) = experiment_config(&a.exp)?;
    let etas = if !a.etas.is_empty() {
        a.etas.clone()
    } else {
        file.etas.unwrap_or_else(|| vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0])
    };
    let spec = cfg.load_instance()?;
    let (records, rows) = harness::sweep(&cfg, &spec, &etas)?;
    emit(&cfg, &records, &rows, true)
}

fn opt(a: &OptArgs) -> Result<()> {
    let file = read_config(a.config.as_deref())?;
    let (source, gen_seed, overrides) = instance_parts(&a.instance, &file)?;
    let spec: InstanceSpec = source.load(gen_seed, &overrides)?;
    let m = spec.matroid()?;
    let fs = spec.functions();
    if a.fractional {
        let v = oracle::offline_opt_fractional(&fs, &m, spec.ell)?;
        println!("fractional_opt {v}");
    } else {
        let mut cfg = OracleConfig::exact();
        cfg.exact_budget = a.exact_budget.or(file.exact_budget).unwrap_or(cfg.exact_budget);
        let o = oracle::offline_opt_integral(&fs, &m, spec.ell, &cfg)
            .context("exhaustive search failed; --fractional gives an upper bound")?;
        println!("integral_opt {}", o.value);
        println!("x {:?}", o.x.support());
    }
    Ok(())
}

fn print_guarantees(a: &GuaranteeArgs) -> Result<()> {
    if a.k == 0 {
        bail!("k must be at least 1");
    }
    let e = guarantees::one_minus_inv_e();
    println!("k                                 {}", a.k);
    println!("c_M uniform (1 - e^-k k^k / k!)   {:.10}", guarantees::c_uniform(a.k));
    println!("alpha uniform c_M (1 - 1/e)       {:.10}", guarantees::alpha_uniform(a.k));
    println!("c_M general matroid (1 - 1/e)     {e:.10}");
    println!("alpha general matroid (1 - 1/e)^2 {:.10}", guarantees::alpha_general());
    println!("matroid reference (1 - 1/e^2)/2   {:.10}", guarantees::matroid_reference());
    Ok(())
}

fn gen(a: &GenArgs) -> Result<()> {
    let (source, gen_seed, overrides) = instance_parts(&a.instance, &FileConfig::default())?;
    let spec = source.load(gen_seed, &overrides)?;
    save_instance(&spec, &a.out)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Opt(a) => opt(a),
        Command::Guarantees(a) => print_guarantees(a),
        Command::Gen(a) => gen(a),
    }
}
