//! Experiment runner: online loops, offline replays, metrics, sweeps and
//! CSV output.
//!
//! Repeat `i` of an experiment uses the seed `rng::repeat_seed(master, i)`
//! for every algorithm, so algorithms within a repeat see the same function
//! sequence. Runs execute in parallel (capped by `O2SSM_THREADS` when set)
//! and are reduced in a fixed order, so every output byte depends only on the
//! configuration.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::datasets::{self, InstanceSpec};
use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::oco::{PolicyKind, PolicyState, DEFAULT_ETA};
use crate::oracle::{second_stage_value, Evaluation, OracleConfig};
use crate::pipage;
use crate::relaxation::RelaxedReward;
use crate::rng;
use crate::wtp::{IntegralSet, WtpFunction};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "O2SSM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "raoco-oga")]
    RaocoOga,
    #[serde(rename = "raoco-ftrl-l2")]
    RaocoFtrlL2,
    #[serde(rename = "raoco-ftrl-h")]
    RaocoFtrlH,
    #[serde(rename = "1s-oga")]
    OneStageOga,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "ofln-rgr")]
    OflnRgr,
    #[serde(rename = "ofln-co")]
    OflnCo,
    #[serde(rename = "ofln-raoco")]
    OflnRaoco,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::RaocoOga,
        Algorithm::RaocoFtrlL2,
        Algorithm::RaocoFtrlH,
        Algorithm::OneStageOga,
        Algorithm::Random,
        Algorithm::OflnRgr,
        Algorithm::OflnCo,
        Algorithm::OflnRaoco,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::RaocoOga => "raoco-oga",
            Algorithm::RaocoFtrlL2 => "raoco-ftrl-l2",
            Algorithm::RaocoFtrlH => "raoco-ftrl-h",
            Algorithm::OneStageOga => "1s-oga",
            Algorithm::Random => "random",
            Algorithm::OflnRgr => "ofln-rgr",
            Algorithm::OflnCo => "ofln-co",
            Algorithm::OflnRaoco => "ofln-raoco",
        }
    }

    /// Whether the algorithm takes a learning rate.
    pub fn uses_eta(&self) -> bool {
        matches!(
            self,
            Algorithm::RaocoOga | Algorithm::RaocoFtrlL2 | Algorithm::RaocoFtrlH | Algorithm::OneStageOga
        )
    }

    fn policy(&self) -> Option<PolicyKind> {
        match self {
            Algorithm::RaocoOga | Algorithm::OneStageOga => Some(PolicyKind::Oga),
            Algorithm::RaocoFtrlL2 => Some(PolicyKind::FtrlL2),
            Algorithm::RaocoFtrlH => Some(PolicyKind::FtrlEntropy),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidConfig(format!("unknown algorithm {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// Generator size overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenOverrides {
    pub n: Option<usize>,
    pub ell: Option<usize>,
    pub k: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceSource {
    Coverage,
    TeamFormation,
    Influence,
    File(PathBuf),
}

impl InstanceSource {
    /// A generator name, or otherwise a path to an instance file.
    pub fn parse(s: &str) -> Self {
        match s {
            "coverage" => InstanceSource::Coverage,
            "team-formation" | "teamformation" => InstanceSource::TeamFormation,
            "influence" => InstanceSource::Influence,
            path => InstanceSource::File(PathBuf::from(path)),
        }
    }

    pub fn load(&self, gen_seed: u64, o: &GenOverrides) -> Result<InstanceSpec> {
        match self {
            InstanceSource::Coverage => {
                let mut p = datasets::CoverageParams::default();
                p.n = o.n.unwrap_or(p.n);
                p.ell = o.ell.unwrap_or(p.ell);
                p.k = o.k.unwrap_or(p.k);
                if let Some(t) = o.t {
                    p.cycles = t.div_ceil(p.ell.max(1));
                }
                let mut spec = datasets::gen_coverage(&p, gen_seed)?;
                if let Some(t) = o.t {
                    spec.sequence.truncate(t);
                    spec.t = spec.sequence.len();
                }
                Ok(spec)
            }
            InstanceSource::TeamFormation => {
                let mut p = datasets::TeamFormationParams::default();
                p.n = o.n.unwrap_or(p.n);
                p.ell = o.ell.unwrap_or(p.ell);
                p.k = o.k.unwrap_or(p.k);
                p.m = o.t.unwrap_or(p.m);
                datasets::gen_team_formation(&p, gen_seed)
            }
            InstanceSource::Influence => {
                if o.n.is_some() {
                    return Err(Error::InvalidConfig("the influence graph fixes n; supply a graph file instead".into()));
                }
                let mut p = datasets::InfluenceParams::default();
                p.ell = o.ell.unwrap_or(p.ell);
                p.k = o.k.unwrap_or(p.k);
                p.t = o.t.unwrap_or(p.t);
                datasets::gen_influence(datasets::KARATE_NODES, &datasets::KARATE_EDGES, &p, gen_seed)
            }
            InstanceSource::File(path) => {
                if *o != GenOverrides::default() {
                    return Err(Error::InvalidConfig("size overrides apply to generators only".into()));
                }
                datasets::load_instance(path)
            }
        }
    }
}

/// One online step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// Fractional decision `x̃_t` (online RAOCO variants only).
    pub x_frac: Option<Vec<f64>>,
    pub x: IntegralSet,
    pub reward: f64,
    /// `C_t = (1/t) Σ_{τ≤t} F_τ(x_τ)`.
    pub c_t: f64,
    pub mode: Evaluation,
    pub step_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub algo: Algorithm,
    pub eta: Option<f64>,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    /// `None` for a complete run, the failure otherwise.
    pub error: Option<String>,
}

impl RunRecord {
    fn new(algo: Algorithm, eta: Option<f64>, seed: u64, run_id: String) -> Self {
        Self { run_id, algo, eta, seed, steps: Vec::new(), error: None }
    }

    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// `C_T` of the last recorded step (0 for an empty run).
    pub fn final_ct(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.c_t)
    }

    fn push(&mut self, x_frac: Option<Vec<f64>>, x: IntegralSet, reward: f64, mode: Evaluation, started: Instant) {
        let t = self.steps.len() + 1;
        let prev = self.steps.last().map_or(0.0, |s| s.c_t);
        let c_t = prev + (reward - prev) / t as f64;
        let step_ms = started.elapsed().as_secs_f64() * 1e3;
        self.steps.push(StepRecord { t, x_frac, x, reward, c_t, mode, step_ms });
    }
}

/// Recompute `C_t` from the stored rewards.
pub fn prefix_means(rewards: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    rewards
        .iter()
        .enumerate()
        .map(|(i, r)| {
            acc += r;
            acc / (i + 1) as f64
        })
        .collect()
}

/// `α·OPT − Σ_t F_t(x_t)` where `opt_total` is the offline optimum of the
/// summed reward (average optimum times `T`).
pub fn compute_alpha_regret(record: &RunRecord, opt_total: f64, alpha: f64) -> f64 {
    alpha * opt_total - record.total_reward()
}

/// Everything a single run needs.
#[derive(Clone, Copy, Debug)]
pub struct RunContext<'a> {
    pub spec: &'a InstanceSpec,
    pub matroid: &'a Matroid,
    pub oracle: OracleConfig,
    pub co_epsilon: f64,
}

impl<'a> RunContext<'a> {
    fn functions(&self, sequence: &'a [usize]) -> Vec<&'a WtpFunction> {
        sequence.iter().map(|&s| &self.spec.pool[s]).collect()
    }
}

fn run_id(algo: Algorithm, eta: Option<f64>, repeat: usize) -> String {
    match eta {
        Some(e) => format!("{}:{}:{}", algo.name(), e, repeat),
        None => format!("{}::{}", algo.name(), repeat),
    }
}

/// Online RAOCO loop. Supergradients are taken with respect to
/// `gradient_matroid`; rewards always use the instance matroid.
pub fn run_raoco(
    ctx: &RunContext<'_>,
    policy: PolicyKind,
    gradient_matroid: &Matroid,
    algo: Algorithm,
    eta: f64,
    seed: u64,
    repeat: usize,
) -> RunRecord {
    let mut rec = RunRecord::new(algo, Some(eta), seed, run_id(algo, Some(eta), repeat));
    let spec = ctx.spec;
    let sequence = spec.run_sequence(seed);
    let fs = ctx.functions(&sequence);
    let mut state = match PolicyState::new(policy, spec.n, spec.ell as f64, eta) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let mut rounding = rng::stream(seed, 0);
    for (t, f) in fs.iter().enumerate() {
        let started = Instant::now();
        let step = (|| -> Result<()> {
            let xt = state.current().to_vec();
            let x = pipage::round(&xt, spec.ell, &mut rounding)?;
            let value = second_stage_value(f, ctx.matroid, &x, &ctx.oracle)?;
            let g = RelaxedReward::new(f, gradient_matroid)?.supergradient(&xt)?;
            state.step(&g.lambda)?;
            rec.push(Some(xt), x, value.value, value.mode, started);
            Ok(())
        })();
        if let Err(e) = step {
            rec.error = Some(Error::StepFailed { step: t + 1, source: Box::new(e) }.to_string());
            break;
        }
    }
    rec
}

/// Random, or an offline baseline replayed as a constant decision.
pub fn run_baseline(ctx: &RunContext<'_>, algo: Algorithm, seed: u64, repeat: usize) -> RunRecord {
    let mut rec = RunRecord::new(algo, None, seed, run_id(algo, None, repeat));
    let spec = ctx.spec;
    let sequence = spec.run_sequence(seed);
    let fs = ctx.functions(&sequence);
    let mut r = rng::stream(seed, 0);
    let fixed: Result<Option<IntegralSet>> = match algo {
        Algorithm::Random => Ok(None),
        Algorithm::OflnRgr => baselines::replacement_greedy(&fs, ctx.matroid, spec.ell).map(Some),
        Algorithm::OflnCo => {
            baselines::continuous_optimization(&fs, ctx.matroid, spec.ell, ctx.co_epsilon, &mut r).map(Some)
        }
        Algorithm::OflnRaoco => baselines::offline_raoco(&fs, ctx.matroid, spec.ell, &mut r).map(Some),
        other => Err(Error::Unsupported(format!("{other} is not a baseline"))),
    };
    let fixed = match fixed {
        Ok(v) => v,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    for (t, f) in fs.iter().enumerate() {
        let started = Instant::now();
        let step = (|| -> Result<()> {
            let x = match &fixed {
                Some(s) => s.clone(),
                None => baselines::random_policy(spec.n, spec.ell, &mut r)?,
            };
            let value = second_stage_value(f, ctx.matroid, &x, &ctx.oracle)?;
            rec.push(None, x, value.value, value.mode, started);
            Ok(())
        })();
        if let Err(e) = step {
            rec.error = Some(Error::StepFailed { step: t + 1, source: Box::new(e) }.to_string());
            break;
        }
    }
    rec
}

/// Dispatch on the algorithm.
pub fn run_algorithm(ctx: &RunContext<'_>, algo: Algorithm, eta: f64, seed: u64, repeat: usize) -> RunRecord {
    match algo.policy() {
        Some(policy) => {
            if algo == Algorithm::OneStageOga {
                match baselines::one_stage_matroid(ctx.spec.n, ctx.spec.ell) {
                    Ok(m) => run_raoco(ctx, policy, &m, algo, eta, seed, repeat),
                    Err(e) => {
                        let mut rec = RunRecord::new(algo, Some(eta), seed, run_id(algo, Some(eta), repeat));
                        rec.error = Some(e.to_string());
                        rec
                    }
                }
            } else {
                run_raoco(ctx, policy, ctx.matroid, algo, eta, seed, repeat)
            }
        }
        None => run_baseline(ctx, algo, seed, repeat),
    }
}

/// One algorithm with its learning rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoSpec {
    pub algo: Algorithm,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub gen_seed: u64,
    pub overrides: GenOverrides,
    pub algorithms: Vec<AlgoSpec>,
    pub repeats: usize,
    pub oracle: OracleConfig,
    pub out_dir: Option<PathBuf>,
    pub master_seed: u64,
    pub co_epsilon: f64,
    /// Fill the `step_ms` column. Off by default so outputs are reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSource::Coverage,
            gen_seed: 0,
            overrides: GenOverrides::default(),
            algorithms: vec![AlgoSpec { algo: Algorithm::RaocoOga, eta: DEFAULT_ETA }],
            repeats: 5,
            oracle: OracleConfig::default(),
            out_dir: None,
            master_seed: 0,
            co_epsilon: baselines::CO_EPSILON,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithm selected".into()));
        }
        for a in &self.algorithms {
            if a.algo.uses_eta() && !(a.eta > 0.0 && a.eta.is_finite()) {
                return Err(Error::InvalidConfig(format!("{}: learning rate must be positive", a.algo)));
            }
        }
        if !(self.co_epsilon > 0.0 && self.co_epsilon < 0.5) {
            return Err(Error::InvalidConfig("co_epsilon must lie in (0, 1/2)".into()));
        }
        self.oracle.validate()
    }

    pub fn load_instance(&self) -> Result<InstanceSpec> {
        self.instance.load(self.gen_seed, &self.overrides)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer")));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Run every (algorithm, repeat) pair of the configuration on `spec`.
pub fn run_experiment(cfg: &ExperimentConfig, spec: &InstanceSpec) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let matroid = spec.matroid()?;
    let ctx = RunContext { spec, matroid: &matroid, oracle: cfg.oracle, co_epsilon: cfg.co_epsilon };
    let jobs: Vec<(AlgoSpec, usize)> =
        cfg.algorithms.iter().flat_map(|a| (0..cfg.repeats).map(move |i| (*a, i))).collect();
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(a, i)| run_algorithm(&ctx, a.algo, a.eta, rng::repeat_seed(cfg.master_seed, i as u64), i))
            .collect()
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algo: Algorithm,
    pub eta: Option<f64>,
    pub mean_ct: f64,
    pub std_ct: f64,
    /// Number of completed runs the statistics use.
    pub repeats: usize,
    /// Highest mean among this algorithm's learning rates.
    pub best: bool,
}

/// Mean and sample standard deviation (`n − 1`; 0 for one sample).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-(algorithm, η) statistics of `C_T`, in first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Algorithm, Option<u64>)> = Vec::new();
    for r in records {
        let key = (r.algo, r.eta.map(f64::to_bits));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut rows: Vec<SummaryRow> = keys
        .iter()
        .map(|&(algo, eta_bits)| {
            let cts: Vec<f64> = records
                .iter()
                .filter(|r| r.algo == algo && r.eta.map(f64::to_bits) == eta_bits && r.is_valid())
                .map(|r| r.final_ct())
                .collect();
            let (mean_ct, std_ct) = mean_std(&cts);
            SummaryRow { algo, eta: eta_bits.map(f64::from_bits), mean_ct, std_ct, repeats: cts.len(), best: false }
        })
        .collect();
    for algo in Algorithm::ALL {
        let best = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.algo == algo && r.repeats > 0)
            .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
                Some((_, m)) if m >= r.mean_ct => acc,
                _ => Some((i, r.mean_ct)),
            });
        if let Some((i, _)) = best {
            rows[i].best = true;
        }
    }
    rows
}

/// Run the configured algorithms at every learning rate in `etas`.
/// Algorithms without a learning rate run once.
pub fn sweep(cfg: &ExperimentConfig, spec: &InstanceSpec, etas: &[f64]) -> Result<(Vec<RunRecord>, Vec<SummaryRow>)> {
    if etas.is_empty() {
        return Err(Error::InvalidConfig("the learning-rate list is empty".into()));
    }
    let mut algorithms = Vec::new();
    for a in &cfg.algorithms {
        if a.algo.uses_eta() {
            algorithms.extend(etas.iter().map(|&eta| AlgoSpec { algo: a.algo, eta }));
        } else if !algorithms.iter().any(|b: &AlgoSpec| b.algo == a.algo) {
            algorithms.push(*a);
        }
    }
    let expanded = ExperimentConfig { algorithms, ..cfg.clone() };
    let records = run_experiment(&expanded, spec)?;
    let summary = summarize(&records);
    Ok((records, summary))
}

fn fmt_eta(eta: Option<f64>) -> String {
    eta.map(|e| e.to_string()).unwrap_or_default()
}

pub const RUN_COLUMNS: [&str; 9] = ["run_id", "seed", "algo", "eta", "t", "reward", "C_t", "oracle_mode", "step_ms"];
pub const SUMMARY_COLUMNS: [&str; 5] = ["algo", "eta", "mean_CT", "std_CT", "repeats"];

pub fn write_runs_csv<W: Write>(out: W, records: &[RunRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS)?;
    for r in records {
        for s in &r.steps {
            w.write_record([
                r.run_id.clone(),
                r.seed.to_string(),
                r.algo.name().to_string(),
                fmt_eta(r.eta),
                s.t.to_string(),
                s.reward.to_string(),
                s.c_t.to_string(),
                s.mode.as_str().to_string(),
                if timing { format!("{:.3}", s.step_ms) } else { String::new() },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.algo.name().to_string(),
            fmt_eta(r.eta),
            r.mean_ct.to_string(),
            r.std_ct.to_string(),
            r.repeats.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `runs.csv` and `summary.csv` into `dir`.
pub fn write_outputs(dir: &Path, records: &[RunRecord], rows: &[SummaryRow], timing: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_runs_csv(std::fs::File::create(dir.join("runs.csv"))?, records, timing)?;
    write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?, rows)?;
    Ok(())
}
