//! Batch front end behind the `undersampling` binary.
//!
//! Every command writes into a hidden staging directory under `--out-dir`
//! and moves the files into place only after all of them were written, so a
//! failed or interrupted run leaves no partial data behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::choi::infidelity_series;
use crate::decoherence::g_analytic;
use crate::error::{Error, Result};
use crate::export;
use crate::grid::TimeGrid;
use crate::harness::{
    nonmark_vs_infidelity, run_repetition, run_sweep_with, ExperimentConfig, RunOptions, SweepRecord, DEFAULT_SWEEP,
};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::measures::{blp_measure, optimal_pair_distance, BlpConvention};
use crate::noise::{self, jump_count, NoiseKind, NoiseParams, NoiseTrajectory, OuInit};
use crate::seed::SeedSpec;
use crate::stats::Binning;
use crate::validate;

#[derive(Debug, Parser)]
#[command(
    name = "undersampling",
    version,
    about = "Non-Markovianity of undersampled dephasing channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample noise trajectories and report their empirical statistics.
    Noise(NoiseArgs),
    /// Run one undersampled experiment and dump its time series.
    Trajectory(TrajectoryArgs),
    /// Sweep the number of realizations over many repetitions.
    Sweep(SweepArgs),
    /// Run the analytic and oracle self-checks.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Rtn,
    Ou,
}

impl From<KindArg> for NoiseKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rtn => NoiseKind::Rtn,
            KindArg::Ou => NoiseKind::Ou,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKindArg {
    Rtn,
    Ou,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OuInitArg {
    Zero,
    Stationary,
}

impl From<OuInitArg> for OuInit {
    fn from(a: OuInitArg) -> Self {
        match a {
            OuInitArg::Zero => OuInit::ZeroStart,
            OuInitArg::Stationary => OuInit::StationaryDraw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    PaperLiteral,
    Conventional,
}

impl From<ConventionArg> for BlpConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PaperLiteral => BlpConvention::PaperLiteral,
            ConventionArg::Conventional => BlpConvention::Conventional,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NoiseFlags {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Switching (RTN) or relaxation (OU) rate in units of the coupling.
    #[arg(long, default_value_t = 4.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, value_enum, default_value_t = OuInitArg::Zero)]
    pub ou_init: OuInitArg,
    #[arg(long, default_value_t = 8.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
}

impl NoiseFlags {
    fn params(&self) -> NoiseParams {
        NoiseParams {
            kind: self.kind.into(),
            gamma: self.gamma,
            nu: self.nu,
            ou_init: self.ou_init.into(),
        }
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_max, self.dt)
    }
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub noise: NoiseFlags,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub repetition: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub noise: NoiseFlags,
    /// Number of noise realizations building the map.
    #[arg(short = 'N', long = "realizations", default_value_t = 16)]
    pub realizations: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub repetition: usize,
    #[arg(long, default_value_t = 1.0)]
    pub purity: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::PaperLiteral)]
    pub convention: ConventionArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// TOML sweep plan, or a manifest.json from an earlier sweep.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKindArg>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_enum)]
    pub ou_init: Option<OuInitArg>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comma-separated realization counts.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub purity: Option<f64>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Fixed histogram bin count instead of the Freedman-Diaconis rule.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Also write per-repetition CSVs.
    #[arg(long)]
    pub detail: bool,
    /// Emit one JSON progress object per completed cell on stdout.
    #[arg(long)]
    pub json_progress: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Experiments run by one `sweep` invocation, one per noise kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub experiments: Vec<ExperimentConfig>,
}

static STAGING_DIRS: Mutex<Vec<PathBuf>> = Mutex::new(Vec::new());

/// Installs a Ctrl-C handler that deletes in-flight staging directories
/// before exiting with status 130.
pub fn install_interrupt_cleanup() {
    let _ = ctrlc::set_handler(|| {
        if let Ok(dirs) = STAGING_DIRS.lock() {
            for d in dirs.iter() {
                let _ = fs::remove_dir_all(d);
            }
        }
        std::process::exit(130);
    });
}

/// Files of one run, staged until [`Outputs::commit`].
pub struct Outputs {
    dir: PathBuf,
    staging: PathBuf,
    files: Vec<String>,
    committed: bool,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let staging = dir.join(format!(".undersampling-staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;
        if let Ok(mut dirs) = STAGING_DIRS.lock() {
            dirs.push(staging.clone());
        }
        Ok(Outputs {
            dir: dir.to_path_buf(),
            staging,
            files: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, f: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> Result<()>) -> Result<()> {
        export::to_file(&self.staging.join(name), f)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(name, e)))
    }

    /// Writes the manifest and moves every file into the output directory.
    pub fn commit(mut self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.outputs = self.files.clone();
        let text = manifest.to_json()?;
        self.write_text(MANIFEST_FILE, &text)?;
        let mut moved = Vec::new();
        for name in &self.files {
            let to = self.dir.join(name);
            if let Err(e) = fs::rename(self.staging.join(name), &to) {
                for m in &moved {
                    let _ = fs::remove_file(m);
                }
                return Err(Error::io(to, e));
            }
            moved.push(to);
        }
        self.committed = true;
        Ok(manifest)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.staging);
        if let Ok(mut dirs) = STAGING_DIRS.lock() {
            dirs.retain(|d| d != &self.staging);
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Serialize(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRun {
    pub noise: NoiseParams,
    pub grid: TimeGrid,
    pub count: usize,
    pub master_seed: u64,
    pub repetition_index: u64,
}

/// Autocorrelation lags (in time units) reported for OU runs.
const OU_LAGS: [f64; 4] = [0.05, 0.1, 0.25, 0.5];

fn noise_report(run: &NoiseRun, trajs: &[NoiseTrajectory]) -> Result<serde_json::Value> {
    let grid = run.grid;
    Ok(match run.noise.kind {
        NoiseKind::Rtn => {
            let jumps = trajs.iter().map(jump_count).collect::<Result<Vec<_>>>()?;
            let counts: Vec<f64> = jumps.iter().map(|&j| j as f64).collect();
            json!({
                "kind": "rtn",
                "count": trajs.len(),
                "jump_counts": jumps,
                "mean_jumps": crate::stats::mean(&counts),
                "var_jumps": if counts.len() > 1 { crate::stats::std_dev(&counts).powi(2) } else { 0.0 },
                "expected_mean_jumps": run.noise.gamma * grid.t_max(),
                "flip_probability": run.noise.flip_probability(grid.dt()),
            })
        }
        NoiseKind::Ou => {
            let (mean_end, var_end) = noise::ensemble_moments(trajs, grid.n_steps());
            let nu2 = run.noise.nu * run.noise.nu;
            let lags: Vec<_> = OU_LAGS
                .iter()
                .map(|&tau| {
                    let lag = (tau / grid.dt()).round() as usize;
                    json!({
                        "tau": lag as f64 * grid.dt(),
                        "empirical": noise::lag_autocorrelation(trajs, lag),
                        "expected": (-2.0 * run.noise.gamma * lag as f64 * grid.dt()).exp(),
                    })
                })
                .collect();
            json!({
                "kind": "ou",
                "count": trajs.len(),
                "final_mean": mean_end / run.noise.nu,
                "final_variance": var_end / nu2,
                "predicted_stationary_variance": 1.0 / (1.0 - run.noise.gamma * grid.dt()),
                "autocorrelation": lags,
            })
        }
    })
}

pub fn cmd_noise(args: &NoiseArgs) -> Result<RunManifest> {
    let grid = args.noise.grid()?;
    let params = args.noise.params();
    params.validate_for(&grid)?;
    if args.count == 0 {
        return Err(Error::InvalidConfig("--count must be at least 1".into()));
    }
    let run = NoiseRun {
        noise: params,
        grid,
        count: args.count,
        master_seed: args.seed,
        repetition_index: args.repetition,
    };
    let trajs = (0..args.count as u64)
        .map(|k| noise::sample(&params, &grid, SeedSpec::new(args.seed, args.repetition, k)))
        .collect::<Result<Vec<_>>>()?;
    let report = noise_report(&run, &trajs)?;
    let mut out = Outputs::create(&args.out_dir)?;
    for (k, t) in trajs.iter().enumerate() {
        out.write(&format!("trajectory_{k:04}.csv"), |w| export::write_trajectory(w, t))?;
    }
    out.write_text("noise_stats.json", &to_json(&report)?)?;
    let mut manifest = RunManifest::new("noise", &run)?;
    manifest.results = report;
    out.commit(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRun {
    pub experiment: ExperimentConfig,
    pub repetition_index: usize,
}

pub fn cmd_trajectory(args: &TrajectoryArgs) -> Result<RunManifest> {
    let experiment = ExperimentConfig {
        noise: args.noise.params(),
        grid: args.noise.grid()?,
        n_realizations: args.realizations,
        n_repetitions: 1,
        master_seed: args.seed,
        purity_p: args.purity,
        blp_convention: args.convention.into(),
        n_sweep: None,
        binning: Binning::FreedmanDiaconis,
    };
    experiment.validate()?;
    let result = run_repetition(&experiment, args.repetition)?;
    let ensemble = g_analytic(&experiment.noise, &experiment.grid)?;
    let spec = experiment.initial_state();
    let distance = optimal_pair_distance(&result.g_n_series, spec)?;
    let baseline = optimal_pair_distance(&ensemble, spec)?;
    let baseline_blp = blp_measure(&baseline, experiment.blp_convention);
    debug_assert_eq!(infidelity_series(&ensemble, &result.g_n_series)?, result.infidelity);

    let mut out = Outputs::create(&args.out_dir)?;
    out.write("g_n.csv", |w| export::write_decoherence(w, &result.g_n_series))?;
    out.write("g_analytic.csv", |w| export::write_decoherence(w, &ensemble))?;
    out.write("distance.csv", |w| export::write_distance(w, &distance))?;
    out.write("distance_analytic.csv", |w| export::write_distance(w, &baseline))?;
    out.write("infidelity.csv", |w| export::write_infidelity(w, &result.infidelity))?;
    let run = TrajectoryRun {
        experiment,
        repetition_index: args.repetition,
    };
    let mut manifest = RunManifest::new("trajectory", &run)?;
    manifest.results = json!({
        "blp": result.blp.value,
        "blp_analytic": baseline_blp.value,
        "convention": result.blp.convention,
        "time_avg_infidelity": result.time_avg_infidelity,
    });
    out.commit(manifest)
}

/// Resolves the sweep plan from an optional config file plus flag overrides.
pub fn resolve_plan(args: &SweepArgs) -> Result<SweepPlan> {
    let mut plan = match &args.config {
        Some(path) => load_plan(path)?,
        None => {
            let mut base = ExperimentConfig::standard(NoiseKind::Rtn);
            base.n_sweep = Some(DEFAULT_SWEEP.to_vec());
            let mut ou = base.clone();
            ou.noise = NoiseParams::ou(base.noise.gamma, OuInit::ZeroStart);
            SweepPlan {
                experiments: vec![base, ou],
            }
        }
    };
    if args.config.is_none() && args.seed.is_none() {
        return Err(Error::InvalidConfig(
            "the master seed must be given explicitly (--seed or a config file)".into(),
        ));
    }
    if plan.experiments.is_empty() {
        return Err(Error::InvalidConfig("sweep plan has no experiments".into()));
    }
    if let Some(kind) = args.kind {
        let template = plan.experiments[0].clone();
        let with_kind = |kind: NoiseKind| {
            let existing = plan.experiments.iter().find(|e| e.noise.kind == kind);
            let mut e = existing.cloned().unwrap_or_else(|| template.clone());
            e.noise.kind = kind;
            e
        };
        plan.experiments = match kind {
            SweepKindArg::Rtn => vec![with_kind(NoiseKind::Rtn)],
            SweepKindArg::Ou => vec![with_kind(NoiseKind::Ou)],
            SweepKindArg::Both => vec![with_kind(NoiseKind::Rtn), with_kind(NoiseKind::Ou)],
        };
    }
    for e in &mut plan.experiments {
        if let Some(g) = args.gamma {
            e.noise.gamma = g;
        }
        if let Some(nu) = args.nu {
            e.noise.nu = nu;
        }
        if let Some(init) = args.ou_init {
            e.noise.ou_init = init.into();
        }
        if args.t_max.is_some() || args.dt.is_some() {
            e.grid = TimeGrid::new(args.t_max.unwrap_or(e.grid.t_max()), args.dt.unwrap_or(e.grid.dt()))?;
        }
        if let Some(s) = &args.sweep {
            e.n_sweep = Some(s.clone());
        }
        if let Some(r) = args.repetitions {
            e.n_repetitions = r;
        }
        if let Some(s) = args.seed {
            e.master_seed = s;
        }
        if let Some(p) = args.purity {
            e.purity_p = p;
        }
        if let Some(c) = args.convention {
            e.blp_convention = c.into();
        }
        if let Some(b) = args.bins {
            e.binning = Binning::Fixed(b);
        }
        if e.sweep().is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value of N".into()));
        }
        e.validate()?;
    }
    let mut kinds: Vec<_> = plan.experiments.iter().map(|e| e.noise.kind).collect();
    kinds.sort_by_key(|k| k.name());
    kinds.dedup();
    if kinds.len() != plan.experiments.len() {
        return Err(Error::InvalidConfig("each noise kind may appear only once".into()));
    }
    Ok(plan)
}

fn load_plan(path: &Path) -> Result<SweepPlan> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        if manifest.command != "sweep" {
            return Err(Error::InvalidConfig(format!(
                "{} records a `{}` run, not a sweep",
                path.display(),
                manifest.command
            )));
        }
        manifest.config_as()
    } else {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

fn progress_line(kind: NoiseKind, record: &SweepRecord, done: usize, total: usize, json_progress: bool) {
    eprintln!(
        "[{done}/{total}] {kind} N={}: mean BLP {:.6} (std {:.6}), time-averaged infidelity {:.6}",
        record.n_realizations, record.mean_blp, record.std_blp, record.time_avg_infidelity
    );
    if json_progress {
        let line = json!({
            "event": "cell",
            "noise": kind.name(),
            "n_realizations": record.n_realizations,
            "mean_blp": record.mean_blp,
            "time_avg_infidelity": record.time_avg_infidelity,
            "completed": done,
            "total": total,
        });
        println!("{line}");
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<RunManifest> {
    let plan = resolve_plan(args)?;
    let total: usize = plan.experiments.iter().map(|e| e.sweep().len()).sum();
    let options = RunOptions { workers: args.workers };
    let mut out = Outputs::create(&args.out_dir)?;
    let mut results = serde_json::Map::new();
    let mut done = 0;
    for e in &plan.experiments {
        let kind = e.noise.kind;
        let summary = run_sweep_with(e, options, |r| {
            done += 1;
            progress_line(kind, r, done, total, args.json_progress);
        })?;
        out.write(&format!("summary_{kind}.csv"), |w| export::write_summary(w, &summary))?;
        for r in &summary.records {
            let n = r.n_realizations;
            out.write(&format!("histogram_{kind}_n{n}.csv"), |w| {
                export::write_histogram(w, &r.histogram)
            })?;
            out.write(&format!("infidelity_{kind}_n{n}.csv"), |w| {
                export::write_infidelity(w, &r.mean_infidelity)
            })?;
            if args.detail {
                out.write(&format!("detail_{kind}_n{n}.csv"), |w| export::write_detail(w, r))?;
            }
        }
        let mut entry = serde_json::Map::new();
        if summary.records.len() >= 3 {
            let pairing = nonmark_vs_infidelity(&summary)?;
            out.write(&format!("nonmark_vs_infidelity_{kind}.csv"), |w| {
                export::write_pairing(w, &pairing)
            })?;
            entry.insert("rank_correlation".into(), json!(pairing.rank_correlation));
        }
        let violations: Vec<_> = summary
            .monotonicity_violations()
            .iter()
            .map(|v| json!({"n_low": v.n_low, "n_high": v.n_high, "within_noise": v.within_noise}))
            .collect();
        for v in summary.monotonicity_violations() {
            eprintln!(
                "warning: {kind} mean BLP rises from N={} to N={}{}",
                v.n_low,
                v.n_high,
                if v.within_noise { " (within 3 sigma)" } else { "" }
            );
        }
        entry.insert("monotonicity_violations".into(), json!(violations));
        results.insert(kind.name().into(), serde_json::Value::Object(entry));
    }
    let toml_text = toml::to_string(&plan).map_err(|e| Error::Serialize(e.to_string()))?;
    out.write_text("config.toml", &toml_text)?;
    let mut manifest = RunManifest::new("sweep", &plan)?;
    manifest.results = serde_json::Value::Object(results);
    out.commit(manifest)
}

/// Prints the self-check table; returns whether every check passed.
pub fn cmd_validate() -> Result<bool> {
    let checks = validate::run_checks()?;
    eprint!("{}", validate::format_table(&checks));
    Ok(checks.iter().all(|c| c.passed))
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Noise(a) => cmd_noise(a).map(|_| true),
        Command::Trajectory(a) => cmd_trajectory(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Validate => cmd_validate(),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
