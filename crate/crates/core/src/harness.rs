//! Monte Carlo harness: repeated undersampled experiments, sweeps over the
//! number of realizations `N`, and the aggregate statistics built on them.
//!
//! Repetitions are grouped into fixed-size blocks. Blocks run in parallel,
//! each block is reduced sequentially, and block results are folded in block
//! order, so every aggregate is bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{infidelity_series, InfidelitySeries};
use crate::decoherence::{g_analytic, DecoherenceSeries, PhasorAccumulator};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measures::{blp_measure, optimal_pair_distance, BlpConvention, BlpMeasure};
use crate::noise::{sample, NoiseKind, NoiseParams, OuInit};
use crate::seed::SeedSpec;
use crate::state::InitialStateSpec;
use crate::stats::{self, Binning, Histogram};

/// Repetitions reduced sequentially inside one parallel task.
const BLOCK_SIZE: usize = 32;

/// Default sweep over the number of realizations.
pub const DEFAULT_SWEEP: [usize; 6] = [2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub noise: NoiseParams,
    pub grid: TimeGrid,
    pub n_realizations: usize,
    pub n_repetitions: usize,
    pub master_seed: u64,
    #[serde(default = "full_purity")]
    pub purity_p: f64,
    #[serde(default)]
    pub blp_convention: BlpConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sweep: Option<Vec<usize>>,
    #[serde(default)]
    pub binning: Binning,
}

fn full_purity() -> f64 {
    1.0
}

impl ExperimentConfig {
    /// Reference setup: `gamma = 4`, `t` in
    /// `[0, 8]` with `dt = 0.001`, 5000 repetitions and OU noise started
    /// from `B(0) = 0`.
    pub fn standard(kind: NoiseKind) -> Self {
        let noise = match kind {
            NoiseKind::Rtn => NoiseParams::rtn(4.0),
            NoiseKind::Ou => NoiseParams::ou(4.0, OuInit::ZeroStart),
        };
        ExperimentConfig {
            noise,
            grid: TimeGrid::new(8.0, 0.001).expect("static grid"),
            n_realizations: 16,
            n_repetitions: 5000,
            master_seed: 0,
            purity_p: 1.0,
            blp_convention: BlpConvention::PaperLiteral,
            n_sweep: Some(vec![2, 16, 64]),
            binning: Binning::FreedmanDiaconis,
        }
    }

    pub fn initial_state(&self) -> InitialStateSpec {
        InitialStateSpec {
            purity_p: self.purity_p,
        }
    }

    pub fn sweep(&self) -> &[usize] {
        self.n_sweep.as_deref().unwrap_or(&[])
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate_for(&self.grid)?;
        self.initial_state().validate()?;
        if self.n_realizations == 0 {
            return Err(Error::InvalidConfig("n_realizations must be at least 1".into()));
        }
        if self.n_repetitions == 0 {
            return Err(Error::InvalidConfig("n_repetitions must be at least 1".into()));
        }
        let limit = u32::MAX as usize;
        if self.n_repetitions > limit {
            return Err(Error::InvalidConfig("n_repetitions exceeds 2^32".into()));
        }
        let sweep = self.sweep();
        let max_n = sweep.iter().copied().chain([self.n_realizations]).max().unwrap_or(0);
        if max_n > limit {
            return Err(Error::InvalidConfig("realization count exceeds 2^32".into()));
        }
        if sweep.contains(&0) {
            return Err(Error::InvalidConfig("sweep values must be at least 1".into()));
        }
        let mut seen = sweep.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != sweep.len() {
            return Err(Error::InvalidConfig("sweep values must be distinct".into()));
        }
        Ok(())
    }
}

/// Outcome of one undersampled experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionResult {
    pub repetition_index: usize,
    pub g_n_series: DecoherenceSeries,
    pub blp: BlpMeasure,
    pub infidelity: InfidelitySeries,
    pub time_avg_infidelity: f64,
}

fn undersampled_series(
    noise: &NoiseParams,
    grid: &TimeGrid,
    n: usize,
    master_seed: u64,
    rep: usize,
) -> Result<DecoherenceSeries> {
    let mut acc = PhasorAccumulator::new(*grid);
    for k in 0..n {
        let traj = sample(noise, grid, SeedSpec::new(master_seed, rep as u64, k as u64))?;
        acc.add_noise(&traj)?;
    }
    acc.finish()
}

fn repetition(
    config: &ExperimentConfig,
    n: usize,
    ensemble: &DecoherenceSeries,
    rep: usize,
) -> Result<RepetitionResult> {
    let g_n = undersampled_series(&config.noise, &config.grid, n, config.master_seed, rep)?;
    let distance = optimal_pair_distance(&g_n, config.initial_state())?;
    let blp = blp_measure(&distance, config.blp_convention);
    let infidelity = infidelity_series(ensemble, &g_n)?;
    let time_avg_infidelity = infidelity.time_average();
    Ok(RepetitionResult {
        repetition_index: rep,
        g_n_series: g_n,
        blp,
        infidelity,
        time_avg_infidelity,
    })
}

/// Samples `config.n_realizations` trajectories for repetition `rep` and
/// derives the undersampled map's distance curve, BLP measure and infidelity
/// against the ensemble channel.
pub fn run_repetition(config: &ExperimentConfig, repetition_index: usize) -> Result<RepetitionResult> {
    config.validate()?;
    let ensemble = g_analytic(&config.noise, &config.grid)?;
    repetition(config, config.n_realizations, &ensemble, repetition_index)
}

/// Pointwise mean of the infidelity series of several repetitions.
pub fn averaged_infidelity_series(results: &[RepetitionResult]) -> Result<InfidelitySeries> {
    let first = results.first().ok_or(Error::Empty("repetition results"))?;
    let grid = *first.infidelity.grid();
    let mut acc = SeriesAccumulator::new(grid.len());
    for r in results {
        grid.ensure_matches(r.infidelity.grid())?;
        acc.add(r.infidelity.values());
    }
    InfidelitySeries::new(grid, acc.mean(results.len()))
}

/// Per-point Neumaier accumulator.
#[derive(Debug, Clone)]
struct SeriesAccumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl SeriesAccumulator {
    fn new(len: usize) -> Self {
        SeriesAccumulator {
            sum: vec![0.0; len],
            comp: vec![0.0; len],
        }
    }

    fn add(&mut self, values: &[f64]) {
        for ((s, c), &v) in self.sum.iter_mut().zip(&mut self.comp).zip(values) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }

    fn merge(&mut self, other: &SeriesAccumulator) {
        let totals: Vec<f64> = other.sum.iter().zip(&other.comp).map(|(s, c)| s + c).collect();
        self.add(&totals);
    }

    fn mean(&self, count: usize) -> Vec<f64> {
        self.sum
            .iter()
            .zip(&self.comp)
            .map(|(s, c)| (s + c) / count as f64)
            .collect()
    }
}

/// Runs `f` for every repetition index in fixed-size blocks on a pool with
/// `workers` threads (0 = rayon default), returning block results in order.
fn run_blocks<B, F>(n_repetitions: usize, workers: usize, f: F) -> Result<Vec<B>>
where
    B: Send,
    F: Fn(std::ops::Range<usize>) -> Result<B> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let n_blocks = n_repetitions.div_ceil(BLOCK_SIZE);
    pool.install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| f(b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(n_repetitions)))
            .collect()
    })
}

/// Aggregated statistics for one value of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n_realizations: usize,
    pub n_repetitions: usize,
    pub mean_blp: f64,
    pub std_blp: f64,
    pub blp_values: Vec<f64>,
    pub time_avg_values: Vec<f64>,
    pub histogram: Histogram,
    pub mean_infidelity: InfidelitySeries,
    pub time_avg_infidelity: f64,
}

impl SweepRecord {
    /// Standard error of the mean BLP measure.
    pub fn stderr_blp(&self) -> f64 {
        self.std_blp / (self.n_repetitions as f64).sqrt()
    }

    pub fn iqr_blp(&self) -> f64 {
        stats::interquartile_range(&self.blp_values)
    }

    /// Fraction of repetitions with a BLP measure strictly below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        self.blp_values.iter().filter(|&&v| v < threshold).count() as f64 / self.blp_values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub records: Vec<SweepRecord>,
}

/// A place where mean BLP grows with `N` between adjacent sweep points.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub n_low: usize,
    pub n_high: usize,
    /// True when the two 3-sigma intervals overlap, i.e. the violation is
    /// compatible with Monte Carlo noise.
    pub within_noise: bool,
}

impl SweepSummary {
    pub fn record(&self, n: usize) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.n_realizations == n)
    }

    /// Adjacent pairs (in increasing `N`) where the mean BLP measure
    /// increases.
    pub fn monotonicity_violations(&self) -> Vec<MonotonicityViolation> {
        let mut by_n: Vec<&SweepRecord> = self.records.iter().collect();
        by_n.sort_by_key(|r| r.n_realizations);
        by_n.windows(2)
            .filter(|w| w[1].mean_blp > w[0].mean_blp)
            .map(|w| MonotonicityViolation {
                n_low: w[0].n_realizations,
                n_high: w[1].n_realizations,
                within_noise: w[1].mean_blp - 3.0 * w[1].stderr_blp() <= w[0].mean_blp + 3.0 * w[0].stderr_blp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

struct BlockStats {
    blp: Vec<f64>,
    time_avg: Vec<f64>,
    infidelity: SeriesAccumulator,
}

fn sweep_cell(
    config: &ExperimentConfig,
    n: usize,
    ensemble: &DecoherenceSeries,
    options: RunOptions,
) -> Result<SweepRecord> {
    let len = config.grid.len();
    let blocks = run_blocks(config.n_repetitions, options.workers, |reps| {
        let mut block = BlockStats {
            blp: Vec::with_capacity(reps.len()),
            time_avg: Vec::with_capacity(reps.len()),
            infidelity: SeriesAccumulator::new(len),
        };
        for rep in reps {
            let r = repetition(config, n, ensemble, rep)?;
            block.blp.push(r.blp.value);
            block.time_avg.push(r.time_avg_infidelity);
            block.infidelity.add(r.infidelity.values());
        }
        Ok(block)
    })?;
    let mut blp_values = Vec::with_capacity(config.n_repetitions);
    let mut time_avg_values = Vec::with_capacity(config.n_repetitions);
    let mut infidelity = SeriesAccumulator::new(len);
    for b in &blocks {
        blp_values.extend_from_slice(&b.blp);
        time_avg_values.extend_from_slice(&b.time_avg);
        infidelity.merge(&b.infidelity);
    }
    Ok(SweepRecord {
        n_realizations: n,
        n_repetitions: config.n_repetitions,
        mean_blp: stats::mean(&blp_values),
        std_blp: stats::std_dev(&blp_values),
        histogram: stats::histogram(&blp_values, config.binning),
        mean_infidelity: InfidelitySeries::new(config.grid, infidelity.mean(config.n_repetitions))?,
        time_avg_infidelity: stats::mean(&time_avg_values),
        blp_values,
        time_avg_values,
    })
}

/// Runs every sweep cell with default options.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepSummary> {
    run_sweep_with(config, RunOptions::default(), |_| {})
}

/// Runs `n_repetitions` repetitions for each `N` in the sweep, in sweep
/// order, calling `progress` after each completed cell.
pub fn run_sweep_with(
    config: &ExperimentConfig,
    options: RunOptions,
    mut progress: impl FnMut(&SweepRecord),
) -> Result<SweepSummary> {
    config.validate()?;
    if config.sweep().is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value of N".into()));
    }
    let ensemble = g_analytic(&config.noise, &config.grid)?;
    let mut records = Vec::with_capacity(config.sweep().len());
    for &n in config.sweep() {
        let record = sweep_cell(config, n, &ensemble, options)?;
        progress(&record);
        records.push(record);
    }
    Ok(SweepSummary {
        config: config.clone(),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonMarkPoint {
    pub n_realizations: usize,
    pub time_avg_infidelity: f64,
    pub mean_blp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkVsInfidelity {
    pub points: Vec<NonMarkPoint>,
    /// Spearman correlation between time-averaged infidelity and mean BLP.
    pub rank_correlation: f64,
}

/// Pairs each sweep point's time-averaged infidelity with its mean BLP
/// measure, sorted by `N`.
pub fn nonmark_vs_infidelity(summary: &SweepSummary) -> Result<NonMarkVsInfidelity> {
    if summary.records.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 sweep points, got {}",
            summary.records.len()
        )));
    }
    let mut points: Vec<NonMarkPoint> = summary
        .records
        .iter()
        .map(|r| NonMarkPoint {
            n_realizations: r.n_realizations,
            time_avg_infidelity: r.time_avg_infidelity,
            mean_blp: r.mean_blp,
        })
        .collect();
    points.sort_by_key(|p| p.n_realizations);
    let x: Vec<f64> = points.iter().map(|p| p.time_avg_infidelity).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_blp).collect();
    Ok(NonMarkVsInfidelity {
        rank_correlation: stats::spearman(&x, &y),
        points,
    })
}

/// Grid maximum of the root-mean-square deviation `|G_N - G|` over
/// `n_repetitions` independent undersampled series.
pub fn decoherence_rms_error(
    noise: &NoiseParams,
    grid: &TimeGrid,
    n: usize,
    n_repetitions: usize,
    master_seed: u64,
    options: RunOptions,
) -> Result<f64> {
    noise.validate_for(grid)?;
    if n == 0 || n_repetitions == 0 {
        return Err(Error::InvalidConfig(
            "need at least one realization and repetition".into(),
        ));
    }
    let ensemble = g_analytic(noise, grid)?;
    let blocks = run_blocks(n_repetitions, options.workers, |reps| {
        let mut acc = SeriesAccumulator::new(grid.len());
        let mut sq = vec![0.0; grid.len()];
        for rep in reps {
            let g_n = undersampled_series(noise, grid, n, master_seed, rep)?;
            for ((s, a), b) in sq.iter_mut().zip(g_n.values()).zip(ensemble.values()) {
                *s = (a - b).norm_sqr();
            }
            acc.add(&sq);
        }
        Ok(acc)
    })?;
    let mut total = SeriesAccumulator::new(grid.len());
    for b in &blocks {
        total.merge(b);
    }
    Ok(total.mean(n_repetitions).into_iter().map(f64::sqrt).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: NoiseKind, n: usize, reps: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::standard(kind);
        c.grid = TimeGrid::new(4.0, 0.01).unwrap();
        c.n_realizations = n;
        c.n_repetitions = reps;
        c.master_seed = 17;
        c.n_sweep = Some(vec![1, 2, 8]);
        c
    }

    #[test]
    fn single_realization_is_markovian() {
        for kind in [NoiseKind::Rtn, NoiseKind::Ou] {
            let mut c = small(kind, 1, 3);
            c.purity_p = 0.98;
            for rep in 0..3 {
                let r = run_repetition(&c, rep).unwrap();
                assert_eq!(r.blp.value, 0.0);
                assert_eq!(r.infidelity.values()[0], 0.0);
            }
        }
    }

    #[test]
    fn repetition_outputs_are_in_range() {
        let c = small(NoiseKind::Rtn, 4, 1);
        let r = run_repetition(&c, 5).unwrap();
        assert_eq!(r.repetition_index, 5);
        assert!(r.blp.value >= 0.0);
        assert!(r.infidelity.values().iter().all(|d| (0.0..=1.0).contains(d)));
        assert!(r.time_avg_infidelity.is_finite());
    }

    #[test]
    fn single_repetition_sweep_equals_its_repetition() {
        let mut c = small(NoiseKind::Ou, 2, 1);
        c.n_sweep = Some(vec![2]);
        let s = run_sweep(&c).unwrap();
        let r = run_repetition(&c, 0).unwrap();
        let rec = &s.records[0];
        assert_eq!(rec.mean_blp, r.blp.value);
        assert_eq!(rec.std_blp, 0.0);
        assert_eq!(rec.time_avg_infidelity, r.time_avg_infidelity);
        assert_eq!(rec.mean_infidelity.values(), r.infidelity.values());
        assert_eq!(rec.histogram.total(), 1);
    }

    #[test]
    fn averaging_matches_sweep_cell() {
        let mut c = small(NoiseKind::Rtn, 8, 40);
        c.n_sweep = Some(vec![8]);
        let results: Vec<_> = (0..40).map(|r| run_repetition(&c, r).unwrap()).collect();
        let avg = averaged_infidelity_series(&results).unwrap();
        let s = run_sweep(&c).unwrap();
        for (a, b) in avg.values().iter().zip(s.records[0].mean_infidelity.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(avg.values()[0], 0.0);
        assert_eq!(
            averaged_infidelity_series(&results[..1]).unwrap(),
            results[0].infidelity
        );
        assert!(averaged_infidelity_series(&[]).is_err());
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let c = small(NoiseKind::Ou, 2, 70);
        let one = run_sweep_with(&c, RunOptions { workers: 1 }, |_| {}).unwrap();
        let many = run_sweep_with(&c, RunOptions { workers: 5 }, |_| {}).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn summary_invariants() {
        let s = run_sweep(&small(NoiseKind::Rtn, 2, 50)).unwrap();
        assert_eq!(
            s.records.iter().map(|r| r.n_realizations).collect::<Vec<_>>(),
            vec![1, 2, 8]
        );
        for r in &s.records {
            let lo = r.blp_values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.blp_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo <= r.mean_blp && r.mean_blp <= hi);
            assert_eq!(r.histogram.total(), 50);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small(NoiseKind::Rtn, 2, 10);
        c.n_repetitions = 0;
        assert!(c.validate().unwrap_err().is_usage());
        let mut c = small(NoiseKind::Rtn, 2, 10);
        c.n_sweep = Some(vec![2, 2]);
        assert!(c.validate().is_err());
        c.n_sweep = Some(vec![0, 2]);
        assert!(c.validate().is_err());
        c.n_sweep = Some(vec![]);
        assert!(run_sweep(&c).is_err());
        let mut c = small(NoiseKind::Rtn, 2, 10);
        c.purity_p = 1.5;
        assert!(matches!(c.validate(), Err(Error::InvalidPurity(_))));
    }

    #[test]
    fn pairing_needs_three_points() {
        let mut c = small(NoiseKind::Rtn, 2, 4);
        c.n_sweep = Some(vec![2, 4]);
        let s = run_sweep(&c).unwrap();
        assert!(nonmark_vs_infidelity(&s).is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = ExperimentConfig::standard(NoiseKind::Ou);
        let text = toml::to_string(&c).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
