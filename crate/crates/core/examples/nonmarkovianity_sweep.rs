//! Averaged non-Markovianity and infidelity against the number of
//! realizations, with the rank correlation between the two.
//!
//! cargo run --release --example nonmarkovianity_sweep -- [rtn|ou] [repetitions]

use undersampling::harness::{nonmark_vs_infidelity, run_sweep_with, ExperimentConfig, RunOptions, DEFAULT_SWEEP};
use undersampling::{NoiseKind, Result, TimeGrid};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("rtn") => NoiseKind::Rtn,
        _ => NoiseKind::Ou,
    };
    let mut cfg = ExperimentConfig::standard(kind);
    cfg.grid = TimeGrid::new(8.0, 0.01)?;
    cfg.n_repetitions = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    cfg.n_sweep = Some(DEFAULT_SWEEP.to_vec());

    println!(
        "{:>4} {:>9} {:>9} {:>8} {:>10}",
        "N", "mean BLP", "stderr", "IQR", "avg delta"
    );
    let summary = run_sweep_with(&cfg, RunOptions::default(), |r| {
        println!(
            "{:>4} {:>9.4} {:>9.4} {:>8.4} {:>10.5}",
            r.n_realizations,
            r.mean_blp,
            r.stderr_blp(),
            r.iqr_blp(),
            r.time_avg_infidelity
        );
    })?;
    let pairing = nonmark_vs_infidelity(&summary)?;
    println!("rank correlation: {:.3}", pairing.rank_correlation);
    for v in summary.monotonicity_violations() {
        println!(
            "non-monotone between N = {} and {} (within noise: {})",
            v.n_low, v.n_high, v.within_noise
        );
    }
    Ok(())
}
