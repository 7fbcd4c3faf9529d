//! Fast analytic and oracle self-checks, run by the `validate` subcommand.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choi::{choi_state, infidelity_closed_form, infidelity_oracle};
use crate::decoherence::{g_analytic_ou, g_analytic_rtn, ou_decoherence, rtn_decoherence};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::harness::{run_repetition, ExperimentConfig};
use crate::measures::{blp_measure, optimal_pair_distance, BlpConvention};
use crate::noise::{NoiseKind, NoiseParams};
use crate::state::{apply_dephasing_map, prepare_initial_state, InitialStateSpec, Sign, CHANNEL_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn analytic_values() -> Check {
    let rtn = rtn_decoherence(4.0, 1.0, 1.0);
    let ou = ou_decoherence(4.0, 1.0, 1.0);
    check(
        "analytic G at gamma=4, t=1",
        (rtn - 0.63039).abs() <= 1e-4 && (ou - 0.64564).abs() <= 1e-4,
        format!("rtn {rtn:.6}, ou {ou:.6}"),
    )
}

fn ensemble_markovianity() -> Result<Check> {
    let grid = TimeGrid::new(8.0, 0.001)?;
    let spec = InitialStateSpec::pure();
    let rtn = blp_measure(
        &optimal_pair_distance(&g_analytic_rtn(4.0, &grid)?, spec)?,
        BlpConvention::PaperLiteral,
    )
    .value;
    let ou = blp_measure(
        &optimal_pair_distance(&g_analytic_ou(4.0, &grid)?, spec)?,
        BlpConvention::PaperLiteral,
    )
    .value;
    Ok(check(
        "ensemble BLP = 0 at gamma=4",
        rtn.abs() <= 1e-9 && ou.abs() <= 1e-9,
        format!("rtn {rtn:e}, ou {ou:e}"),
    ))
}

fn slow_rtn_revival() -> Result<Check> {
    let grid = TimeGrid::new(8.0, 0.001)?;
    let d = optimal_pair_distance(&g_analytic_rtn(1.0, &grid)?, InitialStateSpec::pure())?;
    let blp = blp_measure(&d, BlpConvention::PaperLiteral).value;
    let onset = d.first_revival().unwrap_or(f64::NAN);
    Ok(check(
        "RTN gamma=1 revival onset",
        blp > 0.0 && (onset - 1.2092).abs() <= 0.002,
        format!("blp {blp:.6}, onset {onset:.4}"),
    ))
}

fn infidelity_routes(draws: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let g: f64 = rng.random_range(-1.0..=1.0);
        let g_n = Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
        worst = worst.max((infidelity_oracle(g, g_n)? - infidelity_closed_form(g, g_n)?).abs());
    }
    Ok(check(
        "closed-form infidelity vs Choi oracle",
        worst < 1e-10,
        format!("max deviation {worst:e} over {draws} pairs"),
    ))
}

fn channel_validity(repetitions: usize) -> Result<Check> {
    let mut failures = 0usize;
    for (k, kind) in [NoiseKind::Rtn, NoiseKind::Ou].into_iter().enumerate() {
        let mut cfg = ExperimentConfig::standard(kind);
        cfg.grid = TimeGrid::new(2.0, 0.01)?;
        cfg.n_realizations = 4;
        cfg.n_repetitions = repetitions;
        cfg.master_seed = 99 + k as u64;
        let spec = InitialStateSpec::new(0.98)?;
        let plus = prepare_initial_state(spec, Sign::Plus)?;
        for rep in 0..repetitions / 2 {
            let r = run_repetition(&cfg, rep)?;
            for g in r.g_n_series.values() {
                let ok = apply_dephasing_map(*g, &plus).is_ok_and(|s| s.check(CHANNEL_TOLERANCE).is_ok())
                    && choi_state(*g).is_ok_and(|c| c.check(CHANNEL_TOLERANCE).is_ok());
                failures += usize::from(!ok);
            }
        }
    }
    Ok(check(
        "channel and Choi validity",
        failures == 0,
        format!("{failures} invalid states over {repetitions} repetitions"),
    ))
}

fn single_realization_constant() -> Result<Check> {
    let mut cfg = ExperimentConfig::standard(NoiseKind::Rtn);
    cfg.grid = TimeGrid::new(8.0, 0.01)?;
    cfg.n_realizations = 1;
    cfg.purity_p = 0.98;
    let r = run_repetition(&cfg, 0)?;
    let d = optimal_pair_distance(&r.g_n_series, cfg.initial_state())?;
    let spread = d.values().iter().map(|v| (v - 0.98).abs()).fold(0.0, f64::max);
    Ok(check(
        "N=1 distance constant at p",
        spread == 0.0 && r.blp.value == 0.0,
        format!("max |D - p| = {spread:e}"),
    ))
}

fn flip_probability() -> Check {
    let p = NoiseParams::rtn(4.0).flip_probability(0.001);
    check(
        "RTN flip probability",
        (p - 0.003_992_010_656).abs() < 1e-12,
        format!("{p:.10}"),
    )
}

/// Runs every self-check. Errors only on internal failures; failed checks
/// are reported through [`Check::passed`].
pub fn run_checks() -> Result<Vec<Check>> {
    Ok(vec![
        analytic_values(),
        flip_probability(),
        ensemble_markovianity()?,
        slow_rtn_revival()?,
        infidelity_routes(10_000)?,
        channel_validity(1000)?,
        single_realization_constant()?,
    ])
}

/// Fixed-width pass/fail table.
pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{:<width$}  {}  {}\n",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        ));
    }
    out
}
