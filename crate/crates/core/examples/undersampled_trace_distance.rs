//! A single undersampled map: finite-N decoherence, trace distance and its
//! spurious revivals, for N in {2, 16, 64}.
//!
//! cargo run --release --example undersampled_trace_distance

use undersampling::decoherence::{accumulate_phase, g_analytic, g_undersampled};
use undersampling::measures::{blp_measure, optimal_pair_distance, BlpConvention};
use undersampling::noise::sample;
use undersampling::state::InitialStateSpec;
use undersampling::{NoiseParams, Result, SeedSpec, TimeGrid};

fn main() -> Result<()> {
    let grid = TimeGrid::new(8.0, 0.001)?;
    let noise = NoiseParams::rtn(4.0);
    let spec = InitialStateSpec::new(0.98)?;
    let ensemble = optimal_pair_distance(&g_analytic(&noise, &grid)?, spec)?;
    println!(
        "ensemble BLP: {}",
        blp_measure(&ensemble, BlpConvention::PaperLiteral).value
    );

    for n in [2u64, 16, 64] {
        let phases = (0..n)
            .map(|k| Ok(accumulate_phase(&sample(&noise, &grid, SeedSpec::new(3, 0, k))?)))
            .collect::<Result<Vec<_>>>()?;
        let g_n = g_undersampled(&phases)?;
        let d = optimal_pair_distance(&g_n, spec)?;
        let end = g_n.values()[grid.n_steps()];
        println!(
            "N = {n:>2}: BLP {:.4}, G_N(8) = {:.4}{:+.4}i, D(8) = {:.4}",
            blp_measure(&d, BlpConvention::PaperLiteral).value,
            end.re,
            end.im,
            d.values()[grid.n_steps()]
        );
    }
    Ok(())
}
