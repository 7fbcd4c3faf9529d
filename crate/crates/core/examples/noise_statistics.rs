//! Samples RTN and OU trajectories and compares their moments with theory.
//!
//! cargo run --release --example noise_statistics

use undersampling::noise::{ensemble_moments, jump_count, lag_autocorrelation, sample};
use undersampling::{NoiseParams, OuInit, Result, SeedSpec, TimeGrid};

fn main() -> Result<()> {
    let grid = TimeGrid::new(8.0, 0.001)?;
    let gamma = 4.0;

    let rtn = NoiseParams::rtn(gamma);
    let jumps = (0..2000)
        .map(|k| jump_count(&sample(&rtn, &grid, SeedSpec::new(1, 0, k))?))
        .collect::<Result<Vec<_>>>()?;
    let mean = jumps.iter().sum::<usize>() as f64 / jumps.len() as f64;
    println!(
        "RTN jumps on [0, 8]: mean {mean:.3}, Poisson {:.3}",
        gamma * grid.t_max()
    );

    let ou = NoiseParams::ou(gamma, OuInit::StationaryDraw);
    let trajs = (0..2000)
        .map(|k| sample(&ou, &grid, SeedSpec::new(2, 0, k)))
        .collect::<Result<Vec<_>>>()?;
    let (m, var) = ensemble_moments(&trajs, grid.n_steps());
    println!(
        "OU at t = 8: mean {m:.4}, variance {var:.4} (fixed point {:.4})",
        1.0 / (1.0 - gamma * grid.dt())
    );
    for lag in [50, 100, 250] {
        let tau = lag as f64 * grid.dt();
        println!(
            "  C({tau}) = {:.4}, exp(-2 gamma tau) = {:.4}",
            lag_autocorrelation(&trajs, lag),
            (-2.0 * gamma * tau).exp()
        );
    }
    Ok(())
}
